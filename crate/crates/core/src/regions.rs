//! Exponent-region predicates over `x_i = 1/p_i`.
//!
//! Every predicate works on `f64` (with a boundary guard band) and on
//! `Ratio<i64>` (exact). Strict memberships report `Boundary` for float
//! margins within [`GUARD`] of zero, so ties never count as disagreements.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Float margins with `|margin| ≤ GUARD·(1 + scale)` are reported as boundary.
pub const GUARD: f64 = 1e-12;

/// Largest `n` for which subset enumeration is allowed.
pub const MAX_SUBSET_ARITY: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }

    /// `Some(inside)` unless the point is on the guard band.
    pub fn decided(self) -> Option<bool> {
        match self {
            Membership::Inside => Some(true),
            Membership::Outside => Some(false),
            Membership::Boundary => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Membership::Inside => "inside",
            Membership::Outside => "outside",
            Membership::Boundary => "boundary",
        }
    }
}

/// Arithmetic the predicates need; implemented for `f64` and `Ratio<i64>`.
pub trait RegionScalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Classifies `margin` for a strict (`margin > 0`) or non-strict
    /// (`margin ≥ 0`) inequality whose terms have magnitude about `scale`.
    fn classify(margin: &Self, scale: &Self, strict: bool) -> Membership;

    fn zero() -> Self {
        Self::from_ratio(0, 1)
    }
    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl RegionScalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn classify(margin: &f64, scale: &f64, _strict: bool) -> Membership {
        if margin.abs() <= GUARD * (1.0 + scale.abs()) {
            Membership::Boundary
        } else if *margin > 0.0 {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

impl RegionScalar for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn classify(margin: &Self, _scale: &Self, strict: bool) -> Membership {
        let zero = Ratio::from_integer(0);
        let inside = if strict { *margin > zero } else { *margin >= zero };
        if inside {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

fn max<T: RegionScalar>(a: T, b: T) -> T {
    if a >= b { a } else { b }
}

fn min<T: RegionScalar>(a: T, b: T) -> T {
    if a <= b { a } else { b }
}

/// `(1/p_1, …, 1/p_n)` with all coordinates positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint<T> {
    coords: Vec<T>,
}

impl<T: RegionScalar> ExponentPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::config("point", "need at least one coordinate"));
        }
        if coords.iter().any(|c| *c <= T::zero()) {
            return Err(Error::config("point", "coordinates 1/p_i must be positive"));
        }
        Ok(ExponentPoint { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// `1/p = Σ 1/p_i`.
    pub fn inv_p(&self) -> T {
        self.coords.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    /// `Σ_i max(x_i, 1/2)`.
    pub fn max_sum(&self) -> T {
        self.coords
            .iter()
            .cloned()
            .fold(T::zero(), |a, x| a + max(x, T::half()))
    }
}

impl ExponentPoint<f64> {
    /// Builds the point from the exponents `p_i` themselves.
    pub fn from_exponents(p: &[f64]) -> Result<Self> {
        if p.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::config("point", "exponents p_i must be positive"));
        }
        Self::new(p.iter().map(|v| 1.0 / v).collect())
    }
}

/// `Σ_i max(x_i, 1/2) < α`.
pub fn in_a<T: RegionScalar>(point: &ExponentPoint<T>, alpha: &T) -> Membership {
    let total = point.max_sum();
    T::classify(&(alpha.clone() - total.clone()), &total, true)
}

/// Brute force over all subsets `I`: `Σ_{i∈I}(x_i - 1/2) + n/2 < α`.
pub fn in_b_intersection<T: RegionScalar>(point: &ExponentPoint<T>, alpha: &T) -> Result<Membership> {
    let n = point.n();
    if n > MAX_SUBSET_ARITY {
        return Err(Error::config(
            "point",
            format!("n = {n} exceeds the subset enumeration limit {MAX_SUBSET_ARITY}"),
        ));
    }
    let base = T::from_ratio(n as i64, 2);
    let mut worst: Option<(T, T)> = None;
    for mask in 0u32..(1u32 << n) {
        let mut lhs = base.clone();
        for (i, x) in point.coords.iter().enumerate() {
            if mask & (1 << i) != 0 {
                lhs = lhs + (x.clone() - T::half());
            }
        }
        let margin = alpha.clone() - lhs.clone();
        if worst.as_ref().is_none_or(|w| margin < w.0) {
            worst = Some((margin, lhs));
        }
    }
    let (margin, scale) = worst.expect("at least the empty subset");
    Ok(T::classify(&margin, &scale, true))
}

/// `1/p - 1/2 < s/d + Σ_{i∈I}(1/p_i - 1/2)` for every subset `I`, the empty
/// one included. The binding subset is `{i : x_i < 1/2}`.
pub fn theorem_a_condition<T: RegionScalar>(point: &ExponentPoint<T>, s: &T, d: usize) -> Membership {
    let lhs = point.inv_p() - T::half();
    let slack = point
        .coords
        .iter()
        .cloned()
        .fold(T::zero(), |a, x| a + min(x - T::half(), T::zero()));
    let rhs = s.clone() / T::from_ratio(d as i64, 1) + slack;
    T::classify(&(rhs - lhs.clone()), &lhs, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility<T> {
    pub admissible: bool,
    /// A Sobolev order `s` meeting every requirement, when one exists.
    pub witness: Option<T>,
    pub reason: Option<String>,
}

/// Is there `s > nd/2` with `m ≤ (ρ - 1)s` and `Σ max(x_i, 1/2) < s/d`?
pub fn admissible_theorem21<T: RegionScalar>(
    point: &ExponentPoint<T>,
    rho: &T,
    delta: &T,
    order: &T,
    d: usize,
) -> Result<Admissibility<T>> {
    let (zero, one) = (T::zero(), T::from_ratio(1, 1));
    if *rho < zero || *rho > one {
        return Err(Error::config("rho", "must lie in [0, 1]"));
    }
    if *delta < zero || *delta >= one {
        return Err(Error::config("delta", "must lie in [0, 1)"));
    }
    if *order > zero {
        return Err(Error::config("order", "must be ≤ 0"));
    }
    if d == 0 {
        return Err(Error::config("d", "must be positive"));
    }
    let dim = T::from_ratio(d as i64, 1);
    let floor = T::from_ratio((point.n() * d) as i64, 2);
    let needed = dim.clone() * point.max_sum();
    if *rho == one {
        // Any s works for the order condition; take one past both lower bounds.
        let s = max(floor, needed) + one;
        return Ok(Admissibility {
            admissible: true,
            witness: Some(s),
            reason: None,
        });
    }
    let cap = -order.clone() / (one - rho.clone());
    if cap <= floor {
        return Ok(Admissibility {
            admissible: false,
            witness: None,
            reason: Some(format!(
                "-m/(1-ρ) = {} does not exceed nd/2 = {}",
                cap.to_f64(),
                floor.to_f64()
            )),
        });
    }
    match T::classify(&(cap.clone() - needed.clone()), &needed, true) {
        Membership::Inside => Ok(Admissibility {
            admissible: true,
            witness: Some(cap),
            reason: None,
        }),
        Membership::Outside => Ok(Admissibility {
            admissible: false,
            witness: None,
            reason: Some(format!(
                "Σ max(1/p_i, 1/2) = {} is not below -m/((1-ρ)d) = {}",
                point.max_sum().to_f64(),
                (cap / dim).to_f64()
            )),
        }),
        Membership::Boundary => Ok(Admissibility {
            admissible: false,
            witness: None,
            reason: Some("point lies on the region boundary".into()),
        }),
    }
}

/// `Σ_i max(1/p_i, 1/2) ≤ -m/d + min(1/p, 1/2)`.
pub fn kato_condition<T: RegionScalar>(point: &ExponentPoint<T>, order: &T, d: usize) -> Membership {
    let lhs = point.max_sum();
    let rhs = -order.clone() / T::from_ratio(d as i64, 1) + min(point.inv_p(), T::half());
    T::classify(&(rhs - lhs.clone()), &lhs, false)
}

//! Smooth radial cutoffs, the dyadic families built from them, and the
//! factored form of the multilinear band window.
//!
//! Every profile is built from one smooth step `S` on `[0, 1]`, the normalized
//! integral of `exp(-1/t - 1/(1-t))`. Plateaus and supports are exact: values
//! are `1.0` and `0.0` there, not merely close.
//!
//! Scalar family on `ℝ^d`: `φ̂` has plateau 1 and support 2, `ψ̂(ξ) = φ̂(ξ) - φ̂(2ξ)`
//! lives on `1/2 ≤ |ξ| ≤ 2`. Multilinear family on `(ℝ^d)^n`: `Φ̂` has plateau 1/2
//! and support 1, and `Ψ̂ = Φ̂(·/2) - Φ̂(·)` lives on `1/2 ≤ |ξ⃗| ≤ 2`, so that
//! `Φ̂ + Σ_{j≥0} Ψ̂(2^{-j}·) = 1`. (Writing `Φ̂(·) - Φ̂(2·)` instead would shrink
//! the support to `[1/4, 1]` and double-count the annulus next to `Φ̂`.)

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, SampledFunction};

const TABLE_INTERVALS: usize = 4096;

/// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn step_density(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / t - 1.0 / (1.0 - t)).exp()
    }
}

/// Tabulated smooth step with monotone cubic Hermite interpolation.
struct SmoothStep {
    values: Vec<f64>,
    /// Limited end slopes (in table units) for each interval.
    slopes: Vec<(f64, f64)>,
    norm: f64,
}

impl SmoothStep {
    fn build() -> Self {
        let m = TABLE_INTERVALS;
        let h = 1.0 / m as f64;
        let panel = |a: f64| -> f64 {
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(&x, w)| w * step_density(a + 0.5 * h * (x + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        };
        let mut cumulative = vec![0.0; m + 1];
        for i in 0..m {
            cumulative[i + 1] = cumulative[i] + panel(i as f64 * h);
        }
        let norm = cumulative[m];
        let mut values: Vec<f64> = cumulative.iter().map(|c| c / norm).collect();
        // Symmetric about 1/2 by construction of the density.
        for i in m / 2 + 1..=m {
            values[i] = 1.0 - values[m - i];
        }
        values[m / 2] = 0.5;
        let slopes = (0..m)
            .map(|i| {
                let delta = values[i + 1] - values[i];
                let d0 = step_density(i as f64 * h) / norm * h;
                let d1 = step_density((i + 1) as f64 * h) / norm * h;
                if delta <= 0.0 {
                    return (0.0, 0.0);
                }
                let (a, b) = (d0 / delta, d1 / delta);
                let r = a * a + b * b;
                if r > 9.0 {
                    let tau = 3.0 / r.sqrt();
                    (tau * d0, tau * d1)
                } else {
                    (d0, d1)
                }
            })
            .collect();
        SmoothStep {
            values,
            slopes,
            norm,
        }
    }

    fn get() -> &'static SmoothStep {
        static TABLE: OnceLock<SmoothStep> = OnceLock::new();
        TABLE.get_or_init(SmoothStep::build)
    }

    fn eval_lower_half(&self, t: f64) -> f64 {
        let m = TABLE_INTERVALS as f64;
        let pos = t * m;
        let i = (pos.floor() as usize).min(TABLE_INTERVALS - 1);
        let u = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = self.slopes[i];
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        v.clamp(0.0, 1.0)
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else if t <= 0.5 {
            self.eval_lower_half(t)
        } else {
            1.0 - self.eval_lower_half(1.0 - t)
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        step_density(t) / self.norm
    }
}

/// The smooth step `S(t)`: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` and monotone.
pub fn smooth_step(t: f64) -> f64 {
    SmoothStep::get().eval(t)
}

/// `S'(t)`, evaluated analytically.
pub fn smooth_step_derivative(t: f64) -> f64 {
    SmoothStep::get().derivative(t)
}

/// Radial profile: exactly 1 on `[0, plateau]`, exactly 0 on `[support, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    plateau: f64,
    support: f64,
}

pub fn make_profile(plateau: f64, support: f64) -> Result<RadialProfile> {
    RadialProfile::new(plateau, support)
}

impl RadialProfile {
    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau < support && support.is_finite()) {
            return Err(Error::config(
                "profile",
                format!("need 0 < plateau < support, got ({plateau}, {support})"),
            ));
        }
        Ok(RadialProfile { plateau, support })
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if r <= self.plateau {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            1.0 - smooth_step((r - self.plateau) / (self.support - self.plateau))
        }
    }

    /// d/dr of the profile.
    pub fn derivative(&self, r: f64) -> f64 {
        let w = self.support - self.plateau;
        -smooth_step_derivative((r - self.plateau) / w) / w
    }
}

/// Euclidean norm of a point.
#[inline]
pub fn radius(p: &[f64]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `2^{-k}` computed exactly.
#[inline]
pub(crate) fn dyadic(k: i32) -> f64 {
    2f64.powi(-k)
}

/// The scalar pair `(φ̂, ψ̂)` and the multilinear pair `(Φ̂, Ψ̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFamily {
    scalar: RadialProfile,
    multilinear: RadialProfile,
}

impl Default for BumpFamily {
    fn default() -> Self {
        Self::standard()
    }
}

impl BumpFamily {
    pub fn standard() -> Self {
        BumpFamily {
            scalar: RadialProfile {
                plateau: 1.0,
                support: 2.0,
            },
            multilinear: RadialProfile {
                plateau: 0.5,
                support: 1.0,
            },
        }
    }

    pub fn scalar_profile(&self) -> RadialProfile {
        self.scalar
    }

    pub fn multilinear_profile(&self) -> RadialProfile {
        self.multilinear
    }

    /// `φ̂` at radius `r`.
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        self.scalar.value(r)
    }

    /// `ψ̂(ξ) = φ̂(ξ) - φ̂(2ξ)` at radius `r`.
    #[inline]
    pub fn psi(&self, r: f64) -> f64 {
        self.scalar.value(r) - self.scalar.value(2.0 * r)
    }

    /// `φ̂_k(ξ) = φ̂(2^{-k}ξ)`.
    #[inline]
    pub fn phi_k(&self, k: i32, r: f64) -> f64 {
        self.phi(r * dyadic(k))
    }

    /// `ψ̂_k(ξ) = ψ̂(2^{-k}ξ)`, supported in `2^{k-1} ≤ |ξ| ≤ 2^{k+1}`.
    #[inline]
    pub fn psi_k(&self, k: i32, r: f64) -> f64 {
        self.psi(r * dyadic(k))
    }

    /// `Φ̂` at radius `|ξ⃗| = r`.
    #[inline]
    pub fn big_phi(&self, r: f64) -> f64 {
        self.multilinear.value(r)
    }

    /// `Ψ̂ = Φ̂(·/2) - Φ̂` at radius `|ξ⃗| = r`.
    #[inline]
    pub fn big_psi(&self, r: f64) -> f64 {
        self.multilinear.value(0.5 * r) - self.multilinear.value(r)
    }

    /// `Ψ̂(2^{-j}ξ⃗)` at radius `r`, supported in `2^{j-1} ≤ r ≤ 2^{j+1}`.
    #[inline]
    pub fn big_psi_j(&self, j: i32, r: f64) -> f64 {
        self.big_psi(r * dyadic(j))
    }

    /// Inner and outer radius of the support of `Ψ̂`.
    pub fn big_psi_support(&self) -> (f64, f64) {
        (self.multilinear.plateau, 2.0 * self.multilinear.support)
    }
}

/// `(φ̂, ψ̂)` sampled on the frequency lattice of one `ℝ^d` block.
pub fn make_scalar_pair(grid: &Grid) -> Result<(SampledFunction, SampledFunction)> {
    if grid.max_frequency() < 2.0 {
        return Err(Error::Resolution(format!(
            "max frequency {} < 2 cannot hold the support of φ̂",
            grid.max_frequency()
        )));
    }
    if 1.0 / grid.frequency_spacing() < 4.0 {
        return Err(Error::Resolution(
            "fewer than 4 frequency samples across [1, 2]".into(),
        ));
    }
    let fam = BumpFamily::standard();
    let phi = SampledFunction::from_fn(grid, Domain::Frequency, 1, |xi| {
        Complex64::new(fam.phi(radius(xi)), 0.0)
    });
    let psi = SampledFunction::from_fn(grid, Domain::Frequency, 1, |xi| {
        Complex64::new(fam.psi(radius(xi)), 0.0)
    });
    Ok((phi, psi))
}

/// `(Φ̂, Ψ̂)` sampled on the full `(ℝ^d)^n` frequency lattice.
pub fn make_multilinear_pair(grid: &Grid) -> Result<(SampledFunction, SampledFunction)> {
    if grid.max_frequency() < 1.0 {
        return Err(Error::Resolution(format!(
            "max frequency {} < 1 cannot hold the support of Φ̂",
            grid.max_frequency()
        )));
    }
    if 0.5 / grid.frequency_spacing() < 4.0 {
        return Err(Error::Resolution(
            "fewer than 4 frequency samples across [1/2, 1]".into(),
        ));
    }
    let fam = BumpFamily::standard();
    let n = grid.linearity();
    let phi = SampledFunction::from_fn(grid, Domain::Frequency, n, |xi| {
        Complex64::new(fam.big_phi(radius(xi)), 0.0)
    });
    let psi = SampledFunction::from_fn(grid, Domain::Frequency, n, |xi| {
        Complex64::new(fam.big_psi(radius(xi)), 0.0)
    });
    Ok((phi, psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// `φ̂_{j+offset}`: low-pass, equal to 1 near the origin.
    LowPass,
    /// `ψ̂_{j+offset}`: vanishes on a ball around the origin.
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    /// Dyadic level relative to `j`.
    pub offset: i32,
}

impl Factor {
    pub fn origin_excluded(&self) -> bool {
        self.kind == FactorKind::Band
    }

    #[inline]
    pub fn eval(&self, fam: &BumpFamily, level: i32, r: f64) -> f64 {
        match self.kind {
            FactorKind::LowPass => fam.phi_k(level + self.offset, r),
            FactorKind::Band => fam.psi_k(level + self.offset, r),
        }
    }

    /// Radii `(lo, hi)` outside which the factor is zero, relative to `2^j`.
    fn relative_support(&self) -> (f64, f64) {
        let scale = 2f64.powi(self.offset);
        match self.kind {
            FactorKind::LowPass => (0.0, 2.0 * scale),
            FactorKind::Band => (0.5 * scale, 2.0 * scale),
        }
    }
}

/// One summand of the factored band window: `n` block factors evaluated at
/// `ξ_i` and one output factor evaluated at `-(ξ_1 + ⋯ + ξ_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorTerm {
    pub level: i32,
    pub factors: Vec<Factor>,
    pub weight: f64,
}

impl FactorTerm {
    pub fn origin_excluded_count(&self) -> usize {
        self.factors.iter().filter(|f| f.origin_excluded()).count()
    }

    /// `weight · Π_i Φ̂ⁱ_j(ξ_i) · Φ̂ⁿ⁺¹_j(-Σ ξ_i)` given the block radii and
    /// the radius of the block sum.
    pub fn eval(&self, fam: &BumpFamily, block_radii: &[f64], sum_radius: f64) -> f64 {
        let n = block_radii.len();
        let mut v = self.weight;
        for (f, &r) in self.factors[..n].iter().zip(block_radii) {
            v *= f.eval(fam, self.level, r);
            if v == 0.0 {
                return 0.0;
            }
        }
        v * self.factors[n].eval(fam, self.level, sum_radius)
    }
}

/// Dyadic cushions of the factored decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cushion {
    /// Block low-pass sits at level `j - below`.
    pub below: i32,
    /// Output factor is resolved up to level `j + above`.
    pub above: i32,
}

impl Cushion {
    /// Smallest cushions for which every term with fewer than two band
    /// factors has support disjoint from `supp Ψ̂(2^{-j}·)`.
    pub fn default_for(n: usize) -> Self {
        let log_n = (n as f64).log2().ceil() as i32;
        Cushion {
            below: 6 + log_n,
            above: log_n + 2,
        }
    }
}

/// Decomposes `Ψ̂(2^{-j}ξ⃗)` into products of per-block and output cutoffs,
/// each surviving term carrying at least two origin-excluded factors.
///
/// Each block gets `1 = φ̂_{j-c}(ξ_i) + Σ_{k=j-c+1}^{j+1} ψ̂_k(ξ_i)` and the output
/// variable `1 = φ̂_{j-c}(η) + Σ_{k=j-c+1}^{j+c'} ψ̂_k(η)`; the product is expanded
/// and terms whose support provably misses the window are dropped.
pub fn lemma311_factors(grid: &Grid, j: i32, cushion: Cushion) -> Result<Vec<FactorTerm>> {
    let n = grid.linearity();
    let fam = BumpFamily::standard();
    let (inner, outer) = fam.big_psi_support();
    let c = cushion.below;
    let cp = cushion.above;
    if c < 1 || cp < 0 {
        return Err(Error::config("cushion", format!("{cushion:?} must be positive")));
    }
    // sqrt(n) · sup|ξ⃗| bounds |η|; the output partition must reach it.
    if (n as f64).sqrt() * outer > 2f64.powi(cp) {
        return Err(Error::Construction(format!(
            "output cushion {cp} too small for n = {n}"
        )));
    }
    if (n as f64).sqrt() * 2f64.powi(1 - c) >= inner {
        return Err(Error::Construction(format!(
            "block cushion {c} leaves the all-low-pass term inside the window"
        )));
    }

    let block_choices: Vec<Factor> = std::iter::once(Factor {
        kind: FactorKind::LowPass,
        offset: -c,
    })
    .chain((1 - c..=1).map(|offset| Factor {
        kind: FactorKind::Band,
        offset,
    }))
    .collect();
    let output_choices: Vec<Factor> = std::iter::once(Factor {
        kind: FactorKind::LowPass,
        offset: -c,
    })
    .chain((1 - c..=cp).map(|offset| Factor {
        kind: FactorKind::Band,
        offset,
    }))
    .collect();

    let mut terms = Vec::new();
    let mut pick = vec![0usize; n];
    loop {
        for out in &output_choices {
            let mut factors: Vec<Factor> = pick.iter().map(|&p| block_choices[p]).collect();
            factors.push(*out);
            if support_misses_window(&factors, inner, outer) {
                continue;
            }
            let term = FactorTerm {
                level: j,
                factors,
                weight: 1.0,
            };
            if term.origin_excluded_count() < 2 {
                return Err(Error::Construction(format!(
                    "term {:?} meets the window with fewer than two origin-excluded factors",
                    term.factors
                )));
            }
            terms.push(term);
        }
        // Odometer over block choices.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(terms);
            }
            pick[i] += 1;
            if pick[i] < block_choices.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Certifies that the product of `factors` vanishes on `inner ≤ |ξ⃗| ≤ outer`
/// (radii relative to `2^j`). Only strict inequalities count as a certificate.
fn support_misses_window(factors: &[Factor], inner: f64, outer: f64) -> bool {
    let n = factors.len() - 1;
    let blocks: Vec<(f64, f64)> = factors[..n].iter().map(|f| f.relative_support()).collect();
    let (out_lo, out_hi) = factors[n].relative_support();

    let hi_sq: f64 = blocks.iter().map(|b| b.1 * b.1).sum();
    if hi_sq < inner * inner {
        return true;
    }
    let lo_sq: f64 = blocks.iter().map(|b| b.0 * b.0).sum();
    if lo_sq > outer * outer {
        return true;
    }
    let hi_sum: f64 = blocks.iter().map(|b| b.1).sum();
    if out_lo > hi_sum {
        return true;
    }
    blocks
        .iter()
        .enumerate()
        .any(|(i, b)| b.0 - (hi_sum - blocks[i].1) > out_hi)
}

/// `Σ_terms weight · Π factors` at a point `ξ⃗` (flat, `n·d` coordinates).
pub fn factored_sum(terms: &[FactorTerm], fam: &BumpFamily, xi: &[f64], dim: usize) -> f64 {
    let n = xi.len() / dim;
    let block_radii: Vec<f64> = xi.chunks(dim).map(radius).collect();
    let mut eta = vec![0.0; dim];
    for block in xi.chunks(dim) {
        for (e, v) in eta.iter_mut().zip(block) {
            *e += v;
        }
    }
    let sum_radius = radius(&eta);
    debug_assert_eq!(block_radii.len(), n);
    terms
        .iter()
        .map(|t| t.eval(fam, &block_radii, sum_radius))
        .sum()
}

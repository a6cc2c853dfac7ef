//! Closed-form symbols: analytic baselines and the model examples with
//! dyadic block structure.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Symbol, SymbolMeta};
use crate::bumps::{radius, smooth_step, BumpFamily, RadialProfile};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Shape of `Φ_k(x, ·)` in the dyadic-sum examples, as a function of `|ζ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockProfile {
    /// `ψ̂(ζ)`: support `[1/2, 2]`, value 1 at `|ζ| = 1`, and the blocks sum to
    /// 1 on `2 ≤ |ξ⃗| ≤ 2^{k_max}`.
    Partition,
    /// Narrow bump rising on `[0.6, 0.7]`, falling on `[1.05, 1.15]`, so
    /// consecutive blocks leave gaps.
    Annular,
}

impl BlockProfile {
    fn value(&self, r: f64) -> f64 {
        match self {
            BlockProfile::Partition => BumpFamily::standard().psi(r),
            BlockProfile::Annular => {
                smooth_step((r - 0.6) / 0.1) * (1.0 - smooth_step((r - 1.05) / 0.1))
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            BlockProfile::Partition => (0.5, 2.0),
            BlockProfile::Annular => (0.6, 1.15),
        }
    }

    /// Block levels `k ∈ [1, k_max]` whose support can contain radius `r`.
    fn levels(&self, r: f64, k_max: u32) -> std::ops::RangeInclusive<i32> {
        if r <= 0.0 {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        let (lo, hi) = self.support();
        let first = ((r / hi).log2().floor() as i32).max(1);
        let last = ((r / lo).log2().ceil() as i32).min(k_max as i32);
        first..=last
    }
}

/// x-dependence of the block profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XFactor {
    None,
    /// `(3 + sin(2^{kδ} x_1))/4`: bounded away from 0, first derivative of
    /// size `2^{kδ}`.
    Oscillating { delta: f64 },
}

impl XFactor {
    #[inline]
    fn value(&self, k: i32, x: &[f64]) -> f64 {
        match *self {
            XFactor::None => 1.0,
            XFactor::Oscillating { delta } => {
                (3.0 + (2f64.powf(k as f64 * delta) * x[0]).sin()) / 4.0
            }
        }
    }

    #[inline]
    fn dx(&self, k: i32, x: &[f64], l: usize) -> f64 {
        match *self {
            XFactor::Oscillating { delta } if l == 0 => {
                let w = 2f64.powf(k as f64 * delta);
                w * (w * x[0]).cos() / 4.0
            }
            _ => 0.0,
        }
    }

    fn is_none(&self) -> bool {
        matches!(self, XFactor::None)
    }

    fn describe(&self) -> String {
        match self {
            XFactor::None => "block profiles independent of x".into(),
            XFactor::Oscillating { delta } => {
                format!("block x-factor (3 + sin(2^(k·{delta})·x_1))/4")
            }
        }
    }
}

fn truncation_note(k_max: u32) -> String {
    format!("dyadic sum truncated to k = 1..{k_max}")
}

pub struct ConstantSymbol {
    meta: SymbolMeta,
    c: Complex64,
}

pub fn constant_symbol(c: f64, dim: usize, linearity: usize) -> ConstantSymbol {
    ConstantSymbol {
        meta: SymbolMeta::new("constant", dim, linearity, true).param("c", c),
        c: Complex64::new(c, 0.0),
    }
}

impl Symbol for ConstantSymbol {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, _x: &[f64], _xi: &[f64]) -> Complex64 {
        self.c
    }
    fn dx(&self, _x: &[f64], _xi: &[f64], _l: usize) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }
}

/// `e^{-2πi⟨a, ξ_block⟩}`: translates input `block` (0-based) by `a`.
pub struct TranslationSymbol {
    meta: SymbolMeta,
    a: Vec<f64>,
    block: usize,
}

pub fn translation_symbol(
    a: &[f64],
    block: usize,
    dim: usize,
    linearity: usize,
) -> Result<TranslationSymbol> {
    if block >= linearity {
        return Err(Error::config(
            "symbol.params.block",
            format!("block {block} out of range for n = {linearity}"),
        ));
    }
    if a.len() != dim {
        return Err(Error::config("symbol.params.a", format!("need {dim} entries")));
    }
    Ok(TranslationSymbol {
        meta: SymbolMeta::new("translation", dim, linearity, true)
            .vector("a", a)
            .param("block", block as f64),
        a: a.to_vec(),
        block,
    })
}

impl Symbol for TranslationSymbol {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, _x: &[f64], xi: &[f64]) -> Complex64 {
        let d = self.a.len();
        let phase = -2.0 * PI * dot(&self.a, &xi[self.block * d..(self.block + 1) * d]);
        Complex64::from_polar(1.0, phase)
    }
    fn dx(&self, _x: &[f64], _xi: &[f64], _l: usize) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }
}

/// `e^{2πi⟨c, x⟩}`.
pub struct ModulationSymbol {
    meta: SymbolMeta,
    c: Vec<f64>,
}

pub fn modulation_symbol(c: &[f64], linearity: usize) -> ModulationSymbol {
    ModulationSymbol {
        meta: SymbolMeta::new("modulation", c.len(), linearity, false).vector("c", c),
        c: c.to_vec(),
    }
}

impl Symbol for ModulationSymbol {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, x: &[f64], _xi: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * dot(&self.c, x))
    }
    fn dx(&self, x: &[f64], xi: &[f64], l: usize) -> Option<Complex64> {
        Some(2.0 * PI * I * self.c[l] * self.eval(x, xi))
    }
}

/// `φ(x, ξ⃗)·e^{i|x|^{3/2}·ω|ξ⃗|²}` with `φ` a radial cutoff in `(x, ξ⃗)`
/// (plateau 1/2, support 1). Only first x-derivatives exist.
pub struct Example1 {
    meta: SymbolMeta,
    omega: f64,
    cutoff: RadialProfile,
}

pub fn example1_symbol(omega: f64, dim: usize, linearity: usize) -> Example1 {
    Example1 {
        meta: SymbolMeta::new("example1", dim, linearity, false)
            .param("omega", omega)
            .note("cutoff: radial profile in (x, ξ⃗) with plateau 1/2 and support 1")
            .note("phase: |x|^(3/2)·omega·|ξ⃗|²"),
        omega,
        cutoff: RadialProfile::new(0.5, 1.0).expect("valid radii"),
    }
}

impl Example1 {
    fn parts(&self, x: &[f64], xi: &[f64]) -> (f64, f64, f64, f64) {
        let rx2 = dot(x, x);
        let r = (rx2 + dot(xi, xi)).sqrt();
        let tilde = self.omega * dot(xi, xi);
        (r, rx2.sqrt(), tilde, self.cutoff.value(r))
    }
}

impl Symbol for Example1 {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        let (_, rx, tilde, phi) = self.parts(x, xi);
        if phi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(phi, rx.powf(1.5) * tilde)
    }
    fn dx(&self, x: &[f64], xi: &[f64], l: usize) -> Option<Complex64> {
        let (r, rx, tilde, phi) = self.parts(x, xi);
        if r >= self.cutoff.support() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let e = Complex64::from_polar(1.0, rx.powf(1.5) * tilde);
        let dphi = if r > self.cutoff.plateau() {
            self.cutoff.derivative(r) * x[l] / r
        } else {
            0.0
        };
        // d/dx_l |x|^{3/2} = (3/2)|x|^{-1/2} x_l, continuous with value 0 at x = 0.
        let dphase = if rx > 0.0 {
            1.5 * x[l] / rx.sqrt() * tilde
        } else {
            0.0
        };
        Some(e * (dphi + I * phi * dphase))
    }
}

/// `Σ_k Φ_k(x, 2^{-k}ξ⃗)·|2^{-k}ξ⃗ - a|^γ` with a fixed anchor `a`.
pub struct Example2 {
    meta: SymbolMeta,
    gamma: f64,
    anchor: Vec<f64>,
    x_factor: XFactor,
    k_max: u32,
}

fn check_anchor(anchor: &[f64], lo: f64, hi: f64) -> Result<()> {
    let r = radius(anchor);
    if !(r > lo && r < hi) {
        return Err(Error::config(
            "symbol.params.anchor",
            format!("|anchor| = {r} must lie strictly inside ({lo}, {hi})"),
        ));
    }
    Ok(())
}

pub fn example2_symbol(
    gamma: f64,
    anchor: &[f64],
    x_factor: XFactor,
    k_max: u32,
    dim: usize,
    linearity: usize,
) -> Result<Example2> {
    if !(gamma > 0.0) {
        return Err(Error::config("symbol.params.gamma", "must be > 0"));
    }
    if anchor.len() != dim * linearity {
        return Err(Error::config("symbol.params.anchor", "wrong length"));
    }
    check_anchor(anchor, 0.5, 2.0)?;
    let mut meta = SymbolMeta::new("example2", dim, linearity, x_factor.is_none())
        .param("gamma", gamma)
        .vector("anchor", anchor)
        .param("k_max", k_max as f64)
        .note(truncation_note(k_max))
        .note("block profile: annular bump on [0.6, 1.15], plateau [0.7, 1.05]")
        .note(x_factor.describe());
    if let XFactor::Oscillating { delta } = x_factor {
        meta = meta.param("delta", delta);
    }
    Ok(Example2 {
        meta,
        gamma,
        anchor: anchor.to_vec(),
        x_factor,
        k_max,
    })
}

impl Example2 {
    fn sum(&self, x: &[f64], xi: &[f64], deriv: Option<usize>) -> Complex64 {
        let profile = BlockProfile::Annular;
        let r = radius(xi);
        let mut acc = 0.0;
        for k in profile.levels(r, self.k_max) {
            let s = 2f64.powi(-k);
            let b = profile.value(r * s);
            if b == 0.0 {
                continue;
            }
            let dist: f64 = xi
                .iter()
                .zip(&self.anchor)
                .map(|(v, a)| (v * s - a).powi(2))
                .sum::<f64>()
                .sqrt();
            let xf = match deriv {
                None => self.x_factor.value(k, x),
                Some(l) => self.x_factor.dx(k, x, l),
            };
            acc += xf * b * dist.powf(self.gamma);
        }
        Complex64::new(acc, 0.0)
    }
}

impl Symbol for Example2 {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        self.sum(x, xi, None)
    }
    fn dx(&self, x: &[f64], xi: &[f64], l: usize) -> Option<Complex64> {
        Some(self.sum(x, xi, Some(l)))
    }
}

/// `Σ_k Φ_k(2^{-k}ξ⃗)·|2^{-k}ξ⃗ - a_k(x)|^γ` with moving anchors
/// `a_k(x) = a·(1 + ε·sin(2^{kδ}x_1))`.
pub struct Example3 {
    meta: SymbolMeta,
    gamma: f64,
    anchor: Vec<f64>,
    epsilon: f64,
    delta: f64,
    k_max: u32,
}

pub fn example3_symbol(
    gamma: f64,
    anchor: &[f64],
    epsilon: f64,
    delta: f64,
    k_max: u32,
    dim: usize,
    linearity: usize,
) -> Result<Example3> {
    if !(gamma > 1.0) {
        return Err(Error::config("symbol.params.gamma", "must be > 1"));
    }
    if anchor.len() != dim * linearity {
        return Err(Error::config("symbol.params.anchor", "wrong length"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::config("symbol.params.epsilon", "must be in [0, 1)"));
    }
    let r = radius(anchor);
    check_anchor(&[r * (1.0 - epsilon)], 0.5, 2.0)?;
    check_anchor(&[r * (1.0 + epsilon)], 0.5, 2.0)?;
    Ok(Example3 {
        meta: SymbolMeta::new("example3", dim, linearity, false)
            .param("gamma", gamma)
            .vector("anchor", anchor)
            .param("epsilon", epsilon)
            .param("delta", delta)
            .param("k_max", k_max as f64)
            .note(truncation_note(k_max))
            .note("block profile: annular bump on [0.6, 1.15], plateau [0.7, 1.05]")
            .note(format!(
                "anchor field a_k(x) = anchor·(1 + {epsilon}·sin(2^(k·{delta})·x_1))"
            )),
        gamma,
        anchor: anchor.to_vec(),
        epsilon,
        delta,
        k_max,
    })
}

impl Example3 {
    fn wave(&self, k: i32, x: &[f64]) -> (f64, f64) {
        let w = 2f64.powf(k as f64 * self.delta);
        (
            1.0 + self.epsilon * (w * x[0]).sin(),
            self.epsilon * w * (w * x[0]).cos(),
        )
    }
}

impl Symbol for Example3 {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        let profile = BlockProfile::Annular;
        let r = radius(xi);
        let mut acc = 0.0;
        for k in profile.levels(r, self.k_max) {
            let s = 2f64.powi(-k);
            let b = profile.value(r * s);
            if b == 0.0 {
                continue;
            }
            let (scale, _) = self.wave(k, x);
            let dist: f64 = xi
                .iter()
                .zip(&self.anchor)
                .map(|(v, a)| (v * s - a * scale).powi(2))
                .sum::<f64>()
                .sqrt();
            acc += b * dist.powf(self.gamma);
        }
        Complex64::new(acc, 0.0)
    }
    fn dx(&self, x: &[f64], xi: &[f64], l: usize) -> Option<Complex64> {
        if l != 0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let profile = BlockProfile::Annular;
        let r = radius(xi);
        let mut acc = 0.0;
        for k in profile.levels(r, self.k_max) {
            let s = 2f64.powi(-k);
            let b = profile.value(r * s);
            if b == 0.0 {
                continue;
            }
            let (scale, dscale) = self.wave(k, x);
            let diff: Vec<f64> = xi
                .iter()
                .zip(&self.anchor)
                .map(|(v, a)| v * s - a * scale)
                .collect();
            let dist = radius(&diff);
            if dist == 0.0 {
                continue;
            }
            // ∂ |v|^γ = γ |v|^{γ-2} ⟨v, ∂v⟩ with ∂v = -anchor · dscale.
            let inner: f64 = diff.iter().zip(&self.anchor).map(|(v, a)| -v * a * dscale).sum();
            acc += b * self.gamma * dist.powf(self.gamma - 2.0) * inner;
        }
        Some(Complex64::new(acc, 0.0))
    }
}

/// `Σ_k φ_k(x, 2^{-k}ξ⃗)·|ξ⃗|^{-b}·e^{i|ξ⃗|^a}` with partition blocks.
pub struct Example4 {
    meta: SymbolMeta,
    a: f64,
    b: f64,
    x_factor: XFactor,
    k_max: u32,
}

pub fn example4_symbol(
    a: f64,
    b: f64,
    x_factor: XFactor,
    k_max: u32,
    dim: usize,
    linearity: usize,
) -> Result<Example4> {
    if !(a > 0.0) {
        return Err(Error::config("symbol.params.a", "must be > 0"));
    }
    if !(b > 0.0) {
        return Err(Error::config("symbol.params.b", "must be > 0"));
    }
    Ok(example4_unchecked("example4", a, b, x_factor, k_max, dim, linearity))
}

fn example4_unchecked(
    name: &str,
    a: f64,
    b: f64,
    x_factor: XFactor,
    k_max: u32,
    dim: usize,
    linearity: usize,
) -> Example4 {
    let mut meta = SymbolMeta::new(name, dim, linearity, x_factor.is_none())
        .param("a", a)
        .param("b", b)
        .param("k_max", k_max as f64)
        .note(truncation_note(k_max))
        .note("block profile: ψ̂(2^-k ξ⃗), blocks sum to 1 on 2 ≤ |ξ⃗| ≤ 2^k_max")
        .note(x_factor.describe());
    if let XFactor::Oscillating { delta } = x_factor {
        meta = meta.param("delta", delta);
    }
    Example4 {
        meta,
        a,
        b,
        x_factor,
        k_max,
    }
}

/// `e^{i|ξ⃗|²}` on `2 ≤ |ξ⃗| ≤ 2^{k_max}`: the `b = 0, a = 2` member of the
/// Example 4 family.
pub fn chirp_symbol(k_max: u32, dim: usize, linearity: usize) -> Example4 {
    example4_unchecked("chirp", 2.0, 0.0, XFactor::None, k_max, dim, linearity)
}

impl Example4 {
    fn blocks(&self, x: &[f64], r: f64, deriv: Option<usize>) -> f64 {
        let profile = BlockProfile::Partition;
        profile
            .levels(r, self.k_max)
            .map(|k| {
                let xf = match deriv {
                    None => self.x_factor.value(k, x),
                    Some(l) => self.x_factor.dx(k, x, l),
                };
                xf * profile.value(r * 2f64.powi(-k))
            })
            .sum()
    }

    fn carrier(&self, r: f64) -> Complex64 {
        Complex64::from_polar(r.powf(-self.b), r.powf(self.a))
    }
}

impl Symbol for Example4 {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        let r = radius(xi);
        let amp = self.blocks(x, r, None);
        if amp == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        amp * self.carrier(r)
    }
    fn dx(&self, x: &[f64], xi: &[f64], l: usize) -> Option<Complex64> {
        let r = radius(xi);
        let amp = self.blocks(x, r, Some(l));
        if amp == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        Some(amp * self.carrier(r))
    }
}

/// Degree-0 homogeneous model `(2/(n-1))·Σ_{i<l}⟨ξ_i, ξ_l⟩/|ξ⃗|²` (for `n = 1`:
/// `ξ_1,1/|ξ|`), switched off smoothly inside `|ξ⃗| ≤ ε`.
pub struct CoifmanMeyer {
    meta: SymbolMeta,
    epsilon: f64,
}

pub fn coifman_meyer_symbol(epsilon: f64, dim: usize, linearity: usize) -> Result<CoifmanMeyer> {
    if !(epsilon > 0.0) {
        return Err(Error::config("symbol.params.epsilon", "must be > 0"));
    }
    Ok(CoifmanMeyer {
        meta: SymbolMeta::new("coifman_meyer", dim, linearity, true)
            .param("epsilon", epsilon)
            .note("switched on by 1 - profile(ε/2, ε)(|ξ⃗|)"),
        epsilon,
    })
}

impl CoifmanMeyer {
    fn switch(&self, r: f64) -> f64 {
        let lo = 0.5 * self.epsilon;
        if r <= lo {
            0.0
        } else if r >= self.epsilon {
            1.0
        } else {
            smooth_step((r - lo) / (self.epsilon - lo))
        }
    }
}

impl Symbol for CoifmanMeyer {
    fn meta(&self) -> &SymbolMeta {
        &self.meta
    }
    fn eval(&self, _x: &[f64], xi: &[f64]) -> Complex64 {
        let d = self.meta.dim;
        let n = self.meta.linearity;
        let r2 = dot(xi, xi);
        let cut = self.switch(r2.sqrt());
        if cut == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let core = if n == 1 {
            xi[0] / r2.sqrt()
        } else {
            let mut s = 0.0;
            for i in 0..n {
                for l in i + 1..n {
                    s += dot(&xi[i * d..(i + 1) * d], &xi[l * d..(l + 1) * d]);
                }
            }
            2.0 / (n - 1) as f64 * s / r2
        };
        Complex64::new(cut * core, 0.0)
    }
    fn dx(&self, _x: &[f64], _xi: &[f64], _l: usize) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }
}

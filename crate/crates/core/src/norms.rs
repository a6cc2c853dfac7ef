//! Lebesgue, Sobolev, symbol and Hardy-type (quasi-)norms on sampled data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::{radius, BumpFamily, RadialProfile};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Domain, Grid, SampledFunction};
use crate::symbols::{x_derivative, Symbol};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub delta: f64,
    pub p: f64,
    pub j_max: u32,
}

impl NormParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0) {
            return Err(Error::config("norm.s", "must be ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::config("norm.delta", "must lie in [0, 1)"));
        }
        if !(self.p > 0.0) {
            return Err(Error::config("norm.p", "must be > 0"));
        }
        Ok(())
    }
}

fn require_space(f: &SampledFunction) -> Result<()> {
    if f.domain() != Domain::Space {
        return Err(Error::Domain {
            expected: Domain::Space,
            got: f.domain(),
        });
    }
    Ok(())
}

/// `(Σ |f|^p · h^{dim})^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_quasinorm(f: &SampledFunction, p: f64) -> Result<f64> {
    require_space(f)?;
    if !(p > 0.0) {
        return Err(Error::config("p", format!("must be > 0, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.data().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let sum: f64 = f.data().iter().map(|z| z.norm().powf(p)).sum();
    Ok((sum * f.cell_volume()).powf(1.0 / p))
}

fn spectrum(f: &SampledFunction) -> Result<SampledFunction> {
    match f.domain() {
        Domain::Space => f.forward_transform(),
        Domain::Frequency => Ok(f.clone()),
    }
}

/// `√(Σ w(ξ⃗) |F̂(ξ⃗)|² · L^{-dim})` with a weight evaluated per block radius.
fn weighted_l2<W>(f: &SampledFunction, weight: W) -> Result<f64>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    let spec = spectrum(f)?;
    let grid = spec.grid();
    let d = grid.dim();
    let arity = spec.arity();
    let sum: f64 = spec
        .data()
        .par_iter()
        .enumerate()
        .map_init(
            || (vec![0.0; d * arity], vec![0.0; arity]),
            |(xi, r2), (flat, z)| {
                grid.coords(Domain::Frequency, arity, flat, xi);
                for (b, block) in xi.chunks(d).enumerate() {
                    r2[b] = block.iter().map(|v| v * v).sum();
                }
                weight(r2) * z.norm_sqr()
            },
        )
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((sum * spec.cell_volume()).sqrt())
}

/// Fractional Sobolev norm with weight `(1 + 4π²|ξ⃗|²)^s`.
pub fn sobolev_l2s(f: &SampledFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::config("s", format!("must be ≥ 0, got {s}")));
    }
    weighted_l2(f, |r2| {
        let total: f64 = r2.iter().sum();
        (1.0 + 4.0 * PI * PI * total).powf(s)
    })
}

/// Product-type Sobolev norm with weight `Π_i (1 + 4π²|ξ_i|²)^{s_i}`.
pub fn product_sobolev(f: &SampledFunction, orders: &[f64]) -> Result<f64> {
    if orders.len() != f.arity() {
        return Err(Error::config(
            "orders",
            format!("need {} orders, got {}", f.arity(), orders.len()),
        ));
    }
    if let Some(s) = orders.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::config("orders", format!("order {s} is negative")));
    }
    weighted_l2(f, |r2| {
        r2.iter()
            .zip(orders)
            .map(|(r, s)| (1.0 + 4.0 * PI * PI * r).powf(*s))
            .product()
    })
}

/// Grid on which symbol windows `ζ ↦ m(x, 2^j ζ)·Ψ̂(ζ)` are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandGrid {
    pub side: f64,
    pub points: usize,
    /// Use `points·2^j` samples per axis at level `j`, so the per-level
    /// norms also track resolution refinement.
    pub refine_with_j: bool,
}

impl Default for BandGrid {
    fn default() -> Self {
        BandGrid {
            side: 6.0,
            points: 96,
            refine_with_j: false,
        }
    }
}

impl BandGrid {
    pub fn grid(&self, dim: usize, linearity: usize, j: i32) -> Result<Grid> {
        let points = if self.refine_with_j && j > 0 {
            self.points << j
        } else {
            self.points
        };
        make_grid(dim, linearity, self.side, points)
    }
}

/// Samples `ζ ↦ g(ζ)·window(|ζ|)` as a space-domain function on `grid`.
fn sample_window<G>(grid: &Grid, g: G, window: impl Fn(f64) -> f64 + Sync) -> SampledFunction
where
    G: Fn(&[f64]) -> Complex64 + Sync,
{
    SampledFunction::from_fn(grid, Domain::Space, grid.linearity(), |zeta| {
        let w = window(radius(zeta));
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            w * g(zeta)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HormanderTable {
    pub s: f64,
    pub entries: Vec<(i32, f64)>,
    pub sup: f64,
}

/// `sup_j ‖m(2^j ·)·Ψ̂‖_{L²_s}` over `j_range` for an x-independent `m`.
pub fn hormander_norm(
    symbol: &dyn Symbol,
    s: f64,
    j_range: std::ops::RangeInclusive<i32>,
    band: &BandGrid,
) -> Result<HormanderTable> {
    if !symbol.x_independent() {
        return Err(Error::config(
            "symbol",
            format!("`{}` depends on x; the multiplier norm needs an x-independent symbol", symbol.meta().name),
        ));
    }
    let meta = symbol.meta();
    let fam = BumpFamily::standard();
    let x0 = vec![0.0; meta.dim];
    let entries = j_range
        .map(|j| -> Result<(i32, f64)> {
            let grid = band.grid(meta.dim, meta.linearity, j)?;
            let scale = 2f64.powi(j);
            let f = sample_window(
                &grid,
                |zeta| {
                    let xi: Vec<f64> = zeta.iter().map(|z| z * scale).collect();
                    symbol.eval(&x0, &xi)
                },
                |r| fam.big_psi(r),
            );
            Ok((j, sobolev_l2s(&f, s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = entries.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(HormanderTable { s, entries, sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEntry {
    pub j: i32,
    /// `max_x ‖m(x, 2^j·)Ψ̂‖_{L²_s}`.
    pub alpha0: f64,
    /// `max_x Σ_l 2^{-jδ}‖∂_{x_l} m(x, 2^j·)Ψ̂‖_{L²_s}`.
    pub alpha1: f64,
    /// `max_x` of the sum of both terms at the same `x`.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolNormReport {
    pub s: f64,
    pub delta: f64,
    /// The `Φ̂` term, split the same way as the bands (with `j = -1`).
    pub low: BandEntry,
    pub bands: Vec<BandEntry>,
    /// `low.total + max_j bands[j].total`.
    pub total: f64,
    pub x_probes: Vec<Vec<f64>>,
    pub band_grid: BandGrid,
}

impl SymbolNormReport {
    pub fn band_totals(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolNormOptions {
    pub s: f64,
    pub delta: f64,
    pub j_max: u32,
    pub band: BandGrid,
    /// Step for finite-difference x-derivatives; `None` forbids the fallback.
    pub fd_step: Option<f64>,
}

/// The symbol norm: low piece plus the supremum over `j = 0..=j_max` of the
/// windowed band norms, each maximized over `x_probes`.
pub fn symbol_norm_s_delta(
    symbol: &dyn Symbol,
    options: &SymbolNormOptions,
    x_probes: &[Vec<f64>],
) -> Result<SymbolNormReport> {
    if x_probes.is_empty() {
        return Err(Error::config("x_probes", "probe set is empty"));
    }
    NormParams {
        s: options.s,
        delta: options.delta,
        p: 1.0,
        j_max: options.j_max,
    }
    .validate()?;
    let meta = symbol.meta();
    let d = meta.dim;
    let x_independent = symbol.x_independent();
    if !x_independent && options.fd_step.is_none() {
        let (x, xi) = (vec![0.0; d], vec![1.0; d * meta.linearity]);
        if symbol.dx(&x, &xi, 0).is_none() {
            return Err(Error::config(
                "fd_step",
                format!("`{}` has no analytic x-derivative and the fallback is disabled", meta.name),
            ));
        }
    }
    let h = options.fd_step.unwrap_or(1e-4);
    let probes: &[Vec<f64>] = if x_independent { &x_probes[..1] } else { x_probes };
    let fam = BumpFamily::standard();

    let level = |j: i32| -> Result<BandEntry> {
        let grid = options.band.grid(d, meta.linearity, j.max(0))?;
        let (scale, damp) = if j < 0 {
            (1.0, 1.0)
        } else {
            (2f64.powi(j), 2f64.powf(-(j as f64) * options.delta))
        };
        let window = |r: f64| {
            if j < 0 {
                fam.big_phi(r)
            } else {
                fam.big_psi(r)
            }
        };
        let per_x = probes
            .iter()
            .map(|x| -> Result<(f64, f64)> {
                let scaled = |zeta: &[f64]| -> Vec<f64> { zeta.iter().map(|z| z * scale).collect() };
                let f = sample_window(&grid, |z| symbol.eval(x, &scaled(z)), window);
                let a0 = sobolev_l2s(&f, options.s)?;
                let mut a1 = 0.0;
                if !x_independent {
                    for l in 0..d {
                        let g = sample_window(
                            &grid,
                            |z| x_derivative(symbol, x, &scaled(z), l, h),
                            window,
                        );
                        a1 += damp * sobolev_l2s(&g, options.s)?;
                    }
                }
                Ok((a0, a1))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BandEntry {
            j,
            alpha0: per_x.iter().map(|v| v.0).fold(0.0, f64::max),
            alpha1: per_x.iter().map(|v| v.1).fold(0.0, f64::max),
            total: per_x.iter().map(|v| v.0 + v.1).fold(0.0, f64::max),
        })
    };
    let low = level(-1)?;
    let bands = (0..=options.j_max as i32)
        .map(level)
        .collect::<Result<Vec<_>>>()?;
    let total = low.total + bands.iter().map(|b| b.total).fold(0.0, f64::max);
    Ok(SymbolNormReport {
        s: options.s,
        delta: options.delta,
        low,
        bands,
        total,
        x_probes: probes.to_vec(),
        band_grid: options.band,
    })
}

/// Least-squares slope of `log₂ values[i]` against `levels[i]`.
pub fn log2_slope(levels: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(j, v)| (*j, v.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Periodic convolution `Σ_y k(x - y) f(y) h^{dim}` of two space samples.
pub(crate) fn periodic_convolve(kernel: &SampledFunction, f: &SampledFunction) -> Result<SampledFunction> {
    let kh = kernel.forward_transform()?;
    let fh = f.forward_transform()?;
    kh.zip_with(&fh, |a, b| a * b)?.inverse_transform()
}

/// Spectrum of the unit-mass mollifier at scale `t` on a single block.
///
/// The mollifier is the radial profile with plateau 1/2 and support 1,
/// dilated by `t` and normalized so its discrete mass is exactly 1; below the
/// grid spacing it degenerates to the identity.
fn mollifier_spectrum(grid: &Grid, t: f64) -> Result<SampledFunction> {
    let profile = RadialProfile::new(0.5, 1.0)?;
    let mut k = SampledFunction::from_fn(grid, Domain::Space, 1, |x| {
        Complex64::new(profile.value(radius(x) / t), 0.0)
    });
    let mass: f64 = k.data().iter().map(|z| z.re).sum::<f64>() * k.cell_volume();
    let inv = 1.0 / mass;
    for z in k.data_mut() {
        *z *= inv;
    }
    k.forward_transform()
}

/// Scales of the local maximal function: `2^{-m}`, `m = 0..=scale_count`.
pub fn local_scales(grid: &Grid, scale_count: u32) -> Vec<f64> {
    (0..=scale_count as i32)
        .map(|m| 2f64.powi(-m))
        .filter(|&t| t <= 0.5 * grid.side())
        .collect()
}

/// Scales of the global maximal function: `2^m`, `|m| ≤ scale_count`,
/// clipped to the box.
pub fn global_scales(grid: &Grid, scale_count: u32) -> Vec<f64> {
    let s = scale_count as i32;
    (-s..=s)
        .map(|m| 2f64.powi(m))
        .filter(|&t| t <= 0.5 * grid.side())
        .collect()
}

/// Pointwise `max_t |φ_t ∗ f|` over the given scales.
pub fn maximal_field(f: &SampledFunction, scales: &[f64]) -> Result<SampledFunction> {
    require_space(f)?;
    if f.arity() != 1 {
        return Err(Error::config("arity", "maximal functions act on one block"));
    }
    let fh = f.forward_transform()?;
    let mut out = vec![0.0f64; f.len()];
    for &t in scales {
        let kh = mollifier_spectrum(f.grid(), t)?;
        let conv = kh.zip_with(&fh, |a, b| a * b)?.inverse_transform()?;
        for (o, z) in out.iter_mut().zip(conv.data()) {
            *o = o.max(z.norm());
        }
    }
    SampledFunction::new(
        f.grid(),
        Domain::Space,
        1,
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

fn check_hardy_args(p: f64, scale_count: u32) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::config("p", format!("must be > 0, got {p}")));
    }
    if scale_count < 2 {
        return Err(Error::config("scale_count", "must be at least 2"));
    }
    Ok(())
}

/// Local Hardy quasi-norm: `‖max_{t = 2^{-m} ≤ 1} |φ_t ∗ f|‖_p`.
pub fn hp_quasinorm(f: &SampledFunction, p: f64, scale_count: u32) -> Result<f64> {
    check_hardy_args(p, scale_count)?;
    let field = maximal_field(f, &local_scales(f.grid(), scale_count))?;
    lp_quasinorm(&field, p)
}

/// Global Hardy quasi-norm: `‖max_{t = 2^m} |φ_t ∗ f|‖_p` over `|m| ≤ scale_count`.
pub fn global_hp_quasinorm(f: &SampledFunction, p: f64, scale_count: u32) -> Result<f64> {
    check_hardy_args(p, scale_count)?;
    let field = maximal_field(f, &global_scales(f.grid(), scale_count))?;
    lp_quasinorm(&field, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{constant_symbol, coifman_meyer_symbol, modulation_symbol};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lp_of_indicator_and_constant() {
        let g = make_grid(1, 1, 4.0, 64).unwrap();
        let f = SampledFunction::from_fn(&g, Domain::Space, 1, |x| {
            c(if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 })
        });
        assert!((lp_quasinorm(&f, 2.0).unwrap() - 1.0).abs() < 1e-14);
        let k = SampledFunction::from_fn(&g, Domain::Space, 1, |_| c(3.0));
        for p in [0.5, 1.0, 2.0, 3.0] {
            let expected = 3.0 * 4f64.powf(1.0 / p);
            assert!((lp_quasinorm(&k, p).unwrap() - expected).abs() < 1e-12 * expected);
        }
        assert_eq!(lp_quasinorm(&k, f64::INFINITY).unwrap(), 3.0);
        assert!(lp_quasinorm(&k, 0.0).is_err());
    }

    #[test]
    fn sobolev_single_mode() {
        let g = make_grid(1, 2, 4.0, 16).unwrap();
        let mut spec = SampledFunction::zeros(&g, Domain::Frequency, 2);
        let (k1, k2) = (g.frequency_index(3).unwrap(), g.frequency_index(-2).unwrap());
        spec.data_mut()[g.flatten(&[k1, k2])] = Complex64::new(0.6, -0.8);
        let xi2 = (9.0 + 4.0) / 16.0;
        for s in [0.0, 0.5, 1.7] {
            let expected = (1.0 + 4.0 * PI * PI * xi2).powf(s / 2.0) * 1.0 * 0.25;
            let got = sobolev_l2s(&spec, s).unwrap();
            assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
        }
    }

    #[test]
    fn product_sobolev_separates() {
        let g = make_grid(1, 2, 8.0, 32).unwrap();
        let one = make_grid(1, 1, 8.0, 32).unwrap();
        let a = |x: f64| (-PI * x * x).exp();
        let b = |x: f64| (-2.0 * x * x).exp() * (1.0 + x);
        let f = SampledFunction::from_fn(&g, Domain::Space, 2, |x| c(a(x[0]) * b(x[1])));
        let fa = SampledFunction::from_fn(&one, Domain::Space, 1, |x| c(a(x[0])));
        let fb = SampledFunction::from_fn(&one, Domain::Space, 1, |x| c(b(x[0])));
        let lhs = product_sobolev(&f, &[1.3, 0.0]).unwrap();
        let rhs = sobolev_l2s(&fa, 1.3).unwrap() * lp_quasinorm(&fb, 2.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
        assert!((product_sobolev(&fa, &[0.7]).unwrap() - sobolev_l2s(&fa, 0.7).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn hormander_constant_and_homogeneous() {
        let band = BandGrid::default();
        let one = constant_symbol(1.0, 1, 2);
        let t = hormander_norm(&one, 1.0, -2..=3, &band).unwrap();
        let psi = sample_window(&band.grid(1, 2, 0).unwrap(), |_| c(1.0), |r| BumpFamily::standard().big_psi(r));
        let expected = sobolev_l2s(&psi, 1.0).unwrap();
        assert!(t.entries.iter().all(|e| e.1 == expected));
        let cm = coifman_meyer_symbol(0.25, 1, 2).unwrap();
        let t = hormander_norm(&cm, 1.5, 0..=5, &band).unwrap();
        assert!(t.entries.iter().all(|e| (e.1 - t.entries[0].1).abs() < 1e-8 * t.sup));
        let m = modulation_symbol(&[1.0], 2);
        assert!(hormander_norm(&m, 1.0, 0..=1, &band).is_err());
    }

    #[test]
    fn symbol_norm_of_constant() {
        let one = constant_symbol(1.0, 1, 1);
        let opts = SymbolNormOptions {
            s: 1.0,
            delta: 0.0,
            j_max: 4,
            band: BandGrid::default(),
            fd_step: None,
        };
        let rep = symbol_norm_s_delta(&one, &opts, &[vec![0.0], vec![0.3]]).unwrap();
        assert!(rep.bands.iter().all(|b| b.alpha1 == 0.0));
        let grid = opts.band.grid(1, 1, 0).unwrap();
        let fam = BumpFamily::standard();
        let phi = sobolev_l2s(&sample_window(&grid, |_| c(1.0), |r| fam.big_phi(r)), 1.0).unwrap();
        let psi = sobolev_l2s(&sample_window(&grid, |_| c(1.0), |r| fam.big_psi(r)), 1.0).unwrap();
        assert!((rep.total - (phi + psi)).abs() < 1e-14 * rep.total);
    }

    #[test]
    fn hardy_local_below_global_and_homogeneous() {
        let g = make_grid(1, 1, 16.0, 128).unwrap();
        let f = SampledFunction::from_fn(&g, Domain::Space, 1, |x| {
            c((-PI * x[0] * x[0]).exp() * (3.0 * x[0]).cos())
        });
        for p in [0.5, 1.0, 2.0] {
            let local = hp_quasinorm(&f, p, 6).unwrap();
            let global = global_hp_quasinorm(&f, p, 6).unwrap();
            assert!(local <= global);
            // Power-of-two scalings commute with every rounding step.
            let scaled = f.map(|z| z * -4.0);
            assert_eq!(hp_quasinorm(&scaled, p, 6).unwrap(), 4.0 * local);
            if p >= 1.0 {
                let scaled = f.map(|z| z * -2.5);
                assert!((hp_quasinorm(&scaled, p, 6).unwrap() - 2.5 * local).abs() < 1e-12 * local);
            }
        }
        assert!(hp_quasinorm(&f, 1.0, 1).is_err());
    }
}

//! Centered Hardy–Littlewood maximal functions over dyadic radii, Peetre-type
//! ratios for band-limited functions, and polynomially weighted averages.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, SampledFunction};
use crate::norms::periodic_convolve;

fn check_single_block(f: &SampledFunction) -> Result<()> {
    if f.domain() != Domain::Space {
        return Err(Error::Domain {
            expected: Domain::Space,
            got: f.domain(),
        });
    }
    if f.arity() != 1 {
        return Err(Error::config("arity", "maximal functions act on one block"));
    }
    Ok(())
}

fn real_field(grid: &Grid, values: Vec<f64>) -> SampledFunction {
    SampledFunction::new(
        grid,
        Domain::Space,
        1,
        values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
    .expect("length matches grid")
}

/// Radii of the maximal function: `h/2` (the point itself) and `h·2^m` for
/// `m = 0..=log₂ N`.
pub fn dyadic_radii(grid: &Grid) -> Vec<f64> {
    let h = grid.spacing();
    let levels = grid.points().trailing_zeros() + u32::from(!grid.points().is_power_of_two());
    std::iter::once(0.5 * h)
        .chain((0..=levels as i32).map(|m| h * 2f64.powi(m)))
        .collect()
}

/// Averages of `values` over periodic Euclidean balls of radius `r` (in
/// grid units) centred at every grid point.
fn ball_averages(grid: &Grid, values: &[f64], r: f64) -> Vec<f64> {
    let n = grid.points();
    let ni = n as i64;
    // Offsets beyond half the box would alias onto points already counted.
    let reach = |w: i64| w.min((ni - 1) / 2);
    let full_row = |w: i64| 2 * w + 1 >= ni;
    match grid.dim() {
        1 => {
            let w = r.floor() as i64;
            if full_row(w) {
                let mean = values.iter().sum::<f64>() / n as f64;
                return vec![mean; n];
            }
            let w = reach(w);
            let mut prefix = vec![0.0; 2 * n + 1];
            for i in 0..2 * n {
                prefix[i + 1] = prefix[i] + values[i % n];
            }
            (0..n)
                .map(|i| {
                    // Window [i - w, i + w], started inside the doubled prefix.
                    let lo = (i + n - w as usize) % n;
                    let span = 2 * w as usize + 1;
                    (prefix[lo + span] - prefix[lo]) / span as f64
                })
                .collect()
        }
        _ => {
            // Row prefix sums, doubled for wrap-around.
            let mut prefix = vec![0.0; n * (2 * n + 1)];
            for row in 0..n {
                let base = row * (2 * n + 1);
                for c in 0..2 * n {
                    prefix[base + c + 1] = prefix[base + c] + values[row * n + c % n];
                }
            }
            let rr = r * r;
            let a_max = reach(r.floor() as i64);
            let rows: Vec<(i64, i64)> = (-a_max..=a_max)
                .map(|a| {
                    let w = ((rr - (a * a) as f64).max(0.0)).sqrt().floor() as i64;
                    (a, w)
                })
                .collect();
            let count: f64 = rows
                .iter()
                .map(|&(_, w)| if full_row(w) { n as f64 } else { (2 * reach(w) + 1) as f64 })
                .sum();
            (0..n * n)
                .into_par_iter()
                .map(|flat| {
                    let (i, j) = (flat / n, flat % n);
                    let mut sum = 0.0;
                    for &(a, w) in &rows {
                        let row = (i as i64 + a).rem_euclid(ni) as usize;
                        let base = row * (2 * n + 1);
                        if full_row(w) {
                            sum += prefix[base + n] - prefix[base];
                        } else {
                            let w = reach(w) as usize;
                            let lo = (j + n - w) % n;
                            sum += prefix[base + lo + 2 * w + 1] - prefix[base + lo];
                        }
                    }
                    sum / count
                })
                .collect()
        }
    }
}

fn maximal_of_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = values.to_vec();
    for r in dyadic_radii(grid).into_iter().skip(1) {
        let avg = ball_averages(grid, values, r / h);
        for (o, a) in out.iter_mut().zip(avg) {
            *o = o.max(a);
        }
    }
    out
}

/// `Mf(x) = max_r` of the average of `|f|` over the ball `B(x, r)`.
pub fn hardy_littlewood(f: &SampledFunction) -> Result<SampledFunction> {
    check_single_block(f)?;
    let values: Vec<f64> = f.data().iter().map(|z| z.norm()).collect();
    Ok(real_field(f.grid(), maximal_of_values(f.grid(), &values)))
}

/// `M_r f = (M(|f|^r))^{1/r}`.
pub fn m_r(f: &SampledFunction, r: f64) -> Result<SampledFunction> {
    check_single_block(f)?;
    if !(r > 0.0) {
        return Err(Error::config("r", format!("must be > 0, got {r}")));
    }
    if r == 1.0 {
        return hardy_littlewood(f);
    }
    let values: Vec<f64> = f.data().iter().map(|z| z.norm().powf(r)).collect();
    let m = maximal_of_values(f.grid(), &values);
    Ok(real_field(f.grid(), m.into_iter().map(|v| v.powf(1.0 / r)).collect()))
}

/// Largest spectral magnitude outside `|ξ| ≤ band`, relative to the largest
/// overall.
pub fn band_leakage(f: &SampledFunction, band: f64) -> Result<f64> {
    let spec = f.forward_transform()?;
    let grid = spec.grid();
    let mut xi = vec![0.0; grid.dim()];
    let mut inside = 0.0f64;
    let mut outside = 0.0f64;
    for (flat, z) in spec.data().iter().enumerate() {
        grid.coords(Domain::Frequency, 1, flat, &mut xi);
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= band {
            inside = inside.max(z.norm());
        } else {
            outside = outside.max(z.norm());
        }
    }
    Ok(if inside == 0.0 { f64::INFINITY } else { outside / inside })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeetreResult {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// `sup_z |g(x - z)|/(1 + t|z|)^{d/r}` divided by `M_r g(x)`, for `g` whose
/// spectrum lies in `|ξ| ≤ t`.
pub fn peetre_ratio(g: &SampledFunction, t: f64, r: f64) -> Result<PeetreResult> {
    check_single_block(g)?;
    if !(t > 0.0) {
        return Err(Error::config("t", "band radius must be > 0"));
    }
    let leak = band_leakage(g, t)?;
    if leak > 1e-10 {
        return Err(Error::BandLimit(format!(
            "spectrum outside |ξ| ≤ {t} is {leak:e} of the peak"
        )));
    }
    let grid = g.grid();
    let n = grid.points();
    let d = grid.dim();
    let h = grid.spacing();
    let mr = m_r(g, r)?;
    let abs: Vec<f64> = g.data().iter().map(|z| z.norm()).collect();
    let total = abs.len();
    let exponent = d as f64 / r;
    // Weights depend only on the periodic offset.
    let weights: Vec<f64> = (0..total)
        .map(|off| {
            let mut r2 = 0.0;
            let mut rem = off;
            for _ in 0..d {
                let di = grid.periodic_offset((rem % n) as i64) as f64 * h;
                r2 += di * di;
                rem /= n;
            }
            (1.0 + t * r2.sqrt()).powf(-exponent)
        })
        .collect();
    let ratios: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|x| {
            let xi: Vec<usize> = (0..d).map(|a| (x / n.pow(a as u32)) % n).collect();
            let mut best = 0.0f64;
            for (off, w) in weights.iter().enumerate() {
                let mut y = 0;
                let mut stride = 1;
                let mut rem = off;
                for &c in &xi {
                    y += ((c + n - rem % n) % n) * stride;
                    rem /= n;
                    stride *= n;
                }
                best = best.max(abs[y] * w);
            }
            let denom = mr.data()[x].re;
            if denom > 0.0 {
                best / denom
            } else {
                0.0
            }
        })
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(PeetreResult { ratios, max_ratio })
}

/// `ω_k^N(x) = 2^{kd}(1 + |2^k x|)^{-N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub decay: f64,
    pub k: i32,
}

impl Weight {
    pub fn new(decay: f64, k: i32, dim: usize) -> Result<Self> {
        if !(decay > dim as f64) {
            return Err(Error::config(
                "decay",
                format!("need N > d = {dim} for an integrable weight, got {decay}"),
            ));
        }
        Ok(Weight { decay, k })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let d = x.len() as i32;
        let s = 2f64.powi(self.k);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        2f64.powi(self.k * d) * (1.0 + s * r).powf(-self.decay)
    }

    /// `∫ ω_k^N` over all of `ℝ^d`, independent of `k`.
    pub fn mass(&self, dim: usize) -> f64 {
        let n = self.decay;
        match dim {
            1 => 2.0 / (n - 1.0),
            _ => 2.0 * std::f64::consts::PI / ((n - 1.0) * (n - 2.0)),
        }
    }

    pub fn sampled(&self, grid: &Grid) -> SampledFunction {
        SampledFunction::from_fn(grid, Domain::Space, 1, |x| Complex64::new(self.value(x), 0.0))
    }
}

/// Periodic convolution `ω_k^N ∗ |f|`.
pub fn weighted_smooth(f: &SampledFunction, weight: &Weight) -> Result<SampledFunction> {
    check_single_block(f)?;
    Weight::new(weight.decay, weight.k, f.grid().dim())?;
    let abs = f.map(|z| Complex64::new(z.norm(), 0.0));
    let conv = periodic_convolve(&weight.sampled(f.grid()), &abs)?;
    // Both factors are nonnegative; clear transform roundoff.
    Ok(conv.map(|z| Complex64::new(z.re.max(0.0), 0.0)))
}

/// `max_x (∫_{|y|≤1} |F(x + ρy)|^s dy)^{1/s} / M_r F(x)` with `ρ = 2^{M-j}`,
/// the ball integral taken as a Riemann sum over grid offsets.
///
/// `numerator` replaces `|F|` inside the integral when given (the weighted
/// variant); `F` still defines the maximal function in the denominator.
pub fn local_average_ratio(
    f: &SampledFunction,
    numerator: Option<&SampledFunction>,
    j: i32,
    big_m: i32,
    r: f64,
    s: f64,
) -> Result<f64> {
    check_single_block(f)?;
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::config("r/s", "exponents must be > 0"));
    }
    let grid = f.grid();
    let rho = 2f64.powi(big_m - j);
    let h = grid.spacing();
    let d = grid.dim();
    let source = numerator.unwrap_or(f);
    source.check_compatible(f)?;
    let powered: Vec<f64> = source.data().iter().map(|z| z.norm().powf(s)).collect();
    let mr = m_r(f, r)?;
    let radius_pts = rho / h;
    // Σ_{|z| ≤ ρ} |F(x+z)|^s h^d, rescaled to the unit ball: ρ^{-d}.
    let count_avg = ball_averages(grid, &powered, radius_pts);
    let scale = ball_count(grid, radius_pts) * h.powi(d as i32) * rho.powi(-(d as i32));
    let best = count_avg
        .iter()
        .zip(mr.data())
        .map(|(a, m)| {
            let num = (a * scale).powf(1.0 / s);
            if m.re > 0.0 {
                num / m.re
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(best)
}

fn ball_count(grid: &Grid, r: f64) -> f64 {
    let n = grid.points() as i64;
    let reach = |w: i64| w.min((n - 1) / 2);
    let row = |w: i64| if 2 * w + 1 >= n { n } else { 2 * reach(w) + 1 };
    match grid.dim() {
        1 => row(r.floor() as i64) as f64,
        _ => {
            let a_max = reach(r.floor() as i64);
            (-a_max..=a_max)
                .map(|a| row(((r * r - (a * a) as f64).max(0.0)).sqrt().floor() as i64) as f64)
                .sum()
        }
    }
}

//! Finite-difference estimator for the pointwise derivative bounds
//! `|∂_x^α ∂_ξ^β m| ≤ C (1 + |ξ⃗|)^{m + δ|α| - ρ|β|}`.
//!
//! This is a heuristic sampler, not a proof of class membership: derivatives
//! are taken by adaptive central differences at probe points on dyadic
//! shells, and the growth rate is a least-squares fit over the shells.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{x_derivative, Symbol};
use crate::bumps::radius;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Probe points: `x` positions times frequencies on dyadic shells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub x_points: Vec<Vec<f64>>,
    /// Shell `j` holds probes with `2^j ≤ |ξ⃗| < 2^{j+1}`.
    pub shells: Vec<i32>,
    pub directions: Vec<Vec<f64>>,
    /// Radii `2^j (1 + t)` for each `t`.
    pub radial_offsets: Vec<f64>,
}

impl ProbeSet {
    /// Deterministic probes: three `x` points, shells `2..=8`, eight
    /// quasi-random unit directions in `(ℝ^d)^n`, three radii per shell.
    pub fn standard(dim: usize, linearity: usize) -> Self {
        Self::with_shells(dim, linearity, (2..=8).collect())
    }

    pub fn with_shells(dim: usize, linearity: usize, shells: Vec<i32>) -> Self {
        let nd = dim * linearity;
        let x_points = [0.0, 0.3, -0.45]
            .iter()
            .map(|&t| (0..dim).map(|l| t * (1.0 - 0.2 * l as f64)).collect())
            .collect();
        // Fractional parts of square roots of primes drive the components.
        const PRIMES: [f64; 6] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
        let directions = (0..8)
            .map(|k| {
                let v: Vec<f64> = (0..nd)
                    .map(|c| {
                        let alpha = PRIMES[c].sqrt().fract();
                        (2.0 * std::f64::consts::PI * (k as f64 + 0.5) * alpha).cos()
                    })
                    .collect();
                let r = radius(&v);
                v.iter().map(|c| c / r).collect()
            })
            .collect();
        ProbeSet {
            x_points,
            shells,
            directions,
            radial_offsets: vec![0.13, 0.41, 0.77],
        }
    }

    fn len(&self) -> usize {
        self.x_points.len() * self.shells.len() * self.directions.len() * self.radial_offsets.len()
    }

    /// `(x, ξ⃗, shell index)` of probe `i`.
    fn probe(&self, i: usize) -> (&[f64], Vec<f64>, usize) {
        let nr = self.radial_offsets.len();
        let nv = self.directions.len();
        let ns = self.shells.len();
        let t = self.radial_offsets[i % nr];
        let dir = &self.directions[(i / nr) % nv];
        let s = (i / (nr * nv)) % ns;
        let x = &self.x_points[i / (nr * nv * ns)];
        let r = 2f64.powi(self.shells[s]) * (1.0 + t);
        (x, dir.iter().map(|c| c * r).collect(), s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MihlinOptions {
    pub rho: f64,
    pub delta: f64,
    /// Symbol order `m`.
    pub order: f64,
    pub max_beta_order: usize,
    /// Allowed excess of the fitted exponent before declaring a violation.
    pub tolerance: f64,
}

impl MihlinOptions {
    pub fn new(rho: f64, delta: f64, order: f64) -> Self {
        MihlinOptions {
            rho,
            delta,
            order,
            max_beta_order: 2,
            tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MihlinRow {
    pub alpha_order: usize,
    pub beta_order: usize,
    /// `sup |∂_x^α ∂_ξ^β m|·(1+|ξ⃗|)^{-allowed}` over the probes.
    pub constant: f64,
    /// Fitted growth exponent; `None` when every probe gave exactly 0.
    pub fitted_exponent: Option<f64>,
    pub allowed_exponent: f64,
    pub verdict: Verdict,
    /// Probe attaining `constant`: `(x, ξ⃗)`.
    pub worst_x: Vec<f64>,
    pub worst_xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MihlinReport {
    pub symbol: String,
    pub options: MihlinOptions,
    pub probe_count: usize,
    pub rows: Vec<MihlinRow>,
}

impl MihlinReport {
    pub fn row(&self, alpha_order: usize, beta_order: usize) -> Option<&MihlinRow> {
        self.rows
            .iter()
            .find(|r| r.alpha_order == alpha_order && r.beta_order == beta_order)
    }

    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::Consistent)
    }
}

/// All multi-indices over `coords` coordinates with total order `order`,
/// as per-coordinate multiplicities.
fn multi_indices(coords: usize, order: usize) -> Vec<Vec<usize>> {
    if coords == 1 {
        return vec![vec![order]];
    }
    (0..=order)
        .rev()
        .flat_map(|first| {
            multi_indices(coords - 1, order - first)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// One-dimensional central stencil `(offsets, weights)` for derivative
/// order `k`, before dividing by `h^k`.
fn stencil(k: usize) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        _ => unreachable!("orders above 3 are rejected"),
    }
}

/// Tensor-product central difference of `f` at `xi` with step `h`.
fn difference<F: Fn(&[f64]) -> Complex64>(f: &F, xi: &[f64], beta: &[usize], h: f64) -> Complex64 {
    let active: Vec<(usize, &[(f64, f64)])> = beta
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(c, &k)| (c, stencil(k)))
        .collect();
    let total: usize = beta.iter().sum();
    let mut point = xi.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; active.len()];
    loop {
        let mut w = 1.0;
        for (a, &(c, st)) in active.iter().enumerate() {
            let (off, wt) = st[idx[a]];
            point[c] = xi[c] + off * h;
            w *= wt;
        }
        acc += w * f(&point);
        let mut a = 0;
        loop {
            if a == active.len() {
                return acc / h.powi(total as i32);
            }
            idx[a] += 1;
            if idx[a] < active[a].1.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Adaptive step: halve from `0.1 (1 + |ξ⃗|)` until two consecutive refinements
/// agree to 1e-3 relative (plus a roundoff floor).
fn adaptive_derivative<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    xi: &[f64],
    beta: &[usize],
    scale: f64,
) -> Result<f64> {
    let total: usize = beta.iter().sum();
    if total == 0 {
        return Ok(f(xi).norm());
    }
    let r = radius(xi);
    let mut h = 0.1 * (1.0 + r);
    let h_min = 1e-11 * (1.0 + r);
    let floor = |h: f64| 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) / h.powi(total as i32);
    let mut prev = difference(f, xi, beta, h);
    let mut agreed = 0;
    while h > h_min {
        h *= 0.5;
        let next = difference(f, xi, beta, h);
        let tol = 1e-3 * next.norm().max(prev.norm()) + floor(h);
        if (next - prev).norm() <= tol {
            agreed += 1;
            if agreed == 2 {
                return Ok(next.norm());
            }
        } else {
            agreed = 0;
        }
        prev = next;
    }
    Err(Error::Numerical(format!(
        "step underflow: derivative {beta:?} at ξ⃗ = {xi:?} did not settle above h = {h_min:e}"
    )))
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Estimates derivative bounds for `|α| ≤ 1`, `|β| ≤ max_beta_order`.
///
/// x-derivatives come from the symbol's analytic evaluator when present,
/// otherwise from differences with step `side/(4·points)` of `grid`.
pub fn mihlin_estimate(
    symbol: &dyn Symbol,
    options: MihlinOptions,
    grid: &Grid,
    probes: &ProbeSet,
) -> Result<MihlinReport> {
    if options.max_beta_order > 3 {
        return Err(Error::config("max_beta_order", "at most 3 is supported"));
    }
    if !(0.0..=1.0).contains(&options.rho) || !(0.0..1.0).contains(&options.delta) {
        return Err(Error::config("rho/delta", "need 0 ≤ ρ ≤ 1 and 0 ≤ δ < 1"));
    }
    let count = probes.len();
    if count == 0 {
        return Err(Error::config("probes", "probe set is empty"));
    }
    let meta = symbol.meta();
    let nd = meta.dim * meta.linearity;
    let h_x = grid.side() / (4.0 * grid.points() as f64);
    let x_independent = symbol.x_independent();

    // samples[p][alpha][beta_order] = max over multi-indices of |∂|.
    let alpha_count = 1 + meta.dim;
    let samples: Vec<Vec<Vec<f64>>> = (0..count)
        .into_par_iter()
        .map(|p| -> Result<Vec<Vec<f64>>> {
            let (x, xi, _) = probes.probe(p);
            let scale = symbol.eval(x, &xi).norm().max(1.0);
            (0..alpha_count)
                .map(|a| {
                    (0..=options.max_beta_order)
                        .map(|b| {
                            if a > 0 && x_independent {
                                return Ok(0.0);
                            }
                            let mut worst = 0.0f64;
                            for beta in multi_indices(nd, b) {
                                let v = if a == 0 {
                                    adaptive_derivative(&|z: &[f64]| symbol.eval(x, z), &xi, &beta, scale)?
                                } else {
                                    adaptive_derivative(
                                        &|z: &[f64]| x_derivative(symbol, x, z, a - 1, h_x),
                                        &xi,
                                        &beta,
                                        scale,
                                    )?
                                };
                                worst = worst.max(v);
                            }
                            Ok(worst)
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for alpha_order in 0..=1usize {
        for beta_order in 0..=options.max_beta_order {
            let allowed = options.order + options.delta * alpha_order as f64
                - options.rho * beta_order as f64;
            let value = |p: usize| -> f64 {
                if alpha_order == 0 {
                    samples[p][0][beta_order]
                } else {
                    (1..alpha_count)
                        .map(|a| samples[p][a][beta_order])
                        .fold(0.0, f64::max)
                }
            };
            let mut constant = 0.0f64;
            let mut worst = 0;
            let mut shell_max = vec![0.0f64; probes.shells.len()];
            let mut shell_radius = vec![0.0f64; probes.shells.len()];
            let mut shell_count = vec![0usize; probes.shells.len()];
            for p in 0..count {
                let (_, xi, s) = probes.probe(p);
                let r = radius(&xi);
                let v = value(p);
                let c = v * (1.0 + r).powf(-allowed);
                if c > constant {
                    constant = c;
                    worst = p;
                }
                shell_max[s] = shell_max[s].max(v);
                shell_radius[s] += r;
                shell_count[s] += 1;
            }
            let points: Vec<(f64, f64)> = shell_max
                .iter()
                .zip(shell_radius.iter().zip(&shell_count))
                .filter(|(&m, _)| m > 0.0)
                .map(|(&m, (&r, &c))| ((1.0 + r / c as f64).log2(), m.log2()))
                .collect();
            let fitted = fit_slope(&points);
            let verdict = match fitted {
                Some(f) if f > allowed + options.tolerance => Verdict::Violated,
                _ => Verdict::Consistent,
            };
            let (x, xi, _) = probes.probe(worst);
            rows.push(MihlinRow {
                alpha_order,
                beta_order,
                constant,
                fitted_exponent: fitted,
                allowed_exponent: allowed,
                verdict,
                worst_x: x.to_vec(),
                worst_xi: xi,
            });
        }
    }
    Ok(MihlinReport {
        symbol: meta.name.clone(),
        options,
        probe_count: count,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::symbols::{chirp_symbol, coifman_meyer_symbol, constant_symbol, example4_symbol, XFactor};

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 3).len(), 10);
    }

    #[test]
    fn stencils_are_exact_on_cubics() {
        let f = |z: &[f64]| Complex64::new(z[0].powi(3) + 2.0 * z[0] * z[1] * z[1], 0.0);
        let p = [0.7, -1.3];
        assert!((difference(&f, &p, &[3, 0], 0.1).re - 6.0).abs() < 1e-9);
        assert!((difference(&f, &p, &[1, 2], 0.1).re - 4.0).abs() < 1e-9);
        assert!((difference(&f, &p, &[1, 1], 0.1).re - 4.0 * p[1]).abs() < 1e-9);
    }

    #[test]
    fn constant_symbol_is_consistent() {
        let grid = make_grid(1, 2, 8.0, 64).unwrap();
        let m = constant_symbol(1.0, 1, 2);
        let report = mihlin_estimate(&m, MihlinOptions::new(0.5, 0.0, 0.0), &grid, &ProbeSet::standard(1, 2)).unwrap();
        assert!(report.consistent());
        assert!((report.row(0, 0).unwrap().constant - 1.0).abs() < 1e-12);
        for row in &report.rows {
            if row.alpha_order == 1 || row.beta_order > 0 {
                assert_eq!(row.constant, 0.0);
                assert_eq!(row.fitted_exponent, None);
            }
        }
    }

    #[test]
    fn chirp_violates_every_rho() {
        let grid = make_grid(1, 1, 8.0, 64).unwrap();
        let m = chirp_symbol(12, 1, 1);
        for rho in [0.0, 0.5, 1.0] {
            let report = mihlin_estimate(&m, MihlinOptions::new(rho, 0.0, 0.0), &grid, &ProbeSet::standard(1, 1)).unwrap();
            let row = report.row(0, 1).unwrap();
            assert_eq!(row.verdict, Verdict::Violated, "ρ = {rho}");
            let slope = row.fitted_exponent.unwrap();
            assert!((slope - 1.0).abs() < 0.15, "slope {slope}");
        }
    }

    #[test]
    fn coifman_meyer_fits_class_s10() {
        let grid = make_grid(1, 2, 8.0, 64).unwrap();
        let m = coifman_meyer_symbol(0.25, 1, 2).unwrap();
        let report = mihlin_estimate(&m, MihlinOptions::new(1.0, 0.0, 0.0), &grid, &ProbeSet::standard(1, 2)).unwrap();
        assert!(report.consistent(), "{report:#?}");
        for b in 1..=2 {
            let fit = report.row(0, b).unwrap().fitted_exponent.unwrap();
            assert!((fit + b as f64).abs() < 0.1 * b as f64, "|β| = {b}: {fit}");
        }
    }

    #[test]
    fn example4_small_a_lands_in_its_class() {
        let grid = make_grid(1, 1, 8.0, 64).unwrap();
        let m = example4_symbol(0.5, 1.0, XFactor::None, 12, 1, 1).unwrap();
        let report = mihlin_estimate(&m, MihlinOptions::new(0.5, 0.0, -1.0), &grid, &ProbeSet::standard(1, 1)).unwrap();
        assert!(report.consistent(), "{report:#?}");
        let m = example4_symbol(1.5, 1.0, XFactor::None, 12, 1, 1).unwrap();
        for rho in [0.0, 1.0] {
            let report = mihlin_estimate(&m, MihlinOptions::new(rho, 0.0, -1.0), &grid, &ProbeSet::standard(1, 1)).unwrap();
            assert!(!report.consistent(), "ρ = {rho}");
        }
    }
}

//! Evaluation of `T_m(f_1, …, f_n)(x) = ∫ e^{2πi⟨x, ξ_1+⋯+ξ_n⟩} m(x, ξ⃗) Π f̂_i(ξ_i) dξ⃗`
//! on the grid, its dyadic pieces, and the three-way output-frequency split.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::{factored_sum, lemma311_factors, radius, BumpFamily, Cushion, FactorTerm};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, SampledFunction};
use crate::symbols::Symbol;

/// Kernel evaluations the direct strategy may spend on one call.
pub const DIRECT_COMPLEXITY_LIMIT: u128 = 1 << 32;

/// Offsets of the output split, fixed by the support arithmetic.
const SPLIT_HIGH: i32 = 10;
const SPLIT_LOW: i32 = 10;
const SPLIT_MATCHED: i32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Per-`x` lattice sum; works for every symbol.
    Direct,
    /// Collapse onto `η = ξ_1 + ⋯ + ξ_n`, then one inverse transform.
    XIndependentFast,
}

#[derive(Clone)]
pub struct OperatorPlan {
    grid: Grid,
    symbol: Arc<dyn Symbol>,
    levels: u32,
    output_levels: Option<u32>,
    strategy: Strategy,
    cushion: Cushion,
}

impl std::fmt::Debug for OperatorPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPlan")
            .field("grid", &self.grid)
            .field("symbol", &self.symbol.meta().name)
            .field("levels", &self.levels)
            .field("output_levels", &self.output_levels)
            .field("strategy", &self.strategy)
            .finish()
    }
}

impl OperatorPlan {
    /// `levels` is the symbol truncation `J`; `output_levels` the output
    /// truncation `K` of the split, if one is wanted.
    pub fn new(
        grid: &Grid,
        symbol: Arc<dyn Symbol>,
        levels: u32,
        output_levels: Option<u32>,
        strategy: Strategy,
    ) -> Result<Self> {
        let meta = symbol.meta();
        if meta.dim != grid.dim() || meta.linearity != grid.linearity() {
            return Err(Error::GridMismatch(format!(
                "symbol `{}` is for d={}, n={}; grid has d={}, n={}",
                meta.name,
                meta.dim,
                meta.linearity,
                grid.dim(),
                grid.linearity()
            )));
        }
        if 2f64.powi(levels as i32 + 1) > grid.max_frequency() {
            return Err(Error::config(
                "levels",
                format!(
                    "2^(J+1) = {} exceeds the grid's max frequency {}",
                    2f64.powi(levels as i32 + 1),
                    grid.max_frequency()
                ),
            ));
        }
        if let Some(k) = output_levels {
            if k < levels + SPLIT_HIGH as u32 {
                return Err(Error::config(
                    "output_levels",
                    format!("K = {k} must be at least J + {SPLIT_HIGH} = {}", levels + SPLIT_HIGH as u32),
                ));
            }
        }
        match strategy {
            Strategy::XIndependentFast if !symbol.x_independent() => {
                return Err(Error::config(
                    "strategy",
                    format!("`{}` depends on x; use the direct strategy", meta.name),
                ));
            }
            Strategy::Direct => {
                let cost = grid.sample_count(grid.linearity() + 1) as u128;
                if cost > DIRECT_COMPLEXITY_LIMIT {
                    return Err(Error::config(
                        "strategy",
                        format!(
                            "direct evaluation needs {cost} kernel evaluations (limit 2^32); \
                             use the fast strategy or fewer points"
                        ),
                    ));
                }
            }
            _ => {}
        }
        Ok(OperatorPlan {
            grid: grid.clone(),
            symbol,
            levels,
            output_levels,
            strategy,
            cushion: Cushion::default_for(grid.linearity()),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &Arc<dyn Symbol> {
        &self.symbol
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn output_levels(&self) -> Option<u32> {
        self.output_levels
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Result<Self> {
        let mut plan = Self::new(&self.grid, self.symbol.clone(), self.levels, self.output_levels, strategy)?;
        plan.cushion = self.cushion;
        Ok(plan)
    }

    pub fn with_cushion(mut self, cushion: Cushion) -> Self {
        self.cushion = cushion;
        self
    }

    pub fn cushion(&self) -> Cushion {
        self.cushion
    }

    fn check_inputs(&self, fs: &[SampledFunction]) -> Result<()> {
        if fs.len() != self.grid.linearity() {
            return Err(Error::GridMismatch(format!(
                "expected {} inputs, got {}",
                self.grid.linearity(),
                fs.len()
            )));
        }
        for (i, f) in fs.iter().enumerate() {
            if f.grid() != &self.grid {
                return Err(Error::GridMismatch(format!("input {i} lives on a different grid")));
            }
            if f.domain() != Domain::Space {
                return Err(Error::Domain {
                    expected: Domain::Space,
                    got: f.domain(),
                });
            }
            if f.arity() != 1 {
                return Err(Error::GridMismatch(format!("input {i} must be a function on ℝ^d")));
            }
        }
        Ok(())
    }
}

/// Nonzero lattice points of `Π f̂_i(ξ_i)·window(ξ⃗)`, stored flat.
struct Support {
    /// `n·d` frequency coordinates per point.
    xi: Vec<f64>,
    /// `d` integer labels of `η = Σ ξ_i` per point.
    eta: Vec<i64>,
    /// `Π f̂_i · window · L^{-nd}`.
    coeff: Vec<Complex64>,
}

fn collect_support<W>(grid: &Grid, spectra: &[SampledFunction], window: &W) -> Support
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    let d = grid.dim();
    let n = spectra.len();
    let per_block = grid.sample_count(1);
    let scale = grid.frequency_spacing().powi((n * d) as i32);
    // Blockwise nonzero lists keep the enumeration proportional to the support.
    let nonzero: Vec<Vec<usize>> = spectra
        .iter()
        .map(|s| (0..per_block).filter(|&k| s.data()[k] != Complex64::new(0.0, 0.0)).collect())
        .collect();
    let count: usize = nonzero.iter().map(|v| v.len()).product();
    let chunks: Vec<Support> = (0..count)
        .into_par_iter()
        .chunks(4096)
        .map(|ids| {
            let mut out = Support {
                xi: Vec::with_capacity(ids.len() * n * d),
                eta: Vec::with_capacity(ids.len() * d),
                coeff: Vec::with_capacity(ids.len()),
            };
            let mut xi = vec![0.0; n * d];
            let mut idx = vec![0usize; d];
            for id in ids {
                let mut rem = id;
                let mut prod = Complex64::new(scale, 0.0);
                let mut eta = vec![0i64; d];
                for b in (0..n).rev() {
                    let list = &nonzero[b];
                    let k = list[rem % list.len()];
                    rem /= list.len();
                    prod *= spectra[b].data()[k];
                    grid.unflatten(k, d, &mut idx);
                    for a in 0..d {
                        xi[b * d + a] = grid.axis_frequency(idx[a]);
                        eta[a] += grid.frequency_integer(idx[a]);
                    }
                }
                let w = window(&xi);
                if w == 0.0 {
                    continue;
                }
                out.xi.extend_from_slice(&xi);
                out.eta.extend_from_slice(&eta);
                out.coeff.push(prod * w);
            }
            out
        })
        .collect();
    let mut support = Support {
        xi: Vec::new(),
        eta: Vec::new(),
        coeff: Vec::new(),
    };
    for c in chunks {
        support.xi.extend(c.xi);
        support.eta.extend(c.eta);
        support.coeff.extend(c.coeff);
    }
    support
}

fn evaluate<W>(plan: &OperatorPlan, fs: &[SampledFunction], window: W) -> Result<SampledFunction>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    plan.check_inputs(fs)?;
    let grid = &plan.grid;
    let spectra = fs
        .iter()
        .map(|f| f.forward_transform())
        .collect::<Result<Vec<_>>>()?;
    let support = collect_support(grid, &spectra, &window);
    let d = grid.dim();
    let nd = d * grid.linearity();
    let npts = grid.points();
    let symbol = plan.symbol.as_ref();
    match plan.strategy {
        Strategy::XIndependentFast => {
            // G(η) = L^{d} Σ_{Σξ_i = η} m Π f̂_i, then T = inverse transform of G;
            // wrapping η modulo the lattice is exact at grid points for even N.
            let x0 = vec![0.0; d];
            let values: Vec<Complex64> = (0..support.coeff.len())
                .into_par_iter()
                .map(|p| support.coeff[p] * symbol.eval(&x0, &support.xi[p * nd..(p + 1) * nd]))
                .collect();
            let mut g = vec![Complex64::new(0.0, 0.0); grid.sample_count(1)];
            let lift = grid.side().powi(d as i32);
            let mut idx = vec![0usize; d];
            for (p, v) in values.iter().enumerate() {
                for a in 0..d {
                    idx[a] = grid.wrapped_frequency_index(support.eta[p * d + a]);
                }
                g[grid.flatten(&idx)] += v * lift;
            }
            SampledFunction::new(grid, Domain::Frequency, 1, g)?.inverse_transform()
        }
        Strategy::Direct => {
            let roots: Vec<Complex64> = (0..npts)
                .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / npts as f64))
                .collect();
            let x_independent = symbol.x_independent();
            let shared: Option<Vec<Complex64>> = x_independent.then(|| {
                let x0 = vec![0.0; d];
                (0..support.coeff.len())
                    .into_par_iter()
                    .map(|p| support.coeff[p] * symbol.eval(&x0, &support.xi[p * nd..(p + 1) * nd]))
                    .collect()
            });
            let data: Vec<Complex64> = (0..grid.sample_count(1))
                .into_par_iter()
                .map_init(
                    || (vec![0usize; d], vec![0.0; d]),
                    |(idx, x), flat| {
                        grid.unflatten(flat, d, idx);
                        for a in 0..d {
                            x[a] = grid.axis_coord(idx[a]);
                        }
                        let mut acc = Complex64::new(0.0, 0.0);
                        for p in 0..support.coeff.len() {
                            // e^{2πi x·η} at grid x: Π_a (-1)^{K_a} ω^{i_a K_a}.
                            let mut phase = Complex64::new(1.0, 0.0);
                            for a in 0..d {
                                let k = support.eta[p * d + a];
                                let r = (idx[a] as i64 * k).rem_euclid(npts as i64) as usize;
                                phase *= if k.rem_euclid(2) == 0 { roots[r] } else { -roots[r] };
                            }
                            let c = match &shared {
                                Some(v) => v[p],
                                None => support.coeff[p] * symbol.eval(x, &support.xi[p * nd..(p + 1) * nd]),
                            };
                            acc += phase * c;
                        }
                        acc
                    },
                )
                .collect();
            SampledFunction::new(grid, Domain::Space, 1, data)
        }
    }
}

/// `T_m(f_1, …, f_n)` sampled at every grid point.
pub fn apply(plan: &OperatorPlan, fs: &[SampledFunction]) -> Result<SampledFunction> {
    evaluate(plan, fs, |_| 1.0)
}

/// The operator with symbol `m·Φ̂`.
pub fn low_piece(plan: &OperatorPlan, fs: &[SampledFunction]) -> Result<SampledFunction> {
    let fam = BumpFamily::standard();
    evaluate(plan, fs, |xi| fam.big_phi(radius(xi)))
}

fn check_level(plan: &OperatorPlan, j: u32) -> Result<()> {
    if j > plan.levels {
        return Err(Error::config(
            "j",
            format!("level {j} outside 0..={}", plan.levels),
        ));
    }
    Ok(())
}

/// Factor terms of the band window at level `j` for this plan.
pub fn band_factors(plan: &OperatorPlan, j: u32) -> Result<Vec<FactorTerm>> {
    lemma311_factors(&plan.grid, j as i32, plan.cushion)
}

/// The operator with symbol `m(x, ξ⃗)·Ψ̂(2^{-j}ξ⃗)·Σ_terms Π_i Φ̂ⁱ(ξ_i)·Φ̂ⁿ⁺¹(-Σξ_i)`.
pub fn dyadic_piece(plan: &OperatorPlan, j: u32, fs: &[SampledFunction]) -> Result<SampledFunction> {
    check_level(plan, j)?;
    let terms = band_factors(plan, j)?;
    let fam = BumpFamily::standard();
    let d = plan.grid.dim();
    evaluate(plan, fs, |xi| {
        let band = fam.big_psi_j(j as i32, radius(xi));
        if band == 0.0 {
            0.0
        } else {
            band * factored_sum(&terms, &fam, xi, d)
        }
    })
}

/// The operator with the plain window `m(x, ξ⃗)·Ψ̂(2^{-j}ξ⃗)`.
pub fn dyadic_piece_unfactored(
    plan: &OperatorPlan,
    j: u32,
    fs: &[SampledFunction],
) -> Result<SampledFunction> {
    check_level(plan, j)?;
    let fam = BumpFamily::standard();
    evaluate(plan, fs, |xi| fam.big_psi_j(j as i32, radius(xi)))
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub first: SampledFunction,
    pub second: SampledFunction,
    pub third: SampledFunction,
    /// Output spectrum of each `j`-summand of the second term.
    pub second_spectra: Vec<SampledFunction>,
    /// `Σ_j T^j`.
    pub pieces_sum: SampledFunction,
    pub diagnostics: SplitDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitDiagnostics {
    /// `‖(I + II + III) - P_{≤2^K}(Σ_j T^j)‖₂ / ‖Σ_j T^j‖₂`.
    pub reconstruction_error: f64,
    /// `‖Σ_j T^j - P_{≤2^K}(Σ_j T^j)‖₂ / ‖Σ_j T^j‖₂`.
    pub energy_outside_band: f64,
    pub levels: u32,
    pub output_levels: u32,
}

fn relative_l2(a: &SampledFunction, b: &SampledFunction) -> f64 {
    let num: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.data().iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Splits `Σ_{j≤J} T^j` by output frequency: `I` collects `ψ_k` with
/// `k ≥ j + 10`, `II` the low-pass `φ_{j-10}`, `III` the matched bands
/// `|k - j| ≤ 9`.
pub fn split(plan: &OperatorPlan, fs: &[SampledFunction]) -> Result<SplitResult> {
    let k_top = plan.output_levels.ok_or_else(|| {
        Error::config("output_levels", "the split needs an output truncation K ≥ J + 10")
    })? as i32;
    let grid = &plan.grid;
    let fam = BumpFamily::standard();
    let d = grid.dim();
    let zero = || vec![Complex64::new(0.0, 0.0); grid.sample_count(1)];
    let (mut s1, mut s2, mut s3, mut total, mut filtered) = (zero(), zero(), zero(), zero(), zero());
    let mut second_spectra = Vec::new();
    let mut eta = vec![0.0; d];
    for j in 0..=plan.levels as i32 {
        let piece = dyadic_piece(plan, j as u32, fs)?.forward_transform()?;
        let mut own2 = zero();
        for (flat, z) in piece.data().iter().enumerate() {
            grid.coords(Domain::Frequency, 1, flat, &mut eta);
            let r = radius(&eta);
            let high: f64 = (j + SPLIT_HIGH..=k_top).map(|k| fam.psi_k(k, r)).sum();
            let low = fam.phi_k(j - SPLIT_LOW, r);
            let matched: f64 = (j - SPLIT_MATCHED..=j + SPLIT_MATCHED).map(|k| fam.psi_k(k, r)).sum();
            s1[flat] += z * high;
            own2[flat] = z * low;
            s2[flat] += z * low;
            s3[flat] += z * matched;
            total[flat] += z;
            filtered[flat] += z * fam.phi_k(k_top, r);
        }
        second_spectra.push(SampledFunction::new(grid, Domain::Frequency, 1, own2)?);
    }
    let back = |v: Vec<Complex64>| SampledFunction::new(grid, Domain::Frequency, 1, v)?.inverse_transform();
    let first = back(s1)?;
    let second = back(s2)?;
    let third = back(s3)?;
    let pieces_sum = back(total)?;
    let filtered = back(filtered)?;
    let sum = first
        .zip_with(&second, |a, b| a + b)?
        .zip_with(&third, |a, b| a + b)?;
    let norm: f64 = pieces_sum.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diff = |a: &SampledFunction, b: &SampledFunction| -> f64 {
        let e: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 { e } else { e / norm }
    };
    let diagnostics = SplitDiagnostics {
        reconstruction_error: diff(&sum, &filtered),
        energy_outside_band: diff(&pieces_sum, &filtered),
        levels: plan.levels,
        output_levels: k_top as u32,
    };
    Ok(SplitResult {
        first,
        second,
        third,
        second_spectra,
        pieces_sum,
        diagnostics,
    })
}

/// Relative L² distance `‖a - b‖ / ‖b‖` on the sample arrays.
pub fn relative_error(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(relative_l2(a, b))
}

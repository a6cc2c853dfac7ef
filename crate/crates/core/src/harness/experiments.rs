//! Seeded test ensembles and the experiments behind each CLI subcommand.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::{radius, smooth_step};
use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, SampledFunction};
use crate::norms::{
    hp_quasinorm, log2_slope, lp_quasinorm, symbol_norm_s_delta, BandGrid, SymbolNormOptions,
    SymbolNormReport,
};
use crate::operator::{split, OperatorPlan, SplitDiagnostics};
use crate::regions::{in_a, in_b_intersection, kato_condition, ExponentPoint, Membership};
use crate::symbols::Symbol;

use super::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Frequency band `[2^lo, 2^hi]` of a random test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// `None` keeps the origin in the band.
    pub lo: Option<i32>,
    pub hi: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// Smooth rise and fall inside the band.
    Smooth,
    /// Indicator of the open band.
    Flat,
}

impl Band {
    fn weight(&self, r: f64, envelope: Envelope) -> f64 {
        let hi = 2f64.powi(self.hi);
        let lo = self.lo.map(|l| 2f64.powi(l));
        if r >= hi || lo.is_some_and(|l| r <= l) {
            return 0.0;
        }
        match envelope {
            Envelope::Flat => 1.0,
            Envelope::Smooth => {
                let fall = 1.0 - smooth_step((r - 0.75 * hi) / (0.25 * hi));
                let rise = lo.map_or(1.0, |l| smooth_step((r - l) / l));
                fall * rise
            }
        }
    }
}

/// Complex Gaussian coefficients on the band, shaped by `envelope`, returned
/// in the space domain. Deterministic in `seed`.
pub fn random_test_function(grid: &Grid, seed: u64, band: Band, envelope: Envelope) -> Result<SampledFunction> {
    if let Some(lo) = band.lo {
        if lo >= band.hi {
            return Err(Error::config("band", format!("empty band [2^{lo}, 2^{}]", band.hi)));
        }
    }
    if 2f64.powi(band.hi) > grid.max_frequency() * (grid.dim() as f64).sqrt() {
        return Err(Error::config(
            "band",
            format!("2^{} exceeds the grid's frequency range", band.hi),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let mut xi = vec![0.0; d];
    let mut data = Vec::with_capacity(grid.sample_count(1));
    let mut any = false;
    for flat in 0..grid.sample_count(1) {
        // Draw for every lattice point so the stream does not depend on the band.
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        grid.coords(Domain::Frequency, 1, flat, &mut xi);
        let w = band.weight(radius(&xi), envelope);
        any |= w > 0.0;
        data.push(Complex64::new(re, im) * w);
    }
    if !any {
        return Err(Error::config("band", "no lattice frequency falls inside the band"));
    }
    SampledFunction::new(grid, Domain::Frequency, 1, data)?.inverse_transform()
}

/// `Σ_m c_m (φ_k ∗ δ_{x_m})`: a few kernels at level `k` with Gaussian weights
/// and centres uniform in `[-spread, spread]^d`. Spectrum inside `|ξ| ≤ 2^{k+1}`.
pub fn localized_test_function(grid: &Grid, seed: u64, k: i32, bumps: usize, spread: f64) -> Result<SampledFunction> {
    if 2f64.powi(k + 1) > grid.max_frequency() {
        return Err(Error::config("k", format!("2^{} exceeds the grid's max frequency", k + 1)));
    }
    if bumps == 0 || !(spread >= 0.0) || spread > 0.5 * grid.side() {
        return Err(Error::config("bumps", "need at least one bump inside the box"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let centres: Vec<(Complex64, Vec<f64>)> = (0..bumps)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-spread..=spread)).collect();
            (Complex64::new(re, im), x)
        })
        .collect();
    let fam = crate::bumps::BumpFamily::standard();
    let mut xi = vec![0.0; d];
    let data: Vec<Complex64> = (0..grid.sample_count(1))
        .map(|flat| {
            grid.coords(Domain::Frequency, 1, flat, &mut xi);
            let w = fam.phi_k(k, radius(&xi));
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            centres
                .iter()
                .map(|(c, x)| {
                    let phase: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                    c * Complex64::from_polar(w, -2.0 * std::f64::consts::PI * phase)
                })
                .sum()
        })
        .collect();
    SampledFunction::new(grid, Domain::Frequency, 1, data)?.inverse_transform()
}

/// Rescales `f` to unit `h^p` quasi-norm.
pub fn normalize_hp(f: &SampledFunction, p: f64, scale_count: u32) -> Result<SampledFunction> {
    let norm = hp_quasinorm(f, p, scale_count)?;
    if !(norm > 0.0) {
        return Err(Error::Numerical("cannot normalize a zero function".into()));
    }
    Ok(f.map(|z| z / norm))
}

/// Seed of input `i` of sample `k` in group `g`; groups never share seeds.
pub fn sample_seed(base: u64, group: usize, size: usize, k: usize, n: usize, i: usize) -> u64 {
    base.wrapping_add(((group * size + k) * n + i) as u64)
}

/// The `n` inputs of one ensemble sample.
pub fn ensemble_inputs(config: &ExperimentConfig, grid: &Grid, group: usize, k: usize) -> Result<Vec<SampledFunction>> {
    let e = &config.ensemble;
    let n = grid.linearity();
    let band = Band {
        lo: e.band_lo,
        hi: e.band_hi,
    };
    (0..n)
        .map(|i| {
            let f = random_test_function(grid, sample_seed(e.seed, group, e.size, k, n, i), band, Envelope::Smooth)?;
            if e.normalize {
                normalize_hp(&f, config.norm.p_i[i], config.norm.scale_count)
            } else {
                Ok(f)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max: f64,
    pub median: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Summary {
            max: sorted[n - 1],
            median,
            mean: values.iter().sum::<f64>() / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: usize,
    pub first_seed: u64,
    pub ratios: Vec<f64>,
    pub summary: Summary,
    /// `max / median` of this group.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdicts {
    /// `Σ max(1/p_i, 1/2) < s/d`.
    pub in_a_at_s_over_d: Membership,
    pub kato: Membership,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that varies between reruns.
    pub timestamp: u64,
    /// All baselines here are produced by this tool, not taken from elsewhere.
    pub baseline: String,
}

impl Provenance {
    pub fn new(config: &ExperimentConfig) -> Self {
        Provenance {
            schema_version: SCHEMA_VERSION,
            config_hash: config.hash(),
            seed: config.ensemble.seed,
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            baseline: "self-generated".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub provenance: Provenance,
    pub symbol: String,
    pub p: f64,
    pub p_i: Vec<f64>,
    pub s: f64,
    pub delta: f64,
    pub groups: Vec<GroupReport>,
    pub summary: Summary,
    pub symbol_norm: f64,
    /// `summary.max / symbol_norm`.
    pub normalized_sup_ratio: f64,
    /// Every group has `max / median < STABILITY_FACTOR`.
    pub stable: bool,
    pub regions: RegionVerdicts,
    /// Resolution reductions and truncations applied by the experiment.
    pub degradations: Vec<String>,
}

/// Cross-ensemble stability threshold on `max / median`.
pub const STABILITY_FACTOR: f64 = 3.0;

fn x_probes(grid: &Grid) -> Vec<Vec<f64>> {
    let quarter = 0.25 * grid.side();
    [-quarter, 0.0, quarter]
        .iter()
        .map(|&x| vec![x; grid.dim()])
        .collect()
}

fn norm_options(config: &ExperimentConfig, s: f64, j_max: u32, band: BandGrid) -> SymbolNormOptions {
    SymbolNormOptions {
        s,
        delta: config.norm.delta,
        j_max,
        band,
        fd_step: config.norm.fd_step,
    }
}

/// Ratios `‖T_m f⃗‖_{L^p} / Π ‖f_i‖_{h^{p_i}}` over the configured ensemble.
pub fn boundedness_experiment(config: &ExperimentConfig) -> Result<BoundednessReport> {
    config.validate()?;
    let grid = config.grid()?;
    let symbol = config.symbol()?;
    let plan = OperatorPlan::new(&grid, symbol.clone(), config.norm.levels, None, config.strategy(symbol.as_ref()))?;
    let e = &config.ensemble;
    let p = config.output_exponent();
    let samples: Vec<(usize, usize)> = (0..e.groups).flat_map(|g| (0..e.size).map(move |k| (g, k))).collect();
    let ratios: Vec<f64> = samples
        .par_iter()
        .enumerate()
        .map(|(index, &(g, k))| {
            sample_ratio(config, &grid, &plan, g, k, p).map_err(|e| Error::Sample {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = ratios.iter().position(|r| !r.is_finite()) {
        return Err(Error::Sample {
            index: bad,
            source: Box::new(Error::Numerical(format!("ratio {} is not finite", ratios[bad]))),
        });
    }
    let groups: Vec<GroupReport> = ratios
        .chunks(e.size)
        .enumerate()
        .map(|(g, chunk)| {
            let summary = Summary::of(chunk);
            GroupReport {
                group: g,
                first_seed: sample_seed(e.seed, g, e.size, 0, grid.linearity(), 0),
                ratios: chunk.to_vec(),
                spread: summary.max / summary.median,
                summary,
            }
        })
        .collect();
    let summary = Summary::of(&ratios);
    let j_max = config.norm.levels;
    let norm = symbol_norm_s_delta(
        symbol.as_ref(),
        &norm_options(config, config.norm.s, j_max, config.norm.band),
        &x_probes(&grid),
    )?;
    let point = ExponentPoint::from_exponents(&config.norm.p_i)?;
    let d = grid.dim();
    let regions = RegionVerdicts {
        in_a_at_s_over_d: in_a(&point, &(config.norm.s / d as f64)),
        kato: kato_condition(&point, &config.norm.order, d),
        order: config.norm.order,
    };
    let degradations = vec![
        format!("symbol bands truncated at J = {j_max}"),
        format!("symbol norm maximized over {} x-probes", x_probes(&grid).len()),
        format!("h^p maximal function uses {} dyadic scales", config.norm.scale_count + 1),
    ];
    Ok(BoundednessReport {
        provenance: Provenance::new(config),
        symbol: symbol.meta().name.clone(),
        p,
        p_i: config.norm.p_i.clone(),
        s: config.norm.s,
        delta: config.norm.delta,
        stable: groups.iter().all(|g| g.spread < STABILITY_FACTOR),
        groups,
        normalized_sup_ratio: summary.max / norm.total,
        symbol_norm: norm.total,
        summary,
        regions,
        degradations,
    })
}

fn sample_ratio(
    config: &ExperimentConfig,
    grid: &Grid,
    plan: &OperatorPlan,
    group: usize,
    k: usize,
    p: f64,
) -> Result<f64> {
    let inputs = ensemble_inputs(config, grid, group, k)?;
    let out = crate::operator::apply(plan, &inputs)?;
    let num = lp_quasinorm(&out, p)?;
    let mut den = 1.0;
    for (f, &pi) in inputs.iter().zip(&config.norm.p_i) {
        den *= hp_quasinorm(f, pi, config.norm.scale_count)?;
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScanRow {
    pub s: f64,
    pub report: SymbolNormReport,
    /// Least-squares slope of `log₂` band totals against `j`.
    pub slope: Option<f64>,
}

/// Symbol norms for each `s` in `s_list`, with slope fits over the bands.
pub fn norm_scan(
    symbol: &dyn Symbol,
    s_list: &[f64],
    j_max: u32,
    delta: f64,
    band: BandGrid,
    x_probes: &[Vec<f64>],
) -> Result<Vec<NormScanRow>> {
    s_list
        .iter()
        .map(|&s| {
            let opts = SymbolNormOptions {
                s,
                delta,
                j_max,
                band,
                fd_step: Some(1e-4),
            };
            let report = symbol_norm_s_delta(symbol, &opts, x_probes)?;
            let levels: Vec<f64> = report.bands.iter().map(|b| b.j as f64).collect();
            let slope = log2_slope(&levels, &report.band_totals());
            Ok(NormScanRow { s, report, slope })
        })
        .collect()
}

/// The symbol norm report for the configured `s`.
pub fn norm_report(config: &ExperimentConfig) -> Result<SymbolNormReport> {
    let grid = config.grid()?;
    let symbol = config.symbol()?;
    symbol_norm_s_delta(
        symbol.as_ref(),
        &norm_options(config, config.norm.s, config.norm.levels, config.norm.band),
        &x_probes(&grid),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub coords: Vec<f64>,
    pub in_a: Membership,
    pub in_b: Membership,
}

/// Exact sweep of `k / q` coordinates over `(0, max]^n`.
pub fn region_sweep(config: &ExperimentConfig) -> Result<Vec<RegionRow>> {
    let r = &config.region;
    let q = r.step_denominator;
    let steps = (r.max * q) as usize;
    let total = steps
        .checked_pow(r.n as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::config("region", "sweep exceeds 2^24 points"))?;
    let alpha = Ratio::approximate_float(r.alpha)
        .filter(|a: &Ratio<i64>| (*a.numer() as f64 / *a.denom() as f64) == r.alpha)
        .ok_or_else(|| Error::config("region.alpha", "not representable as a ratio"))?;
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let coords: Vec<Ratio<i64>> = (0..r.n)
                .map(|_| {
                    let k = (rem % steps) as i64 + 1;
                    rem /= steps;
                    Ratio::new(k, q)
                })
                .collect();
            let point = ExponentPoint::new(coords.clone())?;
            Ok(RegionRow {
                coords: coords.iter().map(|c| *c.numer() as f64 / *c.denom() as f64).collect(),
                in_a: in_a(&point, &alpha),
                in_b: in_b_intersection(&point, &alpha)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub provenance: Provenance,
    pub symbol: String,
    pub diagnostics: SplitDiagnostics,
    /// `‖I‖₂, ‖II‖₂, ‖III‖₂, ‖Σ_j T^j‖₂` on the sample arrays.
    pub l2_first: f64,
    pub l2_second: f64,
    pub l2_third: f64,
    pub l2_pieces: f64,
    /// Every `j`-summand of II vanishes exactly beyond `2^{j-9}`.
    pub second_support_exact: bool,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Reconstruction tolerance of the output split.
pub const SPLIT_TOLERANCE: f64 = 1e-6;

/// Runs the I/II/III split on the first ensemble sample.
pub fn decompose(config: &ExperimentConfig) -> Result<DecomposeReport> {
    let grid = config.grid()?;
    let symbol: Arc<dyn Symbol> = config.symbol()?;
    let plan = OperatorPlan::new(
        &grid,
        symbol.clone(),
        config.norm.levels,
        Some(config.norm.output_levels),
        config.strategy(symbol.as_ref()),
    )?;
    let inputs = ensemble_inputs(config, &grid, 0, 0)?;
    let parts = split(&plan, &inputs)?;
    let l2 = |f: &SampledFunction| f.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut eta = vec![0.0; grid.dim()];
    let mut exact = true;
    for (j, spec) in parts.second_spectra.iter().enumerate() {
        for (k, z) in spec.data().iter().enumerate() {
            grid.coords(Domain::Frequency, 1, k, &mut eta);
            if radius(&eta) > 2f64.powi(j as i32 - 9) && *z != Complex64::new(0.0, 0.0) {
                exact = false;
            }
        }
    }
    Ok(DecomposeReport {
        provenance: Provenance::new(config),
        symbol: symbol.meta().name.clone(),
        l2_first: l2(&parts.first),
        l2_second: l2(&parts.second),
        l2_third: l2(&parts.third),
        l2_pieces: l2(&parts.pieces_sum),
        second_support_exact: exact,
        tolerance: SPLIT_TOLERANCE,
        within_tolerance: parts.diagnostics.reconstruction_error < SPLIT_TOLERANCE && exact,
        diagnostics: parts.diagnostics,
    })
}

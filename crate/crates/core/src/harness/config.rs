//! Experiment configuration: one TOML file per experiment.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid};
use crate::norms::BandGrid;
use crate::operator::Strategy;
use crate::symbols::{build_symbol, k_max_for, Symbol, SymbolParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub linearity: usize,
    pub points: usize,
    pub side: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dim: 1,
            linearity: 2,
            points: 128,
            side: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolSection {
    pub name: String,
    pub params: SymbolParams,
}

impl Default for SymbolSection {
    fn default() -> Self {
        SymbolSection {
            name: "coifman_meyer".into(),
            params: SymbolParams::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSection {
    pub s: f64,
    pub delta: f64,
    /// Output exponent; derived from `p_i` when absent.
    pub p: Option<f64>,
    pub p_i: Vec<f64>,
    pub scale_count: u32,
    /// Symbol truncation `J`.
    pub levels: u32,
    /// Output truncation `K`.
    pub output_levels: u32,
    /// Symbol order `m` used by the region verdicts.
    pub order: f64,
    /// Sobolev orders scanned by `norm`.
    pub s_list: Vec<f64>,
    pub band: BandGrid,
    pub fd_step: Option<f64>,
}

impl Default for NormSection {
    fn default() -> Self {
        NormSection {
            s: 1.5,
            delta: 0.0,
            p: None,
            p_i: vec![2.0, 2.0],
            scale_count: 6,
            levels: 4,
            output_levels: 14,
            order: 0.0,
            s_list: Vec::new(),
            band: BandGrid::default(),
            fd_step: Some(1e-4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub size: usize,
    pub groups: usize,
    pub seed: u64,
    /// Input band `[2^lo, 2^hi]`; `lo = None` keeps the origin.
    pub band_lo: Option<i32>,
    pub band_hi: i32,
    /// Rescale every input to unit `h^{p_i}` quasi-norm.
    pub normalize: bool,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            size: 32,
            groups: 3,
            seed: 0,
            band_lo: None,
            band_hi: 2,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub n: usize,
    pub alpha: f64,
    /// Sweep coordinates `k / step_denominator` for `k = 1..=max·step_denominator`.
    pub step_denominator: i64,
    pub max: i64,
}

impl Default for RegionSection {
    fn default() -> Self {
        RegionSection {
            n: 2,
            alpha: 2.0,
            step_denominator: 16,
            max: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MihlinSection {
    pub rho: f64,
    pub delta: f64,
    pub order: f64,
}

impl Default for MihlinSection {
    fn default() -> Self {
        MihlinSection {
            rho: 1.0,
            delta: 0.0,
            order: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    /// Fast for x-independent symbols, direct otherwise.
    Auto,
    Direct,
    XIndependentFast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub strategy: StrategyChoice,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            strategy: StrategyChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub symbol: SymbolSection,
    pub norm: NormSection,
    pub ensemble: EnsembleSection,
    pub region: RegionSection,
    pub mihlin: MihlinSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.linearity;
        if self.norm.p_i.len() != n {
            return Err(Error::config(
                "norm.p_i",
                format!("need {n} exponents, got {}", self.norm.p_i.len()),
            ));
        }
        if self.norm.p_i.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::config("norm.p_i", "exponents must be positive and finite"));
        }
        if let Some(p) = self.norm.p {
            let derived = self.output_exponent();
            if !(p > 0.0) || (1.0 / p - 1.0 / derived).abs() > 1e-12 {
                return Err(Error::config(
                    "norm.p",
                    format!("1/p = {} but Σ 1/p_i = {}", 1.0 / p, 1.0 / derived),
                ));
            }
        }
        if self.ensemble.size == 0 || self.ensemble.groups == 0 {
            return Err(Error::config("ensemble", "size and groups must be positive"));
        }
        if let Some(lo) = self.ensemble.band_lo {
            if lo >= self.ensemble.band_hi {
                return Err(Error::config("ensemble.band_lo", "band is empty"));
            }
        }
        if self.region.step_denominator <= 0 || self.region.max <= 0 {
            return Err(Error::config("region", "step_denominator and max must be positive"));
        }
        self.grid()?;
        self.symbol()?;
        Ok(())
    }

    /// `p` with `1/p = Σ 1/p_i`.
    pub fn output_exponent(&self) -> f64 {
        1.0 / self.norm.p_i.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.grid.dim, self.grid.linearity, self.grid.side, self.grid.points)
    }

    pub fn symbol(&self) -> Result<Arc<dyn Symbol>> {
        let grid = self.grid()?;
        build_symbol(
            &self.symbol.name,
            &self.symbol.params,
            self.grid.dim,
            self.grid.linearity,
            k_max_for(&grid),
        )
    }

    pub fn strategy(&self, symbol: &dyn Symbol) -> Strategy {
        match self.output.strategy {
            StrategyChoice::Direct => Strategy::Direct,
            StrategyChoice::XIndependentFast => Strategy::XIndependentFast,
            StrategyChoice::Auto if symbol.x_independent() => Strategy::XIndependentFast,
            StrategyChoice::Auto => Strategy::Direct,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

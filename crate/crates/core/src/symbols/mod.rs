//! Symbols `m(x, ξ⃗)`: the evaluation interface, a registry of named
//! symbols, and the finite-difference Mihlin estimator.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};

pub mod mihlin;
pub mod zoo;

pub use mihlin::{mihlin_estimate, MihlinOptions, MihlinReport, MihlinRow, ProbeSet, Verdict};
pub use zoo::*;

/// A scalar or vector parameter value as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

pub type SymbolParams = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMeta {
    pub name: String,
    pub params: SymbolParams,
    pub x_independent: bool,
    pub dim: usize,
    pub linearity: usize,
    /// Approximations baked into the evaluator (truncation levels etc.).
    pub notes: Vec<String>,
}

impl SymbolMeta {
    pub(crate) fn new(name: &str, dim: usize, linearity: usize, x_independent: bool) -> Self {
        SymbolMeta {
            name: name.to_string(),
            params: SymbolParams::new(),
            x_independent,
            dim,
            linearity,
            notes: Vec::new(),
        }
    }

    pub(crate) fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), ParamValue::Scalar(value));
        self
    }

    pub(crate) fn vector(mut self, key: &str, value: &[f64]) -> Self {
        self.params
            .insert(key.to_string(), ParamValue::Vector(value.to_vec()));
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// `m(x, ξ⃗)` with `x ∈ ℝ^d` and `ξ⃗ ∈ (ℝ^d)^n` passed as flat slices.
pub trait Symbol: Send + Sync {
    fn meta(&self) -> &SymbolMeta;

    fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64;

    /// Analytic `∂_{x_l} m`, if the symbol provides one.
    fn dx(&self, _x: &[f64], _xi: &[f64], _l: usize) -> Option<Complex64> {
        None
    }

    fn x_independent(&self) -> bool {
        self.meta().x_independent
    }
}

/// `∂_{x_l} m` from the analytic evaluator, or a fourth-order central
/// difference with step `h` when none is available.
pub fn x_derivative(symbol: &dyn Symbol, x: &[f64], xi: &[f64], l: usize, h: f64) -> Complex64 {
    if symbol.x_independent() {
        return Complex64::new(0.0, 0.0);
    }
    if let Some(v) = symbol.dx(x, xi, l) {
        return v;
    }
    x_difference(symbol, x, xi, l, h)
}

/// Fourth-order central difference in `x_l`.
pub fn x_difference(symbol: &dyn Symbol, x: &[f64], xi: &[f64], l: usize, h: f64) -> Complex64 {
    let mut p = x.to_vec();
    let mut at = |t: f64| {
        p[l] = x[l] + t;
        symbol.eval(&p, xi)
    };
    (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
}

fn scalar(params: &SymbolParams, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(ParamValue::Scalar(v)) => Ok(*v),
        Some(ParamValue::Vector(_)) => Err(Error::config(
            format!("symbol.params.{key}"),
            "expected a number",
        )),
        None => default.ok_or_else(|| Error::config(format!("symbol.params.{key}"), "missing")),
    }
}

fn vector(params: &SymbolParams, key: &str, len: usize, default: Vec<f64>) -> Result<Vec<f64>> {
    let v = match params.get(key) {
        Some(ParamValue::Vector(v)) => v.clone(),
        Some(ParamValue::Scalar(s)) if len == 1 => vec![*s],
        Some(ParamValue::Scalar(_)) => {
            return Err(Error::config(
                format!("symbol.params.{key}"),
                format!("expected a list of {len} numbers"),
            ))
        }
        None => default,
    };
    if v.len() != len {
        return Err(Error::config(
            format!("symbol.params.{key}"),
            format!("expected {len} entries, got {}", v.len()),
        ));
    }
    Ok(v)
}

fn unit_anchor(len: usize, radius: f64) -> Vec<f64> {
    let mut a = vec![0.0; len];
    a[0] = radius;
    a
}

/// Names accepted by [`build_symbol`].
pub const REGISTRY: &[&str] = &[
    "constant",
    "translation",
    "modulation",
    "example1",
    "example2",
    "example3",
    "example4",
    "chirp",
    "coifman_meyer",
];

/// Constructs a registered symbol from its name and parameter table.
///
/// `k_max` defaults to `default_k_max` for the dyadic-sum examples.
pub fn build_symbol(
    name: &str,
    params: &SymbolParams,
    dim: usize,
    linearity: usize,
    default_k_max: u32,
) -> Result<Arc<dyn Symbol>> {
    let nd = dim * linearity;
    let k_max = scalar(params, "k_max", Some(default_k_max as f64))?;
    if k_max < 1.0 || k_max.fract() != 0.0 {
        return Err(Error::config("symbol.params.k_max", "must be a positive integer"));
    }
    let k_max = k_max as u32;
    let delta = scalar(params, "delta", Some(0.0))?;
    let x_factor = if params.contains_key("delta") {
        XFactor::Oscillating { delta }
    } else {
        XFactor::None
    };
    let sym: Arc<dyn Symbol> = match name {
        "constant" => Arc::new(constant_symbol(
            scalar(params, "c", Some(1.0))?,
            dim,
            linearity,
        )),
        "translation" => {
            let block = scalar(params, "block", Some(0.0))?;
            Arc::new(translation_symbol(
                &vector(params, "a", dim, vec![0.0; dim])?,
                block as usize,
                dim,
                linearity,
            )?)
        }
        "modulation" => Arc::new(modulation_symbol(
            &vector(params, "c", dim, vec![1.0; dim])?,
            linearity,
        )),
        "example1" => Arc::new(example1_symbol(
            scalar(params, "omega", Some(1.0))?,
            dim,
            linearity,
        )),
        "example2" => Arc::new(example2_symbol(
            scalar(params, "gamma", None)?,
            &vector(params, "anchor", nd, unit_anchor(nd, 0.85))?,
            x_factor,
            k_max,
            dim,
            linearity,
        )?),
        "example3" => Arc::new(example3_symbol(
            scalar(params, "gamma", None)?,
            &vector(params, "anchor", nd, unit_anchor(nd, 0.85))?,
            scalar(params, "epsilon", Some(0.1))?,
            delta,
            k_max,
            dim,
            linearity,
        )?),
        "example4" => Arc::new(example4_symbol(
            scalar(params, "a", None)?,
            scalar(params, "b", None)?,
            x_factor,
            k_max,
            dim,
            linearity,
        )?),
        "chirp" => Arc::new(chirp_symbol(k_max, dim, linearity)),
        "coifman_meyer" => Arc::new(coifman_meyer_symbol(
            scalar(params, "epsilon", Some(0.25))?,
            dim,
            linearity,
        )?),
        other => {
            return Err(Error::config(
                "symbol.name",
                format!("unknown symbol `{other}`; known: {}", REGISTRY.join(", ")),
            ))
        }
    };
    Ok(sym)
}

/// Largest dyadic level whose block still intersects the grid's frequency box.
pub fn k_max_for(grid: &Grid) -> u32 {
    let reach = grid.max_frequency() * ((grid.dim() * grid.linearity()) as f64).sqrt();
    (reach.log2().ceil() as i64 + 1).max(1) as u32
}

/// Registration checks: finite and bounded on the grid's frequency range, and
/// x-independent symbols really ignore `x`.
pub fn validate_symbol(symbol: &dyn Symbol, grid: &Grid, bound: f64) -> Result<()> {
    let meta = symbol.meta();
    if meta.dim != grid.dim() || meta.linearity != grid.linearity() {
        return Err(Error::GridMismatch(format!(
            "symbol `{}` is for d={}, n={}, grid has d={}, n={}",
            meta.name,
            meta.dim,
            meta.linearity,
            grid.dim(),
            grid.linearity()
        )));
    }
    let nd = grid.dim() * grid.linearity();
    let total = grid.sample_count(grid.linearity());
    let stride = (total / 4096).max(1);
    let mut xi = vec![0.0; nd];
    let x_a = vec![0.0; grid.dim()];
    let x_b: Vec<f64> = (0..grid.dim()).map(|l| 0.3 + 0.1 * l as f64).collect();
    for flat in (0..total).step_by(stride) {
        grid.coords(Domain::Frequency, grid.linearity(), flat, &mut xi);
        let v = symbol.eval(&x_a, &xi);
        if !v.re.is_finite() || !v.im.is_finite() || v.norm() > bound {
            return Err(Error::config(
                "symbol",
                format!("`{}` is unbounded or non-finite at ξ⃗ = {xi:?}", meta.name),
            ));
        }
        if meta.x_independent && symbol.eval(&x_b, &xi) != v {
            return Err(Error::config(
                "symbol",
                format!("`{}` claims x-independence but depends on x", meta.name),
            ));
        }
    }
    Ok(())
}

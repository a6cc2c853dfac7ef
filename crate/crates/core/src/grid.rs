//! The periodic box, sampled functions on it, and the Riemann-sum Fourier
//! transform with kernel `e^{-2πi⟨x,ξ⟩}`.
//!
//! A grid has `points` samples per axis on `[-side/2, side/2)`. Space samples
//! sit at `x_i = -side/2 + i·h` with `h = side/points`; frequency samples sit
//! at `ξ_k = (k - points/2)/side`. Both are stored in natural (centered) order,
//! row-major over all `dim·arity` axes.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default memory budget for a full `(ℝ^d)^n` sample array: 2 GiB.
pub const DEFAULT_MEMORY_BUDGET: u128 = 2 << 30;

const BYTES_PER_SAMPLE: u128 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

#[derive(Clone)]
pub struct Grid {
    dim: usize,
    linearity: usize,
    side: f64,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("linearity", &self.linearity)
            .field("side", &self.side)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.linearity == other.linearity
            && self.side == other.side
            && self.points == other.points
    }
}

/// Builds a grid with the default memory budget.
pub fn make_grid(dim: usize, linearity: usize, side: f64, points: usize) -> Result<Grid> {
    Grid::with_budget(dim, linearity, side, points, DEFAULT_MEMORY_BUDGET)
}

impl Grid {
    pub fn new(dim: usize, linearity: usize, side: f64, points: usize) -> Result<Self> {
        make_grid(dim, linearity, side, points)
    }

    pub fn with_budget(
        dim: usize,
        linearity: usize,
        side: f64,
        points: usize,
        budget: u128,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::config("dim", format!("{dim} is unsupported (1 or 2)")));
        }
        if !(1..=3).contains(&linearity) {
            return Err(Error::config(
                "linearity",
                format!("{linearity} is unsupported (1 to 3)"),
            ));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::config("side", format!("{side} must be positive")));
        }
        if points == 0 || points % 2 != 0 {
            return Err(Error::config(
                "points",
                format!("{points} must be a positive even integer"),
            ));
        }
        let count = (points as u128).checked_pow((dim * linearity) as u32);
        let required = count.map(|c| c * BYTES_PER_SAMPLE).unwrap_or(u128::MAX);
        if required > budget {
            return Err(Error::MemoryBudget { required, budget });
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            dim,
            linearity,
            side,
            points,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linearity(&self) -> usize {
        self.linearity
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.points as f64
    }

    pub fn frequency_spacing(&self) -> f64 {
        1.0 / self.side
    }

    /// Largest representable frequency magnitude along one axis.
    pub fn max_frequency(&self) -> f64 {
        self.points as f64 / (2.0 * self.side)
    }

    /// Number of samples of a function on `(ℝ^d)^arity`.
    pub fn sample_count(&self, arity: usize) -> usize {
        self.points.pow((self.dim * arity) as u32)
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -0.5 * self.side + i as f64 * self.spacing()
    }

    pub fn axis_frequency(&self, k: usize) -> f64 {
        self.frequency_integer(k) as f64 / self.side
    }

    /// Integer lattice label `k - points/2` of frequency index `k`.
    pub fn frequency_integer(&self, k: usize) -> i64 {
        k as i64 - (self.points / 2) as i64
    }

    /// Index of lattice label `label`, if representable.
    pub fn frequency_index(&self, label: i64) -> Option<usize> {
        let k = label + (self.points / 2) as i64;
        (0..self.points as i64).contains(&k).then_some(k as usize)
    }

    /// Index of lattice label `label` after periodic wrap-around.
    pub fn wrapped_frequency_index(&self, label: i64) -> usize {
        (label + (self.points / 2) as i64).rem_euclid(self.points as i64) as usize
    }

    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.axis_coord(i)).collect()
    }

    pub fn axis_frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.axis_frequency(k)).collect()
    }

    /// Per-axis indices of a flat row-major index over `axes` axes.
    pub fn unflatten(&self, mut flat: usize, axes: usize, out: &mut [usize]) {
        for a in (0..axes).rev() {
            out[a] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Coordinates of the sample at `flat` in the given domain.
    pub fn coords(&self, domain: Domain, arity: usize, flat: usize, out: &mut [f64]) {
        let axes = self.dim * arity;
        let mut rem = flat;
        for a in (0..axes).rev() {
            let i = rem % self.points;
            rem /= self.points;
            out[a] = match domain {
                Domain::Space => self.axis_coord(i),
                Domain::Frequency => self.axis_frequency(i),
            };
        }
    }

    /// Periodic (minimal image) offset of axis index difference `di`.
    pub fn periodic_offset(&self, di: i64) -> i64 {
        let n = self.points as i64;
        let r = di.rem_euclid(n);
        if r >= n / 2 {
            r - n
        } else {
            r
        }
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }
}

/// Complex samples of a function on `(ℝ^d)^arity`, in space or frequency.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Grid,
    domain: Domain,
    arity: usize,
    data: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: &Grid, domain: Domain, arity: usize, data: Vec<Complex64>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::config("arity", "must be at least 1"));
        }
        let expected = grid.sample_count(arity);
        if data.len() != expected {
            return Err(Error::config(
                "data",
                format!("length {} does not match {expected} samples", data.len()),
            ));
        }
        Ok(SampledFunction {
            grid: grid.clone(),
            domain,
            arity,
            data,
        })
    }

    pub fn zeros(grid: &Grid, domain: Domain, arity: usize) -> Self {
        SampledFunction {
            grid: grid.clone(),
            domain,
            arity,
            data: vec![Complex64::new(0.0, 0.0); grid.sample_count(arity)],
        }
    }

    /// Samples `f` at every grid point of the chosen domain.
    pub fn from_fn<F>(grid: &Grid, domain: Domain, arity: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let axes = grid.dim * arity;
        let data = (0..grid.sample_count(arity))
            .into_par_iter()
            .map_init(
                || vec![0.0; axes],
                |pt, flat| {
                    grid.coords(domain, arity, flat, pt);
                    f(pt)
                },
            )
            .collect();
        SampledFunction {
            grid: grid.clone(),
            domain,
            arity,
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Quadrature weight of one sample: `h^{d·arity}` in space,
    /// `(1/side)^{d·arity}` in frequency.
    pub fn cell_volume(&self) -> f64 {
        let axes = (self.grid.dim * self.arity) as i32;
        match self.domain {
            Domain::Space => self.grid.spacing().powi(axes),
            Domain::Frequency => self.grid.frequency_spacing().powi(axes),
        }
    }

    /// `(Σ |F|² · cell)^{1/2}` in whichever domain the samples live.
    pub fn l2_quadrature(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (sum * self.cell_volume()).sqrt()
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        SampledFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            arity: self.arity,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid and domain.
    pub fn zip_with<F>(&self, other: &SampledFunction, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.check_compatible(other)?;
        Ok(SampledFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            arity: self.arity,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub(crate) fn check_compatible(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid || self.arity != other.arity {
            return Err(Error::GridMismatch(format!(
                "{:?}/arity {} vs {:?}/arity {}",
                self.grid, self.arity, other.grid, other.arity
            )));
        }
        if self.domain != other.domain {
            return Err(Error::Domain {
                expected: self.domain,
                got: other.domain,
            });
        }
        Ok(())
    }

    /// Riemann-sum approximation of `f̂(ξ) = ∫ f(x) e^{-2πi⟨x,ξ⟩} dx`.
    pub fn forward_transform(&self) -> Result<SampledFunction> {
        if self.domain != Domain::Space {
            return Err(Error::Domain {
                expected: Domain::Space,
                got: self.domain,
            });
        }
        let mut data = self.data.clone();
        transform_axes(&self.grid, self.grid.dim * self.arity, &mut data, true);
        Ok(SampledFunction {
            grid: self.grid.clone(),
            domain: Domain::Frequency,
            arity: self.arity,
            data,
        })
    }

    /// Exact inverse of [`forward_transform`](Self::forward_transform):
    /// `f(x) = Σ_ξ F(ξ) e^{2πi⟨x,ξ⟩} (1/side)^{dim}`.
    pub fn inverse_transform(&self) -> Result<SampledFunction> {
        if self.domain != Domain::Frequency {
            return Err(Error::Domain {
                expected: Domain::Frequency,
                got: self.domain,
            });
        }
        let mut data = self.data.clone();
        transform_axes(&self.grid, self.grid.dim * self.arity, &mut data, false);
        Ok(SampledFunction {
            grid: self.grid.clone(),
            domain: Domain::Space,
            arity: self.arity,
            data,
        })
    }

    /// Frequency samples at `-ξ` with periodic index reflection.
    pub fn reflect(&self) -> SampledFunction {
        let n = self.grid.points;
        let axes = self.grid.dim * self.arity;
        let mut idx = vec![0usize; axes];
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (flat, out) in data.iter_mut().enumerate() {
            self.grid.unflatten(flat, axes, &mut idx);
            for i in idx.iter_mut() {
                *i = (n - *i) % n;
            }
            *out = self.data[self.grid.flatten(&idx)];
        }
        SampledFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            arity: self.arity,
            data,
        }
    }
}

/// In-place separable transform over all `axes` axes.
///
/// Per axis the centered-index transform reduces to a plain DFT:
/// forward `F_k = h (-1)^{k-N/2} DFT[(-1)^i f_i]_k`,
/// inverse `f_i = (1/L) (-1)^i IDFT[(-1)^{k-N/2} F_k]_i` (unnormalized IDFT).
pub(crate) fn transform_axes(grid: &Grid, axes: usize, data: &mut [Complex64], forward: bool) {
    let n = grid.points;
    let half_sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let (fft, pre, post) = if forward {
        (grid.fft_forward(), 1.0, grid.spacing() * half_sign)
    } else {
        (grid.fft_inverse(), half_sign, grid.frequency_spacing())
    };
    let alternating = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    for axis in 0..axes {
        let stride = n.pow((axes - 1 - axis) as u32);
        let block = stride * n;
        let lines: Vec<(usize, usize)> = (0..data.len() / block)
            .flat_map(|outer| (0..stride).map(move |inner| (outer * block, inner)))
            .collect();
        let gathered: Vec<Vec<Complex64>> = lines
            .par_iter()
            .map_init(
                || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                |scratch, &(base, inner)| {
                    let mut line: Vec<Complex64> = (0..n)
                        .map(|i| data[base + inner + i * stride] * (pre * alternating(i)))
                        .collect();
                    fft.process_with_scratch(&mut line, scratch);
                    for (i, z) in line.iter_mut().enumerate() {
                        *z *= post * alternating(i);
                    }
                    line
                },
            )
            .collect();
        for (&(base, inner), line) in lines.iter().zip(gathered) {
            for (i, z) in line.into_iter().enumerate() {
                data[base + inner + i * stride] = z;
            }
        }
    }
}

//! Synthetic 2D landscapes with a controlled share of barren plateaus.
//!
//! A landscape is produced by scattering constant-valued square plateaus over
//! a grid, pinning the border margin to a high value, dropping one deep
//! lognormal minimum, and fitting a smoothing cubic spline through all of it
//! (see [`synthesize`]). The fitted surface is the objective; its exact
//! gradient comes from differentiating the B-spline basis.

mod banded;
mod file;
pub mod spline;
mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{read_landscape, write_landscape, LandscapeFile, LandscapeFileError, LANDSCAPE_FORMAT};
pub use spline::{fit_smoothing_spline, Sample, TensorSpline};
pub use synth::{
    synthesize, synthesize_separated, NominalMinimum, Plateau, SynthesisParams, SynthesisState,
    MAX_BORDER_RETRIES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandscapeError {
    #[error("invalid landscape parameters: {0}")]
    InvalidParams(String),
    #[error("point ({x}, {y}) lies outside the landscape domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("penalized normal equations are rank deficient (pivot row {row})")]
    SingularSystem { row: usize },
    #[error("synthesis did not converge after {attempts} attempts: {reason}")]
    NonConvergent { attempts: usize, reason: String },
}

/// Rectangular domain and its sampling grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain_lo: [f64; 2],
    pub domain_hi: [f64; 2],
    pub points_per_dim: usize,
}

impl GridSpec {
    pub fn new(domain_lo: [f64; 2], domain_hi: [f64; 2], points_per_dim: usize) -> Result<Self, LandscapeError> {
        let g = Self {
            domain_lo,
            domain_hi,
            points_per_dim,
        };
        g.validate()?;
        Ok(g)
    }

    /// `[0, 1]²` with `points_per_dim` points per axis.
    pub fn unit(points_per_dim: usize) -> Self {
        Self {
            domain_lo: [0.0, 0.0],
            domain_hi: [1.0, 1.0],
            points_per_dim,
        }
    }

    pub fn validate(&self) -> Result<(), LandscapeError> {
        for a in 0..2 {
            let (lo, hi) = (self.domain_lo[a], self.domain_hi[a]);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(LandscapeError::InvalidParams(format!(
                    "domain axis {a} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        if self.points_per_dim < 4 {
            return Err(LandscapeError::InvalidParams(format!(
                "points_per_dim must be at least 4, got {}",
                self.points_per_dim
            )));
        }
        Ok(())
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.domain_hi[axis] - self.domain_lo[axis]) / (self.points_per_dim - 1) as f64
    }

    /// Coordinate of grid line `k` on `axis`; the last line is exactly `hi`.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.points_per_dim {
            self.domain_hi[axis]
        } else {
            self.domain_lo[axis] + k as f64 * self.spacing(axis)
        }
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(0, i), self.coord(1, j)]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|a| p[a] >= self.domain_lo[a] && p[a] <= self.domain_hi[a])
    }

    pub fn point_count(&self) -> usize {
        self.points_per_dim * self.points_per_dim
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let last = self.points_per_dim - 1;
        i == 0 || j == 0 || i == last || j == last
    }
}

/// A fitted synthetic landscape and its synthesis metadata.
#[derive(Clone, Debug)]
pub struct Landscape {
    params: SynthesisParams,
    spline: TensorSpline,
    plateaus: Vec<Plateau>,
    nominal_minimum: NominalMinimum,
    /// Seed of the attempt that produced this landscape (differs from
    /// `params.rng_seed` when border-minimum retries happened).
    effective_seed: u64,
    grid_values: Vec<f64>,
    barren: Vec<bool>,
    min_cell: (usize, usize),
    max_value: f64,
}

impl Landscape {
    pub(crate) fn from_parts(
        params: SynthesisParams,
        spline: TensorSpline,
        plateaus: Vec<Plateau>,
        nominal_minimum: NominalMinimum,
        effective_seed: u64,
    ) -> Self {
        let grid = *spline.grid();
        let m = grid.points_per_dim;
        let mut grid_values = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                grid_values.push(spline.value(grid.point(i, j)));
            }
        }
        let mut barren = vec![false; m * m];
        for p in &plateaus {
            for i in p.i0..p.i0 + p.width {
                for j in p.j0..p.j0 + p.width {
                    barren[i * m + j] = true;
                }
            }
        }
        let (argmin, _) = grid_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (k, &v)| if v < bv { (k, v) } else { (bi, bv) });
        let max_value = grid_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            params,
            spline,
            plateaus,
            nominal_minimum,
            effective_seed,
            grid_values,
            barren,
            min_cell: (argmin / m, argmin % m),
            max_value,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.spline.grid()
    }

    pub fn params(&self) -> &SynthesisParams {
        &self.params
    }

    pub fn spline(&self) -> &TensorSpline {
        &self.spline
    }

    /// Placed plateau squares in placement order.
    pub fn plateaus(&self) -> &[Plateau] {
        &self.plateaus
    }

    /// Number of distinct barren areas after merging overlapping squares.
    pub fn barren_area_count(&self) -> usize {
        let mut areas: Vec<usize> = self.plateaus.iter().map(|p| p.area).collect();
        areas.sort_unstable();
        areas.dedup();
        areas.len()
    }

    pub fn nominal_minimum(&self) -> &NominalMinimum {
        &self.nominal_minimum
    }

    pub fn effective_seed(&self) -> u64 {
        self.effective_seed
    }

    /// Fitted values at the grid points, row-major by x index.
    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn grid_value(&self, i: usize, j: usize) -> f64 {
        self.grid_values[i * self.grid().points_per_dim + j]
    }

    pub fn is_barren(&self, i: usize, j: usize) -> bool {
        self.barren[i * self.grid().points_per_dim + j]
    }

    /// Grid cells covered by nominal plateaus, row-major order.
    pub fn barren_cells(&self) -> Vec<(usize, usize)> {
        let m = self.grid().points_per_dim;
        (0..m * m).filter(|&k| self.barren[k]).map(|k| (k / m, k % m)).collect()
    }

    /// Share of all grid points covered by nominal plateaus.
    pub fn barren_fraction(&self) -> f64 {
        self.barren.iter().filter(|&&b| b).count() as f64 / self.barren.len() as f64
    }

    pub fn global_min_cell(&self) -> (usize, usize) {
        self.min_cell
    }

    pub fn global_min_pos(&self) -> [f64; 2] {
        self.grid().point(self.min_cell.0, self.min_cell.1)
    }

    pub fn global_min_val(&self) -> f64 {
        self.grid_value(self.min_cell.0, self.min_cell.1)
    }

    /// Largest fitted grid value; the "worst possible" estimate of the minimum.
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64, LandscapeError> {
        self.check(x)?;
        Ok(self.spline.value(x))
    }

    pub fn grad(&self, x: [f64; 2]) -> Result<[f64; 2], LandscapeError> {
        self.check(x)?;
        Ok(self.spline.gradient(x))
    }

    fn check(&self, x: [f64; 2]) -> Result<(), LandscapeError> {
        if self.grid().contains(x) {
            Ok(())
        } else {
            Err(LandscapeError::OutOfDomain { x: x[0], y: x[1] })
        }
    }
}

//! Tensor-product cubic B-spline surfaces with knots on the grid lines.
//!
//! An axis with `m` grid points has `m - 1` uniform knot intervals and
//! `m + 2` cubic basis functions. Coefficients are stored row-major: the
//! coefficient multiplying `B_i(x) B_j(y)` lives at `i * (m + 2) + j`.
//!
//! Fitting minimizes `Σ (z_s - S(x_s, y_s))² + λ · P(c)` where `P` sums squared
//! second differences of the coefficient array along both axes (P-spline
//! roughness penalty). The normal equations are banded and solved with a band
//! Cholesky factorization.

use super::banded::BandedSpd;
use super::{GridSpec, LandscapeError};

/// One scattered observation `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Sample {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Uniform cubic B-spline weights of the four active basis functions at local
/// parameter `t ∈ [0, 1]` of an interval.
#[inline]
pub(crate) fn cubic_weights(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    let t2 = t * t;
    let t3 = t2 * t;
    [
        s * s * s / 6.0,
        (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
        (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
        t3 / 6.0,
    ]
}

/// `d/dt` of [`cubic_weights`].
#[inline]
pub(crate) fn cubic_derivs(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    let t2 = t * t;
    [
        -0.5 * s * s,
        (3.0 * t2 - 4.0 * t) / 2.0,
        (-3.0 * t2 + 2.0 * t + 1.0) / 2.0,
        0.5 * t2,
    ]
}

/// Interval index and local parameter of coordinate `v` on one axis.
#[inline]
fn locate(lo: f64, h: f64, intervals: usize, v: f64) -> (usize, f64) {
    let u = (v - lo) / h;
    let i = (u.floor().max(0.0) as usize).min(intervals - 1);
    (i, u - i as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorSpline {
    grid: GridSpec,
    coeffs: Vec<f64>,
}

impl TensorSpline {
    pub fn new(grid: GridSpec, coeffs: Vec<f64>) -> Result<Self, LandscapeError> {
        grid.validate()?;
        let m = basis_per_axis(&grid);
        if coeffs.len() != m * m {
            return Err(LandscapeError::InvalidParams(format!(
                "expected {} spline coefficients, got {}",
                m * m,
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn cell(&self, p: [f64; 2]) -> ([usize; 2], [f64; 2], [f64; 2]) {
        let intervals = self.grid.points_per_dim - 1;
        let h = [self.grid.spacing(0), self.grid.spacing(1)];
        let (ix, tx) = locate(self.grid.domain_lo[0], h[0], intervals, p[0]);
        let (iy, ty) = locate(self.grid.domain_lo[1], h[1], intervals, p[1]);
        ([ix, iy], [tx, ty], h)
    }

    /// Surface value. Points outside the domain are extrapolated by the
    /// boundary polynomial pieces; domain checks belong to the caller.
    pub fn value(&self, p: [f64; 2]) -> f64 {
        let ([ix, iy], [tx, ty], _) = self.cell(p);
        let wx = cubic_weights(tx);
        let wy = cubic_weights(ty);
        self.contract(ix, iy, &wx, &wy)
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let ([ix, iy], [tx, ty], h) = self.cell(p);
        let wx = cubic_weights(tx);
        let wy = cubic_weights(ty);
        let dx = cubic_derivs(tx);
        let dy = cubic_derivs(ty);
        [
            self.contract(ix, iy, &dx, &wy) / h[0],
            self.contract(ix, iy, &wx, &dy) / h[1],
        ]
    }

    #[inline]
    fn contract(&self, ix: usize, iy: usize, wx: &[f64; 4], wy: &[f64; 4]) -> f64 {
        let m = basis_per_axis(&self.grid);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let row = &self.coeffs[(ix + a) * m + iy..(ix + a) * m + iy + 4];
            let mut inner = 0.0;
            for (c, wb) in row.iter().zip(wy) {
                inner += c * wb;
            }
            acc += wa * inner;
        }
        acc
    }
}

/// Number of cubic basis functions per axis.
pub fn basis_per_axis(grid: &GridSpec) -> usize {
    grid.points_per_dim + 2
}

/// Penalized least-squares fit of a tensor-product cubic spline to scattered
/// samples. Returns row-major coefficients (see module docs).
pub fn fit_smoothing_spline(
    samples: &[Sample],
    smoothing: f64,
    grid: &GridSpec,
) -> Result<Vec<f64>, LandscapeError> {
    grid.validate()?;
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(LandscapeError::InvalidParams(format!(
            "smoothing must be a finite nonnegative number, got {smoothing}"
        )));
    }
    if samples.len() < 16 {
        return Err(LandscapeError::InvalidParams(format!(
            "at least 16 samples are required, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if !grid.contains([s.x, s.y]) {
            return Err(LandscapeError::OutOfDomain { x: s.x, y: s.y });
        }
    }

    let m = basis_per_axis(grid);
    let n = m * m;
    let intervals = grid.points_per_dim - 1;
    let h = [grid.spacing(0), grid.spacing(1)];
    let mut normal = BandedSpd::zeros(n, 3 * m + 3);
    let mut rhs = vec![0.0; n];

    let mut idx = [0usize; 16];
    let mut w = [0f64; 16];
    for s in samples {
        let (ix, tx) = locate(grid.domain_lo[0], h[0], intervals, s.x);
        let (iy, ty) = locate(grid.domain_lo[1], h[1], intervals, s.y);
        let wx = cubic_weights(tx);
        let wy = cubic_weights(ty);
        for a in 0..4 {
            for b in 0..4 {
                idx[a * 4 + b] = (ix + a) * m + iy + b;
                w[a * 4 + b] = wx[a] * wy[b];
            }
        }
        for p in 0..16 {
            rhs[idx[p]] += w[p] * s.z;
            for q in 0..=p {
                normal.add(idx[p], idx[q], w[p] * w[q]);
            }
        }
    }

    if smoothing > 0.0 {
        let mut add_difference = |centre: usize, stride: usize| {
            let taps = [(centre - stride, 1.0), (centre, -2.0), (centre + stride, 1.0)];
            for (p, &(ip, wp)) in taps.iter().enumerate() {
                for &(iq, wq) in &taps[..=p] {
                    normal.add(ip, iq, smoothing * wp * wq);
                }
            }
        };
        for i in 0..m {
            for j in 0..m {
                // along x (stride m), then along y (stride 1)
                if i >= 1 && i + 1 < m {
                    add_difference(i * m + j, m);
                }
                if j >= 1 && j + 1 < m {
                    add_difference(i * m + j, 1);
                }
            }
        }
    }

    normal
        .solve(&rhs, 1e-11)
        .map_err(|e| LandscapeError::SingularSystem { row: e.row })
}

use serde::{Deserialize, Serialize};

use super::spline::{fit_smoothing_spline, Sample, TensorSpline};
use super::{GridSpec, Landscape, LandscapeError};
use crate::rng::Stream;

/// Whole-process retries allowed when the fitted minimum lands on the border.
pub const MAX_BORDER_RETRIES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    /// Target share of grid points covered by plateaus.
    pub nominal_barren_fraction: f64,
    /// Side of each plateau square, in grid points.
    pub plateau_width: usize,
    /// Grid points between the domain edge and any plateau.
    pub border_margin: usize,
    pub smoothing: f64,
    /// Value pinned on every border-margin grid point before fitting.
    pub border_value: f64,
    /// Scale (sigma) of the lognormal depth of the nominal minimum.
    pub minimum_scale: f64,
    pub rng_seed: u64,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            nominal_barren_fraction: 0.7,
            plateau_width: 10,
            border_margin: 2,
            smoothing: 1.0,
            border_value: 2.0,
            minimum_scale: 1.0,
            rng_seed: 0,
        }
    }
}

impl SynthesisParams {
    pub fn validate(&self, grid: &GridSpec) -> Result<(), LandscapeError> {
        grid.validate()?;
        let bad = |msg: String| Err(LandscapeError::InvalidParams(msg));
        let f = self.nominal_barren_fraction;
        if !(0.0..=1.0).contains(&f) {
            return bad(format!("nominal_barren_fraction must lie in [0, 1], got {f}"));
        }
        if self.plateau_width < 1 || self.border_margin < 1 {
            return bad("plateau_width and border_margin must be at least 1".into());
        }
        let m = grid.points_per_dim;
        if self.plateau_width + 2 * self.border_margin >= m {
            return bad(format!(
                "plateau width {} plus twice the margin {} must be below {m} grid points",
                self.plateau_width, self.border_margin
            ));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return bad(format!("smoothing must be finite and nonnegative, got {}", self.smoothing));
        }
        if !(self.minimum_scale > 0.0 && self.minimum_scale.is_finite()) {
            return bad(format!("minimum_scale must be positive, got {}", self.minimum_scale));
        }
        if !self.border_value.is_finite() {
            return bad("border_value must be finite".into());
        }
        let inner = m - 2 * self.border_margin;
        let reachable = (inner * inner) as f64 / (m * m) as f64;
        if f > reachable {
            return bad(format!(
                "nominal_barren_fraction {f} exceeds the {reachable:.4} reachable inside the border margin"
            ));
        }
        Ok(())
    }
}

/// One placed plateau square: cells `[i0, i0 + width) × [j0, j0 + width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub i0: usize,
    pub j0: usize,
    pub width: usize,
    /// Nominal constant value drawn for this square.
    pub value: f64,
    /// Barren-area label shared by all squares merged through overlaps.
    pub area: usize,
}

impl Plateau {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i < self.i0 + self.width && j >= self.j0 && j < self.j0 + self.width
    }
}

/// The grid point that received the negated lognormal draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NominalMinimum {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Plateau bookkeeping for one synthesis attempt.
#[derive(Clone, Debug)]
pub struct SynthesisState {
    grid: GridSpec,
    params: SynthesisParams,
    /// Index of the placement that first claimed each cell.
    owner: Vec<Option<usize>>,
    plateaus: Vec<Plateau>,
    parent: Vec<usize>,
    barren: usize,
}

impl SynthesisState {
    pub fn new(grid: GridSpec, params: SynthesisParams) -> Result<Self, LandscapeError> {
        params.validate(&grid)?;
        Ok(Self {
            grid,
            params,
            owner: vec![None; grid.point_count()],
            plateaus: Vec::new(),
            parent: Vec::new(),
            barren: 0,
        })
    }

    /// Inclusive range of admissible square origins on each axis, chosen so
    /// that no plateau cell enters the border margin.
    pub fn origin_range(&self, width: usize) -> (usize, usize) {
        let m = self.grid.points_per_dim;
        (self.params.border_margin, m - self.params.border_margin - width)
    }

    /// Sample a center, build the square, draw its value and merge it in.
    pub fn place_plateau(&mut self, rng: &mut Stream) -> usize {
        let w = self.params.plateau_width;
        let (lo, hi) = self.origin_range(w);
        let i0 = lo + rng.index(hi - lo + 1);
        let j0 = lo + rng.index(hi - lo + 1);
        let value = rng.next_f64();
        self.place_plateau_at(i0, j0, w, value)
    }

    /// Deterministic placement of a `width`-square with origin `(i0, j0)`.
    ///
    /// Cells already claimed keep their earlier value; every placement the new
    /// square touches is merged into one barren area.
    pub fn place_plateau_at(&mut self, i0: usize, j0: usize, width: usize, value: f64) -> usize {
        let (lo, hi) = self.origin_range(width);
        assert!(
            (lo..=hi).contains(&i0) && (lo..=hi).contains(&j0),
            "plateau origin ({i0}, {j0}) outside admissible range [{lo}, {hi}]"
        );
        let id = self.plateaus.len();
        self.parent.push(id);
        let m = self.grid.points_per_dim;
        for i in i0..i0 + width {
            for j in j0..j0 + width {
                match self.owner[i * m + j] {
                    Some(prev) => self.union(prev, id),
                    None => {
                        self.owner[i * m + j] = Some(id);
                        self.barren += 1;
                    }
                }
            }
        }
        self.plateaus.push(Plateau {
            i0,
            j0,
            width,
            value,
            area: id,
        });
        id
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the older placement as the representative.
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[drop] = keep;
        }
    }

    pub fn barren_fraction(&self) -> f64 {
        self.barren as f64 / self.owner.len() as f64
    }

    fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn barren_areas(&self) -> usize {
        let mut roots: Vec<usize> = (0..self.plateaus.len()).map(|k| self.root(k)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Nominal value of a barren cell, i.e. that of its first claimant.
    pub fn cell_value(&self, i: usize, j: usize) -> Option<f64> {
        self.owner[i * self.grid.points_per_dim + j].map(|k| self.plateaus[k].value)
    }

    pub fn plateaus(&self) -> Vec<Plateau> {
        let mut out = self.plateaus.clone();
        for (k, p) in out.iter_mut().enumerate() {
            p.area = self.root(k);
        }
        out
    }

    /// Place the nominal minimum and fit the surface.
    pub fn into_landscape(self, rng: &mut Stream, seed: u64) -> Result<Landscape, LandscapeError> {
        let grid = self.grid;
        let params = self.params;
        let m = grid.points_per_dim;
        let margin = params.border_margin;
        let inner = m - 2 * margin;
        let mi = margin + rng.index(inner);
        let mj = margin + rng.index(inner);
        let depth = rng.lognormal(0.0, params.minimum_scale);
        let nominal_minimum = NominalMinimum {
            i: mi,
            j: mj,
            value: -depth,
        };

        let in_margin = |k: usize| k < margin || k >= m - margin;
        let mut samples = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let z = if (i, j) == (mi, mj) {
                    nominal_minimum.value
                } else if in_margin(i) || in_margin(j) {
                    params.border_value
                } else if let Some(v) = self.cell_value(i, j) {
                    v
                } else {
                    continue;
                };
                let [x, y] = grid.point(i, j);
                samples.push(Sample::new(x, y, z));
            }
        }
        let coeffs = fit_smoothing_spline(&samples, params.smoothing, &grid)?;
        let spline = TensorSpline::new(grid, coeffs)?;
        let plateaus = self.plateaus();
        Ok(Landscape::from_parts(params, spline, plateaus, nominal_minimum, seed))
    }
}

fn attempt_loop(
    grid: GridSpec,
    params: SynthesisParams,
    mut place: impl FnMut(&mut SynthesisState, &mut Stream) -> Result<(), LandscapeError>,
) -> Result<Landscape, LandscapeError> {
    params.validate(&grid)?;
    for attempt in 0..=MAX_BORDER_RETRIES {
        let seed = params.rng_seed.wrapping_add(attempt as u64);
        let mut rng = Stream::new(seed);
        let mut state = SynthesisState::new(grid, params)?;
        place(&mut state, &mut rng)?;
        let landscape = state.into_landscape(&mut rng, seed)?;
        let (i, j) = landscape.global_min_cell();
        if !grid.is_boundary(i, j) {
            return Ok(landscape);
        }
    }
    Err(LandscapeError::NonConvergent {
        attempts: MAX_BORDER_RETRIES + 1,
        reason: "fitted global minimum kept landing on the domain border".into(),
    })
}

/// Synthesize a landscape by placing random plateaus until the nominal barren
/// fraction is reached, then fitting the smoothing spline.
///
/// A fit whose grid minimum lies on the domain boundary is discarded and the
/// whole process reruns with seed `rng_seed + attempt`.
pub fn synthesize(grid: GridSpec, params: SynthesisParams) -> Result<Landscape, LandscapeError> {
    // Coupon-collector guard for fractions close to full interior coverage.
    let max_placements = 64 * grid.point_count();
    attempt_loop(grid, params, |state, rng| {
        let mut placed = 0;
        while state.barren_fraction() < params.nominal_barren_fraction {
            if placed == max_placements {
                return Err(LandscapeError::NonConvergent {
                    attempts: placed,
                    reason: "plateau placement could not reach the nominal barren fraction".into(),
                });
            }
            state.place_plateau(rng);
            placed += 1;
        }
        Ok(())
    })
}

/// Synthesize a landscape with exactly `count` pairwise separated plateaus
/// (at least one free grid line between any two) whose total area is as close
/// as possible to `nominal_barren_fraction`. The configured `plateau_width`
/// is replaced by the side `round(sqrt(fraction · m² / count))`.
pub fn synthesize_separated(grid: GridSpec, params: SynthesisParams, count: usize) -> Result<Landscape, LandscapeError> {
    let m = grid.points_per_dim;
    let fraction = params.nominal_barren_fraction;
    let width = if count == 0 || fraction == 0.0 {
        0
    } else {
        ((fraction * (m * m) as f64 / count as f64).sqrt().round() as usize).max(1)
    };
    // The separated layout replaces the configured width with the derived one.
    let params = SynthesisParams {
        plateau_width: width.max(1),
        ..params
    };
    params.validate(&grid).map_err(|_| {
        LandscapeError::InvalidParams(format!(
            "{count} plateau(s) of side {width} do not fit inside the border margin of a {m}-point grid"
        ))
    })?;
    const RESTARTS: usize = 2_000;
    const TRIES_PER_PLATEAU: usize = 200;
    attempt_loop(grid, params, |state, rng| {
        if width == 0 {
            return Ok(());
        }
        let (lo, hi) = state.origin_range(width);
        // Squares with a one-cell gap: the closed intervals [a, a + w] of two
        // plateaus must be disjoint on at least one axis.
        let separated = |a: (usize, usize), b: (usize, usize)| {
            a.0 > b.0 + width || b.0 > a.0 + width || a.1 > b.1 + width || b.1 > a.1 + width
        };
        for _ in 0..RESTARTS {
            let mut placed: Vec<(usize, usize)> = Vec::with_capacity(count);
            while placed.len() < count {
                let candidate = (0..TRIES_PER_PLATEAU)
                    .map(|_| (lo + rng.index(hi - lo + 1), lo + rng.index(hi - lo + 1)))
                    .find(|&c| placed.iter().all(|&p| separated(c, p)));
                match candidate {
                    Some(c) => placed.push(c),
                    None => break,
                }
            }
            if placed.len() == count {
                for (i0, j0) in placed {
                    let value = rng.next_f64();
                    state.place_plateau_at(i0, j0, width, value);
                }
                return Ok(());
            }
        }
        Err(LandscapeError::InvalidParams(format!(
            "could not separate {count} plateaus of side {width} on a {m}-point grid"
        )))
    })
}

//! Hitting-time scaling study.
//!
//! For landscapes with a controlled barren fraction `B` and number of
//! separated plateaus `b`, paired SA and FV populations start from the same
//! uniform ansätze and run until some particle's best value enters a band
//! around the global minimum. The study reports the mean paired difference
//! `Δ = steps(SA) − steps(FV)` per cell with a 95% interval, the least-squares
//! slope of `Δ` against `B`, and whether `Δ` is nondecreasing in `B`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ls_slope, MeanCi};
use super::BenchError;
use crate::annealer::SaParams;
use crate::fv::{FvConfig, FvRun};
use crate::landscape::{synthesize, synthesize_separated, GridSpec, Landscape, SynthesisParams};
use crate::objective::{DomainBox, SyntheticObjective};
use crate::rng::{derive_path, derive_seed, Stream};

const HITTING_LABEL: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HittingSpec {
    pub grid_points: usize,
    /// Barren fractions swept at `fraction_sweep_count` plateaus.
    pub fractions: Vec<f64>,
    pub fraction_sweep_count: usize,
    /// Plateau counts swept at `count_sweep_fraction`.
    pub counts: Vec<usize>,
    pub count_sweep_fraction: f64,
    pub trials: usize,
    /// Band half-width as a fraction of `fworst − fstar`.
    pub tolerance: f64,
    /// Per-particle step cap, burn-in included.
    pub step_cap: usize,
    /// `steps` is ignored; runs stop at the hit or the cap.
    pub fv: FvConfig,
    pub sa: SaParams,
    /// `nominal_barren_fraction`, `plateau_width` and `rng_seed` are set per cell and trial.
    pub synthesis: SynthesisParams,
    pub master_seed: u64,
    pub shared_streams: bool,
}

impl Default for HittingSpec {
    fn default() -> Self {
        Self {
            grid_points: 40,
            fractions: vec![0.0, 0.2, 0.4, 0.6],
            fraction_sweep_count: 1,
            counts: vec![1, 2, 4],
            count_sweep_fraction: 0.3,
            trials: 50,
            tolerance: 0.05,
            step_cap: 5000,
            fv: FvConfig::default(),
            sa: SaParams::default(),
            synthesis: SynthesisParams::default(),
            master_seed: 0,
            shared_streams: false,
        }
    }
}

impl HittingSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        self.fv.validate()?;
        self.sa.validate().map_err(crate::fv::FvError::from)?;
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(BenchError::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.fractions.iter().chain([&self.count_sweep_fraction]).any(|b| !(0.0..1.0).contains(b)) {
            return Err(BenchError::Config("barren fractions must lie in [0, 1)".into()));
        }
        if self.fraction_sweep_count == 0 || self.counts.contains(&0) {
            return Err(BenchError::Config("plateau counts must be at least 1".into()));
        }
        GridSpec::new([0.0, 0.0], [1.0, 1.0], self.grid_points)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingTrial {
    pub landscape_seed: u64,
    /// Per-particle steps until the first hit; `None` when the cap was reached.
    pub sa_steps: Option<usize>,
    pub fv_steps: Option<usize>,
}

impl HittingTrial {
    /// Paired difference with capped runs counted at the cap; undefined when
    /// neither run hit.
    pub fn delta(&self, cap: usize) -> Option<f64> {
        if self.sa_steps.is_none() && self.fv_steps.is_none() {
            return None;
        }
        Some(self.sa_steps.unwrap_or(cap) as f64 - self.fv_steps.unwrap_or(cap) as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingCell {
    pub barren_fraction: f64,
    pub plateau_count: usize,
    pub trials: Vec<HittingTrial>,
    /// `None` when no trial produced a hit.
    pub delta: Option<MeanCi>,
    pub sa_capped: usize,
    pub fv_capped: usize,
}

impl HittingCell {
    fn new(barren_fraction: f64, plateau_count: usize, trials: Vec<HittingTrial>, cap: usize) -> Self {
        let deltas: Vec<f64> = trials.iter().filter_map(|t| t.delta(cap)).collect();
        Self {
            barren_fraction,
            plateau_count,
            delta: MeanCi::of(&deltas),
            sa_capped: trials.iter().filter(|t| t.sa_steps.is_none()).count(),
            fv_capped: trials.iter().filter(|t| t.fv_steps.is_none()).count(),
            trials,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub step_cap: usize,
    pub tolerance: f64,
    pub fraction_sweep: Vec<HittingCell>,
    pub count_sweep: Vec<HittingCell>,
    /// Least-squares slope of mean `Δ` against `B` over the fraction sweep.
    pub slope_vs_fraction: Option<f64>,
    pub slope_vs_count: Option<f64>,
    /// `Δ` nondecreasing in `B` over the cells with `B > 0`, within 95% intervals.
    pub monotone_in_fraction: Option<bool>,
    /// Whether the `B = 0` cell's interval contains zero.
    pub zero_cell_covers_zero: Option<bool>,
}

/// Consecutive cells may decrease only by less than the sum of their
/// interval half-widths.
pub fn nondecreasing_within_ci(cis: &[MeanCi]) -> bool {
    cis.windows(2).all(|w| w[1].upper() >= w[0].lower())
}

fn slope(cells: &[HittingCell], x: impl Fn(&HittingCell) -> f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = cells.iter().filter_map(|c| c.delta.map(|d| (x(c), d.mean))).collect();
    if pts.len() < 2 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(ls_slope(&xs, &ys))
}

/// A landscape with `count` separated plateaus covering `fraction` of the grid.
pub fn build_landscape(spec: &HittingSpec, fraction: f64, count: usize, seed: u64) -> Result<Landscape, BenchError> {
    let grid = GridSpec::new([0.0, 0.0], [1.0, 1.0], spec.grid_points)?;
    let params = SynthesisParams {
        nominal_barren_fraction: fraction,
        rng_seed: seed,
        ..spec.synthesis
    };
    Ok(if fraction == 0.0 {
        synthesize(grid, params)?
    } else {
        synthesize_separated(grid, params, count)?
    })
}

fn hit_steps(
    spec: &HittingSpec,
    cfg: FvConfig,
    obj: &SyntheticObjective,
    ansatze: &[Vec<f64>],
    threshold: f64,
) -> Result<Option<usize>, BenchError> {
    let mut run = FvRun::new(cfg, spec.sa, obj, ansatze)?;
    while run.steps_per_particle() < spec.step_cap {
        run.advance()?;
        if run.best_value() <= threshold {
            return Ok(Some(run.steps_per_particle()));
        }
    }
    Ok(None)
}

pub fn run_trial(spec: &HittingSpec, fraction: f64, count: usize, seed: u64) -> Result<HittingTrial, BenchError> {
    let landscape = std::sync::Arc::new(build_landscape(spec, fraction, count, seed)?);
    let threshold =
        landscape.global_min_val() + spec.tolerance * (landscape.max_value() - landscape.global_min_val());
    let mut rng = Stream::new(derive_seed(seed, 0));
    let domain = DomainBox::unit(2);
    let ansatze: Vec<Vec<f64>> = (0..spec.fv.particles).map(|_| domain.sample_uniform(&mut rng)).collect();
    let sa_seed = derive_seed(seed, 1);
    let fv_seed = if spec.shared_streams { sa_seed } else { derive_seed(seed, 2) };
    let obj = SyntheticObjective::new(landscape);
    let sa_cfg = FvConfig { seed: sa_seed, ..spec.fv.sa_baseline() };
    let fv_cfg = FvConfig { seed: fv_seed, ..spec.fv };
    Ok(HittingTrial {
        landscape_seed: seed,
        sa_steps: hit_steps(spec, sa_cfg, &obj, &ansatze, threshold)?,
        fv_steps: hit_steps(spec, fv_cfg, &obj, &ansatze, threshold)?,
    })
}

fn run_cell(spec: &HittingSpec, cell_label: u64, fraction: f64, count: usize) -> Result<HittingCell, BenchError> {
    let trials = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, fraction, count, derive_path(spec.master_seed, &[HITTING_LABEL, cell_label, t as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HittingCell::new(fraction, count, trials, spec.step_cap))
}

pub fn hitting_time_study(spec: &HittingSpec) -> Result<HittingReport, BenchError> {
    spec.validate()?;
    let fraction_sweep = spec
        .fractions
        .iter()
        .enumerate()
        .map(|(k, &b)| run_cell(spec, k as u64, b, spec.fraction_sweep_count))
        .collect::<Result<Vec<_>, _>>()?;
    let count_sweep = spec
        .counts
        .iter()
        .enumerate()
        .map(|(k, &c)| run_cell(spec, 1000 + k as u64, spec.count_sweep_fraction, c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut positive: Vec<&HittingCell> = fraction_sweep.iter().filter(|c| c.barren_fraction > 0.0).collect();
    positive.sort_by(|a, b| a.barren_fraction.total_cmp(&b.barren_fraction));
    let cis: Option<Vec<MeanCi>> = positive.iter().map(|c| c.delta).collect();
    let monotone_in_fraction = cis.filter(|c| c.len() >= 2).map(|c| nondecreasing_within_ci(&c));
    let zero_cell_covers_zero = fraction_sweep
        .iter()
        .find(|c| c.barren_fraction == 0.0)
        .and_then(|c| c.delta)
        .map(|d| d.covers(0.0));

    Ok(HittingReport {
        step_cap: spec.step_cap,
        tolerance: spec.tolerance,
        slope_vs_fraction: slope(&fraction_sweep, |c| c.barren_fraction),
        slope_vs_count: slope(&count_sweep, |c| c.plateau_count as f64),
        monotone_in_fraction,
        zero_cell_covers_zero,
        fraction_sweep,
        count_sweep,
    })
}

impl fmt::Display for HittingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6} {:>3} {:>7} {:>12} {:>10} {:>9} {:>9}", "B", "b", "trials", "mean_delta", "ci95", "sa_capped", "fv_capped")?;
        for c in self.fraction_sweep.iter().chain(&self.count_sweep) {
            let (mean, hw) = c.delta.map_or((f64::NAN, f64::NAN), |d| (d.mean, d.half_width));
            writeln!(
                f,
                "{:>6.2} {:>3} {:>7} {:>12.2} {:>10.2} {:>9} {:>9}",
                c.barren_fraction,
                c.plateau_count,
                c.trials.len(),
                mean,
                hw,
                c.sa_capped,
                c.fv_capped
            )?;
        }
        let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |s| format!("{s:.2}"));
        writeln!(f, "slope of delta vs B: {}", opt(self.slope_vs_fraction))?;
        writeln!(f, "slope of delta vs b: {}", opt(self.slope_vs_count))?;
        let verdict = |v: Option<bool>| v.map_or("undefined", |b| if b { "yes" } else { "no" });
        writeln!(f, "delta nondecreasing in B within 95% CIs: {}", verdict(self.monotone_in_fraction))?;
        write!(f, "B = 0 interval covers zero: {}", verdict(self.zero_cell_covers_zero))
    }
}

//! Fleming-Viot restart controller for a population of annealing particles.
//!
//! After a burn-in that fixes the reference gradient norm, every iteration
//! steps all particles once and then sweeps the population: a particle whose
//! windowed mean gradient norm is below the reference is absorbed, and is
//! regenerated either uniformly in the domain (with probability
//! `exploration_rate`) or on top of a surviving particle.
//!
//! With `alpha = 0` no particle is ever absorbed and the run is exactly `N`
//! independent annealing chains; the benchmark's SA baseline is this mode.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annealer::{calibrate_eta0, sa_step, windowed_grad_norm, Particle, SaParams, SaParamsError};
use crate::objective::{Objective, ObjectiveError};
use crate::rng::{derive_seed, Stream};

/// Label deriving the controller stream from the run seed; particle `j`
/// uses label `j`.
const CONTROLLER_LABEL: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FvError {
    #[error("invalid FV configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sa(#[from] SaParamsError),
    #[error("expected {expected} ansätze, got {got}")]
    AnsatzCount { expected: usize, got: usize },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

/// Which learning rate a reactivated particle inherits from its source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactivationLr {
    /// The source's calibrated `η_0`.
    #[default]
    SourceInitial,
    /// The source's current `η_k`.
    SourceCurrent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FvConfig {
    /// Optimization iterations `T` after burn-in.
    pub steps: usize,
    pub particles: usize,
    pub burn_in: usize,
    pub window: usize,
    pub alpha: f64,
    pub exploration_rate: f64,
    pub seed: u64,
    pub reactivation_lr: ReactivationLr,
}

impl Default for FvConfig {
    fn default() -> Self {
        Self {
            steps: 50,
            particles: 10,
            burn_in: 5,
            window: 5,
            alpha: 1.0,
            exploration_rate: 1.0,
            seed: 0,
            reactivation_lr: ReactivationLr::SourceInitial,
        }
    }
}

impl FvConfig {
    pub fn validate(&self) -> Result<(), FvError> {
        if self.particles < 2 {
            return Err(FvError::Config(format!("need at least 2 particles, got {}", self.particles)));
        }
        if self.burn_in < 1 {
            return Err(FvError::Config("burn_in must be at least 1".into()));
        }
        if self.window < 1 {
            return Err(FvError::Config("window must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(FvError::Config(format!("alpha must be finite and nonnegative, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.exploration_rate) {
            return Err(FvError::Config(format!(
                "exploration_rate must lie in [0, 1], got {}",
                self.exploration_rate
            )));
        }
        Ok(())
    }

    /// The same run with the controller disabled.
    pub fn sa_baseline(&self) -> Self {
        Self { alpha: 0.0, ..*self }
    }

    pub fn particle_seed(&self, j: usize) -> u64 {
        derive_seed(self.seed, j as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Absorbed,
    Reinitialized,
    Reactivated,
    /// Reactivation was drawn but no particle survived the sweep.
    FallbackReinitialized,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Absorbed => "absorbed",
            EventKind::Reinitialized => "reinitialized",
            EventKind::Reactivated => "reactivated",
            EventKind::FallbackReinitialized => "fallback_reinitialized",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// 1-based optimization iteration (burn-in steps are not counted).
    pub iter: usize,
    pub particle: usize,
    #[serde(rename = "event")]
    pub kind: EventKind,
    pub source: Option<usize>,
    pub ref_gradient: f64,
    /// Window mean of the absorbed particle at the check.
    pub window_mean: f64,
}

pub const EVENT_LOG_HEADER: &str = "iter,particle,event,source,ref_gradient,window_mean";

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct FvOutcome {
    pub best_value: f64,
    pub best_position: Vec<f64>,
    pub per_particle_best: Vec<f64>,
    pub ref_gradient: f64,
    pub events: Vec<Event>,
    /// Objective evaluations charged by annealing steps.
    pub optimizer_evals: u64,
    /// Objective evaluations charged by `η_0` calibration probes.
    pub calibration_evals: u64,
    pub sa_steps: u64,
}

impl FvOutcome {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn absorptions(&self) -> usize {
        self.count(EventKind::Absorbed)
    }

    /// Uniform regenerations, including fallbacks.
    pub fn reinitializations(&self) -> usize {
        self.count(EventKind::Reinitialized) + self.count(EventKind::FallbackReinitialized)
    }

    pub fn reactivations(&self) -> usize {
        self.count(EventKind::Reactivated)
    }
}

/// An in-progress run, advanced one particle step at a time.
pub struct FvRun<'a> {
    cfg: FvConfig,
    sa: SaParams,
    obj: &'a dyn Objective,
    particles: Vec<Particle>,
    controller: Stream,
    ref_gradient: Option<f64>,
    burn_in_norm_sum: f64,
    burn_in_done: usize,
    iteration: usize,
    events: Vec<Event>,
    optimizer_evals: u64,
    calibration_evals: u64,
    sa_steps: u64,
}

impl<'a> FvRun<'a> {
    /// Place particle `j` at `ansatze[j]` and calibrate its learning rate.
    pub fn new(cfg: FvConfig, sa: SaParams, obj: &'a dyn Objective, ansatze: &[Vec<f64>]) -> Result<Self, FvError> {
        cfg.validate()?;
        sa.validate()?;
        if ansatze.len() != cfg.particles {
            return Err(FvError::AnsatzCount {
                expected: cfg.particles,
                got: ansatze.len(),
            });
        }
        let particles = ansatze
            .iter()
            .enumerate()
            .map(|(j, x)| Particle::new(obj, x.clone(), cfg.window, &sa, Stream::new(cfg.particle_seed(j))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            calibration_evals: cfg.particles as u64 * sa.probe_count as u64 * obj.gradient_cost(),
            cfg,
            sa,
            obj,
            particles,
            controller: Stream::new(derive_seed(cfg.seed, CONTROLLER_LABEL)),
            ref_gradient: None,
            burn_in_norm_sum: 0.0,
            burn_in_done: 0,
            iteration: 0,
            events: Vec::new(),
            optimizer_evals: 0,
            sa_steps: 0,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn ref_gradient(&self) -> Option<f64> {
        self.ref_gradient
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Completed optimization iterations (burn-in excluded).
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Steps each particle has taken so far, burn-in included.
    pub fn steps_per_particle(&self) -> usize {
        self.burn_in_done + self.iteration
    }

    pub fn best_value(&self) -> f64 {
        self.particles.iter().map(|p| p.best_value).fold(f64::INFINITY, f64::min)
    }

    fn step_all(&mut self) -> Result<f64, FvError> {
        let mut norm_sum = 0.0;
        for p in &mut self.particles {
            norm_sum += sa_step(p, self.obj, &self.sa)?;
        }
        let n = self.particles.len() as u64;
        self.sa_steps += n;
        self.optimizer_evals += n * (self.obj.gradient_cost() + self.obj.value_cost());
        Ok(norm_sum)
    }

    /// One burn-in step while burn-in is pending, otherwise one optimization
    /// iteration followed by the absorption sweep.
    pub fn advance(&mut self) -> Result<(), FvError> {
        if self.burn_in_done < self.cfg.burn_in {
            self.burn_in_norm_sum += self.step_all()?;
            self.burn_in_done += 1;
            if self.burn_in_done == self.cfg.burn_in {
                let mean = self.burn_in_norm_sum / (self.cfg.particles * self.cfg.burn_in) as f64;
                self.ref_gradient = Some(self.cfg.alpha * mean);
            }
            return Ok(());
        }
        self.step_all()?;
        self.iteration += 1;
        self.sweep()
    }

    pub fn burn_in(&mut self) -> Result<f64, FvError> {
        while self.ref_gradient.is_none() {
            self.advance()?;
        }
        Ok(self.ref_gradient.unwrap_or_default())
    }

    fn sweep(&mut self) -> Result<(), FvError> {
        let ref_gradient = self.ref_gradient.expect("sweep runs after burn-in");
        let means: Vec<f64> = self.particles.iter().map(windowed_grad_norm).collect();
        let absorbed: Vec<usize> = (0..means.len()).filter(|&j| means[j] < ref_gradient).collect();
        if absorbed.is_empty() {
            return Ok(());
        }
        let sources: Vec<usize> = (0..means.len()).filter(|&j| means[j] >= ref_gradient).collect();
        let snapshot: Vec<(Vec<f64>, Vec<f64>, f64)> = sources
            .iter()
            .map(|&r| {
                let p = &self.particles[r];
                let eta0 = match self.cfg.reactivation_lr {
                    ReactivationLr::SourceInitial => p.eta0,
                    ReactivationLr::SourceCurrent => p.learning_rate(&self.sa),
                };
                (p.position.clone(), p.history().collect(), eta0)
            })
            .collect();
        let iter = self.iteration;
        for &j in &absorbed {
            let event = |kind, source| Event {
                iter,
                particle: j,
                kind,
                source,
                ref_gradient,
                window_mean: means[j],
            };
            self.events.push(event(EventKind::Absorbed, None));
            let explore = self.controller.next_f64() < self.cfg.exploration_rate;
            let regen = if explore || sources.is_empty() {
                self.reinitialize(j)?;
                let kind = if explore {
                    EventKind::Reinitialized
                } else {
                    EventKind::FallbackReinitialized
                };
                event(kind, None)
            } else {
                let k = self.controller.index(sources.len());
                let (position, history, eta0) = &snapshot[k];
                reactivate(&mut self.particles[j], position, history, *eta0);
                event(EventKind::Reactivated, Some(sources[k]))
            };
            self.events.push(regen);
        }
        Ok(())
    }

    fn reinitialize(&mut self, j: usize) -> Result<(), FvError> {
        let position = self.obj.domain().sample_uniform(&mut self.controller);
        reinitialize(&mut self.particles[j], self.obj, position, &self.sa)?;
        self.calibration_evals += self.sa.probe_count as u64 * self.obj.gradient_cost();
        Ok(())
    }

    pub fn finish(self) -> FvOutcome {
        let best = self
            .particles
            .iter()
            .min_by(|a, b| a.best_value.total_cmp(&b.best_value))
            .expect("at least two particles");
        FvOutcome {
            best_value: best.best_value,
            best_position: best.best_position.clone(),
            per_particle_best: self.particles.iter().map(|p| p.best_value).collect(),
            ref_gradient: self.ref_gradient.unwrap_or(f64::NAN),
            events: self.events,
            optimizer_evals: self.optimizer_evals,
            calibration_evals: self.calibration_evals,
            sa_steps: self.sa_steps,
        }
    }
}

/// Move an absorbed particle to `position`, forget its gradient record,
/// restart its clock and recalibrate `η_0` there.
pub fn reinitialize(p: &mut Particle, obj: &dyn Objective, position: Vec<f64>, sa: &SaParams) -> Result<(), ObjectiveError> {
    p.eta0 = calibrate_eta0(obj, &position, sa, &mut p.rng)?;
    p.position = position;
    p.clear_history();
    p.step_index = 0;
    p.status = crate::annealer::Status::Alive;
    Ok(())
}

/// Copy a source particle's position and gradient record onto `p` and
/// restart `p`'s clock at the given `η_0`. `p` keeps its own random stream.
pub fn reactivate(p: &mut Particle, position: &[f64], history: &[f64], eta0: f64) {
    p.position = position.to_vec();
    p.set_history(history.iter().copied());
    p.eta0 = eta0;
    p.step_index = 0;
    p.status = crate::annealer::Status::Alive;
}

/// Burn-in followed by `cfg.steps` optimization iterations.
pub fn fv_run(cfg: &FvConfig, obj: &dyn Objective, ansatze: &[Vec<f64>], sa: &SaParams) -> Result<FvOutcome, FvError> {
    let mut run = FvRun::new(*cfg, *sa, obj, ansatze)?;
    for _ in 0..cfg.burn_in + cfg.steps {
        run.advance()?;
    }
    Ok(run.finish())
}

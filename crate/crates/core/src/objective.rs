//! Bounded-domain objectives consumed by the annealer.
//!
//! Everything is minimized. The QAOA backend negates its Max-Cut estimate at
//! this boundary so one optimizer code path serves both backends.
//!
//! Evaluation accounting: every objective keeps an atomic counter of
//! evaluations. A synthetic objective charges 1 per `evaluate` and nothing for
//! its analytic gradient; the QAOA objective charges 1 per circuit estimate
//! and `2d` per central-difference gradient.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landscape::{Landscape, LandscapeError};
use crate::qaoa::{QaoaError, QaoaProblem};
use crate::rng::Stream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("expected a {expected}-dimensional point, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {axis} = {value} lies outside [{lo}, {hi}]")]
    OutOfDomain { axis: usize, value: f64, lo: f64, hi: f64 },
    #[error("invalid domain box: {0}")]
    InvalidDomain(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
}

/// Axis-aligned box `[lo, hi]` of the parameter space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ObjectiveError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(ObjectiveError::InvalidDomain(format!(
                "bounds must be nonempty and of equal length (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(a) = (0..lo.len()).find(|&a| !(lo[a].is_finite() && hi[a].is_finite() && lo[a] < hi[a])) {
            return Err(ObjectiveError::InvalidDomain(format!(
                "axis {a} must satisfy lo < hi, got [{}, {}]",
                lo[a], hi[a]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("unit box is valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Euclidean length of the box diagonal, `‖hi − lo‖₂`.
    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|a| self.width(a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }

    pub fn check(&self, x: &[f64]) -> Result<(), ObjectiveError> {
        if x.len() != self.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (axis, &value) in x.iter().enumerate() {
            let (lo, hi) = (self.lo[axis], self.hi[axis]);
            if !(value >= lo && value <= hi) {
                return Err(ObjectiveError::OutOfDomain { axis, value, lo, hi });
            }
        }
        Ok(())
    }

    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        clip(x, self)
    }

    pub fn sample_uniform(&self, rng: &mut Stream) -> Vec<f64> {
        (0..self.dim()).map(|a| rng.uniform(self.lo[a], self.hi[a])).collect()
    }
}

/// Componentwise `min(max(x_i, lo_i), hi_i)`.
pub fn clip(x: &[f64], domain: &DomainBox) -> Vec<f64> {
    x.iter()
        .zip(domain.lo.iter().zip(&domain.hi))
        .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
        .collect()
}

/// A (possibly stochastic) objective on a bounded box.
///
/// Implementations must be safe to share between particles; all randomness
/// comes from the caller-supplied stream.
pub trait Objective: Send + Sync {
    fn domain(&self) -> &DomainBox;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    fn evaluate(&self, x: &[f64], rng: &mut Stream) -> Result<f64, ObjectiveError>;

    fn estimate_gradient(&self, x: &[f64], rng: &mut Stream) -> Result<Vec<f64>, ObjectiveError>;

    /// Counter increment charged by one `evaluate` call.
    fn value_cost(&self) -> u64;

    /// Counter increment charged by one `estimate_gradient` call.
    fn gradient_cost(&self) -> u64;

    /// Total evaluations charged so far.
    fn eval_count(&self) -> u64;
}

/// Lock-free evaluation counter shared by concurrent callers.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// The fitted spline surface of a synthetic landscape, with its exact gradient.
#[derive(Debug)]
pub struct SyntheticObjective {
    landscape: Arc<Landscape>,
    domain: DomainBox,
    counter: EvalCounter,
}

impl SyntheticObjective {
    pub fn new(landscape: Arc<Landscape>) -> Self {
        let g = landscape.grid();
        let domain = DomainBox::new(g.domain_lo.to_vec(), g.domain_hi.to_vec()).expect("grid domain is a valid box");
        Self {
            landscape,
            domain,
            counter: EvalCounter::default(),
        }
    }

    pub fn landscape(&self) -> &Arc<Landscape> {
        &self.landscape
    }
}

pub fn synthetic_objective(landscape: Arc<Landscape>) -> SyntheticObjective {
    SyntheticObjective::new(landscape)
}

impl Objective for SyntheticObjective {
    fn domain(&self) -> &DomainBox {
        &self.domain
    }

    fn evaluate(&self, x: &[f64], _rng: &mut Stream) -> Result<f64, ObjectiveError> {
        self.domain.check(x)?;
        self.counter.add(1);
        Ok(self.landscape.eval([x[0], x[1]])?)
    }

    fn estimate_gradient(&self, x: &[f64], _rng: &mut Stream) -> Result<Vec<f64>, ObjectiveError> {
        self.domain.check(x)?;
        Ok(self.landscape.grad([x[0], x[1]])?.to_vec())
    }

    fn value_cost(&self) -> u64 {
        1
    }

    fn gradient_cost(&self) -> u64 {
        0
    }

    fn eval_count(&self) -> u64 {
        self.counter.get()
    }
}

/// How the circuit expectation is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    /// Exact `⟨ψ|C|ψ⟩` (oracle testing only).
    Exact,
    Sampled(u32),
}

impl Shots {
    /// `0` is the exact-mode sentinel.
    pub fn from_count(count: u32) -> Self {
        if count == 0 {
            Shots::Exact
        } else {
            Shots::Sampled(count)
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Shots::Exact => 0,
            Shots::Sampled(n) => n,
        }
    }
}

/// Negated Max-Cut expectation of a QAOA circuit.
///
/// Parameter layout: `x = [β_1 … β_L, γ_1 … γ_L]`. Gradients are central
/// finite differences with a per-axis step; each stencil point is measured
/// with fresh shots, and stencil points that would leave the box are clipped
/// onto it (the difference quotient uses the actual spacing).
#[derive(Debug)]
pub struct QaoaObjective {
    problem: Arc<QaoaProblem>,
    shots: Shots,
    domain: DomainBox,
    steps: Vec<f64>,
    counter: EvalCounter,
}

/// Default finite-difference step as a fraction of each axis width.
pub const QAOA_FD_STEP_FRACTION: f64 = 0.01;

impl QaoaObjective {
    pub fn new(problem: Arc<QaoaProblem>, shots: Shots) -> Self {
        let domain = problem.domain();
        let steps = (0..domain.dim()).map(|a| QAOA_FD_STEP_FRACTION * domain.width(a)).collect();
        Self {
            problem,
            shots,
            domain,
            steps,
            counter: EvalCounter::default(),
        }
    }

    pub fn with_step_fraction(mut self, fraction: f64) -> Self {
        self.steps = (0..self.domain.dim()).map(|a| fraction * self.domain.width(a)).collect();
        self
    }

    pub fn problem(&self) -> &Arc<QaoaProblem> {
        &self.problem
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    /// Max-Cut expectation estimate `Ĉ` (not negated).
    pub fn cut_estimate(&self, x: &[f64], rng: &mut Stream) -> Result<f64, ObjectiveError> {
        self.domain.check(x)?;
        let layers = self.problem.layers();
        let (beta, gamma) = x.split_at(layers);
        self.counter.add(1);
        Ok(match self.shots {
            Shots::Exact => self.problem.expectation_exact(beta, gamma)?,
            Shots::Sampled(n) => self.problem.expectation_shots(beta, gamma, n, rng)?,
        })
    }
}

pub fn qaoa_objective(problem: Arc<QaoaProblem>, shots: Shots) -> QaoaObjective {
    QaoaObjective::new(problem, shots)
}

impl Objective for QaoaObjective {
    fn domain(&self) -> &DomainBox {
        &self.domain
    }

    fn evaluate(&self, x: &[f64], rng: &mut Stream) -> Result<f64, ObjectiveError> {
        Ok(-self.cut_estimate(x, rng)?)
    }

    fn estimate_gradient(&self, x: &[f64], rng: &mut Stream) -> Result<Vec<f64>, ObjectiveError> {
        self.domain.check(x)?;
        let mut grad = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for axis in 0..x.len() {
            let (lo, hi) = (self.domain.lo()[axis], self.domain.hi()[axis]);
            let plus = (x[axis] + self.steps[axis]).min(hi);
            let minus = (x[axis] - self.steps[axis]).max(lo);
            probe[axis] = plus;
            let f_plus = self.evaluate(&probe, rng)?;
            probe[axis] = minus;
            let f_minus = self.evaluate(&probe, rng)?;
            probe[axis] = x[axis];
            grad.push((f_plus - f_minus) / (plus - minus));
        }
        Ok(grad)
    }

    fn value_cost(&self) -> u64 {
        1
    }

    fn gradient_cost(&self) -> u64 {
        2 * self.domain.dim() as u64
    }

    fn eval_count(&self) -> u64 {
        self.counter.get()
    }
}

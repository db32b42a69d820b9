//! Simulated-annealing particle dynamics.
//!
//! One step moves a particle by
//!
//! ```text
//! x ← clip(x − η_k g + √η_k · ε · n),   η_k = η_0 / (1 + k)^p,   n ~ N(0, I)
//! ```
//!
//! where `g` is the objective's (possibly noisy) gradient estimate. `η_0` is
//! calibrated so that the first step covers a fixed fraction of the domain
//! diagonal given the typical gradient norm near the starting point.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::{DomainBox, Objective, ObjectiveError};
use crate::rng::Stream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaParamsError {
    #[error("temperature must be finite and nonnegative, got {0}")]
    Temperature(f64),
    #[error("learning-rate decay power must exceed 0.5, got {0}")]
    DecayPower(f64),
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("at least one calibration probe is required")]
    NoProbes,
}

/// Annealing schedule and learning-rate calibration settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    /// Constant exploration temperature `ε`.
    pub temperature: f64,
    /// Exponent `p` of the `η_0 / (1 + k)^p` schedule.
    pub lr_decay_power: f64,
    /// Target first-step length as a fraction of the domain diagonal.
    pub lr_target_step_fraction: f64,
    /// Added to the median probe gradient norm before dividing.
    pub grad_floor: f64,
    pub probe_count: usize,
    /// Half-width of the probe box around the calibration point, as a
    /// fraction of each axis width.
    pub probe_radius_fraction: f64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            temperature: 0.1,
            lr_decay_power: 1.0,
            lr_target_step_fraction: 0.05,
            grad_floor: 1e-8,
            probe_count: 5,
            probe_radius_fraction: 0.01,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<(), SaParamsError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(SaParamsError::Temperature(self.temperature));
        }
        if !(self.lr_decay_power > 0.5 && self.lr_decay_power.is_finite()) {
            return Err(SaParamsError::DecayPower(self.lr_decay_power));
        }
        for (name, value) in [
            ("lr_target_step_fraction", self.lr_target_step_fraction),
            ("grad_floor", self.grad_floor),
            ("probe_radius_fraction", self.probe_radius_fraction),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SaParamsError::NotPositive { name, value });
            }
        }
        if self.probe_count == 0 {
            return Err(SaParamsError::NoProbes);
        }
        Ok(())
    }

    /// `η_k = η_0 / (1 + k)^p`.
    pub fn learning_rate(&self, eta0: f64, step: u64) -> f64 {
        eta0 / (1.0 + step as f64).powf(self.lr_decay_power)
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `η_0 = fraction · ‖hi − lo‖ / (median probe gradient norm + grad_floor)`.
///
/// Probes are drawn uniformly from the box of half-width
/// `probe_radius_fraction · (hi − lo)` around `x0`, clipped to the domain.
pub fn calibrate_eta0(obj: &dyn Objective, x0: &[f64], params: &SaParams, rng: &mut Stream) -> Result<f64, ObjectiveError> {
    let domain = obj.domain();
    domain.check(x0)?;
    let mut norms = Vec::with_capacity(params.probe_count);
    for _ in 0..params.probe_count {
        let probe: Vec<f64> = (0..x0.len())
            .map(|a| {
                let r = params.probe_radius_fraction * domain.width(a);
                x0[a] + rng.uniform(-r, r)
            })
            .collect();
        let probe = domain.clip(&probe);
        norms.push(l2_norm(&obj.estimate_gradient(&probe, rng)?));
    }
    Ok(eta0_from_norms(domain, &mut norms, params))
}

/// The calibration formula applied to already observed probe norms.
pub fn eta0_from_norms(domain: &DomainBox, norms: &mut [f64], params: &SaParams) -> f64 {
    params.lr_target_step_fraction * domain.diagonal() / (median(norms) + params.grad_floor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Alive,
    Absorbed,
}

/// One annealing chain.
#[derive(Clone, Debug)]
pub struct Particle {
    pub position: Vec<f64>,
    /// Local clock `k` of the learning-rate schedule.
    pub step_index: u64,
    pub eta0: f64,
    history: VecDeque<f64>,
    window: usize,
    pub best_position: Vec<f64>,
    /// `+∞` until the first step evaluates the objective.
    pub best_value: f64,
    pub status: Status,
    pub rng: Stream,
}

impl Particle {
    /// A fresh particle at `position`, with `η_0` calibrated there.
    pub fn new(
        obj: &dyn Objective,
        position: Vec<f64>,
        window: usize,
        params: &SaParams,
        mut rng: Stream,
    ) -> Result<Self, ObjectiveError> {
        let eta0 = calibrate_eta0(obj, &position, params, &mut rng)?;
        Ok(Self::with_eta0(position, eta0, window, rng))
    }

    pub fn with_eta0(position: Vec<f64>, eta0: f64, window: usize, rng: Stream) -> Self {
        assert!(window >= 1, "window must hold at least one entry");
        Self {
            best_position: position.clone(),
            position,
            step_index: 0,
            eta0,
            history: VecDeque::with_capacity(window),
            window,
            best_value: f64::INFINITY,
            status: Status::Alive,
            rng,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Recorded gradient norms, oldest first.
    pub fn history(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.history.iter().copied()
    }

    pub fn record_grad_norm(&mut self, norm: f64) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(norm);
    }

    pub fn clear_history(&mut self) {
        self.history.clear();
    }

    /// Replace the history with (the last `window` entries of) `entries`.
    pub fn set_history(&mut self, entries: impl IntoIterator<Item = f64>) {
        self.history.clear();
        for e in entries {
            self.record_grad_norm(e);
        }
    }

    pub fn learning_rate(&self, params: &SaParams) -> f64 {
        params.learning_rate(self.eta0, self.step_index)
    }

    fn observe(&mut self, value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best_position.clone_from(&self.position);
        }
    }
}

/// Mean of the recorded gradient norms, or `+∞` for an empty history.
pub fn windowed_grad_norm(p: &Particle) -> f64 {
    if p.history.is_empty() {
        f64::INFINITY
    } else {
        p.history.iter().sum::<f64>() / p.history.len() as f64
    }
}

/// Advance `p` by one annealing step and return the observed gradient norm.
pub fn sa_step(p: &mut Particle, obj: &dyn Objective, params: &SaParams) -> Result<f64, ObjectiveError> {
    let g = obj.estimate_gradient(&p.position, &mut p.rng)?;
    let eta = p.learning_rate(params);
    let noise_scale = eta.sqrt() * params.temperature;
    let noise = p.rng.normal_vec(g.len());
    let moved: Vec<f64> = p
        .position
        .iter()
        .zip(&g)
        .zip(&noise)
        .map(|((x, gi), ni)| x - eta * gi + noise_scale * ni)
        .collect();
    p.position = obj.domain().clip(&moved);
    p.step_index += 1;
    let norm = l2_norm(&g);
    p.record_grad_norm(norm);
    let value = obj.evaluate(&p.position, &mut p.rng)?;
    p.observe(value);
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::EvalCounter;

    /// `f(x) = ‖x − c‖² / 2` on a box, optionally with the gradient forced to 0.
    struct Bowl {
        domain: DomainBox,
        center: Vec<f64>,
        flat: bool,
        counter: EvalCounter,
    }

    impl Bowl {
        fn new(center: Vec<f64>, flat: bool) -> Self {
            Self {
                domain: DomainBox::new(vec![-1.0; center.len()], vec![1.0; center.len()]).unwrap(),
                center,
                flat,
                counter: EvalCounter::default(),
            }
        }
    }

    impl Objective for Bowl {
        fn domain(&self) -> &DomainBox {
            &self.domain
        }
        fn evaluate(&self, x: &[f64], _: &mut Stream) -> Result<f64, ObjectiveError> {
            self.counter.add(1);
            Ok(x.iter().zip(&self.center).map(|(a, c)| 0.5 * (a - c).powi(2)).sum())
        }
        fn estimate_gradient(&self, x: &[f64], _: &mut Stream) -> Result<Vec<f64>, ObjectiveError> {
            Ok(if self.flat {
                vec![0.0; x.len()]
            } else {
                x.iter().zip(&self.center).map(|(a, c)| a - c).collect()
            })
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

    #[test]
    fn params_validation() {
        assert!(SaParams::default().validate().is_ok());
        assert!(SaParams { temperature: -0.1, ..Default::default() }.validate().is_err());
        assert!(SaParams { lr_decay_power: 0.5, ..Default::default() }.validate().is_err());
        assert!(SaParams { grad_floor: 0.0, ..Default::default() }.validate().is_err());
        assert!(SaParams { probe_count: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn eta0_formula() {
        let params = SaParams::default();
        let unit = DomainBox::unit(2);
        let eta = eta0_from_norms(&unit, &mut [1.0, 1.0, 1.0, 1.0, 1.0], &params);
        assert!((eta - 0.05 * 2f64.sqrt() / (1.0 + 1e-8)).abs() < 1e-15);
        let flat = eta0_from_norms(&unit, &mut [0.0; 5], &params);
        assert_eq!(flat, 0.05 * 2f64.sqrt() / 1e-8);
        let a = eta0_from_norms(&unit, &mut [0.3, 5.0, 0.1, 0.4, 9.0], &params);
        let b = eta0_from_norms(&unit, &mut [0.6, 10.0, 0.2, 0.8, 18.0], &params);
        assert!((a / b - 2.0).abs() < 1e-6);
    }

    #[test]
    fn flat_calibration_is_finite() {
        let bowl = Bowl::new(vec![0.0, 0.0], true);
        let eta = calibrate_eta0(&bowl, &[0.2, 0.2], &SaParams::default(), &mut Stream::new(1)).unwrap();
        assert!(eta.is_finite() && eta > 1e6);
    }

    #[test]
    fn null_dynamics_keep_position() {
        let bowl = Bowl::new(vec![0.0, 0.0], true);
        let params = SaParams { temperature: 0.0, ..Default::default() };
        let mut p = Particle::with_eta0(vec![0.3, -0.4], 0.1, 5, Stream::new(2));
        for _ in 0..10 {
            assert_eq!(sa_step(&mut p, &bowl, &params).unwrap(), 0.0);
        }
        assert_eq!(p.position, vec![0.3, -0.4]);
        assert_eq!(p.step_index, 10);
    }

    #[test]
    fn deterministic_descent_on_bowl() {
        let bowl = Bowl::new(vec![0.1, -0.2], false);
        let params = SaParams { temperature: 0.0, ..Default::default() };
        let mut p = Particle::with_eta0(vec![0.9, 0.8], 0.2, 5, Stream::new(3));
        let mut rng = Stream::new(0);
        let mut prev = bowl.evaluate(&p.position, &mut rng).unwrap();
        for _ in 0..50 {
            sa_step(&mut p, &bowl, &params).unwrap();
            let f = bowl.evaluate(&p.position, &mut rng).unwrap();
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn noise_increment_covariance() {
        let bowl = Bowl::new(vec![0.0, 0.0], true);
        let params = SaParams::default();
        let eta = 1e-4;
        let mut p = Particle::with_eta0(vec![0.0, 0.0], eta, 5, Stream::new(4));
        let n = 100_000;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            p.position = vec![0.0, 0.0];
            p.step_index = 0;
            sa_step(&mut p, &bowl, &params).unwrap();
            let (x, y) = (p.position[0], p.position[1]);
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let expected = eta * params.temperature * params.temperature;
        for var in [sxx / n as f64, syy / n as f64] {
            assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
        }
        assert!((sxy / n as f64).abs() < 0.05 * expected);
    }

    #[test]
    fn window_sentinel_and_mean() {
        let mut p = Particle::with_eta0(vec![0.0], 1.0, 3, Stream::new(0));
        assert_eq!(windowed_grad_norm(&p), f64::INFINITY);
        p.set_history([1.0, 1.0, 1.0]);
        assert_eq!(windowed_grad_norm(&p), 1.0);
        p.set_history([0.0, 2.0]);
        assert_eq!(windowed_grad_norm(&p), 1.0);
        p.set_history([9.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.history().collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn best_seen_tracks_minimum() {
        let bowl = Bowl::new(vec![0.0, 0.0], false);
        let mut p = Particle::with_eta0(vec![0.5, 0.5], 0.05, 5, Stream::new(9));
        let mut rng = Stream::new(0);
        let mut seen = Vec::new();
        for _ in 0..30 {
            sa_step(&mut p, &bowl, &SaParams::default()).unwrap();
            seen.push(bowl.evaluate(&p.position, &mut rng).unwrap());
        }
        assert_eq!(p.best_value, seen.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(bowl.evaluate(&p.best_position, &mut rng).unwrap(), p.best_value);
    }

    #[test]
    fn schedule_partial_sums() {
        let params = SaParams::default();
        let etas: Vec<f64> = (0..200_000).map(|k| params.learning_rate(1.0, k)).collect();
        assert!(etas.windows(2).all(|w| w[1] < w[0]));
        let sum: f64 = etas.iter().sum();
        let sum_sq: f64 = etas.iter().map(|e| e * e).sum();
        assert!(sum > 12.0);
        assert!(sum_sq < std::f64::consts::PI.powi(2) / 6.0);
    }
}

use fvopt::annealer::{sa_step, Particle, SaParams};
use fvopt::objective::{DomainBox, EvalCounter, Objective, ObjectiveError};
use fvopt::rng::Stream;
use proptest::prelude::*;

/// Linear objective whose descent direction points out of the box.
struct Outward {
    domain: DomainBox,
    direction: Vec<f64>,
    counter: EvalCounter,
}

impl Objective for Outward {
    fn domain(&self) -> &DomainBox {
        &self.domain
    }
    fn evaluate(&self, x: &[f64], _: &mut Stream) -> Result<f64, ObjectiveError> {
        self.domain.check(x)?;
        self.counter.add(1);
        Ok(-x.iter().zip(&self.direction).map(|(a, b)| a * b).sum::<f64>())
    }
    fn estimate_gradient(&self, x: &[f64], _: &mut Stream) -> Result<Vec<f64>, ObjectiveError> {
        self.domain.check(x)?;
        Ok(self.direction.iter().map(|d| -d).collect())
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn steps_near_the_boundary_stay_inside(
        seed in any::<u64>(),
        direction in prop::collection::vec(-50.0..50.0f64, 3),
        temperature in 0.0..5.0f64,
        eta0 in 1e-3..10.0f64,
    ) {
        let domain = DomainBox::new(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 2.5]).unwrap();
        let mut rng = Stream::new(seed);
        let start: Vec<f64> = (0..3)
            .map(|a| if rng.next_f64() < 0.5 { domain.lo()[a] + 1e-6 } else { domain.hi()[a] - 1e-6 })
            .collect();
        let obj = Outward { domain, direction, counter: EvalCounter::default() };
        let sa = SaParams { temperature, ..SaParams::default() };
        let mut p = Particle::with_eta0(start, eta0, 5, Stream::new(seed ^ 1));
        for _ in 0..100 {
            sa_step(&mut p, &obj, &sa).unwrap();
            prop_assert!(obj.domain().contains(&p.position), "{:?}", p.position);
        }
    }
}

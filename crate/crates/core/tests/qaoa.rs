use fvopt::qaoa::{max_cut_oracle, random_graph, QaoaProblem, StateVector, WeightedGraph};
use fvopt::rng::Stream;
use proptest::prelude::*;
use std::f64::consts::PI;

fn problem(seed: u64, n: usize) -> QaoaProblem {
    let g = random_graph(n, &mut Stream::new(seed)).unwrap();
    QaoaProblem::new(g, 1).unwrap()
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuit_is_unitary(seed in 0u64..1000, beta in 0.0..PI, gamma in 0.0..2.0 * PI, layers in 1usize..4) {
        let g = random_graph(6, &mut Stream::new(seed)).unwrap();
        let p = QaoaProblem::new(g, layers).unwrap();
        let state = p.state(&vec![beta; layers], &vec![gamma; layers]).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_shift_by_pi_leaves_expectation(seed in 0u64..1000, beta in 0.0..PI, gamma in 0.0..2.0 * PI) {
        // The problem rejects β outside [0, π], so the shifted circuit is
        // assembled from the state-vector primitives.
        let p = problem(seed, 5);
        let layer = |b: f64| {
            let mut s = StateVector::uniform(5);
            s.apply_phase(p.diagonal(), gamma);
            s.apply_mixer(b);
            s.probabilities().iter().zip(p.diagonal()).map(|(q, c)| q * c).sum::<f64>()
        };
        let a = p.expectation_exact(&[beta], &[gamma]).unwrap();
        prop_assert!((a - layer(beta)).abs() < 1e-12);
        prop_assert!((a - layer(beta + PI)).abs() < 1e-9);
    }

    #[test]
    fn phase_layer_keeps_magnitudes(seed in 0u64..1000, gamma in -10.0..10.0f64) {
        let p = problem(seed, 5);
        let mut s = StateVector::uniform(5);
        s.apply_mixer(0.3);
        let before: Vec<f64> = s.amplitudes().iter().map(|a| a.norm()).collect();
        s.apply_phase(p.diagonal(), gamma);
        for (a, m) in s.amplitudes().iter().zip(before) {
            prop_assert!((a.norm() - m).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_lies_between_zero_and_total_weight(seed in 0u64..1000, beta in 0.0..PI, gamma in 0.0..2.0 * PI) {
        let p = problem(seed, 6);
        let e = p.expectation_exact(&[beta], &[gamma]).unwrap();
        prop_assert!(e >= -1e-12 && e <= p.graph().total_weight() + 1e-12);
    }
}

#[test]
fn mixer_at_pi_keeps_magnitudes() {
    let p = problem(3, 6);
    let mut s = StateVector::uniform(6);
    s.apply_phase(p.diagonal(), 0.7);
    s.apply_mixer(0.4);
    let before: Vec<f64> = s.amplitudes().iter().map(|a| a.norm()).collect();
    s.apply_mixer(PI);
    for (a, m) in s.amplitudes().iter().zip(before) {
        assert!((a.norm() - m).abs() < 1e-12);
    }
}

#[test]
fn relabelling_nodes_leaves_expectation() {
    let mut rng = Stream::new(77);
    for seed in 0..10 {
        let p = problem(seed, 6);
        let mut perm: Vec<usize> = (0..6).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.index(i + 1));
        }
        let q = QaoaProblem::new(p.graph().permuted(&perm).unwrap(), 1).unwrap();
        let (beta, gamma) = (rng.uniform(0.0, PI), rng.uniform(0.0, 2.0 * PI));
        let a = p.expectation_exact(&[beta], &[gamma]).unwrap();
        let b = q.expectation_exact(&[beta], &[gamma]).unwrap();
        assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn shot_variance_scales_inversely_with_shots() {
    let p = problem(11, 8);
    let (beta, gamma) = ([0.4], [1.1]);
    let mut rng = Stream::new(5);
    let mut estimates = |shots| -> Vec<f64> {
        (0..200).map(|_| p.expectation_shots(&beta, &gamma, shots, &mut rng).unwrap()).collect()
    };
    let few = estimates(128);
    let many = estimates(512);
    let ratio = sample_variance(&many) / sample_variance(&few);
    assert!((0.15..=0.35).contains(&ratio), "variance ratio {ratio}");
}

#[test]
fn single_shot_estimates_are_unbiased() {
    let p = problem(12, 8);
    let (beta, gamma) = ([0.9], [2.3]);
    let exact = p.expectation_exact(&beta, &gamma).unwrap();
    let mut rng = Stream::new(6);
    let xs: Vec<f64> = (0..10_000).map(|_| p.expectation_shots(&beta, &gamma, 1, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let se = (sample_variance(&xs) / xs.len() as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "mean {mean}, exact {exact}, se {se}");
}

#[test]
fn oracle_beats_half_the_total_weight() {
    for seed in 0..20 {
        let g = random_graph(7, &mut Stream::new(100 + seed)).unwrap();
        let (best, _) = max_cut_oracle(&g).unwrap();
        assert!(best >= g.total_weight() / 2.0);
    }
}

#[test]
fn triangle_max_cut_isolates_the_heaviest_node() {
    let g = WeightedGraph::from_upper(3, &[vec![1.0, 2.0], vec![3.0]]).unwrap();
    let (best, z) = max_cut_oracle(&g).unwrap();
    assert_eq!(best, 5.0);
    // Node 2 alone on one side cuts edges of weight 2 and 3.
    assert_eq!(z.bit(0), z.bit(1));
    assert_ne!(z.bit(0), z.bit(2));
}

//! Single annealing chains on a synthetic landscape: the learning-rate
//! schedule, the windowed gradient norm and the best value along the way.
//!
//! cargo run --release --example annealer_walk

use std::sync::Arc;

use fvopt::annealer::{sa_step, windowed_grad_norm, Particle, SaParams};
use fvopt::landscape::{synthesize, GridSpec, SynthesisParams};
use fvopt::objective::synthetic_objective;
use fvopt::rng::Stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let landscape = Arc::new(synthesize(GridSpec::unit(60), SynthesisParams {
        plateau_width: 6,
        rng_seed: 3,
        ..SynthesisParams::default()
    })?);
    let obj = synthetic_objective(landscape.clone());
    let sa = SaParams::default();
    println!("global minimum {:.4}", landscape.global_min_val());

    for (label, start) in [("barren start", barren_start(&landscape)), ("corner start", vec![0.2, 0.2])] {
        let mut p = Particle::new(&obj, start.clone(), 5, &sa, Stream::new(11))?;
        println!("\n{label} {start:.3?}, eta0 = {:.4}", p.eta0);
        println!("  step        eta   |g|  window |g|        best");
        for k in 0..40 {
            let eta = p.learning_rate(&sa);
            let g = sa_step(&mut p, &obj, &sa)?;
            if k % 5 == 0 || k == 39 {
                println!("  {k:>4} {eta:>10.5} {g:>5.3} {:>11.3} {:>11.4}", windowed_grad_norm(&p), p.best_value);
            }
        }
        println!("  final position {:.3?}", p.position);
    }
    Ok(())
}

/// The flattest barren grid point.
fn barren_start(l: &fvopt::landscape::Landscape) -> Vec<f64> {
    let norm = |p: [f64; 2]| {
        let g = l.grad(p).unwrap();
        g[0].hypot(g[1])
    };
    let p = l
        .barren_cells()
        .into_iter()
        .map(|(i, j)| l.grid().point(i, j))
        .min_by(|a, b| norm(*a).total_cmp(&norm(*b)))
        .unwrap();
    p.to_vec()
}

//! A fully connected weighted graph, its brute-force Max-Cut and the exact
//! and shot-estimated depth-1 QAOA landscape.
//!
//! cargo run --release --example qaoa_maxcut -- [nodes] [graph_seed]

use std::env;
use std::f64::consts::PI;

use fvopt::qaoa::{max_cut_oracle, random_graph, QaoaProblem};
use fvopt::rng::Stream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let nodes = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let graph = random_graph(nodes, &mut Stream::new(seed))?;
    let (best, cut) = max_cut_oracle(&graph)?;
    println!("{nodes} nodes, total weight {:.4}", graph.total_weight());
    println!("max cut {best:.4} with partition {cut}");

    let problem = QaoaProblem::new(graph, 1)?;
    let n = 24;
    let mut top = (f64::NEG_INFINITY, 0.0, 0.0);
    println!("\nexact <C> / max cut over beta (rows) x gamma (columns):");
    for a in 0..=n / 2 {
        let beta = PI * a as f64 / n as f64;
        let row: String = (0..=n)
            .map(|b| {
                let gamma = 2.0 * PI * b as f64 / n as f64;
                let e = problem.expectation_exact(&[beta], &[gamma]).unwrap();
                if e > top.0 {
                    top = (e, beta, gamma);
                }
                let shade = ((e / best - 0.4) / 0.6 * 5.0).clamp(0.0, 4.99) as usize;
                [' ', '.', ':', 'o', '@'][shade]
            })
            .collect();
        println!("  {beta:>5.3} |{row}|");
    }
    let (e, beta, gamma) = top;
    println!("best grid point beta={beta:.3} gamma={gamma:.3}: <C> = {e:.4} ({:.1}% of max cut)", 100.0 * e / best);

    let mut rng = Stream::new(99);
    for shots in [16, 128, 1024] {
        let est: Vec<f64> = (0..200)
            .map(|_| problem.expectation_shots(&[beta], &[gamma], shots, &mut rng).unwrap())
            .collect();
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        let sd = (est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64).sqrt();
        println!("{shots:>5} shots: mean {mean:.4}, sd {sd:.4}");
    }
    Ok(())
}

//! Paired FV vs SA runs on a small synthetic bench with the default
//! settings: 10 particles, alpha 1, 50 steps, ansatze on barren cells far
//! from the minimum.
//!
//! cargo run --release --example fv_vs_sa_synthetic -- [functions] [exploration_rate]

use std::env;

use fvopt::bench::{run_paired_experiment, summarize, ExperimentSpec, Method, ObjectiveSpec};
use fvopt::fv::EventKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let functions = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let rate = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let mut spec = ExperimentSpec::synthetic();
    spec.master_seed = 42;
    spec.fv.exploration_rate = rate;
    if let ObjectiveSpec::Synthetic(s) = &mut spec.objective {
        s.functions = functions;
    }
    let (fns, runs) = run_paired_experiment(&spec)?;
    let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();
    let summary = summarize(&records, &fns);

    println!("function  advantage  median SA  median FV  [q1, q3] FV");
    for f in &summary.functions {
        println!(
            "{:>8}  {:>9.4}  {:>9.4}  {:>9.4}  [{:.3}, {:.3}]",
            f.function_id, f.advantage, f.sa.median, f.fv.median, f.fv.q1, f.fv.q3
        );
    }
    println!(
        "mean advantage {:.4}, positive on {}/{}",
        summary.mean_advantage,
        summary.positive_advantage_count,
        summary.functions.len()
    );

    let fv: Vec<_> = runs.iter().filter(|r| r.record.method == Method::Fv).collect();
    let count = |k| fv.iter().map(|r| r.events.iter().filter(|e| e.kind == k).count()).sum::<usize>();
    println!(
        "FV events: {} absorbed, {} reinitialized, {} reactivated",
        count(EventKind::Absorbed),
        count(EventKind::Reinitialized),
        count(EventKind::Reactivated)
    );
    let budget = |m| runs.iter().filter(|r| r.record.method == m).map(|r| r.record.eval_count).sum::<u64>();
    println!("evaluation budget: SA {} / FV {}", budget(Method::Sa), budget(Method::Fv));
    Ok(())
}

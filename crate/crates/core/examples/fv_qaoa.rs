//! Paired FV vs SA runs on QAOA Max-Cut with shot noise and
//! finite-difference gradients.
//!
//! cargo run --release --example fv_qaoa -- [graphs] [shots]

use std::env;

use fvopt::bench::{run_paired_experiment, summarize, ExperimentSpec, Instance, ObjectiveSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let graphs = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let shots = args.next().map(|s| s.parse()).transpose()?.unwrap_or(512);

    let mut spec = ExperimentSpec::qaoa();
    spec.master_seed = 8;
    spec.replications = 5;
    if let ObjectiveSpec::Qaoa(q) = &mut spec.objective {
        q.graphs = graphs;
        q.shots = shots;
    }
    let (fns, runs) = run_paired_experiment(&spec)?;
    for f in &fns {
        if let Instance::Qaoa { max_cut, problem, .. } = &f.instance {
            println!("graph {}: max cut {max_cut:.4}, total weight {:.4}", f.id, problem.graph().total_weight());
        }
    }
    let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();
    let summary = summarize(&records, &fns);
    println!("\ngraph  advantage  median err SA  median err FV");
    for s in &summary.functions {
        println!("{:>5}  {:>9.4}  {:>13.4}  {:>13.4}", s.function_id, s.advantage, s.sa.median, s.fv.median);
    }
    let calibration: u64 = runs.iter().map(|r| r.calibration_evals).sum();
    let optimizer: u64 = records.iter().map(|r| r.eval_count).sum();
    println!("\ncircuit estimates: {optimizer} by optimizer steps, {calibration} by learning-rate calibration");
    Ok(())
}

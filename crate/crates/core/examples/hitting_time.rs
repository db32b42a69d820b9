//! A reduced hitting-time study: how many more steps SA needs than FV to
//! reach the global-minimum band as the barren fraction and plateau count
//! grow.
//!
//! cargo run --release --example hitting_time -- [trials]

use std::env;

use fvopt::bench::{hitting_time_study, HittingSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(12);
    let spec = HittingSpec {
        trials,
        step_cap: 2000,
        ..HittingSpec::default()
    };
    let report = hitting_time_study(&spec)?;
    println!("{report}");
    for cell in report.fraction_sweep.iter().chain(&report.count_sweep) {
        let hits = cell.trials.iter().filter(|t| t.fv_steps.is_some()).count();
        println!(
            "B={:.1} b={}: FV hit in {hits}/{} trials, SA capped {} times",
            cell.barren_fraction,
            cell.plateau_count,
            cell.trials.len(),
            cell.sa_capped
        );
    }
    Ok(())
}

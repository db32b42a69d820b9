//! Synthesize a 70%-barren landscape, print a coarse ASCII map and save it.
//!
//! cargo run --release --example synthesize_landscape -- [seed] [out.json]

use std::env;
use std::path::PathBuf;

use fvopt::landscape::{read_landscape, synthesize, write_landscape, GridSpec, SynthesisParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let out = args.next().map(PathBuf::from);

    let params = SynthesisParams {
        rng_seed: seed,
        ..SynthesisParams::default()
    };
    let l = synthesize(GridSpec::unit(100), params)?;
    let [mx, my] = l.global_min_pos();
    println!("barren fraction   {:.3}", l.barren_fraction());
    println!("plateau squares   {} in {} barren areas", l.plateaus().len(), l.barren_area_count());
    println!("global minimum    {:.4} at ({mx:.2}, {my:.2})", l.global_min_val());
    println!("maximum value     {:.4}", l.max_value());
    println!("effective seed    {}", l.effective_seed());

    // '#' barren, '*' minimum, otherwise a digit for the value decile.
    let (lo, hi) = (l.global_min_val(), l.max_value());
    let (mi, mj) = l.global_min_cell();
    for j in (0..100).step_by(4).rev() {
        let row: String = (0..100)
            .step_by(2)
            .map(|i| {
                if mi / 2 == i / 2 && mj / 4 == j / 4 {
                    '*'
                } else if l.is_barren(i, j) {
                    '#'
                } else {
                    let t = (l.grid_value(i, j) - lo) / (hi - lo);
                    char::from_digit(((t * 9.99) as u32).min(9), 10).unwrap()
                }
            })
            .collect();
        println!("{row}");
    }

    if let Some(path) = out {
        write_landscape(&path, &l)?;
        let back = read_landscape(&path)?;
        assert_eq!(back.grid_values(), l.grid_values());
        println!("saved to {}", path.display());
    }
    Ok(())
}

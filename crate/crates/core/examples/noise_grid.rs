//! Protocol distance over a grid of disorder and interaction strengths.
//!
//! A small version of `acspin noise-grid`; set ACSTATE_WORKERS to bound threads.

use anticoherent::dd::Strategy;
use anticoherent::experiments::{noise_grid, NoiseGridConfig};
use anticoherent::Result;

fn main() -> Result<()> {
    let cfg = NoiseGridConfig {
        points: 4,
        instances: 4,
        ..Default::default()
    };
    let g = noise_grid(&cfg)?;

    println!(
        "mean distance, rows delta/chi, columns Delta/chi = {:?}",
        g.dipolars
            .iter()
            .map(|x| format!("{x:.1e}"))
            .collect::<Vec<_>>()
    );
    for s in Strategy::ALL {
        println!("{s}:");
        for (i, d) in g.deltas.iter().enumerate() {
            let row: Vec<String> = (0..g.dipolars.len())
                .map(|k| {
                    format!(
                        "{:.2e}",
                        g.cell(i, k, s).map_or(f64::NAN, |c| c.stats.mean_distance)
                    )
                })
                .collect();
            println!("  {d:.1e}  {}", row.join("  "));
        }
    }
    for c in &g.disorder_crossovers {
        println!(
            "{} beats nodd below delta/chi = 10^{:.2} (infidelity 10^{:.2})",
            c.strategy,
            c.at.log10(),
            c.infidelity.log10()
        );
    }
    Ok(())
}

//! How the order-2 squeezing parameters scale with j.

use anticoherent::experiments::{powerlaw, PowerLawConfig};
use anticoherent::Result;

fn main() -> Result<()> {
    let report = powerlaw(&PowerLawConfig::range(20, 80, 5)?)?;
    for row in &report.rows {
        println!(
            "j = {:>3}: eta2 = {:+.6}, eta3 = {:+.6}, 1 - A_2 = {:.1e}",
            row.j, row.eta2, row.eta3, row.deviation
        );
    }
    for (name, fit) in [("|eta2|", report.eta2_fit), ("|eta3|", report.eta3_fit)] {
        if let Some(f) = fit {
            println!("{name} ~ 10^{:.3} j^{:.3}", f.intercept, f.slope);
        }
    }
    Ok(())
}

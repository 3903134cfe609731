//! Magnus-series error bounds and the regime thresholds they imply.

use std::f64::consts::PI;

use anticoherent::metrics::{magnus_bound, regime_thresholds};
use anticoherent::Result;

fn main() -> Result<()> {
    let tau = 4.0;
    for h in [1e-4, 1e-3, 1e-2] {
        println!(
            "tau = {tau}, ||H|| = {h:.0e}: first order {:.2e}, second order {:.2e}",
            magnus_bound(1, tau, h)?,
            magnus_bound(2, tau, h)?
        );
    }

    // GHZ protocol protected per pulse: alpha = 40, beta = 1, gamma = pi.
    println!(
        "\n{:>8} {:>10} {:>10} {:>10} {:>10}",
        "h", "D_NoDD", "D_DCG", "eps*_I", "eps*_II"
    );
    for h in [1e-6, 1e-5, 1e-4, 3e-4] {
        let r = regime_thresholds(40.0, 1.0, PI, h)?;
        println!(
            "{h:>8.0e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            r.nodd_bound, r.dcg_bound, r.type1_threshold, r.type2_threshold
        );
    }
    let r = regime_thresholds(40.0, 1.0, PI, 0.0)?;
    println!(
        "DCG advantage while h < lambda^2 = {:.2e} (lambda = {:.4})",
        r.dcg_advantage_limit, r.lambda
    );
    Ok(())
}

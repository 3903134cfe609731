//! Rotation-squeezing protocols that prepare anticoherent states from |j, y>.
//!
//! The closed-form t = 1 and t = 2 protocols are compared with multistart
//! Nelder-Mead solutions; `min_squeezing` keeps the cheapest converged one.

use anticoherent::experiments::{generate, GenerateConfig};
use anticoherent::Result;

fn main() -> Result<()> {
    println!(
        "{:>4} {:>2} {:>3} {:>10} {:>11} {:>10} {:>10}",
        "j", "t", "n_C", "method", "1 - A_t", "sum|theta|", "sum|eta|"
    );
    let runs = [
        GenerateConfig {
            j: 1.0,
            t: 1,
            analytic: true,
            ..Default::default()
        },
        GenerateConfig {
            j: 4.0,
            t: 2,
            analytic: true,
            ..Default::default()
        },
        GenerateConfig {
            j: 2.0,
            t: 2,
            n_c: Some(2),
            min_squeezing: true,
            seed: 1,
            ..Default::default()
        },
        GenerateConfig {
            j: 3.0,
            t: 2,
            n_c: Some(2),
            min_squeezing: true,
            seed: 1,
            ..Default::default()
        },
        GenerateConfig {
            j: 3.0,
            t: 3,
            n_c: Some(3),
            seed: 0,
            ..Default::default()
        },
    ];
    for cfg in runs {
        let p = generate(&cfg)?;
        println!(
            "{:>4} {:>2} {:>3} {:>10} {:>11.2e} {:>10.5} {:>10.5}{}",
            p.j,
            p.t,
            p.n_c,
            p.method,
            p.deviation,
            p.canonical_cost.total_rotation,
            p.canonical_cost.total_squeezing,
            if p.converged { "" } else { "  (not converged)" }
        );
    }
    Ok(())
}

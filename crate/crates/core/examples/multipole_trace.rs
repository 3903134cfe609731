//! Multipole power after every pulse of a protocol, as written by `acspin multipole-trace`.

use anticoherent::experiments::{generate, multipole_trace, GenerateConfig};
use anticoherent::Result;

fn main() -> Result<()> {
    let params = generate(&GenerateConfig {
        j: 4.0,
        t: 2,
        analytic: true,
        ..Default::default()
    })?;
    let table = multipole_trace(&params)?;
    let steps = table.numeric_column("step")?;
    let ls = table.numeric_column("L")?;
    let powers = table.numeric_column("power")?;
    let labels = table.column("pulse")?;

    let last = steps.iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
    for step in 0..=last {
        let mut by_l = [0.0; 3];
        let mut label = String::new();
        for (k, &s) in steps.iter().enumerate() {
            if s as usize == step && ls[k] >= 1.0 && ls[k] <= 3.0 {
                by_l[ls[k] as usize - 1] += powers[k];
                label = labels[k].to_string();
            }
        }
        println!(
            "{step:>2} {label:<10} L=1 {:.2e}  L=2 {:.2e}  L=3 {:.2e}",
            by_l[0], by_l[1], by_l[2]
        );
    }
    Ok(())
}

//! Dynamically corrected gates: one protocol under one noise draw, three strategies.

use anticoherent::dd::dcg::protocol_pulses;
use anticoherent::dd::schedule::{ideal_propagator, simulate_schedule, FlipErrors};
use anticoherent::dd::{protected_schedule, DcgSequences, Strategy};
use anticoherent::ensemble::{collective_operators, sample_noise};
use anticoherent::experiments::{generate, GenerateConfig};
use anticoherent::metrics::distance;
use anticoherent::Result;

fn main() -> Result<()> {
    let n = 4;
    let ens = collective_operators(n)?;
    let params = generate(&GenerateConfig {
        j: 2.0,
        t: 2,
        n_c: Some(2),
        min_squeezing: true,
        seed: 1,
        ..Default::default()
    })?;
    let cycles = protocol_pulses(&params.cycles, 1.0)?;
    let seqs = DcgSequences::shipped();
    let target: Vec<_> = cycles.iter().flatten().copied().collect();
    let u_target = ideal_propagator(&target, &ens)?;

    for (delta, dipolar) in [(1e-3, 1e-3), (1e-2, 1e-3), (1e-1, 1e-2)] {
        let (_, h) = sample_noise(n, delta, dipolar, true, 3)?;
        print!("delta = {delta:.0e}, Delta = {dipolar:.0e}:");
        for s in Strategy::ALL {
            let sched = protected_schedule(s, &cycles, &seqs, 1.0, None)?;
            let u = simulate_schedule(&sched, &ens, &h, &FlipErrors::none())?;
            print!(
                "  {s} D = {:.2e} ({} pulses, T = {:.1})",
                distance(&u, &u_target)?,
                sched.len(),
                sched.duration()
            );
        }
        println!();
    }
    Ok(())
}

//! Random disorder and dipolar Hamiltonians on N spin-1/2 particles.

use anticoherent::ensemble::{collective_operators, operator_norm, sample_noise, NoiseInstance};
use anticoherent::Result;

fn main() -> Result<()> {
    let n = 4;
    let ens = collective_operators(n)?;
    println!(
        "N = {n}: Hilbert dimension {}, symmetric subspace dimension {}",
        ens.dim(),
        ens.spin().dim()
    );

    let raw = NoiseInstance::draw(n, true, 7)?;
    println!("\nRWA draw, seed 7:");
    for d in &raw.disorder {
        println!("  delta = {:+.4}", d.delta);
    }
    for p in &raw.dipolar {
        println!("  Delta_{}{} = {:+.4}", p.i, p.j, p.coupling);
    }

    let (inst, h) = sample_noise(n, 1e-2, 1e-3, true, 7)?;
    println!(
        "\nrescaled: ||H_dis|| = {:.3e}, ||H_dd|| = {:.3e}, ||H|| = {:.3e}",
        operator_norm(&inst.disorder_hamiltonian()?),
        operator_norm(&inst.dipolar_hamiltonian()?),
        operator_norm(&h)
    );

    let general = NoiseInstance::draw(n, false, 7)?;
    println!(
        "general axes: first disorder axis {:?}",
        general.disorder[0].axis.map(|x| (x * 1e3).round() / 1e3)
    );
    Ok(())
}

//! Multipole expansion of spin states and the anticoherence measure A_t.

use std::f64::consts::FRAC_PI_2;

use anticoherent::linalg::{c, CVector};
use anticoherent::multipole::{ac_deviation_state, decompose_state};
use anticoherent::spin::{cat_state, coherent_state, Spin, SpinState};
use anticoherent::Result;

fn report(name: &str, state: &SpinState) -> Result<()> {
    let l_max = state.spin().two_j();
    let d = decompose_state(state, l_max)?;
    let powers: Vec<String> = (0..=l_max).map(|l| format!("{:.3}", d.power(l))).collect();
    let dev: Vec<String> = (1..=3.min(l_max))
        .map(|t| Ok(format!("{:.1e}", ac_deviation_state(state, t)?)))
        .collect::<Result<_>>()?;
    println!(
        "{name:<12} power by L: [{}]  1 - A_t for t = 1..: [{}]",
        powers.join(", "),
        dev.join(", ")
    );
    Ok(())
}

fn main() -> Result<()> {
    let two = Spin::new(2.0)?;
    report("coherent", &coherent_state(two, FRAC_PI_2, 0.0))?;
    report("cat", &cat_state(two))?;

    // Tetrahedron state: sqrt(1/3)|2, 2> + sqrt(2/3)|2, -1>, anticoherent to order 2.
    let mut amps = CVector::zeros(5);
    amps[0] = c((1.0f64 / 3.0).sqrt());
    amps[3] = c((2.0f64 / 3.0).sqrt());
    report("tetrahedron", &SpinState::new(two, amps)?)?;

    // Octahedron state for j = 3: (|3, 2> - |3, -2>)/sqrt2, anticoherent to order 3.
    let three = Spin::new(3.0)?;
    let mut amps = CVector::zeros(7);
    amps[1] = c(0.5f64.sqrt());
    amps[5] = c(-(0.5f64.sqrt()));
    report("octahedron", &SpinState::new(three, amps)?)?;
    Ok(())
}

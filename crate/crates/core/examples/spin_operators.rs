//! Spin-j operators, coherent and cat states, and the two control pulses.

use std::f64::consts::FRAC_PI_2;

use anticoherent::linalg::{commutator, max_abs, C64};
use anticoherent::spin::{cat_state, coherent_y, spin_operators, squeezing_pulse, Spin};
use anticoherent::Result;

fn main() -> Result<()> {
    let spin: Spin = "5/2".parse()?;
    let ops = spin_operators(spin);
    println!("j = {}, dimension {}", spin.j(), spin.dim());

    let lhs = commutator(ops.jx.matrix(), ops.jy.matrix());
    let rhs = ops.jz.matrix() * C64::new(0.0, 1.0);
    println!("max |[Jx, Jy] - iJz| = {:.2e}", max_abs(&(lhs - rhs)));

    let j2 = ops.jx.matrix() * ops.jx.matrix()
        + ops.jy.matrix() * ops.jy.matrix()
        + ops.jz.matrix() * ops.jz.matrix();
    let jj = spin.j() * (spin.j() + 1.0);
    println!(
        "J^2 eigenvalue {jj}, max off-scalar entry {:.2e}",
        max_abs(
            &(j2 - anticoherent::linalg::CMatrix::identity(spin.dim(), spin.dim())
                * C64::new(jj, 0.0))
        )
    );

    let y = coherent_y(spin);
    println!(
        "\n|j, y>: <Jx> = {:.3}, <Jy> = {:.3}, <Jz> = {:.3}",
        y.expectation(&ops.jx),
        y.expectation(&ops.jy),
        y.expectation(&ops.jz)
    );

    // A pi/2 squeeze of |j, y> gives a cat state in the equatorial plane:
    // along y for integer j, along x for half-integer j.
    let cat = cat_state(spin);
    println!(
        "<Jz^2> of the z cat state: {:.6} (j^2 = {})",
        cat.expectation(&ops.jz2),
        spin.j() * spin.j()
    );
    for j in [2.0, 2.5] {
        let s = Spin::new(j)?;
        let o = spin_operators(s);
        let psi = coherent_y(s).evolve(&squeezing_pulse(s, FRAC_PI_2));
        let second = |op: &anticoherent::linalg::HermitianOperator| {
            (op.matrix() * psi.amplitudes()).norm_squared()
        };
        println!(
            "j = {j}: pi/2 squeeze of |j, y> has <Jx^2> = {:.6}, <Jy^2> = {:.6}",
            second(&o.jx),
            second(&o.jy)
        );
    }
    Ok(())
}

//! Clebsch-Gordan coefficients and Wigner 3j/6j symbols in exact arithmetic.
//!
//! Arguments are passed as twice their value so half-integers stay integral.

use anticoherent::wigner::{
    clebsch_gordan, clebsch_gordan_twice, wigner_3j_twice, wigner_6j, HalfInt,
};
use anticoherent::Result;

fn main() -> Result<()> {
    let h = HalfInt::new;

    // Two spin-1/2 into the triplet and singlet.
    let up_down = clebsch_gordan(h(0.5)?, h(0.5)?, h(0.5)?, h(-0.5)?, h(1.0)?, h(0.0)?)?;
    let singlet = clebsch_gordan(h(0.5)?, h(0.5)?, h(0.5)?, h(-0.5)?, h(0.0)?, h(0.0)?)?;
    println!(
        "<1/2 1/2; 1/2 -1/2 | 1 0> = {up_down:.12}  (1/sqrt2 = {:.12})",
        0.5f64.sqrt()
    );
    println!("<1/2 1/2; 1/2 -1/2 | 0 0> = {singlet:.12}");

    // Orthogonality over m1 for j1 = 3/2, j2 = 1 at fixed M = 1/2.
    let (tj1, tj2, tm) = (3, 2, 1);
    println!(
        "\nsum_m1 <j1 m1; j2 M-m1 | J M><j1 m1; j2 M-m1 | J' M> for j1 = 3/2, j2 = 1, M = 1/2:"
    );
    for tj in [1, 3, 5] {
        let row: Vec<String> = [1, 3, 5]
            .iter()
            .map(|&tjp| {
                let s: f64 = (-tj1..=tj1)
                    .step_by(2)
                    .map(|tm1| {
                        clebsch_gordan_twice(tj1, tm1, tj2, tm - tm1, tj, tm)
                            * clebsch_gordan_twice(tj1, tm1, tj2, tm - tm1, tjp, tm)
                    })
                    .sum();
                format!("{s:+.3e}")
            })
            .collect();
        println!("  J = {}/2: {}", tj, row.join("  "));
    }

    // Large arguments stay finite thanks to big-integer factorials.
    let big = wigner_3j_twice(200, 0, 200, 0, 200, 0);
    println!("\n(100 100 100; 0 0 0) = {big:.6e}");

    let six = wigner_6j([h(1.0)?, h(1.0)?, h(1.0)?, h(1.0)?, h(1.0)?, h(1.0)?])?;
    println!("{{1 1 1; 1 1 1}} = {six:.12}  (1/6 = {:.12})", 1.0 / 6.0);
    Ok(())
}

//! Eulerian decoupling sequences from Cayley graphs, and how well they decouple.

use anticoherent::dd::{verify_decoupling, DDSequence, NoiseFamily};
use anticoherent::ensemble::collective_operators;
use anticoherent::Result;

fn main() -> Result<()> {
    let ens = collective_operators(3)?;
    for seq in [DDSequence::tedd(), DDSequence::teddy()] {
        println!(
            "{}: group order {}, {} pulses, order {:?}",
            seq.name(),
            seq.group().order(),
            seq.pulse_count(),
            seq.pulse_order()
        );
        for family in NoiseFamily::ALL {
            let leak = verify_decoupling(&seq, family, &ens, 5, 11)?;
            let claimed = seq.correctable().contains(&family);
            println!(
                "  {family:?}: max ||P(H)||/||H|| = {leak:.1e}{}",
                if claimed { "  (correctable)" } else { "" }
            );
        }
    }
    Ok(())
}

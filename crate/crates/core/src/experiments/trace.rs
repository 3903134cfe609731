//! Per-pulse multipole power |ρ_LM|² along a protocol.

use super::generate::ProtocolFile;
use super::{num, Table};
use crate::error::Result;
use crate::multipole::{decompose_state_with, TensorBasis};
use crate::protocol::ProtocolSimulator;

pub const SCHEMA: &str = "multipole_trace/1";

/// One row per (step, L, M); step 0 is the initial +y coherent state and the
/// pulse column names the pulse just applied (R_i or S_i).
pub fn multipole_trace(params: &ProtocolFile) -> Result<Table> {
    let spin = params.spin()?;
    let basis = TensorBasis::cached(spin, spin.two_j())?;
    let mut table = Table::new(SCHEMA, &["step", "pulse", "L", "M", "power"]);
    table.set_meta("j", spin.j());
    table.set_meta("t", params.t);
    table.set_meta("cycles", serde_json::to_string(&params.cycles)?);
    for (step, (label, psi)) in ProtocolSimulator::new(spin)
        .trace(&params.cycles)
        .into_iter()
        .enumerate()
    {
        for (l, m, p) in decompose_state_with(&basis, &psi).powers() {
            table.push(vec![
                step.to_string(),
                label.clone(),
                l.to_string(),
                m.to_string(),
                num(p),
            ]);
        }
    }
    Ok(table)
}

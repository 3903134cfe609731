//! Dynamically corrected gates: a decoupling cycle with identity gates at the
//! first visit of each group element and the stretched target at the end.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::schedule::{
    balanced_pair, finite_duration_error, ControlSchedule, Generator, PulseRole, PulseSegment,
};
use super::sequence::{leakage_residual, DDSequence, NoiseFamily};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Propagator};
use crate::protocol::ControlCycle;

/// Largest tolerated ‖Π_G(H_eff)‖/‖H_eff‖ for a protected pulse.
pub const LEAKAGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct DcgSchedule {
    pub sequence: String,
    pub schedule: ControlSchedule,
    pub identity_gates: usize,
    /// τ_DCG/τ.
    pub alpha: f64,
    /// τ_BP/τ, with τ_BP the time spent in identity gates and the stretched target.
    pub beta: f64,
    /// χτ.
    pub gamma: f64,
}

/// Noise operators used to check that a target stays correctable.
#[derive(Clone, Debug)]
pub struct LeakageProbe {
    pub ensemble: Ensemble,
    pub probes: Vec<HermitianOperator>,
}

impl LeakageProbe {
    pub fn new(ensemble: Ensemble, probes: Vec<HermitianOperator>) -> Self {
        Self { ensemble, probes }
    }

    /// `count` random members of `family`.
    pub fn sampled(
        ensemble: Ensemble,
        family: NoiseFamily,
        count: usize,
        seed: u64,
    ) -> Result<Self> {
        let probes = (0..count)
            .map(|k| family.sample(&ensemble, seed.wrapping_add(k as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ensemble, probes })
    }
}

/// ‖Π_G(H_eff)‖/‖H_eff‖ for the finite-duration error of `target` under `h`.
pub fn target_leakage(
    seq: &DDSequence,
    target: &[PulseSegment],
    ens: &Ensemble,
    h: &HermitianOperator,
) -> Result<f64> {
    let rep = seq.representation(ens);
    leakage_residual(&rep, &finite_duration_error(target, ens, h)?)
}

fn check_leakage(
    seq: &DDSequence,
    target: &[PulseSegment],
    chi: f64,
    probe: &LeakageProbe,
) -> Result<()> {
    let ens = &probe.ensemble;
    let rep = seq.representation(ens);
    let pulses = (0..seq.group().generators().len())
        .map(|l| seq.pulse(l, chi))
        .collect::<Result<Vec<_>>>()?;
    for h in &probe.probes {
        let r = leakage_residual(&rep, &finite_duration_error(target, ens, h)?)?;
        if r > LEAKAGE_TOL {
            return Err(Error::Leakage(format!(
                "target error leaves the correctable subspace of {} (residual {r:.3e})",
                seq.name()
            )));
        }
        for p in &pulses {
            let r = leakage_residual(
                &rep,
                &finite_duration_error(std::slice::from_ref(p), ens, h)?,
            )?;
            if r > LEAKAGE_TOL {
                return Err(Error::Leakage(format!(
                    "decoupling pulse error is not corrected by {} (residual {r:.3e})",
                    seq.name()
                )));
            }
        }
    }
    Ok(())
}

/// Builds the DCG for `target`. With a probe, rejects targets (or decoupling
/// pulses) whose finite-duration error leaks out of the correctable subspace.
pub fn assemble_dcg(
    seq: &DDSequence,
    target: &[PulseSegment],
    chi: f64,
    probe: Option<&LeakageProbe>,
) -> Result<DcgSchedule> {
    let tau: f64 = target.iter().map(|s| s.duration).sum();
    if target.is_empty() || tau == 0.0 {
        return Err(Error::InvalidArgument("empty target".into()));
    }
    if let Some(p) = probe {
        check_leakage(seq, target, chi, p)?;
    }
    let bp = balanced_pair(target);
    let visits = seq.visits();
    let mut seen = vec![false; seq.group().order()];
    seen[0] = true;
    let mut schedule = ControlSchedule::default();
    let mut identity_gates = 0;
    for (k, &label) in seq.pulse_order().iter().enumerate() {
        schedule.segments.push(seq.pulse(label, chi)?);
        let v = visits[k + 1];
        if !seen[v] {
            seen[v] = true;
            schedule.extend(bp.identity.iter().copied());
            identity_gates += 1;
        }
    }
    schedule.extend(bp.stretched.iter().copied());
    let bp_time = identity_gates as f64 * 2.0 * tau + 2.0 * tau;
    Ok(DcgSchedule {
        sequence: seq.name().to_string(),
        alpha: schedule.duration() / tau,
        beta: bp_time / tau,
        gamma: chi * tau,
        schedule,
        identity_gates,
    })
}

/// How the pulses of a protocol are protected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Bare pulses.
    #[serde(rename = "nodd")]
    NoDd,
    /// Each rotation under the tetrahedral DCG, each squeezing under the Klein DCG.
    #[serde(rename = "dcg_per_pulse")]
    PerPulse,
    /// Each rotation-then-squeezing cycle as one composite target under the tetrahedral DCG.
    #[serde(rename = "dcg_per_cycle")]
    PerCycle,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::NoDd, Strategy::PerPulse, Strategy::PerCycle];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::NoDd => "nodd",
            Strategy::PerPulse => "dcg_per_pulse",
            Strategy::PerCycle => "dcg_per_cycle",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s}")))
    }
}

/// Sequences used by the protection strategies.
#[derive(Clone, Debug)]
pub struct DcgSequences {
    /// Protects rotations and whole cycles.
    pub full: DDSequence,
    /// Protects squeezing pulses.
    pub rwa: DDSequence,
}

impl DcgSequences {
    pub fn shipped() -> Self {
        Self {
            full: DDSequence::tedd(),
            rwa: DDSequence::teddy(),
        }
    }
}

/// Target segments per cycle: y-rotation by θ (omitted when zero), then squeezing by η.
pub fn protocol_pulses(cycles: &[ControlCycle], chi: f64) -> Result<Vec<Vec<PulseSegment>>> {
    cycles
        .iter()
        .map(|cy| {
            let mut segs = Vec::with_capacity(2);
            if cy.theta != 0.0 {
                segs.push(PulseSegment::rotation(
                    [0.0, 1.0, 0.0],
                    cy.theta,
                    chi,
                    PulseRole::Target,
                )?);
            }
            if cy.eta != 0.0 {
                segs.push(PulseSegment::squeezing(cy.eta, chi, PulseRole::Target)?);
            }
            Ok(segs)
        })
        .filter(|r: &Result<Vec<PulseSegment>>| r.as_ref().map_or(true, |s| !s.is_empty()))
        .collect()
}

/// π/2 about x, then squeezing by π/2: the cat state from |z⟩.
pub fn ghz_pulses(chi: f64) -> Result<Vec<Vec<PulseSegment>>> {
    Ok(vec![vec![
        PulseSegment::rotation(
            [1.0, 0.0, 0.0],
            std::f64::consts::FRAC_PI_2,
            chi,
            PulseRole::Target,
        )?,
        PulseSegment::squeezing(std::f64::consts::FRAC_PI_2, chi, PulseRole::Target)?,
    ]])
}

/// Full control schedule of a protocol under a protection strategy.
pub fn protected_schedule(
    strategy: Strategy,
    cycles: &[Vec<PulseSegment>],
    seqs: &DcgSequences,
    chi: f64,
    probe: Option<&LeakageProbe>,
) -> Result<ControlSchedule> {
    let mut out = ControlSchedule::default();
    for cycle in cycles {
        match strategy {
            Strategy::NoDd => out.extend(cycle.iter().copied()),
            Strategy::PerCycle => out.extend(
                assemble_dcg(&seqs.full, cycle, chi, probe)?
                    .schedule
                    .segments,
            ),
            Strategy::PerPulse => {
                for seg in cycle {
                    let seq = match seg.generator {
                        Generator::SqueezingZ => &seqs.rwa,
                        _ => &seqs.full,
                    };
                    out.extend(
                        assemble_dcg(seq, std::slice::from_ref(seg), chi, probe)?
                            .schedule
                            .segments,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Noise-free propagator of the unprotected protocol.
pub fn target_propagator(cycles: &[Vec<PulseSegment>], ens: &Ensemble) -> Result<Propagator> {
    let flat: Vec<PulseSegment> = cycles.iter().flatten().copied().collect();
    super::schedule::ideal_propagator(&flat, ens)
}

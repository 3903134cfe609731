//! Decoupling sequences loaded from JSON, group symmetrization, and the
//! correctable-subspace checks.

use std::path::Path;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::group::{
    axis_angle_matrix, eulerian_order, matrix_axis_angle, tilted_frame, RotationGroup,
};
use super::schedule::{finite_duration_error, PulseRole, PulseSegment};
use crate::ensemble::{Ensemble, NoiseInstance};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, HermitianOperator, Propagator};

/// Residual below which a Hamiltonian counts as decoupled.
pub const DECOUPLING_TOL: f64 = 1e-10;
const VALIDATION_SPINS: usize = 3;
const VALIDATION_SAMPLES: usize = 3;
const VALIDATION_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// Σ δ_i e_i·j_i with arbitrary axes.
    Disorder,
    /// Σ δ_i j_{i,z}.
    DisorderRwa,
    /// Σ Δ_ij [3 j_iz j_jz − j_i·j_j].
    DipolarRwa,
    /// Σ Δ_ij [3(e_ij·j_i)(e_ij·j_j) − j_i·j_j].
    DipolarGeneral,
    /// Finite-duration error of a rotation pulse under RWA noise:
    /// Σ δ_i m·j_i + Σ Δ_ij [3 j_i·(M j_j) − j_i·j_j] with tr[3M − I] = 0.
    RotationError,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 5] = [
        NoiseFamily::Disorder,
        NoiseFamily::DisorderRwa,
        NoiseFamily::DipolarRwa,
        NoiseFamily::DipolarGeneral,
        NoiseFamily::RotationError,
    ];

    /// A random member on `ens`.
    pub fn sample(self, ens: &Ensemble, seed: u64) -> Result<HermitianOperator> {
        let n = ens.n();
        match self {
            NoiseFamily::Disorder => NoiseInstance::draw(n, false, seed)?.disorder_hamiltonian(),
            NoiseFamily::DisorderRwa => NoiseInstance::draw(n, true, seed)?.disorder_hamiltonian(),
            NoiseFamily::DipolarRwa => NoiseInstance::draw(n, true, seed)?.dipolar_hamiltonian(),
            NoiseFamily::DipolarGeneral => {
                NoiseInstance::draw(n, false, seed)?.dipolar_hamiltonian()
            }
            NoiseFamily::RotationError => {
                let h = NoiseInstance::draw(n, true, seed)?.hamiltonian()?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
                let axis: [f64; 3] = UnitSphere.sample(&mut rng);
                let angle = rng.random_range(0.2..2.0 * std::f64::consts::PI);
                let seg = PulseSegment::rotation(axis, angle, 1.0, PulseRole::Target)?;
                finite_duration_error(&[seg], ens, &h)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub label: char,
    pub axis: [f64; 3],
    pub angle_deg: f64,
}

/// On-disk sequence description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub name: String,
    pub group_order: usize,
    pub generators: Vec<GeneratorSpec>,
    /// Generator labels in pulse order, one character per pulse.
    pub pulse_order: String,
    pub correctable: Vec<NoiseFamily>,
}

/// A validated decoupling sequence.
#[derive(Clone, Debug)]
pub struct DDSequence {
    config: SequenceConfig,
    group: RotationGroup,
    order: Vec<usize>,
    axes: Vec<[f64; 3]>,
    angles: Vec<f64>,
    source_sha256: String,
}

const TEDD_JSON: &str = include_str!("../../sequences/tedd.json");
const TEDDY_JSON: &str = include_str!("../../sequences/teddy.json");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl DDSequence {
    /// The shipped 24-pulse tetrahedral sequence.
    pub fn tedd() -> Self {
        Self::from_json_str(TEDD_JSON).expect("shipped sequence is valid")
    }

    /// The shipped 8-pulse Klein-group sequence in the tilted frame.
    pub fn teddy() -> Self {
        Self::from_json_str(TEDDY_JSON).expect("shipped sequence is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: SequenceConfig = serde_json::from_str(text)?;
        let mut seq = Self::from_config(config)?;
        seq.source_sha256 = sha256_hex(text.as_bytes());
        Ok(seq)
    }

    /// Validates closure, the Eulerian pulse order, and every declared family.
    pub fn from_config(config: SequenceConfig) -> Result<Self> {
        let seq = Self::structural(config)?;
        let ens = Ensemble::new(VALIDATION_SPINS)?;
        for &family in &seq.config.correctable {
            let r = verify_decoupling(&seq, family, &ens, VALIDATION_SAMPLES, VALIDATION_SEED)?;
            if r >= DECOUPLING_TOL {
                return Err(Error::Sequence(format!(
                    "{}: declared family {family:?} not decoupled (residual {r:e})",
                    seq.config.name
                )));
            }
        }
        Ok(seq)
    }

    fn structural(config: SequenceConfig) -> Result<Self> {
        if config.generators.is_empty() {
            return Err(Error::Sequence("no generators".into()));
        }
        let mut mats = Vec::new();
        let mut axes = Vec::new();
        let mut angles = Vec::new();
        for (k, g) in config.generators.iter().enumerate() {
            if config.generators[..k].iter().any(|h| h.label == g.label) {
                return Err(Error::Sequence(format!(
                    "duplicate generator label {}",
                    g.label
                )));
            }
            let angle = g.angle_deg.to_radians();
            mats.push(axis_angle_matrix(g.axis, angle)?);
            let n = (g.axis.iter().map(|a| a * a).sum::<f64>()).sqrt();
            axes.push(g.axis.map(|a| a / n));
            angles.push(angle);
        }
        let group = RotationGroup::generate(&mats)?;
        if group.order() != config.group_order {
            return Err(Error::Sequence(format!(
                "generators close to a group of order {}, config says {}",
                group.order(),
                config.group_order
            )));
        }
        let order = config
            .pulse_order
            .chars()
            .map(|ch| {
                config
                    .generators
                    .iter()
                    .position(|g| g.label == ch)
                    .ok_or_else(|| Error::Sequence(format!("unknown pulse label {ch}")))
            })
            .collect::<Result<Vec<_>>>()?;
        group.check_eulerian(&order)?;
        let total = order
            .iter()
            .fold(Matrix3::identity(), |acc, &l| mats[l] * acc);
        if (total - Matrix3::identity()).amax() > 1e-10 {
            return Err(Error::Sequence(
                "pulses do not compose to the identity".into(),
            ));
        }
        let source_sha256 = sha256_hex(serde_json::to_string(&config)?.as_bytes());
        Ok(Self {
            config,
            group,
            order,
            axes,
            angles,
            source_sha256,
        })
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn config(&self) -> &SequenceConfig {
        &self.config
    }

    pub fn group(&self) -> &RotationGroup {
        &self.group
    }

    /// Generator index of each pulse.
    pub fn pulse_order(&self) -> &[usize] {
        &self.order
    }

    pub fn pulse_count(&self) -> usize {
        self.order.len()
    }

    pub fn correctable(&self) -> &[NoiseFamily] {
        &self.config.correctable
    }

    /// SHA-256 of the source text (or of the canonical JSON for in-memory configs).
    pub fn source_sha256(&self) -> &str {
        &self.source_sha256
    }

    /// The decoupling pulse with generator index `label`.
    pub fn pulse(&self, label: usize, chi: f64) -> Result<PulseSegment> {
        PulseSegment::rotation(
            self.axes[label],
            self.angles[label],
            chi,
            PulseRole::Decoupling,
        )
    }

    /// Group vertex after each pulse, starting at the identity.
    pub fn visits(&self) -> Vec<usize> {
        self.group.walk(&self.order).expect("validated")
    }

    /// Group elements as global rotations on the ensemble.
    pub fn representation(&self, ens: &Ensemble) -> Vec<Propagator> {
        self.group
            .elements()
            .iter()
            .map(|m| match matrix_axis_angle(m) {
                Some((axis, angle)) => ens.rotation(axis, angle),
                None => Propagator::identity(ens.dim()),
            })
            .collect()
    }
}

/// Π_G(S) = (1/|G|) Σ_g g† S g.
pub fn symmetrize(group: &[Propagator], s: &HermitianOperator) -> Result<HermitianOperator> {
    if group.is_empty() {
        return Err(Error::InvalidArgument("empty group".into()));
    }
    let d = s.dim();
    let mut acc = CMatrix::zeros(d, d);
    for g in group {
        if g.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.dim(),
            });
        }
        acc += g.matrix().adjoint() * s.matrix() * g.matrix();
    }
    Ok(HermitianOperator::symmetrized(
        acc * c(1.0 / group.len() as f64),
    ))
}

/// ‖Π_G(H)‖/‖H‖, zero for H = 0.
pub fn leakage_residual(group: &[Propagator], h: &HermitianOperator) -> Result<f64> {
    let norm = h.operator_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(symmetrize(group, h)?.operator_norm() / norm)
}

/// Largest ‖Π_G(H)‖/‖H‖ over `samples` random members of `family`.
pub fn verify_decoupling(
    seq: &DDSequence,
    family: NoiseFamily,
    ens: &Ensemble,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let rep = seq.representation(ens);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let h = family.sample(ens, seed.wrapping_add(k as u64))?;
        worst = worst.max(leakage_residual(&rep, &h)?);
    }
    Ok(worst)
}

/// Named candidate axis-angle sets for [`search_sequences`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateSet {
    /// 120° about the cube body diagonals.
    CubeDiagonals,
    /// 90° and 180° about x, y, z.
    CoordinateAxes,
    /// 180° about the axes of the frame with e_1 + e_2 + e_3 = √3 z.
    TiltedFrame,
}

pub fn candidate_generators(set: CandidateSet) -> Vec<GeneratorSpec> {
    let spec = |axis, angle_deg| GeneratorSpec {
        label: '?',
        axis,
        angle_deg,
    };
    match set {
        CandidateSet::CubeDiagonals => [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ]
        .into_iter()
        .map(|a| spec(a, 120.0))
        .collect(),
        CandidateSet::CoordinateAxes => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            .into_iter()
            .flat_map(|a| [spec(a, 90.0), spec(a, 180.0)])
            .collect(),
        CandidateSet::TiltedFrame => tilted_frame().into_iter().map(|a| spec(a, 180.0)).collect(),
    }
}

/// All two-generator sequences over `candidates` whose group has order
/// `target_order` and decouples every family in `families`.
pub fn search_sequences(
    candidates: &[GeneratorSpec],
    target_order: usize,
    families: &[NoiseFamily],
) -> Result<Vec<SequenceConfig>> {
    let ens = Ensemble::new(VALIDATION_SPINS)?;
    let mut found = Vec::new();
    for i in 0..candidates.len() {
        for k in i + 1..candidates.len() {
            let a = GeneratorSpec {
                label: 'a',
                ..candidates[i].clone()
            };
            let b = GeneratorSpec {
                label: 'b',
                ..candidates[k].clone()
            };
            let mats = [
                axis_angle_matrix(a.axis, a.angle_deg.to_radians())?,
                axis_angle_matrix(b.axis, b.angle_deg.to_radians())?,
            ];
            let Ok(group) = RotationGroup::generate(&mats) else {
                continue;
            };
            if group.order() != target_order {
                continue;
            }
            let order = eulerian_order(&group)?;
            let pulse_order = order
                .iter()
                .map(|&l| if l == 0 { 'a' } else { 'b' })
                .collect();
            let config = SequenceConfig {
                name: format!("search-{i}-{k}"),
                group_order: target_order,
                generators: vec![a, b],
                pulse_order,
                correctable: families.to_vec(),
            };
            let seq = DDSequence::structural(config.clone())?;
            let mut ok = true;
            for &f in families {
                if verify_decoupling(&seq, f, &ens, VALIDATION_SAMPLES, VALIDATION_SEED)?
                    >= DECOUPLING_TOL
                {
                    ok = false;
                    break;
                }
            }
            if ok {
                found.push(config);
            }
        }
    }
    Ok(found)
}

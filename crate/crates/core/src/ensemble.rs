//! Ensembles of N spin-1/2 particles: collective operators, the symmetric
//! subspace, and random disorder / dipolar noise Hamiltonians.
//!
//! Qubit 0 is the most significant bit of a computational basis index and
//! bit value 0 is spin up (m = +1/2).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, HermitianOperator, Propagator, C64};
use crate::spin::{spin_operators, Spin, SpinState};

pub const MAX_SPINS: usize = 10;

const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Matrix elements of a·σ, indexed `[out][in]` over bit values.
fn pauli_dot(a: [f64; 3]) -> [[C64; 2]; 2] {
    [
        [c(a[2]), C64::new(a[0], -a[1])],
        [C64::new(a[0], a[1]), c(-a[2])],
    ]
}

fn bit(b: usize, n: usize, i: usize) -> usize {
    (b >> (n - 1 - i)) & 1
}

fn check_spins(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return Err(Error::InvalidArgument(format!(
            "ensemble size {n} outside 1..={MAX_SPINS}"
        )));
    }
    Ok(())
}

/// a·j_i on the full 2^n space.
pub fn single_spin_operator(n: usize, i: usize, a: [f64; 3]) -> CMatrix {
    let dim = 1usize << n;
    let s = pauli_dot(a);
    let shift = n - 1 - i;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let bi = bit(col, n, i);
        for (bo, row_s) in s.iter().enumerate() {
            let amp = row_s[bi];
            if amp != C64::new(0.0, 0.0) {
                let row = (col & !(1 << shift)) | (bo << shift);
                m[(row, col)] += amp * 0.5;
            }
        }
    }
    m
}

/// (a·j_i)(b·j_k) on the full 2^n space, i ≠ k.
pub fn pair_operator(n: usize, i: usize, k: usize, a: [f64; 3], b: [f64; 3]) -> CMatrix {
    let dim = 1usize << n;
    let sa = pauli_dot(a);
    let sb = pauli_dot(b);
    let (si, sk) = (n - 1 - i, n - 1 - k);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (bi, bk) = (bit(col, n, i), bit(col, n, k));
        for (oi, ra) in sa.iter().enumerate() {
            for (ok, rb) in sb.iter().enumerate() {
                let amp = ra[bi] * rb[bk];
                if amp != C64::new(0.0, 0.0) {
                    let row = (col & !(1 << si) & !(1 << sk)) | (oi << si) | (ok << sk);
                    m[(row, col)] += amp * 0.25;
                }
            }
        }
    }
    m
}

/// 3(e·j_i)(e·j_k) − j_i·j_k.
pub fn dipolar_pair(n: usize, i: usize, k: usize, e: [f64; 3]) -> CMatrix {
    let mut m = pair_operator(n, i, k, e, e) * c(3.0);
    for a in AXES {
        m -= pair_operator(n, i, k, a, a);
    }
    m
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    n: usize,
    jx: HermitianOperator,
    jy: HermitianOperator,
    jz: HermitianOperator,
    jz2: HermitianOperator,
}

impl Ensemble {
    pub fn new(n: usize) -> Result<Self> {
        check_spins(n)?;
        let collective = |a: [f64; 3]| {
            let mut m = single_spin_operator(n, 0, a);
            for i in 1..n {
                m += single_spin_operator(n, i, a);
            }
            HermitianOperator::symmetrized(m)
        };
        let jx = collective(AXES[0]);
        let jy = collective(AXES[1]);
        let jz = collective(AXES[2]);
        let jz2 = HermitianOperator::symmetrized(jz.matrix() * jz.matrix());
        Ok(Self { n, jx, jy, jz, jz2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// The collective spin N/2.
    pub fn spin(&self) -> Spin {
        Spin::from_two_j(self.n as u32).expect("n ≥ 1")
    }

    pub fn jx(&self) -> &HermitianOperator {
        &self.jx
    }

    pub fn jy(&self) -> &HermitianOperator {
        &self.jy
    }

    pub fn jz(&self) -> &HermitianOperator {
        &self.jz
    }

    pub fn jz2(&self) -> &HermitianOperator {
        &self.jz2
    }

    /// n·J for a (not necessarily unit) vector n.
    pub fn collective(&self, n: [f64; 3]) -> HermitianOperator {
        HermitianOperator::symmetrized(
            self.jx.matrix() * c(n[0]) + self.jy.matrix() * c(n[1]) + self.jz.matrix() * c(n[2]),
        )
    }

    /// Global rotation e^{−iθ n·J}.
    pub fn rotation(&self, axis: [f64; 3], angle: f64) -> Propagator {
        self.collective(axis).eigh().exp(angle)
    }

    /// Isometry from the spin-N/2 space (basis m = N/2..−N/2) onto the
    /// symmetric subspace. Column k is the normalized Dicke state with k spins down.
    pub fn symmetric_isometry(&self) -> CMatrix {
        let (n, dim) = (self.n, self.dim());
        let mut p = CMatrix::zeros(dim, n + 1);
        let mut counts = vec![0usize; n + 1];
        for b in 0..dim {
            counts[b.count_ones() as usize] += 1;
        }
        for b in 0..dim {
            let k = b.count_ones() as usize;
            p[(b, k)] = c(1.0 / (counts[k] as f64).sqrt());
        }
        p
    }

    /// Embeds a spin-N/2 state into the product space.
    pub fn embed(&self, state: &SpinState) -> Result<CVector> {
        if state.spin() != self.spin() {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                got: state.spin().dim(),
            });
        }
        Ok(self.symmetric_isometry() * state.amplitudes())
    }

    /// Norm of the component of ψ outside the symmetric subspace.
    pub fn symmetric_leakage(&self, psi: &CVector) -> f64 {
        let p = self.symmetric_isometry();
        let proj = &p * (p.adjoint() * psi);
        (psi - proj).norm()
    }

    /// Spin-N/2 operators pulled back through the symmetric isometry.
    pub fn restrict(&self, op: &HermitianOperator) -> CMatrix {
        let p = self.symmetric_isometry();
        p.adjoint() * op.matrix() * p
    }
}

/// Collective operators for `n` spins.
pub fn collective_operators(n: usize) -> Result<Ensemble> {
    Ensemble::new(n)
}

/// Supremum operator norm.
pub fn operator_norm(h: &HermitianOperator) -> f64 {
    h.operator_norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderTerm {
    pub delta: f64,
    pub axis: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipolarTerm {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
    pub axis: [f64; 3],
}

/// One draw of the noise couplings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseInstance {
    pub n: usize,
    pub rwa: bool,
    pub disorder: Vec<DisorderTerm>,
    pub dipolar: Vec<DipolarTerm>,
}

const AXIS_TOL: f64 = 1e-12;

impl NoiseInstance {
    /// Couplings iid uniform on [−1, 1]; axes uniform on the sphere, or +z under the RWA.
    /// Pairs cover the complete graph i < j.
    pub fn draw(n: usize, rwa: bool, seed: u64) -> Result<Self> {
        check_spins(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = |rng: &mut ChaCha8Rng| {
            if rwa {
                [0.0, 0.0, 1.0]
            } else {
                UnitSphere.sample(rng)
            }
        };
        let disorder = (0..n)
            .map(|_| {
                let delta = rng.random_range(-1.0..=1.0);
                DisorderTerm {
                    delta,
                    axis: axis(&mut rng),
                }
            })
            .collect();
        let mut dipolar = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let coupling = rng.random_range(-1.0..=1.0);
                dipolar.push(DipolarTerm {
                    i,
                    j,
                    coupling,
                    axis: axis(&mut rng),
                });
            }
        }
        Ok(Self {
            n,
            rwa,
            disorder,
            dipolar,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_spins(self.n)?;
        if self.disorder.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: self.disorder.len(),
            });
        }
        let axes = self
            .disorder
            .iter()
            .map(|d| d.axis)
            .chain(self.dipolar.iter().map(|d| d.axis));
        for a in axes {
            let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            if (norm - 1.0).abs() > AXIS_TOL {
                return Err(Error::InvalidArgument(format!(
                    "axis {a:?} is not unit norm"
                )));
            }
            if self.rwa && (a[0] != 0.0 || a[1] != 0.0 || a[2] != 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "axis {a:?} is not +z under the RWA"
                )));
            }
        }
        for d in &self.dipolar {
            if d.i >= d.j || d.j >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "bad pair ({}, {})",
                    d.i, d.j
                )));
            }
        }
        Ok(())
    }

    /// Σ δ_i e_i·j_i.
    pub fn disorder_hamiltonian(&self) -> Result<HermitianOperator> {
        self.validate()?;
        let dim = 1 << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (i, d) in self.disorder.iter().enumerate() {
            m += single_spin_operator(self.n, i, d.axis) * c(d.delta);
        }
        Ok(HermitianOperator::symmetrized(m))
    }

    /// Σ_{i<j} Δ_ij [3(e_ij·j_i)(e_ij·j_j) − j_i·j_j].
    pub fn dipolar_hamiltonian(&self) -> Result<HermitianOperator> {
        self.validate()?;
        let dim = 1 << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for d in &self.dipolar {
            m += dipolar_pair(self.n, d.i, d.j, d.axis) * c(d.coupling);
        }
        Ok(HermitianOperator::symmetrized(m))
    }

    pub fn hamiltonian(&self) -> Result<HermitianOperator> {
        Ok(&self.disorder_hamiltonian()? + &self.dipolar_hamiltonian()?)
    }

    /// Rescales the couplings so that ‖H_dis‖ and ‖H_dd‖ hit the targets.
    /// A vanishing term stays zero.
    pub fn rescaled(&self, disorder_norm: f64, dipolar_norm: f64) -> Result<Self> {
        if !(disorder_norm >= 0.0 && dipolar_norm >= 0.0) {
            return Err(Error::InvalidArgument(
                "target norms must be nonnegative".into(),
            ));
        }
        let sd = scale_for(&self.disorder_hamiltonian()?, disorder_norm);
        let sq = scale_for(&self.dipolar_hamiltonian()?, dipolar_norm);
        let mut out = self.clone();
        out.disorder.iter_mut().for_each(|d| d.delta *= sd);
        out.dipolar.iter_mut().for_each(|d| d.coupling *= sq);
        Ok(out)
    }

    /// Disorder and dipolar Hamiltonians each normalized to unit operator norm.
    pub fn unit_components(&self) -> Result<NoiseComponents> {
        let d = self.disorder_hamiltonian()?;
        let q = self.dipolar_hamiltonian()?;
        let (sd, sq) = (scale_for(&d, 1.0), scale_for(&q, 1.0));
        Ok(NoiseComponents {
            disorder: d.scale(sd),
            dipolar: q.scale(sq),
        })
    }
}

fn scale_for(h: &HermitianOperator, target: f64) -> f64 {
    let norm = h.operator_norm();
    if norm == 0.0 {
        0.0
    } else {
        target / norm
    }
}

/// Unit-norm noise terms, combined linearly for sweeps at fixed couplings.
#[derive(Clone, Debug)]
pub struct NoiseComponents {
    pub disorder: HermitianOperator,
    pub dipolar: HermitianOperator,
}

impl NoiseComponents {
    /// δ·Ĥ_dis + Δ·Ĥ_dd.
    pub fn combine(&self, disorder_norm: f64, dipolar_norm: f64) -> HermitianOperator {
        &self.disorder.scale(disorder_norm) + &self.dipolar.scale(dipolar_norm)
    }

    /// δ·Ĥ_dis + Δ·Ĥ_dd rescaled so the sum has operator norm `total`.
    pub fn combine_total(
        &self,
        disorder_weight: f64,
        dipolar_weight: f64,
        total: f64,
    ) -> HermitianOperator {
        let h = self.combine(disorder_weight, dipolar_weight);
        let s = scale_for(&h, total);
        h.scale(s)
    }
}

/// Draws couplings and rescales them so that ‖H_dis‖ = `disorder_norm` and
/// ‖H_dd‖ = `dipolar_norm`.
pub fn sample_noise(
    n: usize,
    disorder_norm: f64,
    dipolar_norm: f64,
    rwa: bool,
    seed: u64,
) -> Result<(NoiseInstance, HermitianOperator)> {
    let inst = NoiseInstance::draw(n, rwa, seed)?.rescaled(disorder_norm, dipolar_norm)?;
    let h = inst.hamiltonian()?;
    Ok((inst, h))
}

/// Random Haar-ish unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Propagator {
    let g: CMatrix = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        C64::new(re, im)
    });
    let q = g.qr().q();
    Propagator::new_unchecked(q)
}

/// e^{−iθ n·J} for the spin-N/2 representation, for cross-checks.
pub fn spin_rotation(spin: Spin, axis: [f64; 3], angle: f64) -> Propagator {
    let ops = spin_operators(spin);
    let h = crate::spin::axis_operator(&ops, axis);
    h.eigh().exp(angle)
}

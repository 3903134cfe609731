//! Spherical tensor operators T_LM, multipole moments ρ_LM, reduced states and
//! the Bures anticoherence measure.
//!
//! Matrix elements: <j,m'|T_LM|j,m> = sqrt((2L+1)/(2j+1)) <j m; L M | j m'>.
//! All T_LM are real in this convention, and T_{L,-M} = (-1)^M T_LM^T.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, HermitianOperator, Propagator, C64};
use crate::spin::{spin_operators, Spin, SpinState};
use crate::wigner::clebsch_gordan_twice;

/// Flat position of (L, M) in a multipole vector.
pub fn lm_index(l: u32, m: i32) -> usize {
    (l * l) as usize + (l as i32 + m) as usize
}

/// Number of (L, M) pairs with L <= l_max.
pub fn lm_count(l_max: u32) -> usize {
    ((l_max + 1) * (l_max + 1)) as usize
}

/// (L, M) at a flat position.
pub fn lm_from_index(idx: usize) -> (u32, i32) {
    let l = (idx as f64).sqrt().floor() as u32;
    let l = if ((l + 1) * (l + 1)) as usize <= idx {
        l + 1
    } else {
        l
    };
    (l, idx as i32 - (l * l) as i32 - l as i32)
}

#[derive(Clone, Debug)]
pub struct TensorOperator {
    pub l: u32,
    pub m: i32,
    /// Nonzero (row, col, value) entries.
    entries: Vec<(usize, usize, f64)>,
}

impl TensorOperator {
    fn build(spin: Spin, l: u32, m: i32) -> Self {
        let d = spin.dim();
        let tj = spin.two_j() as i64;
        let norm = ((2 * l + 1) as f64 / d as f64).sqrt();
        let mut entries = Vec::new();
        for b in 0..d {
            let a = b as i64 - m as i64;
            if a < 0 || a >= d as i64 {
                continue;
            }
            let (tm, tmp) = (spin.two_m(b), spin.two_m(a as usize));
            let v = clebsch_gordan_twice(tj, tm, 2 * l as i64, 2 * m as i64, tj, tmp);
            if v != 0.0 {
                entries.push((a as usize, b, norm * v));
            }
        }
        Self { l, m, entries }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_matrix(&self, dim: usize) -> CMatrix {
        let mut out = CMatrix::zeros(dim, dim);
        for &(a, b, v) in &self.entries {
            out[(a, b)] = c(v);
        }
        out
    }

    /// Tr(ρ T†).
    pub fn project(&self, rho: &CMatrix) -> C64 {
        self.entries.iter().map(|&(a, b, v)| rho[(a, b)] * v).sum()
    }

    /// Tr(|ψ><ψ| T†) without forming the density matrix.
    pub fn project_state(&self, psi: &CVector) -> C64 {
        self.entries
            .iter()
            .map(|&(a, b, v)| psi[a] * psi[b].conj() * v)
            .sum()
    }
}

/// T_LM for 0 <= L <= l_max, indexed by [`lm_index`].
#[derive(Clone, Debug)]
pub struct TensorBasis {
    spin: Spin,
    l_max: u32,
    ops: Vec<TensorOperator>,
}

impl TensorBasis {
    pub fn new(spin: Spin, l_max: u32) -> Result<Self> {
        if l_max > spin.two_j() {
            return Err(Error::InvalidArgument(format!(
                "L = {l_max} exceeds 2j = {}",
                spin.two_j()
            )));
        }
        let mut ops = Vec::with_capacity(lm_count(l_max));
        for l in 0..=l_max {
            for m in -(l as i32)..=l as i32 {
                ops.push(TensorOperator::build(spin, l, m));
            }
        }
        Ok(Self { spin, l_max, ops })
    }

    /// Shared read-only basis, built once per (j, l_max).
    pub fn cached(spin: Spin, l_max: u32) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(u32, u32), Arc<TensorBasis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (spin.two_j(), l_max);
        if let Some(b) = cache.lock().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let b = Arc::new(Self::new(spin, l_max)?);
        cache.lock().unwrap().insert(key, b.clone());
        Ok(b)
    }

    pub fn full(spin: Spin) -> Self {
        Self::new(spin, spin.two_j()).expect("l_max = 2j is valid")
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn get(&self, l: u32, m: i32) -> &TensorOperator {
        &self.ops[lm_index(l, m)]
    }

    pub fn iter(&self) -> impl Iterator<Item = &TensorOperator> {
        self.ops.iter()
    }
}

/// Dense T_LM.
pub fn tensor_operator(spin: Spin, l: u32, m: i32) -> Result<CMatrix> {
    if l > spin.two_j() || m.unsigned_abs() > l {
        return Err(Error::InvalidArgument(format!(
            "(L, M) = ({l}, {m}) out of range for j = {spin}"
        )));
    }
    Ok(TensorOperator::build(spin, l, m).to_matrix(spin.dim()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleDecomposition {
    spin: Spin,
    l_max: u32,
    coeffs: Vec<C64>,
}

impl MultipoleDecomposition {
    pub fn from_coefficients(spin: Spin, l_max: u32, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != lm_count(l_max) {
            return Err(Error::DimensionMismatch {
                expected: lm_count(l_max),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            spin,
            l_max,
            coeffs,
        })
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, l: u32, m: i32) -> C64 {
        self.coeffs[lm_index(l, m)]
    }

    /// Σ_M |ρ_LM|².
    pub fn power(&self, l: u32) -> f64 {
        (-(l as i32)..=l as i32)
            .map(|m| self.get(l, m).norm_sqr())
            .sum()
    }

    /// (L, M, |ρ_LM|²) for every stored entry.
    pub fn powers(&self) -> Vec<(u32, i32, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let (l, m) = lm_from_index(i);
                (l, m, z.norm_sqr())
            })
            .collect()
    }

    /// ρ = Σ ρ_LM T_LM; needs the full decomposition.
    pub fn reconstruct(&self, basis: &TensorBasis) -> Result<CMatrix> {
        if self.l_max != self.spin.two_j()
            || basis.spin() != self.spin
            || basis.l_max() < self.l_max
        {
            return Err(Error::InvalidArgument(
                "reconstruction needs the full basis".into(),
            ));
        }
        let d = self.spin.dim();
        let mut rho = CMatrix::zeros(d, d);
        for (op, &z) in basis.iter().zip(&self.coeffs) {
            for &(a, b, v) in op.entries() {
                rho[(a, b)] += z * v;
            }
        }
        Ok(rho)
    }
}

/// ρ_LM = Tr(ρ T_LM†) for every operator in `basis`.
pub fn decompose_with(basis: &TensorBasis, rho: &CMatrix) -> Result<MultipoleDecomposition> {
    let d = basis.spin().dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    let coeffs = basis.iter().map(|op| op.project(rho)).collect();
    Ok(MultipoleDecomposition {
        spin: basis.spin(),
        l_max: basis.l_max(),
        coeffs,
    })
}

/// Full decomposition of a density matrix.
pub fn decompose(rho: &CMatrix, spin: Spin) -> Result<MultipoleDecomposition> {
    decompose_with(&*TensorBasis::cached(spin, spin.two_j())?, rho)
}

pub fn decompose_state_with(basis: &TensorBasis, psi: &CVector) -> MultipoleDecomposition {
    let coeffs = basis.iter().map(|op| op.project_state(psi)).collect();
    MultipoleDecomposition {
        spin: basis.spin(),
        l_max: basis.l_max(),
        coeffs,
    }
}

/// Decomposition of a pure state up to rank `l_max`.
pub fn decompose_state(state: &SpinState, l_max: u32) -> Result<MultipoleDecomposition> {
    let basis = TensorBasis::cached(state.spin(), l_max)?;
    Ok(decompose_state_with(&basis, state.amplitudes()))
}

/// f_L in ρ_t = Σ_{L<=t} f_L ρ_LM T_LM^{(t/2)}, with N = 2j:
/// f_L = t!/N! sqrt((N-L)!(N+L+1)! / ((t-L)!(t+L+1)!)).
/// Evaluated as a short product of ratios so large N never overflows.
pub fn reduction_factor(n: u32, t: u32, l: u32) -> f64 {
    assert!(l <= t && t <= n);
    let (n, t, l) = (n as f64, t as f64, l as f64);
    let mut sq = 1.0;
    let mut k = 0.0;
    while k <= l {
        // (N+1+k)/(t+1+k) for k = 0..=L
        sq *= (n + 1.0 + k) / (t + 1.0 + k);
        k += 1.0;
    }
    let mut k = 0.0;
    while k < l {
        // (t-k)/(N-k) for k = 0..L-1
        sq *= (t - k) / (n - k);
        k += 1.0;
    }
    sq.sqrt()
}

/// The spin-t/2 reduced state of order t.
#[derive(Clone, Debug)]
pub struct ReducedState {
    t: u32,
    rho: HermitianOperator,
    /// ρ_t - I/(t+1), kept separately so the measure avoids cancellation.
    anisotropic: HermitianOperator,
}

impl ReducedState {
    pub fn order(&self) -> u32 {
        self.t
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn anisotropic_part(&self) -> &HermitianOperator {
        &self.anisotropic
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mu = 1.0 / (self.t + 1) as f64;
        let mut v: Vec<f64> = anisotropic_eigenvalues(&self.anisotropic)
            .into_iter()
            .map(|k| mu + k)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// 1 - A_t, computed without subtracting nearly equal square roots.
    pub fn deviation(&self) -> f64 {
        bures_deviation(self.t, &anisotropic_eigenvalues(&self.anisotropic))
    }

    pub fn ac_measure(&self) -> f64 {
        (1.0 - self.deviation()).clamp(0.0, 1.0)
    }
}

fn anisotropic_eigenvalues(k: &HermitianOperator) -> Vec<f64> {
    SymmetricEigen::new(k.matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Eigenvalues of ρ_t closer to zero than this are treated as exactly zero.
pub const EIGENVALUE_SNAP: f64 = 1e-14;

/// With λ_i = μ + k_i, μ = 1/(t+1):
/// 1 - A_t = sqrt((sqrt(t+1) - Σ sqrt(λ_i)) / (sqrt(t+1) - 1)),
/// and sqrt(t+1) - Σ sqrt(λ_i) = Σ k_i² / (2 sqrt(μ) (sqrt(λ_i) + sqrt(μ))²) since Σ k_i = 0.
fn bures_deviation(t: u32, k: &[f64]) -> f64 {
    let mu = 1.0 / (t + 1) as f64;
    let smu = mu.sqrt();
    let num: f64 = k
        .iter()
        .map(|&ki| {
            let lam = mu + ki;
            let (ki, sl) = if lam < EIGENVALUE_SNAP {
                (-mu, 0.0)
            } else {
                (ki, lam.sqrt())
            };
            ki * ki / (2.0 * smu * (sl + smu).powi(2))
        })
        .sum();
    let den = ((t + 1) as f64).sqrt() - 1.0;
    (num / den).max(0.0).sqrt().min(1.0)
}

/// Tensor bases and factors needed to evaluate A_t repeatedly for one (j, t).
#[derive(Clone, Debug)]
pub struct AcEvaluator {
    spin: Spin,
    t: u32,
    big: Arc<TensorBasis>,
    small: Arc<TensorBasis>,
    factors: Vec<f64>,
}

impl AcEvaluator {
    pub fn new(spin: Spin, t: u32) -> Result<Self> {
        if t == 0 || t > spin.two_j() {
            return Err(Error::InvalidArgument(format!(
                "order t = {t} must satisfy 1 <= t <= 2j = {}",
                spin.two_j()
            )));
        }
        let big = TensorBasis::cached(spin, t)?;
        let small = TensorBasis::cached(Spin::from_two_j(t)?, t)?;
        let factors = (0..=t)
            .map(|l| reduction_factor(spin.two_j(), t, l))
            .collect();
        Ok(Self {
            spin,
            t,
            big,
            small,
            factors,
        })
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn order(&self) -> u32 {
        self.t
    }

    fn assemble(&self, coeff: impl Fn(u32, i32) -> C64) -> ReducedState {
        let d = (self.t + 1) as usize;
        let mut k = CMatrix::zeros(d, d);
        for l in 1..=self.t {
            let f = self.factors[l as usize];
            for m in -(l as i32)..=l as i32 {
                let z = coeff(l, m) * f;
                for &(a, b, v) in self.small.get(l, m).entries() {
                    k[(a, b)] += z * v;
                }
            }
        }
        let anisotropic = HermitianOperator::symmetrized(k);
        let mu = 1.0 / d as f64;
        let rho =
            HermitianOperator::symmetrized(anisotropic.matrix() + CMatrix::identity(d, d) * c(mu));
        ReducedState {
            t: self.t,
            rho,
            anisotropic,
        }
    }

    pub fn reduced_from_state(&self, psi: &CVector) -> ReducedState {
        self.assemble(|l, m| self.big.get(l, m).project_state(psi))
    }

    pub fn reduced_from_density(&self, rho: &CMatrix) -> ReducedState {
        self.assemble(|l, m| self.big.get(l, m).project(rho))
    }

    /// 1 - A_t of a pure state.
    pub fn deviation(&self, psi: &CVector) -> f64 {
        self.reduced_from_state(psi).deviation()
    }
}

/// ρ_t from a decomposition that reaches at least rank t.
pub fn reduced_state(decomp: &MultipoleDecomposition, t: u32) -> Result<ReducedState> {
    if t > decomp.spin().two_j() {
        return Err(Error::InvalidArgument(format!(
            "t = {t} exceeds 2j = {}",
            decomp.spin().two_j()
        )));
    }
    if t > decomp.l_max() {
        return Err(Error::InvalidArgument(format!(
            "decomposition only reaches L = {}",
            decomp.l_max()
        )));
    }
    let ev = AcEvaluator::new(decomp.spin(), t)?;
    Ok(ev.assemble(|l, m| decomp.get(l, m)))
}

/// Bures anticoherence measure A_t of a density matrix.
pub fn ac_measure(rho: &CMatrix, spin: Spin, t: u32) -> Result<f64> {
    let d = spin.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    Ok(AcEvaluator::new(spin, t)?
        .reduced_from_density(rho)
        .ac_measure())
}

/// A_t of a pure state.
pub fn ac_measure_state(state: &SpinState, t: u32) -> Result<f64> {
    Ok(AcEvaluator::new(state.spin(), t)?
        .reduced_from_state(state.amplitudes())
        .ac_measure())
}

/// 1 - A_t of a pure state, accurate down to roundoff.
pub fn ac_deviation_state(state: &SpinState, t: u32) -> Result<f64> {
    Ok(AcEvaluator::new(state.spin(), t)?.deviation(state.amplitudes()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Jy
    Rotation,
    /// Jz²
    Squeezing,
}

/// G with dρ_LM/dt = Σ G[(LM),(L'M')] ρ_L'M' under e^{-iHt} at unit rate,
/// G[(LM),(L'M')] = -i Tr([H, T_L'M'] T_LM†). Built from commutators, not closed forms.
pub fn multipole_generator(spin: Spin, kind: GeneratorKind) -> CMatrix {
    let ops = spin_operators(spin);
    let h = match kind {
        GeneratorKind::Rotation => ops.jy,
        GeneratorKind::Squeezing => ops.jz2,
    };
    generator_for(&h, &TensorBasis::full(spin))
}

pub fn generator_for(h: &HermitianOperator, basis: &TensorBasis) -> CMatrix {
    let d = basis.spin().dim();
    let n = basis.len();
    let mut g = CMatrix::zeros(n, n);
    let mi = C64::new(0.0, -1.0);
    for (col, tp) in basis.iter().enumerate() {
        let t = tp.to_matrix(d);
        let comm = h.matrix() * &t - &t * h.matrix();
        for (row, op) in basis.iter().enumerate() {
            let z = op.project(&comm);
            if z != C64::new(0.0, 0.0) {
                g[(row, col)] = mi * z;
            }
        }
    }
    g
}

/// exp(G τ) for an anti-Hermitian generator, via the Hermitian iG.
pub fn generator_propagator(g: &CMatrix, tau: f64) -> Propagator {
    let ig = HermitianOperator::symmetrized(g * C64::new(0.0, 1.0));
    crate::linalg::expm_hermitian(&ig, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace};
    use crate::spin::{cat_state, coherent_state, coherent_y};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spin(tj: u32) -> Spin {
        Spin::from_two_j(tj).unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
        let a = CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let r = &a * a.adjoint();
        let tr = trace(&r);
        r / tr
    }

    fn random_state(rng: &mut ChaCha8Rng, s: Spin) -> SpinState {
        let v = CVector::from_fn(s.dim(), |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        SpinState::normalized(s, v).unwrap()
    }

    #[test]
    fn index_roundtrip() {
        for l in 0..10 {
            for m in -(l as i32)..=l as i32 {
                assert_eq!(lm_from_index(lm_index(l, m)), (l, m));
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        for tj in 1..=12 {
            let s = spin(tj);
            let b = TensorBasis::full(s);
            let mats: Vec<CMatrix> = b.iter().map(|t| t.to_matrix(s.dim())).collect();
            for (i, a) in mats.iter().enumerate() {
                for (k, bb) in mats.iter().enumerate() {
                    let ip = crate::linalg::hs_inner(bb, a);
                    let want = if i == k { 1.0 } else { 0.0 };
                    assert!((ip - c(want)).norm() < 1e-12, "j={s} ({i},{k}) {ip}");
                }
            }
        }
    }

    #[test]
    fn monopole_is_scaled_identity() {
        let s = spin(5);
        let t00 = tensor_operator(s, 0, 0).unwrap();
        let want = CMatrix::identity(6, 6) / c(6f64.sqrt());
        assert!(max_abs(&(t00 - want)) < 1e-15);
        assert!(tensor_operator(s, 6, 0).is_err());
        assert!(tensor_operator(s, 2, 3).is_err());
    }

    #[test]
    fn jz_squared_quadrupole_coefficient() {
        for tj in 2..=16u32 {
            let s = spin(tj);
            let ops = spin_operators(s);
            let t20 = tensor_operator(s, 2, 0).unwrap();
            let coef = crate::linalg::hs_inner(&t20, ops.jz2.matrix()).re;
            let n = tj as f64;
            // sqrt((2j+3)!/(2j-2)!) = sqrt((n+3)(n+2)(n+1)n(n-1))
            let want =
                ((n + 3.0) * (n + 2.0) * (n + 1.0) * n * (n - 1.0)).sqrt() / (6.0 * 5f64.sqrt());
            assert_abs_diff_eq!(coef, want, epsilon = 1e-10 * want);
        }
    }

    #[test]
    fn tensor_operators_transform_as_rank_l() {
        // [Jz, T_LM] = M T_LM, [J+, T_LM] = sqrt(L(L+1) - M(M+1)) T_L,M+1
        let s = spin(6);
        let ops = spin_operators(s);
        let b = TensorBasis::full(s);
        for op in b.iter() {
            let t = op.to_matrix(s.dim());
            let cz = crate::linalg::commutator(ops.jz.matrix(), &t);
            assert!(max_abs(&(cz - &t * c(op.m as f64))) < 1e-12);
            let cp = crate::linalg::commutator(&ops.jplus, &t);
            let (l, m) = (op.l as f64, op.m as f64);
            let want = if op.m < op.l as i32 {
                b.get(op.l, op.m + 1).to_matrix(s.dim()) * c((l * (l + 1.0) - m * (m + 1.0)).sqrt())
            } else {
                CMatrix::zeros(s.dim(), s.dim())
            };
            assert!(max_abs(&(cp - want)) < 1e-12);
        }
    }

    #[test]
    fn roundtrip_and_isometry_on_random_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..100 {
            let s = spin(1 + k % 8);
            let rho = random_density(&mut rng, s.dim());
            let dec = decompose(&rho, s).unwrap();
            let back = dec.reconstruct(&TensorBasis::full(s)).unwrap();
            assert!(max_abs(&(back - &rho)) < 1e-12);
            let purity = trace(&(&rho * &rho)).re;
            let total: f64 = dec.coefficients().iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(total, purity, epsilon = 1e-12);
            assert_abs_diff_eq!(
                dec.get(0, 0).re,
                1.0 / (s.dim() as f64).sqrt(),
                epsilon = 1e-12
            );
            for l in 1..=s.two_j() {
                for m in 1..=l as i32 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((dec.get(l, -m) - dec.get(l, m).conj() * sign).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn mixed_and_cat_states() {
        let s = spin(6);
        let mixed = CMatrix::identity(7, 7) / c(7.0);
        let dec = decompose(&mixed, s).unwrap();
        for (i, z) in dec.coefficients().iter().enumerate().skip(1) {
            assert!(z.norm() < 1e-14, "index {i}");
        }
        for tj in 2..=20 {
            let dec = decompose_state(&cat_state(spin(tj)), 1).unwrap();
            assert!(dec.power(1) < 1e-24);
        }
        assert!(decompose(&CMatrix::identity(3, 3), s).is_err());
    }

    #[test]
    fn full_order_reduction_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for tj in 1..=6 {
            let s = spin(tj);
            let psi = random_state(&mut rng, s);
            let ev = AcEvaluator::new(s, tj).unwrap();
            let red = ev.reduced_from_state(psi.amplitudes());
            assert!(max_abs(&(red.matrix().matrix() - psi.density_matrix())) < 1e-12);
        }
        for n in 1..40 {
            assert_abs_diff_eq!(reduction_factor(n, n, n.min(3)), 1.0, epsilon = 1e-13);
        }
    }

    /// Symmetric N-qubit embedding, partial trace over N - t qubits, restricted to
    /// the symmetric spin-t/2 block.
    fn reduced_by_partial_trace(psi: &SpinState, t: u32) -> CMatrix {
        let n = psi.spin().two_j() as usize;
        let dim = 1usize << n;
        let mut full = CVector::zeros(dim);
        for (k, a) in psi.amplitudes().iter().enumerate() {
            // Dicke state with k down spins
            let members: Vec<usize> = (0..dim).filter(|b| b.count_ones() as usize == k).collect();
            let w = 1.0 / (members.len() as f64).sqrt();
            for b in members {
                full[b] += a * w;
            }
        }
        let keep = t as usize;
        let dk = 1usize << keep;
        let rest = 1usize << (n - keep);
        let mut red = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut s = C64::new(0.0, 0.0);
                for r in 0..rest {
                    s += full[(a << (n - keep)) | r] * full[(b << (n - keep)) | r].conj();
                }
                red[(a, b)] = s;
            }
        }
        let small = Spin::from_two_j(t).unwrap();
        let mut dicke = CMatrix::zeros(dk, small.dim());
        for k in 0..small.dim() {
            let members: Vec<usize> = (0..dk).filter(|b| b.count_ones() as usize == k).collect();
            let w = 1.0 / (members.len() as f64).sqrt();
            for b in members {
                dicke[(b, k)] = c(w);
            }
        }
        dicke.adjoint() * red * dicke
    }

    #[test]
    fn reduced_state_matches_partial_trace_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for tj in 2..=8 {
            let s = spin(tj);
            let psi = random_state(&mut rng, s);
            for t in 1..=tj {
                let got = AcEvaluator::new(s, t)
                    .unwrap()
                    .reduced_from_state(psi.amplitudes());
                let want = reduced_by_partial_trace(&psi, t);
                assert!(
                    max_abs(&(got.matrix().matrix() - want)) < 1e-12,
                    "j={s} t={t}"
                );
            }
        }
    }

    #[test]
    fn coherent_states_have_pure_reductions() {
        for tj in 1..=30 {
            let s = spin(tj);
            for st in [coherent_y(s), coherent_state(s, 0.4, 1.9)] {
                for t in 1..=tj.min(4) {
                    let red = AcEvaluator::new(s, t)
                        .unwrap()
                        .reduced_from_state(st.amplitudes());
                    let ev = red.eigenvalues();
                    assert_abs_diff_eq!(ev[t as usize], 1.0, epsilon = 1e-10);
                    assert!(ev[..t as usize].iter().all(|x| x.abs() < 1e-10));
                    assert!(
                        red.ac_measure() < 1e-12,
                        "j={s} t={t} A={}",
                        red.ac_measure()
                    );
                }
            }
        }
    }

    #[test]
    fn cat_state_is_first_order_anticoherent() {
        for tj in 2..=50 {
            let st = cat_state(spin(tj));
            assert!(ac_measure_state(&st, 1).unwrap() > 1.0 - 1e-12);
            if tj >= 4 {
                assert!(ac_measure_state(&st, 2).unwrap() < 1.0 - 1e-3);
            }
        }
    }

    fn tetrahedron() -> SpinState {
        // |2,2>, |2,-1> weights 1/3, 2/3 up to phase: (|2,2> + sqrt2 |2,-1>)/sqrt3
        let s = spin(4);
        let mut v = CVector::zeros(5);
        v[0] = c((1.0f64 / 3.0).sqrt());
        v[3] = c((2.0f64 / 3.0).sqrt());
        SpinState::new(s, v).unwrap()
    }

    #[test]
    fn tetrahedron_measures() {
        let st = tetrahedron();
        let red = AcEvaluator::new(st.spin(), 2)
            .unwrap()
            .reduced_from_state(st.amplitudes());
        for e in red.eigenvalues() {
            assert_abs_diff_eq!(e, 1.0 / 3.0, epsilon = 1e-10);
        }
        assert!(ac_measure_state(&st, 2).unwrap() > 1.0 - 1e-12);
        assert!(ac_measure_state(&st, 3).unwrap() < 0.99);
    }

    #[test]
    fn measure_agrees_with_direct_bures_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for tj in 2..=8 {
            let s = spin(tj);
            let psi = random_state(&mut rng, s);
            for t in 1..=tj.min(4) {
                let red = AcEvaluator::new(s, t)
                    .unwrap()
                    .reduced_from_state(psi.amplitudes());
                let st: f64 = red.eigenvalues().iter().map(|x| x.max(0.0).sqrt()).sum();
                let r = ((t + 1) as f64).sqrt();
                let direct = 1.0 - ((r - st) / (r - 1.0)).sqrt();
                assert_abs_diff_eq!(red.ac_measure(), direct, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn generator_sparsity() {
        for tj in 1..=6 {
            let s = spin(tj);
            let gr = multipole_generator(s, GeneratorKind::Rotation);
            let gs = multipole_generator(s, GeneratorKind::Squeezing);
            let n = gr.nrows();
            for r in 0..n {
                let (l, m) = lm_from_index(r);
                for col in 0..n {
                    let (lp, mp) = lm_from_index(col);
                    if gr[(r, col)].norm() > 1e-12 {
                        assert!(l == lp && (m - mp).abs() == 1);
                    }
                    if gs[(r, col)].norm() > 1e-12 {
                        assert!(m == mp && (l as i32 - lp as i32).abs() == 1 && m != 0);
                    }
                }
            }
            // monopole is conserved
            assert!(gr
                .row(0)
                .iter()
                .chain(gr.column(0).iter())
                .all(|z| z.norm() < 1e-14));
            assert!(gs
                .row(0)
                .iter()
                .chain(gs.column(0).iter())
                .all(|z| z.norm() < 1e-14));
            assert!(max_abs(&(&gr + gr.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn generator_flow_matches_unitary_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for k in 0..20 {
            let s = spin(1 + k % 8);
            let psi = random_state(&mut rng, s);
            let tau = rng.random_range(0.0..0.3);
            let kind = if k % 2 == 0 {
                GeneratorKind::Rotation
            } else {
                GeneratorKind::Squeezing
            };
            let g = multipole_generator(s, kind);
            let d0 = decompose(&psi.density_matrix(), s).unwrap();
            let v = CVector::from_column_slice(d0.coefficients());
            let flowed = generator_propagator(&g, tau).apply(&v);
            let u = match kind {
                GeneratorKind::Rotation => crate::spin::rotation_pulse(s, tau),
                GeneratorKind::Squeezing => crate::spin::squeezing_pulse(s, tau),
            };
            let d1 = decompose(&psi.evolve(&u).density_matrix(), s).unwrap();
            for (a, b) in flowed.iter().zip(d1.coefficients()) {
                assert!((a - b).norm() < 1e-8);
            }
        }
    }
}

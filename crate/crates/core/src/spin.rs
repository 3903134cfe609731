//! Spin-j primitives.
//!
//! Basis order is m = j, j-1, ..., -j throughout, so index k holds m = j - k.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, HermitianOperator, Propagator, C64};

/// Spin quantum number, stored as 2j so half-integers are exact.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub fn from_two_j(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin("j must be at least 1/2".into()));
        }
        Ok(Self { two_j })
    }

    pub fn new(j: f64) -> Result<Self> {
        let tj = 2.0 * j;
        if !tj.is_finite()
            || (tj - tj.round()).abs() > 1e-9
            || tj.round() < 1.0
            || tj > u32::MAX as f64
        {
            return Err(Error::InvalidSpin(format!("{j}")));
        }
        Self::from_two_j(tj.round() as u32)
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.two_j.is_multiple_of(2)
    }

    /// m at basis index k.
    pub fn m(self, k: usize) -> f64 {
        self.j() - k as f64
    }

    /// 2m at basis index k.
    pub fn two_m(self, k: usize) -> i64 {
        self.two_j as i64 - 2 * k as i64
    }

    pub fn m_values(self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.m(k)).collect()
    }

    /// Recurrence period of S_z(η) up to a global phase.
    pub fn squeezing_period(self) -> f64 {
        if self.is_integer() {
            2.0 * std::f64::consts::PI
        } else {
            std::f64::consts::PI
        }
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.j()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;
    /// Accepts `3`, `1.5` or `3/2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpin(s.into()))?;
            return match den.trim() {
                "2" => Spin::from_two_j(num),
                "1" => Spin::from_two_j(2 * num),
                _ => Err(Error::InvalidSpin(s.into())),
            };
        }
        let j: f64 = s.parse().map_err(|_| Error::InvalidSpin(s.into()))?;
        Spin::new(j)
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub spin: Spin,
    pub jx: HermitianOperator,
    pub jy: HermitianOperator,
    pub jz: HermitianOperator,
    pub jz2: HermitianOperator,
    pub jplus: CMatrix,
}

/// <j,m+1|J+|j,m> = sqrt(j(j+1) - m(m+1)), entry (k-1, k).
fn ladder(spin: Spin) -> DMatrix<f64> {
    let d = spin.dim();
    let j = spin.j();
    let mut jp = DMatrix::zeros(d, d);
    for k in 1..d {
        let m = spin.m(k);
        jp[(k - 1, k)] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
    }
    jp
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let jp = ladder(spin).map(c);
    let jm = jp.adjoint();
    let jx = HermitianOperator::symmetrized((&jp + &jm) * c(0.5));
    let jy = HermitianOperator::symmetrized((&jp - &jm) * C64::new(0.0, -0.5));
    let m = spin.m_values();
    let jz = HermitianOperator::from_real_diagonal(&m);
    let jz2 = HermitianOperator::from_real_diagonal(&m.iter().map(|x| x * x).collect::<Vec<_>>());
    SpinOperators {
        spin,
        jx,
        jy,
        jz,
        jz2,
        jplus: jp,
    }
}

pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    spin: Spin,
    amps: CVector,
}

impl SpinState {
    pub fn new(spin: Spin, amps: CVector) -> Result<Self> {
        if amps.len() != spin.dim() {
            return Err(Error::DimensionMismatch {
                expected: spin.dim(),
                got: amps.len(),
            });
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {n} is not 1")));
        }
        Ok(Self { spin, amps })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalized(spin: Spin, amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero vector".into(),
            ));
        }
        Self::new(spin, amps.unscale(n))
    }

    pub fn basis(spin: Spin, k: usize) -> Self {
        let mut amps = CVector::zeros(spin.dim());
        amps[k] = c(1.0);
        Self { spin, amps }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    pub fn density_matrix(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn overlap(&self, other: &SpinState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        self.amps.dotc(&(op.matrix() * &self.amps)).re
    }

    pub fn evolve(&self, u: &Propagator) -> SpinState {
        SpinState {
            spin: self.spin,
            amps: u.apply(&self.amps),
        }
    }
}

/// ln C(n, k) as a sum of logs, accurate for large n.
fn ln_binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// e^{-i azimuth Jz} e^{-i polar Jy} |j,j>, from the closed-form amplitudes.
pub fn coherent_state(spin: Spin, polar: f64, azimuth: f64) -> SpinState {
    let n = spin.two_j();
    let (s, co) = (polar / 2.0).sin_cos();
    let amps = CVector::from_fn(spin.dim(), |k, _| {
        // k = j - m spin flips
        let up = (n - k as u32) as i32;
        let down = k as i32;
        let mag = if (co == 0.0 && up > 0) || (s == 0.0 && down > 0) {
            0.0
        } else {
            let ln = 0.5 * ln_binomial(n, k as u32)
                + if up > 0 {
                    up as f64 * co.abs().ln()
                } else {
                    0.0
                }
                + if down > 0 {
                    down as f64 * s.abs().ln()
                } else {
                    0.0
                };
            let sign = co.signum().powi(up) * s.signum().powi(down);
            sign * ln.exp()
        };
        C64::from_polar(mag, -spin.m(k) * azimuth)
    });
    let norm = amps.norm();
    SpinState {
        spin,
        amps: amps.unscale(norm),
    }
}

/// The protocol's initial state, pointing along +y.
pub fn coherent_y(spin: Spin) -> SpinState {
    let h = std::f64::consts::FRAC_PI_2;
    coherent_state(spin, h, h)
}

/// (|j,j> + |j,-j>)/sqrt(2).
pub fn cat_state(spin: Spin) -> SpinState {
    let mut amps = CVector::zeros(spin.dim());
    let a = c(std::f64::consts::FRAC_1_SQRT_2);
    amps[0] = a;
    amps[spin.dim() - 1] += a;
    SpinState::normalized(spin, amps).expect("nonzero")
}

/// S_z(η) = e^{-i η Jz²}, diagonal.
pub fn squeezing_pulse(spin: Spin, eta: f64) -> Propagator {
    Propagator::from_phases(&squeezing_phases(spin, eta))
}

pub(crate) fn squeezing_phases(spin: Spin, eta: f64) -> Vec<f64> {
    spin.m_values().iter().map(|m| -m * m * eta).collect()
}

/// R_y(θ) = e^{-i θ Jy}.
pub fn rotation_pulse(spin: Spin, theta: f64) -> Propagator {
    YRotor::new(spin).propagator(theta)
}

/// Cached spectral decomposition of Jy.
///
/// Jy = D Jx D† with D = e^{-iπJz/2}, and Jx is real symmetric tridiagonal, so
/// the eigensolve is real. Eigenvalues are snapped to the exact m ladder.
#[derive(Clone, Debug)]
pub struct YRotor {
    spin: Spin,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl YRotor {
    pub fn new(spin: Spin) -> Self {
        let d = spin.dim();
        let jp = ladder(spin);
        let jx = (&jp + jp.transpose()) * 0.5;
        let e = SymmetricEigen::new(jx);
        let j = spin.j();
        let values: Vec<f64> = e.eigenvalues.iter().map(|&l| (l + j).round() - j).collect();
        let vectors = CMatrix::from_fn(d, d, |r, k| {
            C64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * spin.m(r)) * e.eigenvectors[(r, k)]
        });
        Self {
            spin,
            values,
            vectors,
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn propagator(&self, theta: f64) -> Propagator {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let ph = C64::from_polar(1.0, -lam * theta);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        Propagator::new_unchecked(scaled * self.vectors.adjoint())
    }

    /// R_y(θ) ψ in O(d²) without forming the propagator.
    pub fn apply(&self, theta: f64, psi: &CVector) -> CVector {
        let mut w = self.vectors.ad_mul(psi);
        for (z, &lam) in w.iter_mut().zip(&self.values) {
            *z *= C64::from_polar(1.0, -lam * theta);
        }
        &self.vectors * w
    }
}

/// Apply S_z(η) in place.
pub fn apply_squeezing(spin: Spin, eta: f64, psi: &mut CVector) {
    for (k, z) in psi.iter_mut().enumerate() {
        let m = spin.m(k);
        *z *= C64::from_polar(1.0, -m * m * eta);
    }
}

/// n·J for a (not necessarily unit) axis.
pub fn axis_operator(ops: &SpinOperators, axis: [f64; 3]) -> HermitianOperator {
    HermitianOperator::symmetrized(
        ops.jx.matrix() * c(axis[0]) + ops.jy.matrix() * c(axis[1]) + ops.jz.matrix() * c(axis[2]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, expm_hermitian, max_abs};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spins() -> impl Iterator<Item = Spin> {
        (1..=12).map(|t| Spin::from_two_j(t).unwrap())
    }

    #[test]
    fn parses_half_integers() {
        assert_eq!("3/2".parse::<Spin>().unwrap().two_j(), 3);
        assert_eq!("1.5".parse::<Spin>().unwrap().two_j(), 3);
        assert_eq!("4".parse::<Spin>().unwrap().two_j(), 8);
        assert!("1.3".parse::<Spin>().is_err());
        assert!("0".parse::<Spin>().is_err());
        assert_eq!(Spin::from_two_j(5).unwrap().to_string(), "5/2");
    }

    #[test]
    fn spin_half_jz() {
        let ops = spin_operators(Spin::from_two_j(1).unwrap());
        assert_eq!(ops.jz.matrix()[(0, 0)], c(0.5));
        assert_eq!(ops.jz.matrix()[(1, 1)], c(-0.5));
    }

    #[test]
    fn su2_algebra_and_casimir() {
        for s in spins() {
            let o = spin_operators(s);
            let (x, y, z) = (o.jx.matrix(), o.jy.matrix(), o.jz.matrix());
            let i = C64::new(0.0, 1.0);
            assert!(max_abs(&(commutator(x, y) - z * i)) < 1e-12);
            assert!(max_abs(&(commutator(y, z) - x * i)) < 1e-12);
            assert!(max_abs(&(commutator(z, x) - y * i)) < 1e-12);
            let j = s.j();
            let cas =
                x * x + y * y + z * z - CMatrix::identity(s.dim(), s.dim()) * c(j * (j + 1.0));
            assert!(max_abs(&cas) < 1e-10);
        }
    }

    #[test]
    fn jy_spectrum_spin_one() {
        let o = spin_operators(Spin::new(1.0).unwrap());
        let e = o.jy.eigh();
        for (got, want) in e.values.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_state_directions() {
        for s in spins() {
            let o = spin_operators(s);
            let up = coherent_state(s, 0.0, 0.3);
            assert_abs_diff_eq!(up.amplitudes()[0].norm(), 1.0, epsilon = 1e-14);
            let y = coherent_y(s);
            assert_abs_diff_eq!(y.expectation(&o.jy), s.j(), epsilon = 1e-10);
            let (p, a) = (1.1, -0.4);
            let st = coherent_state(s, p, a);
            let n = [p.sin() * a.cos(), p.sin() * a.sin(), p.cos()];
            assert_abs_diff_eq!(
                st.expectation(&axis_operator(&o, n)),
                s.j(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn coherent_state_matches_rotated_highest_weight() {
        for s in spins() {
            let o = spin_operators(s);
            let (p, a) = (0.7, 2.1);
            let top = SpinState::basis(s, 0);
            let u = expm_hermitian(&o.jz, a).then(&Propagator::identity(s.dim()));
            let rotated = top.evolve(&expm_hermitian(&o.jy, p)).evolve(&u);
            let direct = coherent_state(s, p, a);
            assert_abs_diff_eq!(rotated.overlap(&direct).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_matches_dense_exponential() {
        for s in spins() {
            let o = spin_operators(s);
            let r = YRotor::new(s);
            for th in [0.0, 0.3, -1.7, PI] {
                let a = r.propagator(th);
                let b = expm_hermitian(&o.jy, th);
                assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
                assert!(a.unitarity_error() < 1e-12);
            }
            assert!(
                max_abs(&(r.propagator(0.0).matrix() - CMatrix::identity(s.dim(), s.dim())))
                    < 1e-13
            );
        }
    }

    #[test]
    fn spin_half_pi_rotation_flips() {
        let s = Spin::from_two_j(1).unwrap();
        let out = SpinState::basis(s, 0).evolve(&rotation_pulse(s, PI));
        assert_abs_diff_eq!(out.amplitudes()[1].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn squeezing_periodicity_and_commutation() {
        for s in spins() {
            let o = spin_operators(s);
            let sq = squeezing_pulse(s, 0.37);
            assert_eq!(max_abs(&commutator(sq.matrix(), o.jz.matrix())), 0.0);
            if s.is_integer() {
                let full = squeezing_pulse(s, 2.0 * PI);
                assert!(max_abs(&(full.matrix() - CMatrix::identity(s.dim(), s.dim()))) < 1e-12);
            }
        }
    }

    #[test]
    fn expm_basics() {
        let s = Spin::from_two_j(1).unwrap();
        let o = spin_operators(s);
        let u = expm_hermitian(&o.jz, PI);
        assert_abs_diff_eq!(
            (u.matrix()[(0, 0)] - C64::new(0.0, -1.0)).norm(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            (u.matrix()[(1, 1)] - C64::new(0.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-14
        );
        let z = expm_hermitian(&HermitianOperator::zeros(3), 2.0);
        assert_eq!(z, Propagator::identity(3));
        let h = &o.jx + &o.jz2;
        let ab = &expm_hermitian(&h, 0.4) * &expm_hermitian(&h, 0.9);
        assert!(max_abs(&(ab.matrix() - expm_hermitian(&h, 1.3).matrix())) < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(HermitianOperator::new(m).is_err());
    }
}

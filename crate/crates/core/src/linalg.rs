//! Dense complex matrices, Hermitian operators and unitary propagators.
//!
//! Every generator in this crate is Hermitian, so exponentials go through a
//! Hermitian eigendecomposition instead of Padé scaling-and-squaring.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Hilbert-Schmidt inner product Tr(A† B).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Checks hermiticity relative to the largest entry and symmetrizes away the residue.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dev = max_abs(&(&m - m.adjoint()));
        let scale = max_abs(&m).max(1.0);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::symmetrized(m))
    }

    /// (M + M†)/2 without checking.
    pub fn symmetrized(m: CMatrix) -> Self {
        let a = m.adjoint();
        Self((m + a) * c(0.5))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| c(x)));
        Self(CMatrix::from_diagonal(&v))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c(s))
    }

    /// U† H U.
    pub fn conjugate_by(&self, u: &Propagator) -> Self {
        Self::symmetrized(u.0.adjoint() * &self.0 * &u.0)
    }

    pub fn eigh(&self) -> Eigh {
        Eigh::new(self)
    }

    /// Supremum operator norm, max |eigenvalue|.
    pub fn operator_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let e = SymmetricEigen::new(self.0.clone());
        e.eigenvalues.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn commutes_with(&self, other: &HermitianOperator, tol: f64) -> bool {
        max_abs(&commutator(&self.0, &other.0)) <= tol
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 - &rhs.0)
    }
}

/// Eigendecomposition with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn new(h: &HermitianOperator) -> Self {
        let e = SymmetricEigen::new(h.0.clone());
        let n = h.dim();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let values = idx.iter().map(|&k| e.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, k| e.eigenvectors[(r, idx[k])]);
        Self { values, vectors }
    }

    /// e^{-i H t} assembled from the spectrum.
    pub fn exp(&self, t: f64) -> Propagator {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let ph = C64::from_polar(1.0, -lam * t);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        Propagator(scaled * self.vectors.adjoint())
    }
}

/// e^{-iHt} via spectral decomposition.
pub fn expm_hermitian(h: &HermitianOperator, t: f64) -> Propagator {
    h.eigh().exp(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagator(CMatrix);

impl Propagator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let p = Self(m);
        let err = p.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(p)
    }

    pub fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        let v = DVector::from_iterator(
            phases.len(),
            phases.iter().map(|&p| C64::from_polar(1.0, p)),
        );
        Self(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `later * self`, i.e. apply `self` first.
    pub fn then(&self, later: &Propagator) -> Self {
        Self(&later.0 * &self.0)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        max_abs(&(&self.0 * self.0.adjoint() - CMatrix::identity(n, n)))
    }
}

impl Mul for &Propagator {
    type Output = Propagator;
    fn mul(self, rhs: &Propagator) -> Propagator {
        Propagator(&self.0 * &rhs.0)
    }
}

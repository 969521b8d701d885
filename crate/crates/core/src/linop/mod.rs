//! Dense complex operators in the orthonormal atom basis e_x = χ_{x}/√μ(x).
//!
//! In these coordinates the L²(μ) adjoint is the conjugate transpose, multiplication
//! operators are diagonal and E is block-diagonal.

mod compress;
mod jacobi;

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::condexp::CondExp;
use crate::error::{Error, Result};
use crate::measure::{MeasureSpace, Mfunc};

pub use compress::CompressedOp;
pub use jacobi::MAX_SWEEPS;

/// Eigenvalues below this (after clamping) are treated as zero in PSD functional calculus.
pub const PSD_CLAMP: f64 = 1e-10;

/// Relative tolerance for the Hermitian precondition of the spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    m: DMatrix<Complex64>,
}

/// Real spectrum and unitary eigenbasis of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: LinOp,
}

impl LinOp {
    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut op = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            op[(i, i)] = v;
        }
        op
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::validation(
                "matrix",
                "operator must have positive dimension",
            ));
        }
        for r in rows {
            Error::check_dim(n, r.len())?;
        }
        let op = Self {
            m: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        };
        op.check_finite()?;
        Ok(op)
    }

    pub(crate) fn from_matrix(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.is_square());
        Self { m }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric("operator has non-finite entries".into()))
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn compose(&self, rhs: &LinOp) -> Result<Self> {
        Error::check_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            m: &self.m * &rhs.m,
        })
    }

    /// T^k, with T^0 = I.
    pub fn power(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc.m = &acc.m * &base.m;
            }
            k >>= 1;
            if k > 0 {
                base.m = &base.m * &base.m;
            }
        }
        acc
    }

    pub fn add(&self, rhs: &LinOp) -> Result<Self> {
        Error::check_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            m: &self.m + &rhs.m,
        })
    }

    pub fn sub(&self, rhs: &LinOp) -> Result<Self> {
        Error::check_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            m: &self.m - &rhs.m,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { m: &self.m * s }
    }

    /// y = T v.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        Error::check_dim(self.dim(), v.len())?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.m[(i, j)] * v[j]).sum())
            .collect())
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_dist(&self, other: &LinOp) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "comparing operators of different dimension"
        );
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance between T and T*.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(1.0)
    }

    /// (T + T*)/2.
    pub fn hermitian_part(&self) -> Self {
        Self {
            m: (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian(HERMITIAN_TOL) {
            Ok(())
        } else {
            Err(Error::validation(
                "operator",
                format!(
                    "expected a Hermitian operator, asymmetry {:.3e}",
                    self.hermitian_defect()
                ),
            ))
        }
    }

    /// Eigendecomposition of a Hermitian operator by cyclic complex Jacobi rotations.
    pub fn hermitian_eig(&self) -> Result<HermitianEig> {
        self.require_hermitian()?;
        jacobi::eigh(&self.hermitian_part().m)
    }

    /// A^p for Hermitian positive semidefinite A and p > 0.
    pub fn hermitian_power(&self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::validation(
                "p",
                format!("exponent must be positive, got {p}"),
            ));
        }
        let eig = self.hermitian_eig()?;
        let top = eig.values.last().copied().unwrap_or(0.0).max(1.0);
        let mut powered = Vec::with_capacity(eig.values.len());
        for &lambda in &eig.values {
            if lambda < -PSD_CLAMP * top {
                return Err(Error::validation(
                    "operator",
                    format!("not positive semidefinite: eigenvalue {lambda:.3e}"),
                ));
            }
            // Roundoff-level eigenvalues would be amplified by small exponents.
            let clamped = if lambda <= PSD_CLAMP * top {
                0.0
            } else {
                lambda
            };
            powered.push(Complex64::new(clamped.powf(p), 0.0));
        }
        let v = &eig.vectors.m;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(powered));
        Ok(Self {
            m: v * d * v.adjoint(),
        })
    }

    /// Whether the smallest eigenvalue is at least −tol.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eig()?.values[0])
    }

    /// Largest singular value, √λ_max(T*T).
    pub fn op_norm(&self) -> Result<f64> {
        let gram = self.adjoint().compose(self)?;
        let eig = jacobi::eigh(&gram.hermitian_part().m)?;
        Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }

    /// Norm of a Hermitian operator as its largest eigenvalue modulus.
    pub fn hermitian_norm(&self) -> Result<f64> {
        let eig = self.hermitian_eig()?;
        Ok(eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    /// Eigenvalues with multiplicity, from a complex Schur form.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        const MAX_ITER: usize = 10_000;
        let schur = nalgebra::linalg::Schur::try_new(self.m.clone(), f64::EPSILON, MAX_ITER)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "Schur iteration did not converge within {MAX_ITER} iterations (dim {})",
                    self.dim()
                ))
            })?;
        let (_, t) = schur.unpack();
        Ok(t.diagonal().iter().copied().collect())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .spectrum()?
            .iter()
            .fold(0.0, |acc, z| acc.max(z.norm())))
    }
}

impl Index<(usize, usize)> for LinOp {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.m[idx]
    }
}

impl IndexMut<(usize, usize)> for LinOp {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.m[idx]
    }
}

/// An operator either stored densely or as an exact compression onto a reducing subspace.
#[derive(Debug, Clone)]
pub enum Operator {
    Dense(LinOp),
    Compressed(CompressedOp),
}

/// Above this dimension WCT operators are analysed through their compression.
pub const DENSE_LIMIT: usize = 256;

impl Operator {
    /// Builds M_w E M_u, densely up to `dense_limit` atoms and compressed beyond.
    pub fn wct(ce: &CondExp, w: &Mfunc, u: &Mfunc, dense_limit: usize) -> Result<Self> {
        if ce.dim() <= dense_limit {
            Ok(Operator::Dense(wct_op(ce, w, u)?))
        } else {
            Ok(Operator::Compressed(CompressedOp::from_wct(ce, w, u)?))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(t) => t.dim(),
            Operator::Compressed(c) => c.dim(),
        }
    }

    /// The matrix carrying all non-trivial action.
    pub fn core(&self) -> &LinOp {
        match self {
            Operator::Dense(t) => t,
            Operator::Compressed(c) => c.core(),
        }
    }

    /// Dimension of the subspace on which the operator is known to vanish identically.
    pub fn complement_dim(&self) -> usize {
        match self {
            Operator::Dense(_) => 0,
            Operator::Compressed(c) => c.complement_dim(),
        }
    }

    /// Eigenvalues with multiplicity.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        let mut sp = self.core().spectrum()?;
        sp.extend(std::iter::repeat_n(
            Complex64::new(0.0, 0.0),
            self.complement_dim(),
        ));
        Ok(sp)
    }

    pub fn op_norm(&self) -> Result<f64> {
        self.core().op_norm()
    }
}

/// Multiplication operator M_g.
pub fn mult_op(space: &MeasureSpace, g: &Mfunc) -> Result<LinOp> {
    Error::check_dim(space.atom_count(), g.len())?;
    Ok(LinOp::diag(g.values()))
}

/// Weighted conditional type operator M_w E M_u : f ↦ w·E(u·f).
pub fn wct_op(ce: &CondExp, w: &Mfunc, u: &Mfunc) -> Result<LinOp> {
    Error::check_dim(ce.dim(), w.len())?;
    Error::check_dim(ce.dim(), u.len())?;
    let weights = ce.space().weights();
    let mut t = LinOp::zeros(ce.dim());
    for (block, &mass) in ce.partition().blocks().iter().zip(ce.block_masses()) {
        for &x in block {
            for &y in block {
                t[(x, y)] = w.get(x) * u.get(y) * ((weights[x] * weights[y]).sqrt() / mass);
            }
        }
    }
    t.check_finite()?;
    Ok(t)
}

/// Applies M_w E M_u to a coordinate vector through the function-level definition.
pub fn wct_apply(ce: &CondExp, w: &Mfunc, u: &Mfunc, v: &[Complex64]) -> Result<Vec<Complex64>> {
    Error::check_dim(ce.dim(), v.len())?;
    let sqrt_mu: Vec<f64> = ce.space().weights().iter().map(|m| m.sqrt()).collect();
    let f = Mfunc::new(v.iter().zip(&sqrt_mu).map(|(z, s)| z / s).collect());
    let g = w * &ce.apply(&(u * &f))?;
    Ok(g.values()
        .iter()
        .zip(&sqrt_mu)
        .map(|(z, s)| z * s)
        .collect())
}

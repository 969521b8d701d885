//! Exact compression of a WCT operator onto a reducing subspace.
//!
//! On block B the operator M_w E M_u acts as the rank-one map a_B c_B^*, with
//! a_B = w·√μ/√μ(B) and c_B = ū·√μ/√μ(B) supported on B. The span W of all a_B, c_B
//! contains the ranges of T and T*, so W reduces T and T vanishes on W^⊥. Writing
//! T = Q C Q* with Q an orthonormal basis of W turns every polynomial in T, T* into
//! the same polynomial in the small core C, plus its value at the zero operator on W^⊥.

use num_complex::Complex64;

use super::{wct_apply, LinOp};
use crate::condexp::CondExp;
use crate::error::{Error, Result};
use crate::measure::Mfunc;

/// Relative threshold below which a Gram–Schmidt residual is treated as dependent.
const DEPENDENCE_TOL: f64 = 1e-12;

/// An operator T = Q·core·Q* on the full space, with T = 0 on the complement of range(Q).
#[derive(Debug, Clone)]
pub struct CompressedOp {
    dim: usize,
    basis: Vec<Vec<Complex64>>,
    core: LinOp,
    invariance_residual: f64,
}

impl CompressedOp {
    pub fn from_wct(ce: &CondExp, w: &Mfunc, u: &Mfunc) -> Result<Self> {
        let n = ce.dim();
        Error::check_dim(n, w.len())?;
        Error::check_dim(n, u.len())?;
        let weights = ce.space().weights();

        let mut candidates: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
        let mut scale = 0.0f64;
        for (block, &mass) in ce.partition().blocks().iter().zip(ce.block_masses()) {
            let c: Vec<Complex64> = block
                .iter()
                .map(|&x| u.get(x).conj() * (weights[x] / mass).sqrt())
                .collect();
            let a: Vec<Complex64> = block
                .iter()
                .map(|&x| w.get(x) * (weights[x] / mass).sqrt())
                .collect();
            scale = scale.max(norm(&c)).max(norm(&a));
            candidates.push((c, a));
        }

        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for ((c, a), block) in candidates.into_iter().zip(ce.partition().blocks()) {
            // Blocks have disjoint supports, so orthogonalisation is local to a block.
            let mut local: Vec<Vec<Complex64>> = Vec::new();
            for mut v in [c, a] {
                for q in &local {
                    let proj: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
                let len = norm(&v);
                if len > DEPENDENCE_TOL * scale && len > 0.0 {
                    v.iter_mut().for_each(|z| *z /= len);
                    local.push(v);
                }
            }
            for v in local {
                let mut full = vec![Complex64::new(0.0, 0.0); n];
                for (&x, z) in block.iter().zip(v) {
                    full[x] = z;
                }
                basis.push(full);
            }
        }
        if basis.is_empty() {
            // T = 0: any unit vector spans a reducing subspace.
            let mut e0 = vec![Complex64::new(0.0, 0.0); n];
            e0[0] = Complex64::new(1.0, 0.0);
            basis.push(e0);
        }

        let images: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|q| wct_apply(ce, w, u, q))
            .collect::<Result<_>>()?;
        let adj_images: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|q| wct_apply(ce, &u.conj(), &w.conj(), q))
            .collect::<Result<_>>()?;

        let r = basis.len();
        let mut core = LinOp::zeros(r);
        for i in 0..r {
            for j in 0..r {
                core[(i, j)] = inner(&basis[i], &images[j]);
            }
        }

        // T Q = Q C and T* Q = Q C* certify that span(Q) reduces T.
        let mut residual = 0.0f64;
        for j in 0..r {
            for (img, coeff) in [
                (&images[j], (0..r).map(|i| core[(i, j)]).collect::<Vec<_>>()),
                (
                    &adj_images[j],
                    (0..r).map(|i| core[(j, i)].conj()).collect::<Vec<_>>(),
                ),
            ] {
                for x in 0..n {
                    let fitted: Complex64 = (0..r).map(|i| basis[i][x] * coeff[i]).sum();
                    residual = residual.max((img[x] - fitted).norm());
                }
            }
        }
        let tol = 1e-9 * core.max_abs().max(1.0);
        if residual > tol {
            return Err(Error::Numeric(format!(
                "compression subspace is not invariant: residual {residual:.3e}"
            )));
        }

        Ok(Self {
            dim: n,
            basis,
            core,
            invariance_residual: residual,
        })
    }

    /// Dimension of the full space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the complement on which T vanishes.
    pub fn complement_dim(&self) -> usize {
        self.dim - self.basis.len()
    }

    pub fn core(&self) -> &LinOp {
        &self.core
    }

    pub fn invariance_residual(&self) -> f64 {
        self.invariance_residual
    }

    /// Dense Q·core·Q*.
    pub fn expand(&self) -> LinOp {
        let n = self.dim;
        let r = self.rank();
        let mut out = LinOp::zeros(n);
        let mut qc = vec![vec![Complex64::new(0.0, 0.0); r]; n];
        for (x, row) in qc.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = (0..r).map(|i| self.basis[i][x] * self.core[(i, j)]).sum();
            }
        }
        for x in 0..n {
            for y in 0..n {
                out[(x, y)] = (0..r).map(|j| qc[x][j] * self.basis[j][y].conj()).sum();
            }
        }
        out
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

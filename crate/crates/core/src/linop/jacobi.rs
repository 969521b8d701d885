//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot a_pq with a diagonal unitary, then
//! applies the classical real plane rotation that annihilates it. Sweeps visit the pivots in
//! row-major order, so results are deterministic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{HermitianEig, LinOp};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

struct Dense {
    n: usize,
    a: Vec<Complex64>,
}

impl Dense {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.a[i * self.n + j] = z;
    }

    fn off_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.at(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

pub(super) fn eigh(m: &DMatrix<Complex64>) -> Result<HermitianEig> {
    let n = m.nrows();
    let mut a = Dense {
        n,
        a: (0..n * n).map(|k| m[(k / n, k % n)]).collect(),
    };
    let mut v = Dense {
        n,
        a: vec![Complex64::new(0.0, 0.0); n * n],
    };
    for i in 0..n {
        v.set(i, i, Complex64::new(1.0, 0.0));
        let d = a.at(i, i).re;
        a.set(i, i, Complex64::new(d, 0.0));
    }

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = f64::EPSILON * scale;
    let mut sweeps = 0;
    let mut off = a.off_norm();
    while off > target && off > f64::MIN_POSITIVE {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = a.off_norm();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).re.total_cmp(&a.at(j, j).re));
    let values = order.iter().map(|&i| a.at(i, i).re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v.at(r, order[c]));
    Ok(HermitianEig {
        values,
        vectors: LinOp::from_matrix(vectors),
    })
}

fn rotate(a: &mut Dense, v: &mut Dense, p: usize, q: usize) {
    let apq = a.at(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a.at(p, p).re;
    let aqq = a.at(q, q).re;
    // Skip pivots that are negligible against both diagonal entries.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a.set(p, q, Complex64::new(0.0, 0.0));
        a.set(q, p, Complex64::new(0.0, 0.0));
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] in the (p, q) plane; A ← G* A G, V ← V G.
    let gqp = -phase.conj() * s;
    let gqq = phase.conj() * c;
    let n = a.n;
    for k in 0..n {
        let akp = a.at(k, p);
        let akq = a.at(k, q);
        a.set(k, p, akp * c + akq * gqp);
        a.set(k, q, akp * s + akq * gqq);
    }
    for k in 0..n {
        let apk = a.at(p, k);
        let aqk = a.at(q, k);
        a.set(p, k, apk * c + aqk * gqp.conj());
        a.set(q, k, apk * s + aqk * gqq.conj());
    }
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    a.set(p, p, Complex64::new(app - t * mag, 0.0));
    a.set(q, q, Complex64::new(aqq + t * mag, 0.0));
    for k in 0..n {
        let vkp = v.at(k, p);
        let vkq = v.at(k, q);
        v.set(k, p, vkp * c + vkq * gqp);
        v.set(k, q, vkp * s + vkq * gqq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8, 17, 40] {
            let m = random_hermitian(&mut rng, n);
            let eig = eigh(&m).unwrap();
            let vm = eig.vectors.matrix();
            let d = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(eig.values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let recon = vm * d * vm.adjoint();
            let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
            assert!((recon - &m)
                .iter()
                .all(|z| z.norm() <= 1e-12 * norm * n as f64));
            let unitary = vm.adjoint() * vm;
            assert!((unitary - DMatrix::identity(n, n))
                .iter()
                .all(|z| z.norm() < 1e-12));
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn matches_nalgebra_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 6, 12, 25] {
            let m = random_hermitian(&mut rng, n);
            let ours = eigh(&m).unwrap().values;
            let mut theirs: Vec<f64> = m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-11, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn repeated_and_zero_eigenvalues() {
        let z = DMatrix::<Complex64>::zeros(3, 3);
        assert_eq!(eigh(&z).unwrap().values, vec![0.0; 3]);
        let i = DMatrix::<Complex64>::identity(4, 4) * Complex64::new(2.0, 0.0);
        assert_eq!(eigh(&i).unwrap().values, vec![2.0; 4]);
    }
}

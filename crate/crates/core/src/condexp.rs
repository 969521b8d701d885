//! Conditional expectation onto the block-constant functions of a partition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::LinOp;
use crate::measure::{MeasureSpace, Mfunc, Partition};

/// Conditional expectation operator E relative to a partition of a finite space.
#[derive(Debug, Clone)]
pub struct CondExp {
    space: MeasureSpace,
    partition: Partition,
    block_masses: Vec<f64>,
}

impl CondExp {
    pub fn new(space: MeasureSpace, partition: Partition) -> Result<Self> {
        Error::check_dim(space.atom_count(), partition.atom_count())?;
        let block_masses: Vec<f64> = partition
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&a| space.weight(a)).sum())
            .collect();
        if let Some(b) = block_masses.iter().position(|m| m.is_nan() || *m <= 0.0) {
            return Err(Error::validation(
                format!("blocks[{b}]"),
                "block has no mass",
            ));
        }
        Ok(Self {
            space,
            partition,
            block_masses,
        })
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn block_masses(&self) -> &[f64] {
        &self.block_masses
    }

    pub fn dim(&self) -> usize {
        self.space.atom_count()
    }

    /// Weighted average of `f` over each block, one value per block.
    pub fn block_values(&self, f: &Mfunc) -> Result<Vec<Complex64>> {
        Error::check_dim(self.dim(), f.len())?;
        let weights = self.space.weights();
        Ok(self
            .partition
            .blocks()
            .iter()
            .zip(&self.block_masses)
            .map(|(block, &mass)| {
                let sum: Complex64 = block.iter().map(|&a| f.get(a) * weights[a]).sum();
                sum / mass
            })
            .collect())
    }

    /// Spreads one value per block back onto the atoms.
    pub fn spread(&self, per_block: &[Complex64]) -> Mfunc {
        Mfunc::new(
            (0..self.dim())
                .map(|a| per_block[self.partition.block_of(a)])
                .collect(),
        )
    }

    /// E(f): on each block B the value Σ_{x∈B} f(x)μ(x) / μ(B).
    pub fn apply(&self, f: &Mfunc) -> Result<Mfunc> {
        Ok(self.spread(&self.block_values(f)?))
    }

    /// Matrix of E in the orthonormal basis e_x = χ_{x}/√μ(x).
    pub fn matrix(&self) -> LinOp {
        let n = self.dim();
        let w = self.space.weights();
        let mut e = LinOp::zeros(n);
        for (block, &mass) in self.partition.blocks().iter().zip(&self.block_masses) {
            for &x in block {
                for &y in block {
                    e[(x, y)] = Complex64::new((w[x] * w[y]).sqrt() / mass, 0.0);
                }
            }
        }
        e
    }

    /// True when `f` is constant on every block within `tol`.
    pub fn is_measurable(&self, f: &Mfunc, tol: f64) -> bool {
        self.partition.blocks().iter().all(|block| {
            let first = f.get(block[0]);
            block.iter().all(|&a| (f.get(a) - first).norm() <= tol)
        })
    }
}

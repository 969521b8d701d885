//! Finite atomic measure spaces, partitions (sub-σ-algebras) and functions on atoms.
//!
//! Every atom carries strictly positive mass, so "almost everywhere" statements reduce to
//! "at every atom". A sub-σ-algebra of the power set of atoms is generated by a partition,
//! and measurability with respect to it means being constant on each block.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite measure space: one strictly positive, finite weight per atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation(
                "weights",
                "at least one atom is required",
            ));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::validation(
                format!("weights[{i}]"),
                format!("atom mass must be positive and finite, got {w}"),
            ));
        }
        Ok(Self { weights })
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Partition of the atoms into singletons (the full σ-algebra).
    pub fn singletons(&self) -> Partition {
        Partition::from_blocks_unchecked((0..self.atom_count()).map(|i| vec![i]).collect())
    }

    /// Partition with a single block (the trivial σ-algebra).
    pub fn single_block(&self) -> Partition {
        Partition::from_blocks_unchecked(vec![(0..self.atom_count()).collect()])
    }
}

/// Partition of the atoms into disjoint, non-empty, covering blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(space: &MeasureSpace, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.atom_count();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::validation(format!("blocks[{b}]"), "block is empty"));
            }
            for &atom in block {
                if atom >= n {
                    return Err(Error::validation(
                        format!("blocks[{b}]"),
                        format!("atom index {atom} out of range for {n} atoms"),
                    ));
                }
                if let Some(prev) = owner[atom] {
                    return Err(Error::validation(
                        format!("blocks[{b}]"),
                        format!("atom {atom} overlaps with blocks[{prev}]"),
                    ));
                }
                owner[atom] = Some(b);
            }
        }
        if let Some(gap) = owner.iter().position(Option::is_none) {
            return Err(Error::validation(
                "blocks",
                format!("atom {gap} is not covered by any block"),
            ));
        }
        Ok(Self::from_blocks_unchecked(blocks))
    }

    /// Builds a partition from one block label per atom; labels must be exactly `0..k`.
    pub fn from_labels(space: &MeasureSpace, labels: &[usize]) -> Result<Self> {
        Error::check_dim(space.atom_count(), labels.len())?;
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (atom, &label) in labels.iter().enumerate() {
            blocks[label].push(atom);
        }
        if let Some(b) = blocks.iter().position(Vec::is_empty) {
            return Err(Error::validation(
                "labels",
                format!("block label {b} is unused; labels must be contiguous from 0"),
            ));
        }
        Self::new(space, blocks)
    }

    fn from_blocks_unchecked(blocks: Vec<Vec<usize>>) -> Self {
        let n = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![0; n];
        for (b, block) in blocks.iter().enumerate() {
            for &atom in block {
                block_of[atom] = b;
            }
        }
        Self { blocks, block_of }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn atom_count(&self) -> usize {
        self.block_of.len()
    }

    /// Index of the block containing `atom`.
    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn is_singleton(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }
}

/// A complex function on the atoms of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mfunc {
    values: Vec<Complex64>,
}

impl Mfunc {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(len: usize, value: Complex64) -> Self {
        Self::new(vec![value; len])
    }

    pub fn ones(len: usize) -> Self {
        Self::constant(len, Complex64::new(1.0, 0.0))
    }

    /// Checks that the function lives on `space`.
    pub fn on(self, space: &MeasureSpace) -> Result<Self> {
        Error::check_dim(space.atom_count(), self.len())?;
        if let Some(i) = self
            .values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::validation(
                format!("value[{i}]"),
                "function values must be finite",
            ));
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, atom: usize) -> Complex64 {
        self.values[atom]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Pointwise |f|².
    pub fn abs_sq(&self) -> Self {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    pub fn powi(&self, k: i32) -> Self {
        self.map(|z| z.powi(k))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of `self − other`.
    pub fn max_dist(&self, other: &Mfunc) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<'a> Mul<&'a Mfunc> for &'a Mfunc {
    type Output = Mfunc;

    fn mul(self, rhs: &'a Mfunc) -> Mfunc {
        assert_eq!(
            self.len(),
            rhs.len(),
            "pointwise product of functions on different spaces"
        );
        Mfunc::new(
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }
}

impl<'a> Add<&'a Mfunc> for &'a Mfunc {
    type Output = Mfunc;

    fn add(self, rhs: &'a Mfunc) -> Mfunc {
        assert_eq!(
            self.len(),
            rhs.len(),
            "sum of functions on different spaces"
        );
        Mfunc::new(
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl<'a> Sub<&'a Mfunc> for &'a Mfunc {
    type Output = Mfunc;

    fn sub(self, rhs: &'a Mfunc) -> Mfunc {
        assert_eq!(
            self.len(),
            rhs.len(),
            "difference of functions on different spaces"
        );
        Mfunc::new(
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

/// Truncated geometric space on n = 1..N with μ({n}) = p·q^{n−1}, partitioned into
/// multiples of three and the rest.
#[derive(Debug, Clone)]
pub struct GeometricSpace {
    pub space: MeasureSpace,
    pub partition: Partition,
    pub p: f64,
    /// Mass q^N of the discarded tail n > N.
    pub tail_mass: f64,
}

impl GeometricSpace {
    /// The point n (1-based) represented by `atom`.
    pub fn point(&self, atom: usize) -> usize {
        atom + 1
    }

    /// Evaluates `f(n)` at every atom.
    pub fn eval(&self, f: impl Fn(usize) -> Complex64) -> Mfunc {
        Mfunc::new(
            (0..self.space.atom_count())
                .map(|a| f(self.point(a)))
                .collect(),
        )
    }
}

pub const DEFAULT_GEOMETRIC_ATOMS: usize = 60;

pub fn geometric_space(p: f64, n_atoms: usize) -> Result<GeometricSpace> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::validation(
            "p",
            format!("must lie in (0, 1), got {p}"),
        ));
    }
    if n_atoms < 3 {
        return Err(Error::validation(
            "n_atoms",
            format!("at least 3 atoms are needed so that the multiples of 3 are non-empty, got {n_atoms}"),
        ));
    }
    let q = 1.0 - p;
    let mut weights = Vec::with_capacity(n_atoms);
    let mut mass = p;
    for _ in 0..n_atoms {
        weights.push(mass);
        mass *= q;
    }
    let space = MeasureSpace::new(weights)?;
    let (multiples, rest): (Vec<usize>, Vec<usize>) = (0..n_atoms).partition(|a| (a + 1) % 3 == 0);
    let partition = Partition::new(&space, vec![multiples, rest])?;
    Ok(GeometricSpace {
        space,
        partition,
        p,
        tail_mass: q.powi(n_atoms as i32),
    })
}

/// Midpoint discretisation of the unit square with uniform mass, partitioned into columns of
/// constant x.
#[derive(Debug, Clone)]
pub struct GridSpace {
    pub space: MeasureSpace,
    pub partition: Partition,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpace {
    /// x-coordinate of column `i`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.ny as f64
    }

    /// Atom index of node (i, j); atoms are stored column by column.
    pub fn atom(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn coords(&self, atom: usize) -> (f64, f64) {
        (self.x(atom / self.ny), self.y(atom % self.ny))
    }

    pub fn eval(&self, f: impl Fn(f64, f64) -> Complex64) -> Mfunc {
        Mfunc::new(
            (0..self.space.atom_count())
                .map(|a| {
                    let (x, y) = self.coords(a);
                    f(x, y)
                })
                .collect(),
        )
    }
}

pub fn grid_space(nx: usize, ny: usize) -> Result<GridSpace> {
    if nx == 0 || ny == 0 {
        return Err(Error::validation(
            "grid",
            format!("both dimensions must be positive, got {nx}×{ny}"),
        ));
    }
    let n = nx * ny;
    let space = MeasureSpace::new(vec![1.0 / n as f64; n])?;
    let blocks = (0..nx).map(|i| (i * ny..(i + 1) * ny).collect()).collect();
    let partition = Partition::new(&space, blocks)?;
    Ok(GridSpace {
        space,
        partition,
        nx,
        ny,
    })
}

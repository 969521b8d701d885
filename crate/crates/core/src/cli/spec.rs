//! Problem spec files: a TOML document with weights, blocks and the functions u, w.
//!
//! ```toml
//! weights = [0.25, 0.25, 0.25, 0.25]
//! blocks = [[0, 1], [2, 3]]
//! u = [[2.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
//! w = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
//! m_max = 4
//! tol = 1e-9
//! probes_p = [0.25, 0.5, 2.0]
//! ```
//!
//! Complex values are `[re, im]` pairs; atom indices are 0-based.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::classify::{DEFAULT_P_PROBES, DEFAULT_REL_TOL};
use crate::condexp::CondExp;
use crate::error::Error;
use crate::measure::{MeasureSpace, Mfunc, Partition};

pub const DEFAULT_M_MAX: u32 = 4;

fn default_m_max() -> u32 {
    DEFAULT_M_MAX
}

fn default_tol() -> f64 {
    DEFAULT_REL_TOL
}

fn default_probes() -> Vec<f64> {
    DEFAULT_P_PROBES.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    pub u: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    #[serde(default = "default_m_max")]
    pub m_max: u32,
    /// Relative tolerance, scaled by max(1, ‖T‖^{2m}) for each order m.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_probes")]
    pub probes_p: Vec<f64>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub ce: CondExp,
    pub u: Mfunc,
    pub w: Mfunc,
    pub m_max: u32,
    pub tol: f64,
    pub probes_p: Vec<f64>,
}

fn to_mfunc(field: &str, pairs: &[[f64; 2]], space: &MeasureSpace) -> Result<Mfunc, Error> {
    if pairs.len() != space.atom_count() {
        return Err(Error::Validation {
            field: field.into(),
            reason: format!(
                "expected {} values, found {}",
                space.atom_count(),
                pairs.len()
            ),
        });
    }
    Mfunc::new(
        pairs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
    .on(space)
    .map_err(|e| match e {
        Error::Validation { field: f, reason } => Error::Validation {
            field: format!("{field}.{f}"),
            reason,
        },
        other => other,
    })
}

fn pairs(f: &Mfunc) -> Vec<[f64; 2]> {
    f.values().iter().map(|z| [z.re, z.im]).collect()
}

impl ProblemSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serialises")
    }

    pub fn from_problem(
        ce: &CondExp,
        w: &Mfunc,
        u: &Mfunc,
        m_max: u32,
        tol: f64,
        probes_p: &[f64],
    ) -> Self {
        Self {
            weights: ce.space().weights().to_vec(),
            blocks: ce.partition().blocks().to_vec(),
            u: pairs(u),
            w: pairs(w),
            m_max,
            tol,
            probes_p: probes_p.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<Problem, Error> {
        let space = MeasureSpace::new(self.weights.clone())?;
        let partition = Partition::new(&space, self.blocks.clone())?;
        let u = to_mfunc("u", &self.u, &space)?;
        let w = to_mfunc("w", &self.w, &space)?;
        if self.m_max == 0 {
            return Err(Error::Validation {
                field: "m_max".into(),
                reason: "must be at least 1".into(),
            });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Validation {
                field: "tol".into(),
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        if let Some(p) = self.probes_p.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Validation {
                field: "probes_p".into(),
                reason: format!("exponents must be positive, got {p}"),
            });
        }
        Ok(Problem {
            ce: CondExp::new(space, partition)?,
            u,
            w,
            m_max: self.m_max,
            tol: self.tol,
            probes_p: self.probes_p.clone(),
        })
    }
}

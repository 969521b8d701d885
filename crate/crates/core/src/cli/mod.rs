//! Command implementations behind the `wctop` binary.
//!
//! Each command returns an [`Output`], which renders either as a plain-text table or as
//! JSON. Process exit codes follow [`Output::exit_code`] and [`CliError::exit_code`].

mod report;
mod spec;

use std::ops::RangeInclusive;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

pub use report::{
    classify_problem, ClassificationReport, ColumnRow, ExampleA, ExampleB, SuiteSummary,
    SweepTable, SPECTRUM_AUDIT_TOL,
};
pub use spec::{Problem, ProblemSpec, DEFAULT_M_MAX};

use crate::classify::{self, DEFAULT_P_PROBES, DEFAULT_REL_TOL};
use crate::condexp::CondExp;
use crate::criteria;
use crate::error::Error;
use crate::linop::{Operator, DENSE_LIMIT};
use crate::measure::{geometric_space, grid_space};
use crate::suite::{run_suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => EXIT_VALIDATION,
            CliError::Core(Error::Validation { .. } | Error::DimensionMismatch { .. }) => {
                EXIT_VALIDATION
            }
            CliError::Core(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Structured,
}

/// Flags shared by every command; `None` defers to the spec file or the built-in default.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub tol: Option<f64>,
    pub m_max: Option<u32>,
}

impl Options {
    fn check(&self) -> Result<(), Error> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::validation(
                    "--tol",
                    format!("must be positive, got {t}"),
                ));
            }
        }
        if self.m_max == Some(0) {
            return Err(Error::validation("--m-max", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Output {
    Classification(Box<ClassificationReport>),
    Suite(Box<SuiteSummary>),
    Sweep(SweepTable),
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => match self {
                Output::Classification(r) => r.render_table(),
                Output::Suite(s) => s.render_table(),
                Output::Sweep(t) => t.render_table(),
            },
            Format::Structured => self.to_json() + "\n",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    /// Whether every property audit the command ran came out clean.
    pub fn passed(&self) -> bool {
        match self {
            Output::Classification(r) => r.audit_passed,
            Output::Suite(s) => s.report.mismatches.is_empty(),
            Output::Sweep(_) => true,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_MISMATCH
        }
    }
}

pub fn classify_spec(
    title: &str,
    spec: &ProblemSpec,
    opts: &Options,
) -> Result<ClassificationReport, CliError> {
    opts.check()?;
    let p = spec.validate()?;
    Ok(classify_problem(
        title,
        &p.ce,
        &p.w,
        &p.u,
        opts.m_max.unwrap_or(p.m_max),
        opts.tol.unwrap_or(p.tol),
        &p.probes_p,
    )?)
}

pub fn cmd_classify(spec_path: &Path, opts: &Options) -> Result<Output, CliError> {
    let spec = ProblemSpec::load(spec_path)?;
    let title = format!("classify {}", spec_path.display());
    Ok(Output::Classification(Box::new(classify_spec(
        &title, &spec, opts,
    )?)))
}

pub fn cmd_example_a(nx: usize, ny: usize, opts: &Options) -> Result<Output, CliError> {
    opts.check()?;
    let grid = grid_space(nx, ny)?;
    let u = grid.eval(|x, y| Complex64::new(y.powf(x / 8.0), 0.0));
    let w = grid.eval(|x, y| Complex64::new(((4.0 + x) * y).sqrt(), 0.0));
    let ce = CondExp::new(grid.space.clone(), grid.partition.clone())?;
    let mut report = classify_problem(
        &format!("grid example, u = y^(x/8), w = sqrt((4+x)y), {nx} x {ny} midpoint nodes"),
        &ce,
        &w,
        &u,
        opts.m_max.unwrap_or(DEFAULT_M_MAX),
        opts.tol.unwrap_or(DEFAULT_REL_TOL),
        &DEFAULT_P_PROBES,
    )?;
    let st = criteria::symbols(&ce, &w, &u)?;
    report.example_a = Some(ExampleA::from_columns(nx, ny, &ce, &st, |i| grid.x(i)));
    Ok(Output::Classification(Box::new(report)))
}

/// The geometric example as a problem spec, for writing to disk.
pub fn example_b_spec(p: f64, n_atoms: usize) -> Result<ProblemSpec, CliError> {
    let g = geometric_space(p, n_atoms)?;
    let ce = CondExp::new(g.space.clone(), g.partition.clone())?;
    let u = g.eval(|n| Complex64::new(1.0 / n as f64, 0.0));
    let w = g.eval(|n| Complex64::new(n as f64, 0.0));
    Ok(ProblemSpec::from_problem(
        &ce,
        &w,
        &u,
        DEFAULT_M_MAX,
        DEFAULT_REL_TOL,
        &DEFAULT_P_PROBES,
    ))
}

pub fn cmd_example_b(p: f64, n_atoms: usize, opts: &Options) -> Result<Output, CliError> {
    opts.check()?;
    let g = geometric_space(p, n_atoms)?;
    let ce = CondExp::new(g.space.clone(), g.partition.clone())?;
    let u = g.eval(|n| Complex64::new(1.0 / n as f64, 0.0));
    let w = g.eval(|n| Complex64::new(n as f64, 0.0));
    let mut report = classify_problem(
        &format!("geometric example, u(n) = 1/n, w(n) = n, p = {p}, points 1..{n_atoms}"),
        &ce,
        &w,
        &u,
        opts.m_max.unwrap_or(DEFAULT_M_MAX),
        opts.tol.unwrap_or(DEFAULT_REL_TOL),
        &DEFAULT_P_PROBES,
    )?;
    let alphas = ce.block_values(&(&w * &u))?;
    let one = Complex64::new(1.0, 0.0);
    report.example_b = Some(ExampleB {
        p,
        n_atoms,
        tail_mass: g.tail_mass,
        alpha1: [alphas[0].re, alphas[0].im],
        alpha2: [alphas[1].re, alphas[1].im],
        max_alpha_err: (alphas[0] - one).norm().max((alphas[1] - one).norm()),
        blocks_one_based: g
            .partition
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&a| g.point(a)).collect())
            .collect(),
    });
    Ok(Output::Classification(Box::new(report)))
}

pub fn cmd_random_suite(
    count: usize,
    dims: RangeInclusive<usize>,
    blocks: RangeInclusive<usize>,
    seed: u64,
    opts: &Options,
) -> Result<Output, CliError> {
    opts.check()?;
    if count == 0 {
        return Err(Error::validation("count", "must be at least 1").into());
    }
    let cfg = SuiteConfig {
        count,
        dims,
        blocks,
        seed,
        m_max: opts.m_max.unwrap_or(DEFAULT_M_MAX),
        rel_tol: opts.tol,
        fixtures: true,
    };
    Ok(Output::Suite(Box::new(SuiteSummary::new(run_suite(&cfg)?))))
}

pub fn cmd_sweep_m(
    spec_path: &Path,
    m_max: Option<u32>,
    opts: &Options,
) -> Result<Output, CliError> {
    opts.check()?;
    let spec = ProblemSpec::load(spec_path)?;
    let p = spec.validate()?;
    let m_max = m_max.or(opts.m_max).unwrap_or(p.m_max);
    if m_max == 0 {
        return Err(Error::validation("m_max", "must be at least 1").into());
    }
    let op = Operator::wct(&p.ce, &p.w, &p.u, DENSE_LIMIT)?;
    let rows = classify::classify_operator(&op, m_max, Some(opts.tol.unwrap_or(p.tol)))?;
    Ok(Output::Sweep(SweepTable {
        title: format!("m sweep {}", spec_path.display()),
        rows,
    }))
}

/// Parses `a..b` or `a..=b` (both inclusive) or a single number.
pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("range {text:?} must satisfy 1 <= start <= end"));
    }
    Ok(lo..=hi)
}

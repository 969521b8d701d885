//! Classification reports and their table rendering.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::classify::{self, CorollaryReport, DefectVerdict, NormalityReport};
use crate::condexp::CondExp;
use crate::criteria::{
    self, BlockSymbols, CriteriaVerdict, Divergence, Mismatch, NormalCaseReport, SpectrumCheck,
};
use crate::error::Result;
use crate::linop::{Operator, DENSE_LIMIT};
use crate::measure::Mfunc;
use crate::suite::{DivergenceRecord, SuiteReport};

/// Matching distance required between nonzero eigenvalues and nonzero values of E(uw).
pub const SPECTRUM_AUDIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub title: String,
    pub atoms: usize,
    pub block_count: usize,
    /// Dimension of the matrix the spectral work was done on.
    pub core_dim: usize,
    pub compressed: bool,
    pub op_norm: f64,
    pub rel_tol: f64,
    pub m_max: u32,
    pub blocks: Vec<BlockSymbols>,
    pub defects: Vec<DefectVerdict>,
    pub criteria: Vec<CriteriaVerdict>,
    pub normality: NormalityReport,
    pub normal_case: NormalCaseReport,
    pub spectrum: SpectrumCheck,
    pub spectrum_matches: bool,
    /// Pointwise closed forms for singleton partitions, where T is multiplication by uw.
    pub multiplication: Option<Vec<CorollaryReport>>,
    pub mismatches: Vec<Mismatch>,
    pub divergences: Vec<Divergence>,
    pub audit_passed: bool,
    pub example_a: Option<ExampleA>,
    pub example_b: Option<ExampleB>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnRow {
    pub column: usize,
    pub x: f64,
    pub e_u2: f64,
    pub e_u2_closed: f64,
    pub e_w2: f64,
    pub e_w2_closed: f64,
    pub t: f64,
    pub t_closed: f64,
    pub product: f64,
    /// E(|u|²)E(|w|²) − |E(uw)|².
    pub gap: f64,
    /// |√t − 1|
    pub unit_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleA {
    pub nx: usize,
    pub ny: usize,
    pub columns: Vec<ColumnRow>,
    pub max_rel_err_e_u2: f64,
    pub max_rel_err_e_w2: f64,
    pub max_rel_err_t: f64,
    /// max |E(|u|²)E(|w|²) − 2|
    pub max_product_err: f64,
    pub max_t: f64,
    pub min_gap: f64,
    pub min_unit_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleB {
    pub p: f64,
    pub n_atoms: usize,
    pub tail_mass: f64,
    /// E(uw) on the multiples of three.
    pub alpha1: [f64; 2],
    /// E(uw) on the remaining points.
    pub alpha2: [f64; 2],
    pub max_alpha_err: f64,
    /// Blocks listed by the points n = 1, 2, ...
    pub blocks_one_based: Vec<Vec<usize>>,
}

fn rel_err(measured: f64, closed: f64) -> f64 {
    (measured - closed).abs() / closed.abs()
}

impl ExampleA {
    pub fn from_columns(
        nx: usize,
        ny: usize,
        ce: &CondExp,
        st: &criteria::SymbolTable,
        x: impl Fn(usize) -> f64,
    ) -> Self {
        let columns: Vec<ColumnRow> = ce
            .partition()
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, block)| {
                let a = block[0];
                let x = x(i);
                let product = st.product(a);
                ColumnRow {
                    column: i,
                    x,
                    e_u2: st.e_u2[a],
                    e_u2_closed: 4.0 / (4.0 + x),
                    e_w2: st.e_w2[a],
                    e_w2_closed: (4.0 + x) / 2.0,
                    t: st.t[a],
                    t_closed: 64.0 * (4.0 + x) / (x + 12.0).powi(2),
                    product,
                    gap: product - st.t[a],
                    unit_gap: (st.t[a].sqrt() - 1.0).abs(),
                }
            })
            .collect();
        let max = |f: &dyn Fn(&ColumnRow) -> f64| columns.iter().map(f).fold(0.0f64, f64::max);
        let min =
            |f: &dyn Fn(&ColumnRow) -> f64| columns.iter().map(f).fold(f64::INFINITY, f64::min);
        Self {
            nx,
            ny,
            max_rel_err_e_u2: max(&|r| rel_err(r.e_u2, r.e_u2_closed)),
            max_rel_err_e_w2: max(&|r| rel_err(r.e_w2, r.e_w2_closed)),
            max_rel_err_t: max(&|r| rel_err(r.t, r.t_closed)),
            max_product_err: max(&|r| (r.product - 2.0).abs()),
            max_t: max(&|r| r.t),
            min_gap: min(&|r| r.gap),
            min_unit_gap: min(&|r| r.unit_gap),
            columns,
        }
    }
}

/// Runs every analysis on one problem and assembles the report.
pub fn classify_problem(
    title: &str,
    ce: &CondExp,
    w: &Mfunc,
    u: &Mfunc,
    m_max: u32,
    rel_tol: f64,
    probes_p: &[f64],
) -> Result<ClassificationReport> {
    let st = criteria::symbols(ce, w, u)?;
    let op = Operator::wct(ce, w, u, DENSE_LIMIT)?;
    let audit = criteria::audit_with(&st, &op, m_max, Some(rel_tol))?;
    let normality = classify::normality(&op, probes_p, rel_tol)?;
    let normal_case = criteria::normal_case_equivalence(&st, &op, m_max, rel_tol)?;
    let spectrum = criteria::spectrum_check(&st, &op)?;
    let spectrum_matches = spectrum.matches(SPECTRUM_AUDIT_TOL);

    let multiplication = if ce.partition().is_singleton() && ce.dim() <= DENSE_LIMIT {
        let uw = w * u;
        let norm_sq = uw.max_abs().powi(2);
        let reports = (1..=m_max)
            .map(|m| {
                let tol = classify::scaled_tol(rel_tol, norm_sq.sqrt(), m);
                classify::check_multiplication_corollary(ce.space(), &uw, m, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(reports)
    } else {
        None
    };
    let corollary_ok = multiplication
        .as_ref()
        .is_none_or(|rs| rs.iter().all(|r| r.agree));

    Ok(ClassificationReport {
        title: title.to_string(),
        atoms: ce.dim(),
        block_count: ce.partition().block_count(),
        core_dim: op.core().dim(),
        compressed: matches!(op, Operator::Compressed(_)),
        op_norm: op.op_norm()?,
        rel_tol,
        m_max,
        blocks: criteria::block_summary(ce, &st),
        audit_passed: audit.mismatches.is_empty() && spectrum_matches && corollary_ok,
        defects: audit.oracle,
        criteria: audit.criteria,
        normality,
        normal_case,
        spectrum,
        spectrum_matches,
        multiplication,
        mismatches: audit.mismatches,
        divergences: audit.divergences,
        example_a: None,
        example_b: None,
    })
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cplx(z: [f64; 2]) -> String {
    let z = Complex64::new(z[0], z[1]);
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

/// Rows past this many are elided in tables; structured output keeps everything.
const TABLE_ROWS: usize = 40;

impl ClassificationReport {
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "== {} ==", self.title);
        let _ = writeln!(
            s,
            "atoms {}  blocks {}  core dim {}{}  ||T|| {:.6e}  rel tol {:.1e}",
            self.atoms,
            self.block_count,
            self.core_dim,
            if self.compressed { " (compressed)" } else { "" },
            self.op_norm,
            self.rel_tol
        );

        let _ = writeln!(s, "\n-- block symbols --");
        let _ = writeln!(
            s,
            "{:>5} {:>6} {:>12} {:>26} {:>12} {:>12} {:>12} {:>12}",
            "block", "atoms", "mass", "E(uw)", "|E(uw)|^2", "E(|u|^2)", "E(|w|^2)", "holder gap"
        );
        for b in self.blocks.iter().take(TABLE_ROWS) {
            let _ = writeln!(
                s,
                "{:>5} {:>6} {:>12.6e} {:>26} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.3e}",
                b.block,
                b.atoms,
                b.mass,
                cplx(b.e_uw),
                b.t,
                b.e_u2,
                b.e_w2,
                b.holder_gap
            );
        }
        if self.blocks.len() > TABLE_ROWS {
            let _ = writeln!(s, "  ... {} more blocks", self.blocks.len() - TABLE_ROWS);
        }

        let _ = writeln!(s, "\n-- defect oracle --");
        let _ = writeln!(
            s,
            "{:>3} {:>12} {:>12} {:>10} {:>6} {:>6} | {:>7} {:>7} {:>7} {:>7} {:>12}",
            "m",
            "||B_m||",
            "||T*B_mT||",
            "tol",
            "m-iso",
            "quasi",
            "lit-q",
            "corr-q",
            "lit-m",
            "corr-m",
            "residual"
        );
        for (d, c) in self.defects.iter().zip(&self.criteria) {
            let _ = writeln!(
                s,
                "{:>3} {:>12.3e} {:>12.3e} {:>10.1e} {:>6} {:>6} | {:>7} {:>7} {:>7} {:>7} {:>12.3e}",
                d.m,
                d.defect_norm,
                d.quasi_defect_norm,
                d.tol,
                yn(d.is_m_isometric),
                yn(d.is_quasi_m_isometric),
                yn(c.literal_quasi),
                yn(c.corrected_quasi),
                yn(c.literal_m_iso),
                yn(c.corrected_m_iso),
                c.max_residual
            );
        }

        let n = &self.normality;
        let _ = writeln!(s, "\n-- normality --");
        let _ = writeln!(
            s,
            "normal      {:>4}  ||[T*,T]|| {:.3e}  tol {:.1e}",
            yn(n.normal),
            n.commutator_norm,
            n.tol
        );
        let _ = writeln!(
            s,
            "hyponormal  {:>4}  min eig(T*T - TT*) {:.3e}",
            yn(n.hyponormal),
            n.hyponormal_min_eigenvalue
        );
        for p in &n.probes {
            let _ = writeln!(
                s,
                "p = {:<6}  {:>4}  min eig {:.3e}",
                p.p,
                yn(p.holds),
                p.min_eigenvalue
            );
        }
        let nc = &self.normal_case;
        if nc.applicable {
            let _ = writeln!(
                s,
                "normal case: holder gap {:.3e}; isometric {}, m-isometric for some m {}, quasi-isometric {}, quasi-m for some m {}, product = 1 {}; equivalent {}",
                nc.holder_gap,
                yn(nc.isometric),
                yn(nc.m_isometric_for_some_m),
                yn(nc.quasi_isometric),
                yn(nc.quasi_m_isometric_for_some_m),
                yn(nc.product_is_one),
                yn(nc.equivalent)
            );
        }

        let sp = &self.spectrum;
        let _ = writeln!(s, "\n-- spectrum --");
        let list = |v: &[[f64; 2]]| {
            let mut items: Vec<String> = v.iter().take(TABLE_ROWS).map(|z| cplx(*z)).collect();
            if v.len() > TABLE_ROWS {
                items.push(format!("... {} more", v.len() - TABLE_ROWS));
            }
            items.join(", ")
        };
        let _ = writeln!(s, "nonzero eigenvalues: {}", list(&sp.nonzero_eigenvalues));
        let _ = writeln!(s, "zero multiplicity:   {}", sp.zero_multiplicity);
        let _ = writeln!(s, "nonzero E(uw) values: {}", list(&sp.nonzero_values));
        let _ = writeln!(
            s,
            "matching distance {:.3e}  match {}",
            sp.distance,
            yn(self.spectrum_matches)
        );

        if let Some(rs) = &self.multiplication {
            let _ = writeln!(s, "\n-- multiplication operator closed forms --");
            for r in rs {
                let _ = writeln!(
                    s,
                    "m = {}: pointwise {:.3e} / {:.3e}, spectrum gaps {:.1e} / {:.1e}, agree {}",
                    r.m,
                    r.pointwise_defect,
                    r.pointwise_quasi,
                    r.defect_spectrum_gap,
                    r.quasi_spectrum_gap,
                    yn(r.agree)
                );
            }
        }

        if let Some(a) = &self.example_a {
            let _ = writeln!(s, "\n-- grid columns ({} x {}) --", a.nx, a.ny);
            let _ = writeln!(
                s,
                "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}",
                "x",
                "E(|u|^2)",
                "4/(4+x)",
                "E(|w|^2)",
                "(4+x)/2",
                "|E(uw)|^2",
                "closed",
                "product",
                "gap",
                "|sqrt t-1|"
            );
            for r in a.columns.iter().take(TABLE_ROWS) {
                let _ = writeln!(
                    s,
                    "{:>8.5} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>10.6} {:>10.6}",
                    r.x, r.e_u2, r.e_u2_closed, r.e_w2, r.e_w2_closed, r.t, r.t_closed, r.product, r.gap, r.unit_gap
                );
            }
            let _ = writeln!(
                s,
                "max rel err: E(|u|^2) {:.3e}  E(|w|^2) {:.3e}  |E(uw)|^2 {:.3e}; max |product - 2| {:.3e}",
                a.max_rel_err_e_u2, a.max_rel_err_e_w2, a.max_rel_err_t, a.max_product_err
            );
            let _ = writeln!(
                s,
                "max |E(uw)|^2 {:.6}; min gap {:.6}; min |sqrt t - 1| {:.6}",
                a.max_t, a.min_gap, a.min_unit_gap
            );
        }

        if let Some(b) = &self.example_b {
            let _ = writeln!(s, "\n-- geometric space --");
            let _ = writeln!(
                s,
                "p {}  points 1..{}  tail mass {:.3e}",
                b.p, b.n_atoms, b.tail_mass
            );
            let _ = writeln!(
                s,
                "alpha1 (multiples of 3) {}  alpha2 (rest) {}  max |alpha - 1| {:.3e}",
                cplx(b.alpha1),
                cplx(b.alpha2),
                b.max_alpha_err
            );
        }

        let _ = writeln!(s, "\n-- audit --");
        for d in &self.divergences {
            let _ = writeln!(s, "divergence {:?} at m = {:?}", d.kind, d.ms);
        }
        for m in &self.mismatches {
            let _ = writeln!(
                s,
                "MISMATCH m = {} {}: criterion {} ({:.3e}) vs oracle {} ({:.3e})",
                m.m,
                m.criterion,
                yn(m.criterion_verdict),
                m.criterion_residual,
                yn(m.oracle_verdict),
                m.oracle_residual
            );
        }
        let _ = writeln!(
            s,
            "audit {}",
            if self.audit_passed {
                "passed"
            } else {
                "FAILED"
            }
        );
        s
    }
}

/// Output of the random suite command.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub report: SuiteReport,
    pub divergence_counts: Vec<(String, usize)>,
}

impl SuiteSummary {
    pub fn new(report: SuiteReport) -> Self {
        let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
        for DivergenceRecord { kind, .. } in &report.divergences {
            *counts.entry(format!("{kind:?}")).or_default() += 1;
        }
        Self {
            report,
            divergence_counts: counts.into_iter().collect(),
        }
    }

    pub fn render_table(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "== random suite: {} instances (seed {}, atoms {:?}, blocks {:?}, m <= {}) ==",
            r.instances, r.config.seed, r.config.dims, r.config.blocks, r.config.m_max
        );
        let _ = writeln!(
            s,
            "corrected criterion vs oracle mismatches: {}",
            r.mismatches.len()
        );
        for c in &r.mismatches {
            let _ = writeln!(
                s,
                "  #{} {} m = {} {}",
                c.index, c.label, c.mismatch.m, c.mismatch.criterion
            );
        }
        let _ = writeln!(
            s,
            "\n{:<32} {:>9} {:>14} {:>14}",
            "stratum", "instances", "quasi all m", "m-iso all m"
        );
        for (stratum, st) in &r.strata {
            let _ = writeln!(
                s,
                "{:<32} {:>9} {:>14} {:>14}",
                format!("{stratum:?}"),
                st.instances,
                st.corrected_quasi_all_m,
                st.oracle_m_isometric_all_m
            );
        }
        let _ = writeln!(s, "\nliteral-criterion divergences (instances):");
        if self.divergence_counts.is_empty() {
            let _ = writeln!(s, "  none");
        }
        for (kind, n) in &self.divergence_counts {
            let _ = writeln!(s, "  {kind:<32} {n}");
        }
        for d in &r.divergences {
            let _ = writeln!(s, "  #{} {} {:?} m = {:?}", d.index, d.label, d.kind, d.ms);
        }
        s
    }
}

/// Output of the m-sweep command.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub title: String,
    pub rows: Vec<DefectVerdict>,
}

impl SweepTable {
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "== {} ==", self.title);
        let _ = writeln!(
            s,
            "{:>3} {:>14} {:>14} {:>10} {:>6} {:>6}",
            "m", "||B_m||", "||T*B_mT||", "tol", "m-iso", "quasi"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>3} {:>14.6e} {:>14.6e} {:>10.1e} {:>6} {:>6}",
                r.m,
                r.defect_norm,
                r.quasi_defect_norm,
                r.tol,
                yn(r.is_m_isometric),
                yn(r.is_quasi_m_isometric)
            );
        }
        s
    }
}

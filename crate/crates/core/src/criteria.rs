//! Function-level characterisations of quasi-m-isometric and m-isometric WCT operators,
//! and the audit that binds them to the defect-operator oracle.
//!
//! Everything here is computed from E(uw), E(|u|²) and E(|w|²) without forming T, except
//! the corrected m-isometry verdict, which defers to the oracle. Properties "almost
//! everywhere" are decided atom by atom, and essential ranges are sets of attained values.

use num_complex::Complex64;
use serde::Serialize;

use crate::classify::{self, binomial, scaled_tol, DefectVerdict, NormalityReport};
use crate::condexp::CondExp;
use crate::error::{Error, Result};
use crate::linop::{Operator, DENSE_LIMIT};
use crate::measure::Mfunc;

/// Values of E(|u|²), E(|w|²) at or below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Tolerance for |E(uw)| = 1 and for identifying attained values.
pub const UNIT_TOL: f64 = 1e-9;

/// The block-constant symbols of M_w E M_u.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolTable {
    pub e_uw: Mfunc,
    /// |E(uw)|²
    pub t: Vec<f64>,
    pub e_u2: Vec<f64>,
    pub e_w2: Vec<f64>,
    /// Support of E(|u|²).
    pub s: Vec<bool>,
    /// Support of E(|w|²).
    pub g: Vec<bool>,
}

impl SymbolTable {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// E(|u|²)·E(|w|²) at `atom`.
    pub fn product(&self, atom: usize) -> f64 {
        self.e_u2[atom] * self.e_w2[atom]
    }

    pub fn in_s_and_g(&self, atom: usize) -> bool {
        self.s[atom] && self.g[atom]
    }

    /// max over atoms of |E(uw)|² − E(|u|²)E(|w|²); never positive beyond roundoff.
    pub fn holder_excess(&self) -> f64 {
        (0..self.len())
            .map(|a| self.t[a] - self.product(a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// max over atoms of |E(|u|²)E(|w|²) − |E(uw)|²|.
    pub fn holder_gap(&self) -> f64 {
        (0..self.len())
            .map(|a| (self.product(a) - self.t[a]).abs())
            .fold(0.0, f64::max)
    }

    /// ‖M_w E M_u‖², which on each block is E(|u|²)E(|w|²).
    pub fn norm_sq(&self) -> f64 {
        (0..self.len()).map(|a| self.product(a)).fold(0.0, f64::max)
    }
}

pub fn symbols(ce: &CondExp, w: &Mfunc, u: &Mfunc) -> Result<SymbolTable> {
    Error::check_dim(ce.dim(), w.len())?;
    Error::check_dim(ce.dim(), u.len())?;
    let e_uw = ce.apply(&(u * w))?;
    let real = |f: Mfunc| -> Vec<f64> { f.values().iter().map(|z| z.re).collect() };
    let e_u2 = real(ce.apply(&u.abs_sq())?);
    let e_w2 = real(ce.apply(&w.abs_sq())?);
    let t = e_uw.values().iter().map(|z| z.norm_sqr()).collect();
    let s = e_u2.iter().map(|&v| v > SUPPORT_TOL).collect();
    let g = e_w2.iter().map(|&v| v > SUPPORT_TOL).collect();
    Ok(SymbolTable {
        e_uw,
        t,
        e_u2,
        e_w2,
        s,
        g,
    })
}

/// J_m(t) = Σ_{k=0}^{m} (−1)^{m−k} C(m,k) t^k, which closes to (t − 1)^m.
pub fn j_m(t: f64, m: u32) -> f64 {
    (0..=m)
        .map(|k| sign(m - k) * binomial(m, k).expect("small order") as f64 * t.powi(k as i32))
        .sum()
}

/// J'_m(t) = Σ_{k=1}^{m} (−1)^{m−k} C(m,k) t^{k−1}.
pub fn j_prime_m(t: f64, m: u32) -> f64 {
    (1..=m)
        .map(|k| sign(m - k) * binomial(m, k).expect("small order") as f64 * t.powi(k as i32 - 1))
        .sum()
}

/// J''_m(t) = (t − 1)^m − (−1)^m.
pub fn j_double_prime_m(t: f64, m: u32) -> f64 {
    (t - 1.0).powi(m as i32) - sign(m)
}

fn sign(e: u32) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiCriterion {
    /// |E(uw)| = 1 at every atom.
    pub literal: bool,
    /// |E(uw)| = 1 on S ∩ G, decided through the residual below.
    pub corrected: bool,
    /// max over S ∩ G of |J_m(t)|·E(|u|²)·E(|w|²).
    pub residual: f64,
    /// max over all atoms of ||E(uw)| − 1|.
    pub unit_gap: f64,
    /// max over S ∩ G of ||E(uw)| − 1|.
    pub unit_gap_on_support: f64,
    pub tol: f64,
}

/// Decides quasi-m-isometry from the symbols, against absolute tolerance `tol`.
pub fn quasi_criterion(st: &SymbolTable, m: u32, tol: f64) -> QuasiCriterion {
    let mut residual = 0.0f64;
    let mut unit_gap = 0.0f64;
    let mut unit_gap_on_support = 0.0f64;
    for a in 0..st.len() {
        let gap = (st.t[a].sqrt() - 1.0).abs();
        unit_gap = unit_gap.max(gap);
        if st.in_s_and_g(a) {
            unit_gap_on_support = unit_gap_on_support.max(gap);
            residual = residual.max(j_m(st.t[a], m).abs() * st.product(a));
        }
    }
    QuasiCriterion {
        literal: unit_gap <= UNIT_TOL,
        corrected: residual <= tol,
        residual,
        unit_gap,
        unit_gap_on_support,
        tol,
    }
}

/// Sorted distinct values of `values`, merging those within `tol`.
pub fn attained_values(values: impl IntoIterator<Item = f64>, tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MIsometryCriterion {
    /// Essential range of J'_m(t)·E(|w|²)·E(|u|²).
    pub e_r: Vec<f64>,
    /// E_r = {1} for odd m, {−1} for even m.
    pub literal: bool,
    /// |J'_m|·E(|w|²)·E(|u|²) = 1 at every atom.
    pub literal_abs_form: bool,
    /// max over atoms of |(−1)^m + J'_m(t)·E(|w|²)·E(|u|²)|.
    pub range_residual: f64,
    /// Oracle verdict: ‖B_m‖ ≤ tol.
    pub corrected: bool,
    pub defect_norm: f64,
}

fn m_isometry_from(st: &SymbolTable, m: u32, oracle: &DefectVerdict) -> MIsometryCriterion {
    let values: Vec<f64> = (0..st.len())
        .map(|a| j_prime_m(st.t[a], m) * st.product(a))
        .collect();
    let target = -sign(m);
    let range_residual = values
        .iter()
        .map(|v| (v - target).abs())
        .fold(0.0, f64::max);
    let literal_abs_form = values.iter().all(|v| (v.abs() - 1.0).abs() <= UNIT_TOL);
    MIsometryCriterion {
        e_r: attained_values(values, UNIT_TOL),
        literal: range_residual <= UNIT_TOL,
        literal_abs_form,
        range_residual,
        corrected: oracle.is_m_isometric,
        defect_norm: oracle.defect_norm,
    }
}

/// Evaluates the m-isometry characterisation; the corrected verdict consults ‖B_m(T)‖.
pub fn m_isometry_criterion(
    st: &SymbolTable,
    ce: &CondExp,
    w: &Mfunc,
    u: &Mfunc,
    m: u32,
    rel_tol: Option<f64>,
) -> Result<MIsometryCriterion> {
    let op = Operator::wct(ce, w, u, DENSE_LIMIT)?;
    let verdicts = classify::classify_operator(&op, m, rel_tol)?;
    Ok(m_isometry_from(st, m, &verdicts[m as usize - 1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaVerdict {
    pub m: u32,
    pub literal_quasi: bool,
    pub corrected_quasi: bool,
    pub literal_m_iso: bool,
    pub corrected_m_iso: bool,
    pub e_r: Vec<f64>,
    /// Largest residual behind the corrected verdicts (quasi residual or defect norm).
    pub max_residual: f64,
    pub quasi: QuasiCriterion,
    pub m_isometry: MIsometryCriterion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// Whole-space |E(uw)| = 1 fails while T* B_m T = 0.
    LiteralQuasiFalseNegative,
    LiteralQuasiFalsePositive,
    /// E_r = {−(−1)^m} holds while B_m ≠ 0.
    LiteralMIsometryFalsePositive,
    LiteralMIsometryFalseNegative,
}

/// Orders m at which a literal verdict differs from the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub kind: DivergenceKind,
    pub ms: Vec<u32>,
}

/// A corrected criterion that disagrees with the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub m: u32,
    pub criterion: &'static str,
    pub criterion_verdict: bool,
    pub criterion_residual: f64,
    pub oracle_verdict: bool,
    pub oracle_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub criteria: Vec<CriteriaVerdict>,
    pub oracle: Vec<DefectVerdict>,
    pub mismatches: Vec<Mismatch>,
    pub divergences: Vec<Divergence>,
}

impl AgreementReport {
    pub fn divergence(&self, kind: DivergenceKind) -> Option<&Divergence> {
        self.divergences.iter().find(|d| d.kind == kind)
    }
}

/// Runs both routes for m = 1..=m_max on one instance.
pub fn audit_agreement(
    ce: &CondExp,
    w: &Mfunc,
    u: &Mfunc,
    m_max: u32,
    rel_tol: Option<f64>,
) -> Result<AgreementReport> {
    let st = symbols(ce, w, u)?;
    let op = Operator::wct(ce, w, u, DENSE_LIMIT)?;
    audit_with(&st, &op, m_max, rel_tol)
}

/// As [`audit_agreement`], reusing already computed symbols and operator.
pub fn audit_with(
    st: &SymbolTable,
    op: &Operator,
    m_max: u32,
    rel_tol: Option<f64>,
) -> Result<AgreementReport> {
    let oracle = classify::classify_operator(op, m_max, rel_tol)?;
    let rel = rel_tol.unwrap_or(classify::DEFAULT_REL_TOL);
    let norm = st.norm_sq().sqrt();

    let mut criteria = Vec::with_capacity(oracle.len());
    let mut mismatches = Vec::new();
    let mut div: std::collections::BTreeMap<DivergenceKind, Vec<u32>> = Default::default();
    for v in &oracle {
        let m = v.m;
        let quasi = quasi_criterion(st, m, scaled_tol(rel, norm, m));
        let miso = m_isometry_from(st, m, v);
        if quasi.corrected != v.is_quasi_m_isometric {
            mismatches.push(Mismatch {
                m,
                criterion: "quasi",
                criterion_verdict: quasi.corrected,
                criterion_residual: quasi.residual,
                oracle_verdict: v.is_quasi_m_isometric,
                oracle_residual: v.quasi_defect_norm,
            });
        }
        if miso.corrected != v.is_m_isometric {
            mismatches.push(Mismatch {
                m,
                criterion: "m_isometry",
                criterion_verdict: miso.corrected,
                criterion_residual: miso.defect_norm,
                oracle_verdict: v.is_m_isometric,
                oracle_residual: v.defect_norm,
            });
        }
        let kind = match (quasi.literal, v.is_quasi_m_isometric) {
            (false, true) => Some(DivergenceKind::LiteralQuasiFalseNegative),
            (true, false) => Some(DivergenceKind::LiteralQuasiFalsePositive),
            _ => None,
        };
        if let Some(k) = kind {
            div.entry(k).or_default().push(m);
        }
        let kind = match (miso.literal, v.is_m_isometric) {
            (true, false) => Some(DivergenceKind::LiteralMIsometryFalsePositive),
            (false, true) => Some(DivergenceKind::LiteralMIsometryFalseNegative),
            _ => None,
        };
        if let Some(k) = kind {
            div.entry(k).or_default().push(m);
        }
        criteria.push(CriteriaVerdict {
            m,
            literal_quasi: quasi.literal,
            corrected_quasi: quasi.corrected,
            literal_m_iso: miso.literal,
            corrected_m_iso: miso.corrected,
            e_r: miso.e_r.clone(),
            max_residual: quasi.residual.max(miso.defect_norm),
            quasi,
            m_isometry: miso,
        });
    }
    Ok(AgreementReport {
        criteria,
        oracle,
        mismatches,
        divergences: div
            .into_iter()
            .map(|(kind, ms)| Divergence { kind, ms })
            .collect(),
    })
}

/// The five properties that are claimed equivalent when E(|w|²)E(|u|²) = |E(uw)|².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalCaseReport {
    /// T is normal within tolerance; otherwise the remaining fields are informational.
    pub applicable: bool,
    pub normality: NormalityReport,
    /// max |E(|w|²)E(|u|²) − |E(uw)|²| over atoms.
    pub holder_gap: f64,
    pub holder_equality: bool,
    pub isometric: bool,
    pub m_isometric_for_some_m: bool,
    pub quasi_isometric: bool,
    pub quasi_m_isometric_for_some_m: bool,
    /// E(|w|²)E(|u|²) = |E(uw)|² = 1 at every atom.
    pub product_is_one: bool,
    /// All five properties evaluate identically.
    pub equivalent: bool,
    pub oracle: Vec<DefectVerdict>,
}

impl NormalCaseReport {
    pub fn properties(&self) -> [bool; 5] {
        [
            self.isometric,
            self.m_isometric_for_some_m,
            self.quasi_isometric,
            self.quasi_m_isometric_for_some_m,
            self.product_is_one,
        ]
    }
}

/// Tolerance for the Hölder identity E(|w|²)E(|u|²) = |E(uw)|².
pub const HOLDER_IDENTITY_TOL: f64 = 1e-8;

pub fn normal_case_equivalence(
    st: &SymbolTable,
    op: &Operator,
    m_max: u32,
    tol: f64,
) -> Result<NormalCaseReport> {
    let normality = classify::normality(op, &classify::DEFAULT_P_PROBES, tol)?;
    let oracle = classify::classify_operator(op, m_max, None)?;
    let holder_gap = st.holder_gap();
    let product_is_one = (0..st.len())
        .all(|a| (st.product(a) - 1.0).abs() <= UNIT_TOL && (st.t[a] - 1.0).abs() <= UNIT_TOL);
    let isometric = oracle[0].is_m_isometric;
    let m_isometric_for_some_m = oracle.iter().any(|v| v.is_m_isometric);
    let quasi_isometric = oracle[0].is_quasi_m_isometric;
    let quasi_m_isometric_for_some_m = oracle.iter().any(|v| v.is_quasi_m_isometric);
    let props = [
        isometric,
        m_isometric_for_some_m,
        quasi_isometric,
        quasi_m_isometric_for_some_m,
        product_is_one,
    ];
    Ok(NormalCaseReport {
        applicable: normality.normal,
        normality,
        holder_gap,
        holder_equality: holder_gap <= HOLDER_IDENTITY_TOL,
        isometric,
        m_isometric_for_some_m,
        quasi_isometric,
        quasi_m_isometric_for_some_m,
        product_is_one,
        equivalent: props.iter().all(|&p| p == props[0]),
        oracle,
    })
}

/// Block-level summary row of the symbol table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSymbols {
    pub block: usize,
    pub atoms: usize,
    pub mass: f64,
    pub e_uw: [f64; 2],
    pub t: f64,
    pub e_u2: f64,
    pub e_w2: f64,
    /// E(|u|²)E(|w|²) − |E(uw)|² (non-negative by the conditional Hölder inequality).
    pub holder_gap: f64,
}

pub fn block_summary(ce: &CondExp, st: &SymbolTable) -> Vec<BlockSymbols> {
    ce.partition()
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let a = block[0];
            let z: Complex64 = st.e_uw.get(a);
            BlockSymbols {
                block: b,
                atoms: block.len(),
                mass: ce.block_masses()[b],
                e_uw: [z.re, z.im],
                t: st.t[a],
                e_u2: st.e_u2[a],
                e_w2: st.e_w2[a],
                holder_gap: st.product(a) - st.t[a],
            }
        })
        .collect()
}

/// Eigenvalues of modulus at or below this (relative to max(1, ‖T‖)) count as zero.
pub const SPECTRUM_ZERO_TOL: f64 = 1e-6;

/// Nonzero eigenvalues of T against the nonzero values attained by E(uw).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCheck {
    pub nonzero_eigenvalues: Vec<[f64; 2]>,
    pub zero_multiplicity: usize,
    pub nonzero_values: Vec<[f64; 2]>,
    /// Hausdorff distance between the two sets; infinite when exactly one is empty.
    pub distance: f64,
}

impl SpectrumCheck {
    pub fn matches(&self, tol: f64) -> bool {
        self.distance <= tol
    }
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

pub fn spectrum_check(st: &SymbolTable, op: &Operator) -> Result<SpectrumCheck> {
    let zero = SPECTRUM_ZERO_TOL * op.op_norm()?.max(1.0);
    let mut nonzero: Vec<Complex64> = Vec::new();
    let mut zero_multiplicity = 0;
    for z in op.spectrum()? {
        if z.norm() > zero {
            nonzero.push(z);
        } else {
            zero_multiplicity += 1;
        }
    }
    nonzero.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut values: Vec<Complex64> = Vec::new();
    for &z in st.e_uw.values() {
        if z.norm() > zero && !values.iter().any(|v| (v - z).norm() <= UNIT_TOL) {
            values.push(z);
        }
    }
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect();
    Ok(SpectrumCheck {
        distance: hausdorff(&nonzero, &values),
        nonzero_eigenvalues: pairs(&nonzero),
        zero_multiplicity,
        nonzero_values: pairs(&values),
    })
}

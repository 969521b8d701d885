//! Ground-truth classification through explicit defect operators.
//!
//! B_m(T) = Σ_{k=0}^{m} (−1)^{m−k} C(m,k) T*^k T^k. T is an m-isometry when B_m = 0 and a
//! quasi-m-isometry when T* B_m T = 0; normality and (p-)hyponormality are decided in the
//! positive semidefinite order.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linop::{mult_op, LinOp, Operator};
use crate::measure::{MeasureSpace, Mfunc};

/// Relative tolerance used when the caller does not supply one.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Default probe exponents for p-hyponormality.
pub const DEFAULT_P_PROBES: [f64; 3] = [0.25, 0.5, 2.0];

/// Relative bound on the asymmetry of a computed defect before it is symmetrised.
const ASYMMETRY_TOL: f64 = 1e-10;

/// Relative bound on the disagreement between the two quasi-defect formulas.
const QUASI_FORMULA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectVerdict {
    pub m: u32,
    pub defect_norm: f64,
    pub quasi_defect_norm: f64,
    pub tol: f64,
    pub is_m_isometric: bool,
    pub is_quasi_m_isometric: bool,
}

impl DefectVerdict {
    fn new(m: u32, defect_norm: f64, quasi_defect_norm: f64, tol: f64) -> Self {
        Self {
            m,
            defect_norm,
            quasi_defect_norm,
            tol,
            is_m_isometric: defect_norm <= tol,
            is_quasi_m_isometric: quasi_defect_norm <= tol,
        }
    }
}

/// C(m, k), exactly.
pub fn binomial(m: u32, k: u32) -> Result<u64> {
    if k > m {
        return Ok(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(m−i) is divisible by (i+1) at every step.
        acc = acc * u128::from(m - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Numeric(format!(
                "binomial coefficient C({m}, {k}) overflows"
            )));
        }
    }
    Ok(acc as u64)
}

fn signed_binomial(m: u32, k: u32) -> Result<f64> {
    let c = binomial(m, k)? as f64;
    Ok(if (m - k).is_multiple_of(2) { c } else { -c })
}

/// Absolute threshold 1e-9·max(1, ‖T‖^{2m}) style scaling for a base relative tolerance.
pub fn scaled_tol(rel: f64, norm: f64, m: u32) -> f64 {
    rel * norm.powi(2 * m as i32).max(1.0)
}

/// T*^k T^k for k = 0..=kmax.
fn grams(t: &LinOp, kmax: u32) -> Vec<LinOp> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut power = LinOp::identity(t.dim());
    for k in 0..=kmax {
        if k > 0 {
            power = t.compose(&power).expect("square operator");
        }
        out.push(power.adjoint().compose(&power).expect("square operator"));
    }
    out
}

fn binomial_sum(grams: &[LinOp], m: u32, shift: usize) -> Result<LinOp> {
    let mut acc = LinOp::zeros(grams[0].dim());
    for k in 0..=m {
        let coeff = signed_binomial(m, k)?;
        acc = acc.add(&grams[k as usize + shift].scale(Complex64::new(coeff, 0.0)))?;
    }
    Ok(acc)
}

fn symmetrized(b: LinOp, scale: f64, what: &str) -> Result<LinOp> {
    let asym = b.hermitian_defect();
    if asym > ASYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::Numeric(format!(
            "{what} is not Hermitian: asymmetry {asym:.3e}"
        )));
    }
    Ok(b.hermitian_part())
}

fn sum_scale(grams: &[LinOp], m: u32, shift: usize) -> Result<f64> {
    let mut s = 0.0;
    for k in 0..=m {
        s += binomial(m, k)? as f64 * grams[k as usize + shift].max_abs().max(1.0);
    }
    Ok(s)
}

fn defect_from(grams: &[LinOp], m: u32) -> Result<LinOp> {
    let b = binomial_sum(grams, m, 0)?;
    symmetrized(b, sum_scale(grams, m, 0)?, "defect operator")
}

fn quasi_from(t: &LinOp, grams: &[LinOp], defect: &LinOp, m: u32) -> Result<LinOp> {
    let shifted = binomial_sum(grams, m, 1)?;
    let sandwiched = t.adjoint().compose(defect)?.compose(t)?;
    let scale = sum_scale(grams, m, 1)?;
    let gap = shifted.max_dist(&sandwiched);
    if gap > QUASI_FORMULA_TOL * scale {
        return Err(Error::Numeric(format!(
            "quasi-defect formulas disagree by {gap:.3e} at m = {m}"
        )));
    }
    symmetrized(shifted, scale, "quasi-defect operator")
}

fn require_m(m: u32) -> Result<()> {
    if m == 0 {
        Err(Error::validation("m", "order must be at least 1"))
    } else {
        Ok(())
    }
}

/// B_m(T).
pub fn defect(t: &LinOp, m: u32) -> Result<LinOp> {
    require_m(m)?;
    defect_from(&grams(t, m), m)
}

/// T* B_m(T) T, cross-checked against the shifted binomial sum.
pub fn quasi_defect(t: &LinOp, m: u32) -> Result<LinOp> {
    require_m(m)?;
    let g = grams(t, m + 1);
    let b = defect_from(&g, m)?;
    quasi_from(t, &g, &b, m)
}

/// Verdicts for m = 1..=m_max. `rel_tol` is scaled by max(1, ‖T‖^{2m}) for each m.
pub fn classify_isometry(
    t: &LinOp,
    m_max: u32,
    rel_tol: Option<f64>,
) -> Result<Vec<DefectVerdict>> {
    classify_core(t, 0, m_max, rel_tol)
}

/// As [`classify_isometry`], for an operator given densely or in compressed form.
pub fn classify_operator(
    op: &Operator,
    m_max: u32,
    rel_tol: Option<f64>,
) -> Result<Vec<DefectVerdict>> {
    classify_core(op.core(), op.complement_dim(), m_max, rel_tol)
}

fn classify_core(
    core: &LinOp,
    complement_dim: usize,
    m_max: u32,
    rel_tol: Option<f64>,
) -> Result<Vec<DefectVerdict>> {
    require_m(m_max)?;
    let rel = rel_tol.unwrap_or(DEFAULT_REL_TOL);
    if rel.is_nan() || rel <= 0.0 {
        return Err(Error::validation(
            "tol",
            format!("must be positive, got {rel}"),
        ));
    }
    let norm = core.op_norm()?;
    let g = grams(core, m_max + 1);
    let mut out = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let b = defect_from(&g, m)?;
        let q = quasi_from(core, &g, &b, m)?;
        // On the complement T = 0, so B_m = (−1)^m I there and T* B_m T = 0.
        let mut defect_norm = b.hermitian_norm()?;
        if complement_dim > 0 {
            defect_norm = defect_norm.max(1.0);
        }
        let quasi_norm = q.hermitian_norm()?;
        out.push(DefectVerdict::new(
            m,
            defect_norm,
            quasi_norm,
            scaled_tol(rel, norm, m),
        ));
    }
    Ok(out)
}

fn commutator_gap(core: &LinOp) -> Result<(LinOp, LinOp)> {
    let ts = core.adjoint();
    Ok((ts.compose(core)?, core.compose(&ts)?))
}

fn normal_tol(core: &LinOp, tol: f64) -> Result<f64> {
    Ok(tol * core.op_norm()?.powi(2).max(1.0))
}

/// ‖T*T − TT*‖ ≤ tol·max(1, ‖T‖²).
pub fn is_normal(t: &LinOp, tol: f64) -> Result<bool> {
    let (a, b) = commutator_gap(t)?;
    Ok(a.sub(&b)?.hermitian_norm()? <= normal_tol(t, tol)?)
}

/// T*T − TT* ≥ −tol·max(1, ‖T‖²).
pub fn is_hyponormal(t: &LinOp, tol: f64) -> Result<bool> {
    let (a, b) = commutator_gap(t)?;
    a.sub(&b)?.is_psd(normal_tol(t, tol)?)
}

/// (T*T)^p − (TT*)^p ≥ −tol·max(1, ‖T‖^{2p}).
pub fn is_p_hyponormal(t: &LinOp, p: f64, tol: f64) -> Result<bool> {
    let (a, b) = commutator_gap(t)?;
    let diff = a.hermitian_power(p)?.sub(&b.hermitian_power(p)?)?;
    diff.is_psd(tol * t.op_norm()?.powf(2.0 * p).max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PProbe {
    pub p: f64,
    /// Smallest eigenvalue of (T*T)^p − (TT*)^p.
    pub min_eigenvalue: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub tol: f64,
    /// ‖T*T − TT*‖.
    pub commutator_norm: f64,
    pub normal: bool,
    /// Smallest eigenvalue of T*T − TT*.
    pub hyponormal_min_eigenvalue: f64,
    pub hyponormal: bool,
    pub probes: Vec<PProbe>,
}

impl NormalityReport {
    /// Whether normality, hyponormality and every p-probe agree.
    pub fn consistent(&self) -> bool {
        self.hyponormal == self.normal && self.probes.iter().all(|p| p.holds == self.normal)
    }
}

/// The full normality hierarchy for one operator.
pub fn normality(op: &Operator, probes: &[f64], tol: f64) -> Result<NormalityReport> {
    let core = op.core();
    let norm = core.op_norm()?;
    let abs_tol = tol * norm.powi(2).max(1.0);
    let (a, b) = commutator_gap(core)?;
    let comm = a.sub(&b)?;
    let comm_eig = comm.hermitian_eig()?;
    let commutator_norm = comm_eig
        .values
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    // The complement contributes zero eigenvalues to every difference below.
    let with_complement = |v: f64| {
        if op.complement_dim() > 0 {
            v.min(0.0)
        } else {
            v
        }
    };
    let hyponormal_min_eigenvalue = with_complement(comm_eig.values[0]);
    let mut out = Vec::with_capacity(probes.len());
    for &p in probes {
        let diff = a.hermitian_power(p)?.sub(&b.hermitian_power(p)?)?;
        let min_eigenvalue = with_complement(diff.min_eigenvalue()?);
        out.push(PProbe {
            p,
            min_eigenvalue,
            holds: min_eigenvalue >= -tol * norm.powf(2.0 * p).max(1.0),
        });
    }
    Ok(NormalityReport {
        tol: abs_tol,
        commutator_norm,
        normal: commutator_norm <= abs_tol,
        hyponormal_min_eigenvalue,
        hyponormal: hyponormal_min_eigenvalue >= -abs_tol,
        probes: out,
    })
}

/// Pointwise closed forms versus matrix defects for a multiplication operator M_u.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    pub m: u32,
    pub tol: f64,
    /// max_x |(|u(x)|² − 1)^m|
    pub pointwise_defect: f64,
    /// max_x |u(x)|²·|(|u(x)|² − 1)^m|
    pub pointwise_quasi: f64,
    pub defect_norm: f64,
    pub quasi_defect_norm: f64,
    /// Largest gap between sorted defect eigenvalues and sorted closed-form values.
    pub defect_spectrum_gap: f64,
    pub quasi_spectrum_gap: f64,
    pub pointwise_m_isometric: bool,
    pub pointwise_quasi_m_isometric: bool,
    pub oracle_m_isometric: bool,
    pub oracle_quasi_m_isometric: bool,
    pub agree: bool,
}

/// Evaluates (|u|²−1)^m and |u|²(|u|²−1)^m atomwise and compares with B_m(M_u), M_u* B_m M_u.
pub fn check_multiplication_corollary(
    space: &MeasureSpace,
    u: &Mfunc,
    m: u32,
    tol: f64,
) -> Result<CorollaryReport> {
    require_m(m)?;
    let t = mult_op(space, u)?;
    let b = defect(&t, m)?;
    let q = quasi_defect(&t, m)?;

    let closed_defect: Vec<f64> = u
        .values()
        .iter()
        .map(|z| (z.norm_sqr() - 1.0).powi(m as i32))
        .collect();
    let closed_quasi: Vec<f64> = u
        .values()
        .iter()
        .zip(&closed_defect)
        .map(|(z, d)| z.norm_sqr() * d)
        .collect();

    let gap = |op: &LinOp, closed: &[f64]| -> Result<f64> {
        let mut sorted = closed.to_vec();
        sorted.sort_by(f64::total_cmp);
        let eig = op.hermitian_eig()?.values;
        Ok(eig
            .iter()
            .zip(&sorted)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max))
    };
    let defect_spectrum_gap = gap(&b, &closed_defect)?;
    let quasi_spectrum_gap = gap(&q, &closed_quasi)?;

    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let pointwise_defect = max_abs(&closed_defect);
    let pointwise_quasi = max_abs(&closed_quasi);
    let defect_norm = b.hermitian_norm()?;
    let quasi_defect_norm = q.hermitian_norm()?;

    let pointwise_m_isometric = pointwise_defect <= tol;
    let pointwise_quasi_m_isometric = pointwise_quasi <= tol;
    let oracle_m_isometric = defect_norm <= tol;
    let oracle_quasi_m_isometric = quasi_defect_norm <= tol;
    let agree = pointwise_m_isometric == oracle_m_isometric
        && pointwise_quasi_m_isometric == oracle_quasi_m_isometric
        && defect_spectrum_gap <= SPECTRUM_MATCH_TOL
        && quasi_spectrum_gap <= SPECTRUM_MATCH_TOL;
    Ok(CorollaryReport {
        m,
        tol,
        pointwise_defect,
        pointwise_quasi,
        defect_norm,
        quasi_defect_norm,
        defect_spectrum_gap,
        quasi_spectrum_gap,
        pointwise_m_isometric,
        pointwise_quasi_m_isometric,
        oracle_m_isometric,
        oracle_quasi_m_isometric,
        agree,
    })
}

/// Relative match required between closed-form values and defect eigenvalues.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-9;

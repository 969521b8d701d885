use proptest::prelude::*;

use wctop::classify::{defect, quasi_defect};
use wctop::criteria::{self, symbols};
use wctop::linop::{Operator, DENSE_LIMIT};
use wctop::{mult_op, wct_op, Complex64, CondExp, LinOp, MeasureSpace, Mfunc, Partition};

#[derive(Debug, Clone)]
struct Case {
    weights: Vec<f64>,
    labels: Vec<usize>,
    u: Vec<Complex64>,
    w: Vec<Complex64>,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

fn complex() -> impl Strategy<Value = Complex64> {
    (0.0..2.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..9).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05..1.0f64, n),
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(complex(), n),
            prop::collection::vec(complex(), n),
            prop::collection::vec(complex(), n),
            prop::collection::vec(complex(), n),
        )
            .prop_map(|(weights, raw, u, w, f, g)| {
                // Relabel so that labels are contiguous from 0 in order of first use.
                let mut seen: Vec<usize> = Vec::new();
                let labels = raw
                    .iter()
                    .map(|l| match seen.iter().position(|s| s == l) {
                        Some(i) => i,
                        None => {
                            seen.push(*l);
                            seen.len() - 1
                        }
                    })
                    .collect();
                Case {
                    weights,
                    labels,
                    u,
                    w,
                    f,
                    g,
                }
            })
    })
}

impl Case {
    fn ce(&self) -> CondExp {
        let space = MeasureSpace::new(self.weights.clone()).unwrap();
        let p = Partition::from_labels(&space, &self.labels).unwrap();
        CondExp::new(space, p).unwrap()
    }

    fn fun(v: &[Complex64]) -> Mfunc {
        Mfunc::new(v.to_vec())
    }

    fn integral(&self, f: &Mfunc) -> Complex64 {
        f.values()
            .iter()
            .zip(&self.weights)
            .map(|(z, m)| z * m)
            .sum()
    }
}

fn op_norm(t: &LinOp) -> f64 {
    t.op_norm().unwrap()
}

fn close(a: &LinOp, b: &LinOp, scale: f64) -> bool {
    a.max_dist(b) <= 1e-10 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conditional_expectation_laws(c in case()) {
        let ce = c.ce();
        let f = Case::fun(&c.f);
        let g = Case::fun(&c.g);
        let ef = ce.apply(&f).unwrap();
        // idempotent, and the result is block-constant
        prop_assert!(ce.apply(&ef).unwrap().max_dist(&ef) < 1e-12);
        prop_assert!(ce.is_measurable(&ef, 1e-12));
        // averaging identity on each block and on the whole space
        prop_assert!((c.integral(&ef) - c.integral(&f)).norm() < 1e-12);
        // module law for block-constant multipliers
        let eg = ce.apply(&g).unwrap();
        let lhs = ce.apply(&(&eg * &f)).unwrap();
        prop_assert!(lhs.max_dist(&(&eg * &ef)) < 1e-11);
        // Hölder: |E(fg)|² ≤ E(|f|²) E(|g|²)
        let efg = ce.apply(&(&f * &g)).unwrap();
        let ef2 = ce.apply(&f.abs_sq()).unwrap();
        let eg2 = ce.apply(&g.abs_sq()).unwrap();
        for a in 0..ce.dim() {
            prop_assert!(efg.get(a).norm_sqr() <= ef2.get(a).re * eg2.get(a).re * (1.0 + 1e-12) + 1e-15);
        }
        // positivity
        prop_assert!(ef2.values().iter().all(|z| z.re >= 0.0 && z.im.abs() < 1e-15));
        // E is an orthogonal projection in the atom basis
        let e = ce.matrix();
        prop_assert!(e.is_hermitian(1e-14));
        prop_assert!(close(&e.compose(&e).unwrap(), &e, 1.0));
    }

    #[test]
    fn adjoint_and_gram_identities(c in case()) {
        let ce = c.ce();
        let (u, w) = (Case::fun(&c.u), Case::fun(&c.w));
        let t = wct_op(&ce, &w, &u).unwrap();
        let ta = t.adjoint();
        // ⟨Tf, g⟩ = ⟨f, T*g⟩ in coordinates
        let tf = t.apply(&c.f).unwrap();
        let tag = ta.apply(&c.g).unwrap();
        let lhs: Complex64 = tf.iter().zip(&c.g).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = c.f.iter().zip(&tag).map(|(a, b)| a * b.conj()).sum();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        // T* = M_ū E M_w̄
        prop_assert!(close(&ta, &wct_op(&ce, &u.conj(), &w.conj()).unwrap(), 1.0));
        // T*T = M_{ū E(|w|²)} E M_u
        let ew2 = ce.apply(&w.abs_sq()).unwrap();
        let gram = wct_op(&ce, &(&u.conj() * &ew2), &u).unwrap();
        prop_assert!(close(&ta.compose(&t).unwrap(), &gram, op_norm(&t).powi(2)));
        // function-level and matrix application agree
        let direct = wctop::linop::wct_apply(&ce, &w, &u, &c.f).unwrap();
        for (a, b) in direct.iter().zip(&tf) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn powers_and_norms(c in case()) {
        let ce = c.ce();
        let (u, w) = (Case::fun(&c.u), Case::fun(&c.w));
        let t = wct_op(&ce, &w, &u).unwrap();
        let s = wct_op(&ce, &Case::fun(&c.f), &Case::fun(&c.g)).unwrap();
        prop_assert!(op_norm(&s.compose(&t).unwrap()) <= op_norm(&s) * op_norm(&t) * (1.0 + 1e-10) + 1e-12);
        let euw = ce.apply(&(&u * &w)).unwrap();
        let space = ce.space();
        for k in 1..5u32 {
            let lhs = t.power(k);
            let rhs = mult_op(space, &euw.powi(k as i32 - 1)).unwrap().compose(&t).unwrap();
            prop_assert!(close(&lhs, &rhs, op_norm(&t).powi(k as i32)));
        }
    }

    #[test]
    fn pascal_recursion(c in case()) {
        let ce = c.ce();
        let t = wct_op(&ce, &Case::fun(&c.w), &Case::fun(&c.u)).unwrap();
        let scale = op_norm(&t).powi(10).max(1.0);
        for m in 1..5 {
            let next = defect(&t, m + 1).unwrap();
            let rec = quasi_defect(&t, m).unwrap().sub(&defect(&t, m).unwrap()).unwrap();
            prop_assert!(close(&next, &rec, scale));
        }
    }

    #[test]
    fn compression_matches_dense(c in case()) {
        let ce = c.ce();
        let (u, w) = (Case::fun(&c.u), Case::fun(&c.w));
        let dense = Operator::wct(&ce, &w, &u, DENSE_LIMIT).unwrap();
        let comp = Operator::wct(&ce, &w, &u, 0).unwrap();
        let a = wctop::classify::classify_operator(&dense, 3, None).unwrap();
        let b = wctop::classify::classify_operator(&comp, 3, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.is_m_isometric, y.is_m_isometric);
            prop_assert_eq!(x.is_quasi_m_isometric, y.is_quasi_m_isometric);
            prop_assert!((x.quasi_defect_norm - y.quasi_defect_norm).abs() <= 1e-9 * x.tol.max(1.0));
        }
    }

    #[test]
    fn spectrum_and_holder(c in case()) {
        let ce = c.ce();
        let (u, w) = (Case::fun(&c.u), Case::fun(&c.w));
        let st = symbols(&ce, &w, &u).unwrap();
        prop_assert!(st.holder_excess() <= 1e-12);
        let op = Operator::wct(&ce, &w, &u, DENSE_LIMIT).unwrap();
        let sc = criteria::spectrum_check(&st, &op).unwrap();
        prop_assert!(sc.matches(1e-8), "{:?}", sc);
    }

    /// For w = ū the operator is self-adjoint, hence normal, and the Hölder bound is an identity.
    #[test]
    fn self_adjoint_collapse(c in case()) {
        let ce = c.ce();
        let u = Case::fun(&c.u);
        let w = u.conj();
        let st = symbols(&ce, &w, &u).unwrap();
        prop_assert!(st.holder_gap() <= 1e-10);
        let op = Operator::wct(&ce, &w, &u, DENSE_LIMIT).unwrap();
        let n = wctop::classify::normality(&op, &[0.5, 2.0], 1e-9).unwrap();
        prop_assert!(n.normal && n.consistent());
        let t = op.core().clone();
        let base = op_norm(&defect(&t, 1).unwrap());
        for m in 1..5 {
            let bm = op_norm(&defect(&t, m).unwrap());
            prop_assert!((bm - base.powi(m as i32)).abs() <= 1e-8 * base.powi(m as i32).max(1.0));
        }
    }
}

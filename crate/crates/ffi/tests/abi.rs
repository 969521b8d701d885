use std::ffi::CStr;
use std::ptr;

use wctop_ffi::*;

fn c(re: f64, im: f64) -> WctComplex {
    WctComplex { re, im }
}

unsafe fn condexp(weights: &[f64], labels: &[usize]) -> *mut WctCondExp {
    let mut ce = ptr::null_mut();
    let status = wct_condexp_new(weights.as_ptr(), labels.as_ptr(), weights.len(), &mut ce);
    assert_eq!(status, WctStatus::Ok);
    ce
}

unsafe fn last_error() -> String {
    CStr::from_ptr(wct_last_error())
        .to_string_lossy()
        .into_owned()
}

#[test]
fn projection_round_trip() {
    unsafe {
        let ce = condexp(&[0.25; 4], &[0, 0, 1, 1]);
        assert_eq!(wct_condexp_dim(ce), 4);

        let f = [c(1.0, 0.0), c(3.0, 2.0), c(-1.0, 0.0), c(1.0, 0.0)];
        let mut ef = [c(0.0, 0.0); 4];
        assert_eq!(
            wct_cond_exp(ce, f.as_ptr(), 4, ef.as_mut_ptr()),
            WctStatus::Ok
        );
        assert_eq!(ef, [c(2.0, 1.0), c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let ones = [c(1.0, 0.0); 4];
        let mut op = ptr::null_mut();
        assert_eq!(
            wct_operator_new(ce, ones.as_ptr(), ones.as_ptr(), 4, &mut op),
            WctStatus::Ok
        );
        wct_condexp_free(ce);
        assert_eq!(wct_operator_dim(op), 4);

        let mut mat = [c(0.0, 0.0); 16];
        assert_eq!(wct_operator_matrix(op, mat.as_mut_ptr(), 16), WctStatus::Ok);
        assert!((mat[1].re - 0.5).abs() < 1e-15 && mat[2].re.abs() < 1e-15);

        let mut norm = f64::NAN;
        assert_eq!(wct_defect_norm(op, 1, &mut norm), WctStatus::Ok);
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(wct_quasi_defect_norm(op, 3, &mut norm), WctStatus::Ok);
        assert!(norm < 1e-14);

        let mut normal = false;
        assert_eq!(wct_is_normal(op, 1e-9, &mut normal), WctStatus::Ok);
        assert!(normal);

        let mut json = ptr::null_mut();
        assert_eq!(wct_classify_json(op, 3, 1e-9, &mut json), WctStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        wct_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["defects"].as_array().unwrap().len(), 3);
        assert_eq!(
            v["divergences"][0]["kind"],
            "literal_m_isometry_false_positive"
        );
        wct_operator_free(op);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut ce = ptr::null_mut();
        let weights = [0.5, -1.0];
        let labels = [0usize, 0];
        assert_eq!(
            wct_condexp_new(weights.as_ptr(), labels.as_ptr(), 2, &mut ce),
            WctStatus::Validation
        );
        assert!(last_error().contains("weights[1]"), "{}", last_error());
        assert!(ce.is_null());

        assert_eq!(
            wct_condexp_new(ptr::null(), labels.as_ptr(), 2, &mut ce),
            WctStatus::NullPointer
        );
        assert!(last_error().contains("weights"));

        let ce = condexp(&[0.5, 0.5], &[0, 1]);
        let three = [c(1.0, 0.0); 3];
        let mut op = ptr::null_mut();
        assert_eq!(
            wct_operator_new(ce, three.as_ptr(), three.as_ptr(), 3, &mut op),
            WctStatus::DimensionMismatch
        );
        let two = [c(2.0, 0.0), c(0.5, 0.0)];
        assert_eq!(
            wct_operator_new(ce, two.as_ptr(), two.as_ptr(), 2, &mut op),
            WctStatus::Ok
        );
        let mut norm = 0.0;
        assert_eq!(wct_defect_norm(op, 0, &mut norm), WctStatus::Validation);
        assert_eq!(
            wct_defect_norm(op, 1, ptr::null_mut()),
            WctStatus::NullPointer
        );
        let mut normal = false;
        assert_eq!(wct_is_normal(op, -1.0, &mut normal), WctStatus::Validation);
        let mut mat = [c(0.0, 0.0); 3];
        assert_eq!(
            wct_operator_matrix(op, mat.as_mut_ptr(), 3),
            WctStatus::DimensionMismatch
        );

        wct_operator_free(op);
        wct_condexp_free(ce);
        wct_operator_free(ptr::null_mut());
        wct_string_free(ptr::null_mut());
        assert_eq!(wct_operator_dim(ptr::null()), 0);
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let labels = [0usize];
        let weights = [0.0];
        let mut ce = ptr::null_mut();
        wct_condexp_new(weights.as_ptr(), labels.as_ptr(), 1, &mut ce);
        assert!(!wct_last_error().is_null());
        let other = std::thread::spawn(|| wct_last_error().is_null())
            .join()
            .unwrap();
        assert!(other);
    }
}

use std::ffi::{CStr, CString};
use std::ptr;

use semilab_ffi::*;

fn last_error() -> String {
    let p = semilab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_calls() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(semilab_poisson_delta_log(1.0, 4, &mut v), SemilabStatus::Ok);
        assert!((v - (4.0f64 / 5.0).ln()).abs() < 1e-14);
        assert_eq!(semilab_alpha_integral(1.0, 5.0, &mut v), SemilabStatus::Ok);
        assert!(v < 0.5 && v > 0.44);
        let mut k = 0u64;
        assert_eq!(semilab_psi_s(std::f64::consts::LN_2, 10, &mut v, &mut k), SemilabStatus::Ok);
        assert!(v * 10f64.sqrt() >= 1.0 / 9.0 && k > 0);
        assert_eq!(semilab_log_hess_32(1.0, 1.0, 1e4, &mut v), SemilabStatus::Ok);
        assert!(v < -10.0);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(semilab_alpha_integral(-1.0, 1.0, &mut v), SemilabStatus::Domain);
        assert!(last_error().contains("alpha_integral"));
        assert_eq!(semilab_alpha_integral(1.0, 1.0, ptr::null_mut()), SemilabStatus::NullPointer);
        let bad = CString::new(r#"{"experiment_id": "no-such"}"#).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(semilab_experiment_run(bad.as_ptr(), &mut r), SemilabStatus::Config);
        assert!(r.is_null());
        let junk = CString::new("{").unwrap();
        assert_eq!(semilab_experiment_run(junk.as_ptr(), &mut r), SemilabStatus::Config);
    }
}

#[test]
fn seed_derive_matches_core() {
    let labels = [CString::new("fk-hessian").unwrap(), CString::new("mc").unwrap()];
    let ptrs: Vec<_> = labels.iter().map(|c| c.as_ptr()).collect();
    let mut out = 0u64;
    unsafe {
        assert_eq!(semilab_seed_derive(7, ptrs.as_ptr(), ptrs.len(), &mut out), SemilabStatus::Ok);
    }
    assert_eq!(out, semilab::seed::seed_derive(7, &["fk-hessian", "mc"]));
}

#[test]
fn kernel_handle_lifecycle() {
    let mut k = ptr::null_mut();
    unsafe {
        assert_eq!(semilab_mm_kernel_new(1.0, 0.5, 30, 120, &mut k), SemilabStatus::Ok);
        assert_eq!(semilab_mm_kernel_n_max(k), 30);
        assert_eq!(semilab_mm_kernel_n_max(ptr::null()), 0);
        // f = 1 gives P_t f = 1
        let f = vec![1.0; 121];
        let mut out = vec![0.0; 31];
        assert_eq!(semilab_mm_kernel_ln_apply(k, f.as_ptr(), f.len(), out.as_mut_ptr(), 10), SemilabStatus::BufferTooSmall);
        let neg = [-1.0, 1.0];
        assert_eq!(semilab_mm_kernel_ln_apply(k, neg.as_ptr(), 2, out.as_mut_ptr(), 31), SemilabStatus::Domain);
        let ind = [0.0, 0.0, 1.0];
        assert_eq!(semilab_mm_kernel_ln_apply(k, ind.as_ptr(), 3, out.as_mut_ptr(), 31), SemilabStatus::Ok);
        // P_t 1_{2}(0) = π_{θ}(2), θ = 1 − e^{−t}
        let theta = -(-0.5f64).exp_m1();
        let want = -theta + 2.0 * theta.ln() - 2f64.ln();
        assert!((out[0] - want).abs() < 1e-12);
        semilab_mm_kernel_free(k);
        semilab_mm_kernel_free(ptr::null_mut());
    }
}

#[test]
fn experiment_result_handle() {
    let cfg = CString::new(r#"{"experiment_id": "hypercube-sup", "grids": {"n_grid": {"start": 1, "stop": 4, "count": 4}}}"#).unwrap();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(semilab_experiment_run(cfg.as_ptr(), &mut r), SemilabStatus::Ok, "{}", last_error());
        let mut verdict = SemilabVerdict::Fail;
        assert_eq!(semilab_result_verdict(r, &mut verdict), SemilabStatus::Ok);
        assert_eq!(verdict, SemilabVerdict::Pass);
        let mut rows = 0;
        assert_eq!(semilab_result_rows(r, &mut rows), SemilabStatus::Ok);
        assert_eq!(rows, 4);
        let mut csv = ptr::null_mut();
        assert_eq!(semilab_result_csv(r, &mut csv), SemilabStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        semilab_string_free(csv);
        assert!(text.starts_with("n_dim,s,closed_form,brute_force"));
        let mut meta = ptr::null_mut();
        assert_eq!(semilab_result_metadata_json(r, &mut meta), SemilabStatus::Ok);
        let m: serde_json::Value = serde_json::from_str(CStr::from_ptr(meta).to_str().unwrap()).unwrap();
        semilab_string_free(meta);
        assert_eq!(m["experiment_id"], "hypercube-sup");
        assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
        semilab_result_free(r);
    }
}

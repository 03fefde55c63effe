use std::ffi::{CStr, CString};
use std::ptr;

use mtail_ffi::*;

fn last_error() -> String {
    let p = mtail_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn params_and_bounds() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(mtail_params_new(0.1, 0.0, &mut p), MtailStatus::Ok);
        let mut e = std::mem::zeroed::<MtailEnvelope>();
        assert_eq!(mtail_tail_bound_sq(0.0, p, &mut e), MtailStatus::Ok);
        assert_eq!(e.value, 1.0);
        assert_eq!(mtail_strengthened_tail(1.5, p, 1.0, &mut e), MtailStatus::Ok);
        assert!(e.value > 0.0 && e.xhat.is_finite() && e.lambda_bar.is_finite());
        assert_eq!(mtail_nonuniform_be(-1.0, p, 2.0, &mut e), MtailStatus::Ok);
        assert!(e.lambda_bar.is_nan());
        assert_eq!(mtail_corollary(1.0, 0.1, 0.0, 1.0, &mut e), MtailStatus::Ok);
        mtail_params_free(p);
        mtail_params_free(ptr::null_mut());

        let mut sf = 0.0;
        assert_eq!(mtail_std_normal_sf(0.0, &mut sf), MtailStatus::Ok);
        assert_eq!(sf, 0.5);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(mtail_params_new(0.9, 0.0, &mut p), MtailStatus::InvalidParams);
        assert!(p.is_null());
        assert!(last_error().contains("epsilon"));
        assert_eq!(mtail_params_new(0.1, 0.0, ptr::null_mut()), MtailStatus::NullPointer);
        let mut e = std::mem::zeroed::<MtailEnvelope>();
        assert_eq!(mtail_tail_bound_sq(1.0, ptr::null(), &mut e), MtailStatus::NullPointer);
        assert_eq!(last_error(), "params is null");
        let mut sf = 0.0;
        assert_eq!(mtail_std_normal_sf(f64::NAN, &mut sf), MtailStatus::Domain);

        let mut m = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(mtail_model_from_json(bad.as_ptr(), &mut m), MtailStatus::Parse);
        let bad = CString::new(r#"{"family":"variance_switch","n":8,"delta":3.0}"#).unwrap();
        assert_eq!(mtail_model_from_json(bad.as_ptr(), &mut m), MtailStatus::InvalidModel);
        assert_eq!(mtail_model_rademacher(0, &mut m), MtailStatus::InvalidModel);
        assert!(m.is_null());
    }
}

#[test]
fn model_handle_round_trip() {
    unsafe {
        let json = CString::new(r#"{"family":"variance_switch","n":8,"delta":0.3}"#).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(mtail_model_from_json(json.as_ptr(), &mut m), MtailStatus::Ok);
        let mut n = 0usize;
        assert_eq!(mtail_model_len(m, &mut n), MtailStatus::Ok);
        assert_eq!(n, 8);
        let mut p = ptr::null_mut();
        assert_eq!(mtail_model_params(m, &mut p), MtailStatus::Ok);
        let mut e = std::mem::zeroed::<MtailEnvelope>();
        assert_eq!(mtail_tail_bound_sq(1.0, p, &mut e), MtailStatus::Ok);
        assert!(e.value > 0.0 && e.value < 1.0);
        mtail_params_free(p);
        mtail_model_free(m);
    }
}

#[test]
fn exhaustive_tail_on_four_steps() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mtail_model_rademacher(4, &mut m), MtailStatus::Ok);
        let mut t = std::mem::zeroed::<MtailTailEstimate>();
        assert_eq!(mtail_estimate_tail(m, 0.9, 1000, 1, 0, false, &mut t), MtailStatus::Ok);
        assert_eq!(t.method, MtailMethod::Exhaustive);
        assert_eq!(t.p_hat, 0.3125);
        assert_eq!(mtail_estimate_tail(m, 0.9, 0, 1, 0, false, &mut t), MtailStatus::Config);
        mtail_model_free(m);
    }
}

#[test]
fn sampled_estimates_ignore_worker_count() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(mtail_model_rademacher(400, &mut m), MtailStatus::Ok);
        let mut a = std::mem::zeroed::<MtailTailEstimate>();
        let mut b = std::mem::zeroed::<MtailTailEstimate>();
        assert_eq!(mtail_estimate_tail(m, 2.5, 20_000, 3, 1, true, &mut a), MtailStatus::Ok);
        assert_eq!(mtail_estimate_tail(m, 2.5, 20_000, 3, 4, true, &mut b), MtailStatus::Ok);
        assert_eq!(a.method, MtailMethod::ImportanceSampled);
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert!(a.ci_lo <= a.p_hat && a.p_hat <= a.ci_hi);
        // P(Z > 2.5) ≈ 0.00621; 400 Rademacher steps stay close
        assert!((a.p_hat - 0.0062).abs() < 0.0015, "{}", a.p_hat);
        mtail_model_free(m);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(mtail_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

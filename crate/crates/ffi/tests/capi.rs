use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use supcert_ffi::*;

const MIXED: &str = "domain N 10 upper 1e10 balanced 0
term coeff 1 0 alpha 0 beta -1/1 gamma 1 unit identity
term coeff 1e-10 0 alpha 0 beta 1/1 gamma 0 unit identity
";

fn parse(text: &str) -> (SupcertStatus, *mut SupcertSum) {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let s = unsafe { supcert_sum_parse(c.as_ptr(), ptr::null(), &mut out) };
    (s, out)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(supcert_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn certify_and_read_back() {
    let (s, sum) = parse(MIXED);
    assert_eq!(s, SupcertStatus::Ok);
    let mut cert = ptr::null_mut();
    let opts = supcert_options_default();
    assert_eq!(unsafe { supcert_certify(sum, &opts, &mut cert) }, SupcertStatus::Ok);
    let n = unsafe { supcert_certificate_witness_count(cert) };
    assert!(n > 0);
    let (mut y, mut h) = (0.0, 0.0);
    let mut best = 0.0f64;
    for i in 0..n {
        assert_eq!(
            unsafe { supcert_certificate_witness(cert, i, &mut y, &mut h) },
            SupcertStatus::Ok
        );
        let mut direct = 0.0;
        assert_eq!(unsafe { supcert_sum_abs(sum, y, &mut direct) }, SupcertStatus::Ok);
        assert_eq!(direct, h);
        best = best.max(h);
    }
    let score = unsafe { supcert_certificate_score(cert) };
    assert!(score > 0.0 && score <= best * 1.0000001);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { supcert_certificate_json(cert, &mut json) }, SupcertStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["score"].as_f64().unwrap(), score);
    unsafe {
        supcert_string_free(json);
        supcert_certificate_free(cert);
        supcert_sum_free(sum);
    }
}

#[test]
fn error_codes() {
    let (s, sum) = parse("domain N 10 upper inf balanced 0\nterm coeff 1 0 alpha 0 beta 1/1 gamma 0 unit identity\n");
    assert_eq!(s, SupcertStatus::Ok);
    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { supcert_certify(sum, ptr::null(), &mut cert) },
        SupcertStatus::Hypothesis
    );
    assert!(cert.is_null());
    assert!(last_error().contains("fiberwise boundedness violated"));
    unsafe { supcert_sum_free(sum) };

    let (s, sum) = parse("nonsense\n");
    assert_eq!(s, SupcertStatus::Data);
    assert!(sum.is_null());

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { supcert_sum_parse(ptr::null(), ptr::null(), &mut out) },
        SupcertStatus::NullPointer
    );
    assert_eq!(
        unsafe { supcert_certify(ptr::null(), ptr::null(), ptr::null_mut()) },
        SupcertStatus::NullPointer
    );
    assert!(unsafe { supcert_certificate_score(ptr::null()) }.is_nan());
    unsafe {
        supcert_sum_free(ptr::null_mut());
        supcert_certificate_free(ptr::null_mut());
        supcert_profile_free(ptr::null_mut());
        supcert_string_free(ptr::null_mut());
    }
}

#[test]
fn fit_through_c_abi() {
    let xs: Vec<f64> = (2..=10).map(|k| 10f64.powi(k)).collect();
    let vs: Vec<f64> = xs.iter().map(|x| x * x.ln().ln()).collect();
    let mut p = ptr::null_mut();
    let s = unsafe { supcert_fit_growth(xs.as_ptr(), vs.as_ptr(), xs.len(), SupcertDirection::X, 8, &mut p) };
    assert_eq!(s, SupcertStatus::Ok);
    assert_eq!(unsafe { supcert_profile_non_power_log(p) }, 1);
    unsafe { supcert_profile_free(p) };

    let s = unsafe { supcert_fit_growth(xs.as_ptr(), vs.as_ptr(), 3, SupcertDirection::X, 8, &mut p) };
    assert_eq!(s, SupcertStatus::Data);
    assert!(p.is_null());

    let eps: Vec<f64> = (2..=13).map(|k| 10f64.powi(-k)).collect();
    let m: Vec<f64> = eps.iter().map(|e| e.powf(2.0 / 3.0)).collect();
    let s = unsafe { supcert_fit_growth(eps.as_ptr(), m.as_ptr(), eps.len(), SupcertDirection::Eps, 8, &mut p) };
    assert_eq!(s, SupcertStatus::Ok);
    let (mut r, mut num, mut den, mut l) = (0.0, 0i64, 0i64, 0u32);
    assert_eq!(
        unsafe { supcert_profile_exponent(p, &mut r, &mut num, &mut den, &mut l) },
        SupcertStatus::Ok
    );
    assert_eq!((num, den, l), (2, 3, 0));
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { supcert_profile_band(p, &mut lo, &mut hi) }, SupcertStatus::Ok);
    assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    unsafe { supcert_profile_free(p) };
}

/// Compiles a C client against the generated header and the static library.
#[test]
fn c_client_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libsupcert_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("supcert_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .expect("cc is required for the C client test");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("score="));
}

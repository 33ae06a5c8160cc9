use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use thetawave_ffi::*;

fn handle(lambda0: f64, a: f64) -> *mut TwSolution {
    let mut h = ptr::null_mut();
    let s = unsafe { tw_solution_new(lambda0, a, 8.0, 9.0, 0.0, 0.0, 0.0, 0.0, &mut h) };
    assert_eq!(s, TwStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        tw_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn evaluates_origin_value() {
    let h = handle(0.0, 6.0);
    let (mut re, mut im, mut amp2) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(tw_solution_eval(h, 0.0, 0.0, &mut re, &mut im), TwStatus::Ok);
        assert_eq!(tw_solution_amp2(h, 0.0, 0.0, &mut amp2), TwStatus::Ok);
        tw_solution_free(h);
    }
    assert!((re - 7.0).abs() < 1e-12 && im.abs() < 1e-12);
    assert!((amp2 - 49.0).abs() < 1e-9);
}

#[test]
fn constants_periods_and_params() {
    let h = handle(0.0, 6.0);
    let mut k = TwConstants::default();
    let mut per = TwPeriods::default();
    let mut p = TwParams::default();
    unsafe {
        assert_eq!(tw_solution_constants(h, &mut k), TwStatus::Ok);
        assert_eq!(tw_solution_periods(h, &mut per), TwStatus::Ok);
        assert_eq!(tw_solution_params(h, &mut p), TwStatus::Ok);
        tw_solution_free(h);
    }
    assert_eq!(per.x, k.a_plus / 2.0);
    assert_eq!(per.t, k.a_minus / 4.0);
    assert_eq!(per.has_t_prime, 0);
    assert!((p.k2 - 138.7031352026166).abs() < 1e-9);
    assert_eq!(p.k1, 0.0);
}

#[test]
fn invalid_parameters_report_code_and_message() {
    let mut h = ptr::null_mut();
    let s = unsafe { tw_solution_new(0.0, 8.5, 8.0, 9.0, 0.0, 0.0, 0.0, 0.0, &mut h) };
    assert_eq!(s, TwStatus::InvalidParams);
    assert!(h.is_null());
    assert!(last_error().contains("0 < a < b < c"));
}

#[test]
fn null_arguments_are_rejected() {
    let s = unsafe { tw_solution_new(0.0, 6.0, 8.0, 9.0, 0.0, 0.0, 0.0, 0.0, ptr::null_mut()) };
    assert_eq!(s, TwStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { tw_solution_amp2(ptr::null(), 0.0, 0.0, &mut v) }, TwStatus::NullPointer);
    unsafe { tw_solution_free(ptr::null_mut()) };
}

#[test]
fn rejected_complex_phase() {
    let mut h = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(tw_solution_new(0.0, 6.0, 8.0, 9.0, 0.0, 0.1, 0.0, 0.0, &mut h), TwStatus::Ok);
        assert_eq!(tw_solution_amp2(h, 0.1, 0.0, &mut v), TwStatus::RealityRejected);
        tw_solution_free(h);
    }
}

#[test]
fn grid_sampling_and_buffer_check() {
    let h = handle(0.0, 6.0);
    let mut buf = vec![0.0; 6];
    unsafe {
        assert_eq!(tw_sample_abs(h, 0.0, 0.2, 0.0, 0.01, 3, 3, buf.as_mut_ptr(), buf.len()), TwStatus::BufferTooSmall);
        assert_eq!(tw_sample_abs(h, 0.0, 0.2, 0.0, 0.01, 2, 3, buf.as_mut_ptr(), buf.len()), TwStatus::Ok);
        tw_solution_free(h);
    }
    assert!((buf[0] - 7.0).abs() < 1e-12);
    assert!(buf.iter().all(|v| *v > 0.0));
}

#[test]
fn shifting_k2_changes_the_phase_only() {
    let h = handle(0.0, 6.0);
    let (mut re0, mut im0, mut re1, mut im1) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        tw_solution_eval(h, 0.1, 0.01, &mut re0, &mut im0);
        tw_solution_shift_k2(h, 0.1);
        tw_solution_eval(h, 0.1, 0.01, &mut re1, &mut im1);
        tw_solution_free(h);
    }
    assert!((re0.hypot(im0) - re1.hypot(im1)).abs() < 1e-12);
    assert!((re0 - re1).abs() > 1e-6);
}

#[test]
fn status_strings_are_static() {
    let s = unsafe { CStr::from_ptr(tw_status_string(TwStatus::BufferTooSmall)) };
    assert_eq!(s.to_str().unwrap(), "output buffer too small");
    let v = unsafe { CStr::from_ptr(tw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/thetawave.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["tw_solution_new", "tw_solution_free", "tw_last_error", "TW_STATUS_REALITY_REJECTED"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        "#include \"thetawave.h\"\nint main(void) { TwSolution *h = 0; return (int)tw_solution_new(0, 6, 8, 9, 0, 0, 0, 0, &h); }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found, header syntax check skipped");
            return;
        }
    };
    assert!(status.success());
}

//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{CStr, CString};
use std::ptr;
use tmflow_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0i8; 256];
    unsafe { tmf_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

const ERASER: &str = "\
states: 3
start: 1
halt: 3
1 1 -> 1 0 N
1 0 -> 3 0 N
2 0 -> 2 0 N
2 1 -> 2 1 N
";

#[test]
fn machine_lifecycle_and_run() {
    unsafe {
        let mut machine = ptr::null_mut();
        assert_eq!(
            tmf_machine_parse(c(ERASER).as_ptr(), &mut machine),
            TmfStatus::Ok
        );
        let mut states = 0u32;
        assert_eq!(tmf_machine_state_count(machine, &mut states), TmfStatus::Ok);
        assert_eq!(states, 3);
        let mut halted = false;
        let mut steps = 0u64;
        assert_eq!(
            tmf_machine_run(machine, c("0:1,1:1").as_ptr(), 100, &mut halted, &mut steps),
            TmfStatus::Ok
        );
        assert!(halted);
        assert_eq!(steps, 2);
        let mut reversible = true;
        assert_eq!(
            tmf_machine_is_reversible(machine, &mut reversible),
            TmfStatus::Ok
        );
        assert!(!reversible);
        tmf_machine_free(machine);
    }
}

#[test]
fn parse_errors_set_messages() {
    unsafe {
        let mut machine = ptr::null_mut();
        let status = tmf_machine_parse(
            c("states: 2\nstart: 1\nhalt: 2\n1 0 -> 2 0 X\n").as_ptr(),
            &mut machine,
        );
        assert_eq!(status, TmfStatus::ParseError);
        assert!(last_error().contains("line 4"));
        assert_eq!(
            tmf_machine_parse(ptr::null(), &mut machine),
            TmfStatus::NullArgument
        );
    }
}

#[test]
fn compiled_pipeline_reach_and_report() {
    unsafe {
        let mut machine = ptr::null_mut();
        assert_eq!(
            tmf_machine_parse(c(ERASER).as_ptr(), &mut machine),
            TmfStatus::Ok
        );
        let mut compiled = ptr::null_mut();
        assert_eq!(tmf_machine_compile(machine, &mut compiled), TmfStatus::Ok);
        let mut count = 0usize;
        assert_eq!(
            tmf_compiled_component_count(compiled, &mut count),
            TmfStatus::Ok
        );
        assert_eq!(count, 512);
        let mut disjoint = true;
        assert_eq!(
            tmf_compiled_images_disjoint(compiled, true, &mut disjoint),
            TmfStatus::Ok
        );
        assert!(!disjoint);
        let mut reached = false;
        let mut step = 0u64;
        assert_eq!(
            tmf_compiled_reach_halt(compiled, c("0:1").as_ptr(), 50, &mut reached, &mut step),
            TmfStatus::Ok
        );
        assert!(reached);
        assert_eq!(step, 2);
        let mut report = ptr::null_mut();
        assert_eq!(
            tmf_compiled_blockmap_report(compiled, &mut report),
            TmfStatus::Ok
        );
        let text = CStr::from_ptr(report).to_string_lossy().into_owned();
        assert!(text.contains("block map: 512 components"));
        tmf_string_free(report);
        tmf_compiled_free(compiled);
        tmf_machine_free(machine);
    }
}

#[test]
fn phi_encoding_as_exact_string() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(tmf_phi_encode(2, c("0:1").as_ptr(), &mut s), TmfStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "1/12");
        tmf_string_free(s);
        assert_eq!(
            tmf_phi_encode(0, c("").as_ptr(), &mut s),
            TmfStatus::InvalidInput
        );
    }
}

#[test]
fn series_extension_residual_and_eval() {
    unsafe {
        let mut series = ptr::null_mut();
        assert_eq!(
            tmf_beltrami_extend(c("x").as_ptr(), c("1").as_ptr(), 20, &mut series),
            TmfStatus::Ok
        );
        let mut through = 0i64;
        assert_eq!(
            tmf_series_residual_order(series, &mut through),
            TmfStatus::Ok
        );
        assert_eq!(through, 19);
        let mut u = [0f64; 3];
        assert_eq!(
            tmf_series_evaluate(series, 0.0, 0.0, std::f64::consts::FRAC_PI_4, u.as_mut_ptr()),
            TmfStatus::Ok
        );
        assert!((u[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((u[1] + 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(u[2], 0.0);
        tmf_series_free(series);
        // zero eigenvalue is rejected
        assert_eq!(
            tmf_beltrami_extend(c("x").as_ptr(), c("0").as_ptr(), 5, &mut series),
            TmfStatus::InvalidInput
        );
        assert!(last_error().contains("lambda"));
    }
}

#[test]
fn rotation_identity_check() {
    unsafe {
        let mut id = false;
        assert_eq!(
            tmf_rotation_is_identity(c("1").as_ptr(), c("1").as_ptr(), &mut id),
            TmfStatus::Ok
        );
        assert!(id);
        assert_eq!(
            tmf_rotation_is_identity(c("2").as_ptr(), c("1").as_ptr(), &mut id),
            TmfStatus::Ok
        );
        assert!(!id);
    }
}

#[test]
fn generated_header_exists_with_exports() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tmflow.h");
    let text = std::fs::read_to_string(header).unwrap();
    for symbol in [
        "tmf_machine_parse",
        "tmf_compiled_reach_halt",
        "tmf_series_evaluate",
        "TmfStatus",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}

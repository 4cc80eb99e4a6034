use std::ffi::{CStr, CString};
use std::ptr;

use mdpvi_ffi::*;

const EX1: &str = r#"{
  "num_states": 3,
  "actions": [["b", "c"], ["b"], ["b"]],
  "rewards": [[0.0, 0.0], [1.0], [-1.0]],
  "transitions": [[[0, 0, 1], [0, 1, 0]], [[0, 1, 0]], [[0, 0, 1]]]
}"#;

fn load(json: &str) -> *mut MdpviMdp {
    let text = CString::new(json).unwrap();
    let mut mdp = ptr::null_mut();
    let status = unsafe { mdpvi_mdp_from_json(text.as_ptr(), &mut mdp) };
    assert_eq!(status, MdpviStatus::Ok, "{}", last_error());
    mdp
}

fn last_error() -> String {
    let p = mdpvi_last_error_message();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn value_iteration_round_trip() {
    let mdp = load(EX1);
    assert_eq!(unsafe { mdpvi_mdp_num_states(mdp) }, 3);
    let v0 = [1.0, 2.0, -2.0];
    let mut run = ptr::null_mut();
    let status = unsafe { mdpvi_value_iterate(mdp, 0.47, 0.02, v0.as_ptr(), 3, &mut run) };
    assert_eq!(status, MdpviStatus::Ok);
    assert_eq!(unsafe { mdpvi_run_iterations(run) }, 4);
    assert_eq!(unsafe { mdpvi_run_span_trace_len(run) }, 4);

    let mut trace = [0.0; 4];
    assert_eq!(
        unsafe { mdpvi_run_span_trace(run, trace.as_mut_ptr(), 4) },
        MdpviStatus::Ok
    );
    assert!((trace[0] - 2.0 * (2.0f64 * 0.47 - 1.0).abs()).abs() < 1e-12);

    let mut policy = [9usize; 3];
    assert_eq!(
        unsafe { mdpvi_run_policy(run, policy.as_mut_ptr(), 3) },
        MdpviStatus::Ok
    );
    assert_eq!(policy, [1, 0, 0]);

    let mut short = [0.0; 2];
    assert_eq!(
        unsafe { mdpvi_run_final_value(run, short.as_mut_ptr(), 2) },
        MdpviStatus::BufferLength
    );
    assert!(last_error().contains("expected 3"));

    unsafe {
        mdpvi_run_free(run);
        mdpvi_mdp_free(mdp);
    }
}

#[test]
fn exact_solver_and_gamma() {
    let mdp = load(EX1);
    let mut policy = [0usize; 3];
    let mut value = [0.0; 3];
    let status = unsafe { mdpvi_policy_iterate(mdp, 0.5, policy.as_mut_ptr(), value.as_mut_ptr(), 3) };
    assert_eq!(status, MdpviStatus::Ok);
    assert_eq!(value[2], -2.0);
    assert_eq!(policy, [1, 0, 0]);

    let (mut g, mut gp) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { mdpvi_gamma(mdp, &mut g, &mut gp) }, MdpviStatus::Ok);
    assert_eq!((g, gp), (1.0, 1.0));

    let mut json = ptr::null_mut();
    let v0 = [1.0, 2.0, -2.0];
    assert_eq!(
        unsafe { mdpvi_bounds_json(mdp, 0.47, 0.02, v0.as_ptr(), 3, &mut json) },
        MdpviStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { mdpvi_string_free(json) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["n_star"]["iterations"], 4);
    unsafe { mdpvi_mdp_free(mdp) };
}

#[test]
fn errors_are_codes_not_panics() {
    let mut mdp = ptr::null_mut();
    let bad = CString::new("{ nope").unwrap();
    assert_eq!(
        unsafe { mdpvi_mdp_from_json(bad.as_ptr(), &mut mdp) },
        MdpviStatus::ParseError
    );
    assert!(mdp.is_null());
    assert!(!last_error().is_empty());

    let row = CString::new(r#"{"num_states":1,"actions":[["a"]],"rewards":[[0]],"transitions":[[[0.5]]]}"#).unwrap();
    assert_eq!(
        unsafe { mdpvi_mdp_from_json(row.as_ptr(), &mut mdp) },
        MdpviStatus::InvalidInput
    );
    assert_eq!(
        unsafe { mdpvi_mdp_from_json(ptr::null(), &mut mdp) },
        MdpviStatus::NullPointer
    );

    let handle = load(EX1);
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { mdpvi_value_iterate(handle, 1.0, 0.1, ptr::null(), 0, &mut run) },
        MdpviStatus::InvalidInput
    );
    assert_eq!(
        unsafe { mdpvi_value_iterate(handle, 0.5, 0.1, [0.0].as_ptr(), 1, &mut run) },
        MdpviStatus::BufferLength
    );
    assert_eq!(
        unsafe { mdpvi_value_iterate(ptr::null(), 0.5, 0.1, ptr::null(), 0, &mut run) },
        MdpviStatus::NullPointer
    );
    // success clears the message
    assert_eq!(
        unsafe { mdpvi_value_iterate(handle, 0.5, 0.1, ptr::null(), 0, &mut run) },
        MdpviStatus::Ok
    );
    assert!(mdpvi_last_error_message().is_null());
    unsafe {
        mdpvi_run_free(run);
        mdpvi_mdp_free(handle);
        mdpvi_mdp_free(ptr::null_mut());
        mdpvi_run_free(ptr::null_mut());
        mdpvi_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mdpvi_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

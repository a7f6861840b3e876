use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use qumvqd_ffi::*;

fn fixture(rel: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe { qv_last_error_message(ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { qv_last_error_message(buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, QvStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(qv_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn electronic_round_trip() {
    let json = fixture("h2_sto3g/h2_r0.735.json");
    let mut h: *mut QvHamiltonian = ptr::null_mut();
    assert_eq!(unsafe { qv_hamiltonian_from_electronic_json(json.as_ptr(), 2, 8, &mut h) }, QvStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { qv_hamiltonian_dimension(h, &mut dim) }, QvStatus::Ok);
    assert_eq!(dim, 8);

    let mut exact = [0.0; 10];
    let mut written = 0;
    assert_eq!(unsafe { qv_hamiltonian_eigenvalues(h, exact.as_mut_ptr(), exact.len(), &mut written) }, QvStatus::Ok);
    assert_eq!(written, 6);
    assert!((exact[0] + 1.137).abs() < 1e-3);

    let cfg = CString::new(r#"{"depth": 8, "k": 2, "seed": 3, "optimizer": {"restarts": 2}}"#).unwrap();
    let mut r: *mut QvResult = ptr::null_mut();
    assert_eq!(unsafe { qv_run_vqd(h, cfg.as_ptr(), &mut r) }, QvStatus::Ok, "{}", last_error());
    let mut k = 0;
    assert_eq!(unsafe { qv_result_num_states(r, &mut k) }, QvStatus::Ok);
    assert_eq!(k, 2);
    let (mut e, mut o) = ([0.0; 2], [0.0; 2]);
    assert_eq!(unsafe { qv_result_energies(r, e.as_mut_ptr(), o.as_mut_ptr(), 2) }, QvStatus::Ok);
    assert!((e[0] - exact[0]).abs() < 1.6e-3);
    assert_eq!(o[0], exact[0]);
    let mut conv = 0;
    assert_eq!(unsafe { qv_result_converged(r, &mut conv) }, QvStatus::Ok);
    assert_eq!(conv, 1);

    let mut needed = 0;
    assert_eq!(unsafe { qv_result_to_json(r, ptr::null_mut(), 0, &mut needed) }, QvStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { qv_result_to_json(r, buf.as_mut_ptr(), buf.len(), ptr::null_mut()) }, QvStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(v["result"]["states"].as_array().unwrap().len(), 2);

    let mut small = [0.0; 1];
    assert_eq!(unsafe { qv_result_energies(r, small.as_mut_ptr(), ptr::null_mut(), 1) }, QvStatus::BufferTooSmall);
    unsafe {
        qv_result_free(r);
        qv_hamiltonian_free(h);
    }
}

#[test]
fn fragments_and_diagonal_solution() {
    let json = fixture("vibrational/single_diagonal.json");
    let mut h: *mut QvHamiltonian = ptr::null_mut();
    assert_eq!(unsafe { qv_hamiltonian_from_fragments_json(json.as_ptr(), &mut h) }, QvStatus::Ok);
    let cfg = CString::new(r#"{"depth": 4, "k": 1, "optimizer": {"restarts": 1}}"#).unwrap();
    let mut r: *mut QvResult = ptr::null_mut();
    assert_eq!(unsafe { qv_run_vqd(h, cfg.as_ptr(), &mut r) }, QvStatus::Ok);
    let (mut e, mut o) = ([0.0], [0.0]);
    assert_eq!(unsafe { qv_result_energies(r, e.as_mut_ptr(), o.as_mut_ptr(), 1) }, QvStatus::Ok);
    assert!((e[0] - 750.0).abs() < 1e-6 && o[0] == 750.0, "{e:?} {o:?}");
    unsafe {
        qv_result_free(r);
        qv_hamiltonian_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut h: *mut QvHamiltonian = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { qv_hamiltonian_from_electronic_json(bad.as_ptr(), 2, 16, &mut h) }, QvStatus::Parse);
    assert!(last_error().contains("parse error"));
    assert!(h.is_null());

    assert_eq!(unsafe { qv_hamiltonian_from_electronic_json(ptr::null(), 2, 16, &mut h) }, QvStatus::NullPointer);
    let json = fixture("h2_sto3g/h2_r0.735.json");
    assert_eq!(
        unsafe { qv_hamiltonian_from_electronic_json(json.as_ptr(), 9, 16, &mut h) },
        QvStatus::InvalidArgument
    );
    assert_eq!(unsafe { qv_hamiltonian_dimension(ptr::null(), &mut 0) }, QvStatus::NullPointer);

    assert_eq!(unsafe { qv_hamiltonian_from_electronic_json(json.as_ptr(), 2, 16, &mut h) }, QvStatus::Ok);
    let mut r: *mut QvResult = ptr::null_mut();
    let too_many = CString::new(r#"{"depth": 2, "k": 7}"#).unwrap();
    assert_eq!(unsafe { qv_run_vqd(h, too_many.as_ptr(), &mut r) }, QvStatus::InvalidArgument);
    let unknown = CString::new(r#"{"depth": 2, "k": 1, "colour": 1}"#).unwrap();
    assert_eq!(unsafe { qv_run_vqd(h, unknown.as_ptr(), &mut r) }, QvStatus::Parse);
    assert!(r.is_null());
    unsafe {
        qv_hamiltonian_free(h);
        qv_hamiltonian_free(ptr::null_mut());
        qv_result_free(ptr::null_mut());
    }
}

#[test]
fn closed_form_helpers() {
    let mut rep = QvCompressionReport::default();
    assert_eq!(unsafe { qv_compression_report(22, 4, 16, &mut rep) }, QvStatus::Ok);
    assert_eq!(rep.restricted_dim, 7315.0);
    assert_eq!(rep.full_dim, 4194304.0);
    assert_eq!(rep.qumodes_restricted, 4);
    assert_eq!(unsafe { qv_compression_report(2, 3, 16, &mut rep) }, QvStatus::InvalidArgument);

    let mut err = 0.0;
    assert_eq!(unsafe { qv_fidelity_energy_error(1e-3, 26, 2532.06, &mut err) }, QvStatus::Ok);
    assert!((err - 2532.06 * (1.0 - 0.999f64.powi(26))).abs() < 1e-9);
    assert_eq!(unsafe { qv_fidelity_energy_error(2.0, 26, 1.0, &mut err) }, QvStatus::InvalidArgument);
    assert_eq!(unsafe { qv_fidelity_energy_error(0.1, 26, 1.0, ptr::null_mut()) }, QvStatus::NullPointer);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qumvqd.h")).unwrap();
    for name in [
        "qv_version",
        "qv_last_error_message",
        "qv_hamiltonian_from_electronic_json",
        "qv_hamiltonian_from_fragments_json",
        "qv_hamiltonian_dimension",
        "qv_hamiltonian_eigenvalues",
        "qv_hamiltonian_free",
        "qv_run_vqd",
        "qv_result_num_states",
        "qv_result_energies",
        "qv_result_converged",
        "qv_result_to_json",
        "qv_result_free",
        "qv_compression_report",
        "qv_fidelity_energy_error",
        "typedef struct QvHamiltonian QvHamiltonian",
        "QV_STATUS_BUFFER_TOO_SMALL = 11",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sldlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sldlab_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn fisher_through_handles() {
    unsafe {
        let mut rho = ptr::null_mut();
        let mut h = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(sldlab_state_optimal_product(1, 1, &mut rho), SldlabStatus::Ok);
        assert_eq!(sldlab_generator_new(SldlabGeneratorKind::NonEntangling, 1, &mut h), SldlabStatus::Ok);
        assert_eq!(sldlab_basis_product_pm(1, &mut b), SldlabStatus::Ok);
        let mut f = SldlabFisher::default();
        assert_eq!(sldlab_fisher(rho, h, b, 10_000, &mut f), SldlabStatus::Ok);
        assert!((f.classical - 1.0).abs() < 1e-12 && (f.quantum - 1.0).abs() < 1e-12);
        assert_eq!(f.saturated, 1);
        assert!((f.bound - 0.01).abs() < 1e-15);

        // evolution preserves the trace
        let mut moved = ptr::null_mut();
        assert_eq!(sldlab_state_evolve(rho, h, 0.3, &mut moved), SldlabStatus::Ok);
        let (mut re, mut im) = ([0.0; 4], [0.0; 4]);
        assert_eq!(sldlab_state_matrix(moved, re.as_mut_ptr(), im.as_mut_ptr(), 4), SldlabStatus::Ok);
        assert!((re[0] + re[3] - 1.0).abs() < 1e-12);
        assert_eq!(sldlab_state_matrix(moved, re.as_mut_ptr(), im.as_mut_ptr(), 3), SldlabStatus::BufferTooSmall);

        sldlab_state_free(moved);
        sldlab_state_free(rho);
        sldlab_generator_free(h);
        sldlab_basis_free(b);
    }
}

#[test]
fn cat_has_no_classical_information() {
    unsafe {
        let mut rho = ptr::null_mut();
        let mut h = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(sldlab_state_cat(2, 1, &mut rho), SldlabStatus::Ok);
        sldlab_generator_new(SldlabGeneratorKind::NonEntangling, 2, &mut h);
        sldlab_basis_product_pm(2, &mut b);
        let mut f = SldlabFisher::default();
        assert_eq!(sldlab_fisher(rho, h, b, 100, &mut f), SldlabStatus::Ok);
        assert!(f.classical.abs() < 1e-10 && f.bound.is_infinite() && f.saturated == 0);
        sldlab_state_free(rho);
        sldlab_generator_free(h);
        sldlab_basis_free(b);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(sldlab_state_optimal_product(1, 0, &mut rho), SldlabStatus::InvalidArgument);
        assert!(last_error().contains("sign"));
        assert_eq!(sldlab_state_optimal_product(1, 1, ptr::null_mut()), SldlabStatus::NullPointer);
        assert_eq!(sldlab_state_optimal_product(11, 1, &mut rho), SldlabStatus::DimensionExceeded);
        let not_psd = [0.5, 1.0, 1.0, 0.5];
        assert_eq!(sldlab_state_from_matrix(2, not_psd.as_ptr(), ptr::null(), &mut rho), SldlabStatus::NotPhysical);
        let mut q = 0.0;
        let mut inv = [0.0; 16];
        assert_eq!(sldlab_closed_form(SldlabGeneratorKind::Entangling, 4, &mut rho, inv.as_mut_ptr(), 16, &mut q), SldlabStatus::Unsupported);
        assert_eq!(sldlab_fisher(ptr::null(), ptr::null(), ptr::null(), 1, ptr::null_mut()), SldlabStatus::NullPointer);
        assert_eq!(sldlab_state_optimal_product(1, 1, &mut rho), SldlabStatus::Ok);
        assert_eq!(last_error(), "");
        sldlab_state_free(rho);
        sldlab_state_free(ptr::null_mut());
    }
}

#[test]
fn closed_form_and_verify() {
    unsafe {
        let mut rho = ptr::null_mut();
        let mut inv = [0.0; 8];
        let mut q = 0.0;
        assert_eq!(sldlab_closed_form(SldlabGeneratorKind::NonEntangling, 3, &mut rho, inv.as_mut_ptr(), 8, &mut q), SldlabStatus::Ok);
        assert!((q - 3.0).abs() < 1e-9);
        assert_eq!(inv, [-3.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 3.0]);
        let mut n = 0;
        sldlab_state_n_qubits(rho, &mut n);
        assert_eq!(n, 3);
        sldlab_state_free(rho);

        let (mut passed, mut failed) = (0, 0);
        assert_eq!(sldlab_verify(&mut passed, &mut failed), SldlabStatus::Ok);
        assert!(passed > 0 && failed == 0);
        assert!(!CStr::from_ptr(sldlab_version()).to_bytes().is_empty());
    }
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/sldlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["sldlab_fisher", "sldlab_closed_form", "sldlab_last_error", "SLDLAB_STATUS_NOT_PHYSICAL"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // target/<profile>/deps/ffi-… → target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsldlab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}

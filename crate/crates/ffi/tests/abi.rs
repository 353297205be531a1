use std::ffi::c_char;
use std::ptr;

use gbs_ffi::*;

fn last_error() -> String {
    unsafe {
        let len = gbs_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; len + 1];
        gbs_last_error_message(buf.as_mut_ptr(), buf.len());
        let bytes: Vec<u8> = buf[..len].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }
}

struct Space(*mut GbsSpace);

impl Drop for Space {
    fn drop(&mut self) {
        unsafe { gbs_space_free(self.0) }
    }
}

fn thresholds(n: usize) -> Space {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_thresholds(n, &mut s) }, GbsStatus::Ok);
    Space(s)
}

fn dims(s: &Space) -> (usize, usize) {
    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { gbs_space_dims(s.0, &mut n, &mut m) }, GbsStatus::Ok);
    (n, m)
}

#[test]
fn matrix_round_trip_merges_columns() {
    let data: [i8; 6] = [1, 1, -1, -1, -1, 1];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_from_matrix(data.as_ptr(), 2, 3, &mut s) }, GbsStatus::Ok);
    let s = Space(s);
    assert_eq!(dims(&s), (2, 2));
    let mut v = 0i8;
    assert_eq!(unsafe { gbs_space_response(s.0, 1, 1, &mut v) }, GbsStatus::Ok);
    assert_eq!(v, 1);
    assert_eq!(unsafe { gbs_space_response(s.0, 2, 0, &mut v) }, GbsStatus::InvalidArgument);

    let zero: [i8; 2] = [0, -1];
    let mut z = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_from_matrix(zero.as_ptr(), 1, 2, &mut z) }, GbsStatus::InvalidArgument);
    assert!(last_error().contains("expected -1 or +1"));
}

#[test]
fn malformed_inputs_report_errors() {
    let dup: [i8; 4] = [1, -1, 1, -1];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_from_matrix(dup.as_ptr(), 2, 2, &mut s) }, GbsStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("identical responses"), "{}", last_error());

    assert_eq!(unsafe { gbs_space_from_matrix(ptr::null(), 2, 2, &mut s) }, GbsStatus::NullPointer);
    assert_eq!(last_error(), "data is null");
    assert_eq!(unsafe { gbs_space_dims(ptr::null(), ptr::null_mut(), ptr::null_mut()) }, GbsStatus::NullPointer);

    let normals = [3.0, 4.0];
    let offsets = [0.0];
    assert_eq!(unsafe { gbs_space_halfspaces(normals.as_ptr(), offsets.as_ptr(), 1, 2, 0.0, &mut s) }, GbsStatus::InvalidArgument);
}

#[test]
fn geometry_of_thresholds_and_disjoint_intervals() {
    let s = thresholds(32);
    let (mut c, mut worst) = (1.0, usize::MAX);
    let mut p = vec![0.0; dims(&s).1];
    assert_eq!(unsafe { gbs_coherence(s.0, 1e-9, &mut c, p.as_mut_ptr(), &mut worst) }, GbsStatus::Ok);
    assert!(c <= 1e-9);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(worst < 32);

    let mut k = 0;
    assert_eq!(unsafe { gbs_minimal_k(s.0, &mut k) }, GbsStatus::Ok);
    assert_eq!(k, 1);

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_disjoint_intervals(10, &mut d) }, GbsStatus::Ok);
    let d = Space(d);
    assert_eq!(unsafe { gbs_coherence(d.0, 1e-9, &mut c, ptr::null_mut(), ptr::null_mut()) }, GbsStatus::Ok);
    assert!((c - 0.8).abs() < 1e-9);
    let mut connected = false;
    assert_eq!(unsafe { gbs_is_k_neighborly(d.0, 1, &mut connected) }, GbsStatus::Ok);
    assert!(!connected);
    assert_eq!(unsafe { gbs_is_k_neighborly(d.0, 2, &mut connected) }, GbsStatus::Ok);
    assert!(connected);
}

#[test]
fn rate_constants() {
    let (mut lambda, mut bound) = (0.0, 0);
    assert_eq!(unsafe { gbs_rate(0.0, 1, &mut lambda) }, GbsStatus::Ok);
    assert!((lambda - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(unsafe { gbs_query_bound(32, lambda, &mut bound) }, GbsStatus::Ok);
    assert_eq!(bound, 9);
    assert_eq!(unsafe { gbs_rate(1.0, 1, &mut lambda) }, GbsStatus::Domain);
    assert!(last_error().contains("coherence"));

    let (mut eps, mut rate) = (0.0, 0.0);
    assert_eq!(unsafe { gbs_epsilon0(0.1, 0.3, &mut eps) }, GbsStatus::Ok);
    let expected = 1.0 - 0.3 * 0.9 / 0.7 - 0.1 * 0.7 / 0.3;
    assert!((eps - expected).abs() < 1e-15);
    assert_eq!(unsafe { gbs_sgbs_rate(0.0, 0.1, 0.3, &mut rate) }, GbsStatus::Ok);
    assert!((rate - expected / 4.0).abs() < 1e-15);

    let mut r = 0;
    assert_eq!(unsafe { gbs_ngbs_repetitions(6, 0.05, 0.2, &mut r) }, GbsStatus::Ok);
    assert_eq!(r % 2, 1);
    assert_eq!(unsafe { gbs_ngbs_repetitions(6, 0.05, 0.5, &mut r) }, GbsStatus::Domain);
}

#[test]
fn searches_identify_the_truth() {
    let s = thresholds(64);
    for truth in [0, 17, 63] {
        let (mut q, mut h) = (0, usize::MAX);
        assert_eq!(unsafe { gbs_run_gbs(s.0, truth, 1, truth as u64, &mut q, &mut h) }, GbsStatus::Ok);
        assert_eq!((q, h), (6, truth));
        assert_eq!(unsafe { gbs_run_ngbs(s.0, truth, 0.1, 41, 2, 0, &mut q, &mut h) }, GbsStatus::Ok);
        assert_eq!((q, h), (6 * 41, truth));
        assert_eq!(unsafe { gbs_run_sgbs(s.0, truth, 0.05, 0.2, 60, true, 3, 0, &mut h) }, GbsStatus::Ok);
        assert_eq!(h, truth);
    }
    let (mut q, mut h) = (0, 0);
    assert_eq!(unsafe { gbs_run_gbs(s.0, 64, 1, 0, &mut q, &mut h) }, GbsStatus::InvalidArgument);
    assert_eq!(unsafe { gbs_run_ngbs(s.0, 0, 0.1, 4, 2, 0, &mut q, &mut h) }, GbsStatus::InvalidArgument);
    assert_eq!(unsafe { gbs_run_sgbs(s.0, 0, 0.1, 0.6, 10, false, 3, 0, &mut h) }, GbsStatus::Domain);
}

#[test]
fn repeated_search_is_seeded() {
    let s = thresholds(64);
    let run = |seed| {
        let (mut q, mut h) = (0, 0);
        let status = unsafe { gbs_run_ngbs(s.0, 20, 0.3, 1, seed, 0, &mut q, &mut h) };
        (status, q, h)
    };
    assert_eq!(run(5), run(5));
}

#[test]
fn posterior_update_and_cn() {
    let s = thresholds(1);
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gbs_posterior_uniform(1, &mut p) }, GbsStatus::Ok);
    unsafe { gbs_posterior_free(p) };

    let data: [i8; 4] = [1, -1, -1, 1];
    let mut two = ptr::null_mut();
    assert_eq!(unsafe { gbs_space_from_matrix(data.as_ptr(), 2, 2, &mut two) }, GbsStatus::Ok);
    let two = Space(two);
    assert_eq!(unsafe { gbs_posterior_uniform(2, &mut p) }, GbsStatus::Ok);
    assert_eq!(unsafe { gbs_posterior_update(p, two.0, 0, 1, 0.25) }, GbsStatus::Ok);
    let mut probs = [0.0; 2];
    assert_eq!(unsafe { gbs_posterior_probs(p, probs.as_mut_ptr(), 2) }, GbsStatus::Ok);
    assert!((probs[0] - 0.75).abs() < 1e-15 && (probs[1] - 0.25).abs() < 1e-15);
    let mut cn = 0.0;
    assert_eq!(unsafe { gbs_posterior_cn(p, 0, &mut cn) }, GbsStatus::Ok);
    assert!((cn - 1.0 / 3.0).abs() < 1e-12);

    assert_eq!(unsafe { gbs_posterior_update(p, two.0, 0, 0, 0.25) }, GbsStatus::InvalidArgument);
    assert_eq!(unsafe { gbs_posterior_update(p, s.0, 0, 1, 0.25) }, GbsStatus::InvalidArgument);
    assert_eq!(unsafe { gbs_posterior_probs(p, probs.as_mut_ptr(), 3) }, GbsStatus::InvalidArgument);
    unsafe { gbs_posterior_free(p) };

    let weights = [1.0, 3.0];
    assert_eq!(unsafe { gbs_posterior_from_weights(weights.as_ptr(), 2, &mut p) }, GbsStatus::Ok);
    assert_eq!(unsafe { gbs_posterior_probs(p, probs.as_mut_ptr(), 2) }, GbsStatus::Ok);
    assert!((probs[1] - 0.75).abs() < 1e-15);
    unsafe { gbs_posterior_free(p) };
    unsafe { gbs_posterior_free(ptr::null_mut()) };
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/gbs.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["gbs_space_from_matrix", "gbs_run_sgbs", "gbs_posterior_update", "GBS_STATUS_EMPTY_VERSION_SPACE"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejects the header"),
            Err(_) => eprintln!("{compiler} not found; skipping"),
        }
    }
}

#[test]
fn c_program_links_against_static_library() {
    // The static library sits next to the directory holding this test binary.
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = target.join("libgbs_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let compiled = std::process::Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status();
    match compiled {
        Ok(s) => assert!(s.success(), "C smoke program failed to build"),
        Err(_) => {
            eprintln!("cc not found; skipping");
            return;
        }
    }
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "64 65 1 6 40 1\n");
}

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lipuncert_ffi::*;

fn last_error() -> String {
    let p = lu_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    lu_string_free(p);
    s
}

#[test]
fn norms_and_duals() {
    let re = [3.0, 0.0];
    let im = [0.0, 4.0];
    let mut out = 0.0;
    unsafe {
        assert_eq!(lu_norm(re.as_ptr(), im.as_ptr(), 2, 2.0, &mut out), LuStatus::Ok);
        assert_eq!(out, 5.0);
        assert_eq!(lu_norm(re.as_ptr(), im.as_ptr(), 2, 1.0, &mut out), LuStatus::Ok);
        assert_eq!(out, 7.0);
        assert_eq!(lu_norm(re.as_ptr(), ptr::null(), 2, f64::INFINITY, &mut out), LuStatus::Ok);
        assert_eq!(out, 3.0);
        // on l_1 the dual is the max norm
        assert_eq!(lu_dual_norm(re.as_ptr(), im.as_ptr(), 2, 1.0, &mut out), LuStatus::Ok);
        assert_eq!(out, 4.0);
        assert!(lu_last_error().is_null());

        assert_eq!(lu_norm(re.as_ptr(), im.as_ptr(), 2, 0.5, &mut out), LuStatus::InvalidArgument);
        assert!(last_error().contains("exponent"));
        assert_eq!(lu_norm(ptr::null(), ptr::null(), 2, 2.0, &mut out), LuStatus::NullPointer);
        assert_eq!(lu_norm(re.as_ptr(), im.as_ptr(), 2, 2.0, ptr::null_mut()), LuStatus::NullPointer);
    }
}

#[test]
fn hilbert_quantities_on_pauli_x() {
    let sx = [0.0, 1.0, 1.0, 0.0];
    let e1 = [1.0, 0.0];
    let (mut d, mut n) = (0.0, 0.0);
    unsafe {
        assert_eq!(lu_delta_hilbert(sx.as_ptr(), ptr::null(), e1.as_ptr(), ptr::null(), 2, &mut d), LuStatus::Ok);
        assert_eq!(d, 1.0);
        assert_eq!(lu_hilbert_reduction(sx.as_ptr(), ptr::null(), e1.as_ptr(), ptr::null(), 2, &mut n, &mut d), LuStatus::Ok);
        assert!((n - 1.0).abs() < 1e-12 && d == 1.0);

        let shear = [1.0, 1.0, 0.0, 1.0];
        assert_eq!(lu_delta_hilbert(shear.as_ptr(), ptr::null(), e1.as_ptr(), ptr::null(), 2, &mut d), LuStatus::DomainError);
        assert!(last_error().contains("Hermitian"));
        let two = [2.0, 0.0];
        assert_eq!(lu_delta_hilbert(sx.as_ptr(), ptr::null(), two.as_ptr(), ptr::null(), 2, &mut d), LuStatus::DomainError);
    }
}

#[test]
fn instance_lifecycle_and_chain() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(lu_instance_generate(LuMode::BanachLinear as u32, 3, 1.5, 16, 42, &mut inst), LuStatus::Ok);
        assert_eq!(lu_instance_dim(inst), 3);

        let mut summary = LuChainSummary::default();
        assert_eq!(lu_chain_nhrs(inst, 0, 0, &mut summary), LuStatus::Ok);
        assert_eq!(summary.nabla_exact, 1);
        assert_eq!(summary.status, LuChainStatus::Passed as u32);
        assert!(summary.product >= summary.final_bound - 1e-10);
        assert_eq!(summary.product, summary.nabla * summary.delta);

        let mut json = ptr::null_mut();
        assert_eq!(lu_instance_to_json(inst, &mut json), LuStatus::Ok);
        let text = take_string(json);
        let c = CString::new(text.clone()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(lu_instance_from_json(c.as_ptr(), &mut back), LuStatus::Ok);
        let mut again = LuChainSummary::default();
        assert_eq!(lu_chain_nhrs(back, 0, 0, &mut again), LuStatus::Ok);
        assert_eq!(summary, again);
        lu_instance_free(back);
        lu_instance_free(inst);
        lu_instance_free(ptr::null_mut());

        let mut nl = ptr::null_mut();
        assert_eq!(lu_instance_generate(LuMode::BanachNonlinear as u32, 3, 2.0, 16, 1, &mut nl), LuStatus::Ok);
        match lu_chain_nhrs(nl, 100, 3, &mut summary) {
            LuStatus::Ok => {
                assert_eq!(summary.nabla_exact, 0);
                assert!(summary.product >= summary.middle_form - 1e-10);
            }
            LuStatus::DomainError => assert!(last_error().contains("domain")),
            other => panic!("unexpected {other:?}"),
        }
        lu_instance_free(nl);
    }
}

#[test]
fn instance_errors() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(lu_instance_generate(7, 3, 2.0, 16, 0, &mut inst), LuStatus::InvalidArgument);
        assert!(inst.is_null());
        assert_eq!(lu_instance_generate(0, 1, 2.0, 16, 0, &mut inst), LuStatus::InvalidArgument);
        let bad = CString::new("{not json").unwrap();
        assert_eq!(lu_instance_from_json(bad.as_ptr(), &mut inst), LuStatus::ParseError);
        assert_eq!(lu_instance_from_json(ptr::null(), &mut inst), LuStatus::NullPointer);
        let mut summary = LuChainSummary::default();
        assert_eq!(lu_chain_nhrs(ptr::null(), 0, 0, &mut summary), LuStatus::NullPointer);
        assert_eq!(lu_instance_dim(ptr::null()), 0);
    }
}

#[test]
fn campaign_handles() {
    unsafe {
        let mut seq = ptr::null_mut();
        let mut par = ptr::null_mut();
        assert_eq!(lu_campaign_run(LuMode::Hilbert as u32, 25, 9, 3, 2.0, 100, 1, &mut seq), LuStatus::Ok);
        assert_eq!(lu_campaign_run(LuMode::Hilbert as u32, 25, 9, 3, 2.0, 100, 3, &mut par), LuStatus::Ok);
        let mut counts = LuCounts::default();
        assert_eq!(lu_report_counts(seq, &mut counts), LuStatus::Ok);
        assert_eq!(counts, LuCounts { passed: 25, ..LuCounts::default() });

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(lu_report_to_jsonl(seq, &mut a), LuStatus::Ok);
        assert_eq!(lu_report_to_jsonl(par, &mut b), LuStatus::Ok);
        let (a, b) = (take_string(a), take_string(b));
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 26);
        lu_report_free(seq);
        lu_report_free(par);

        let mut r = ptr::null_mut();
        assert_eq!(lu_campaign_run(LuMode::BanachLinear as u32, 3, 0, 1, 2.0, 0, 1, &mut r), LuStatus::InvalidArgument);
        assert!(r.is_null());
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("lipuncert.h")
}

#[test]
fn header_declares_every_entry_point() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "lu_last_error",
        "lu_string_free",
        "lu_norm",
        "lu_dual_norm",
        "lu_delta_hilbert",
        "lu_hilbert_reduction",
        "lu_instance_generate",
        "lu_instance_from_json",
        "lu_instance_to_json",
        "lu_instance_dim",
        "lu_instance_free",
        "lu_chain_nhrs",
        "lu_campaign_run",
        "lu_report_counts",
        "lu_report_to_jsonl",
        "lu_report_free",
        "typedef struct LuInstance LuInstance",
        "LU_STATUS_DOMAIN_ERROR = 5",
        "LU_MODE_BANACH_NONLINEAR = 2",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "lipuncert.h"

int main(void) {
    double re[2] = {3.0, 0.0}, im[2] = {0.0, 4.0}, out = 0.0;
    if (lu_norm(re, im, 2, 2.0, &out) != LU_STATUS_OK || out != 5.0) return 1;
    if (lu_norm(re, im, 2, 0.5, &out) != LU_STATUS_INVALID_ARGUMENT || lu_last_error() == NULL) return 2;

    LuInstance *inst = NULL;
    if (lu_instance_generate(LU_MODE_HILBERT, 2, 2.0, 8, 5, &inst) != LU_STATUS_OK) return 3;
    LuChainSummary s;
    if (lu_chain_nhrs(inst, 0, 0, &s) != LU_STATUS_OK || s.status != LU_CHAIN_STATUS_PASSED) return 4;
    char *json = NULL;
    if (lu_instance_to_json(inst, &json) != LU_STATUS_OK) return 5;
    lu_string_free(json);
    lu_instance_free(inst);

    LuReport *report = NULL;
    LuCounts counts;
    if (lu_campaign_run(LU_MODE_BANACH_LINEAR, 10, 1, 3, INFINITY, 0, 1, &report) != LU_STATUS_OK) return 6;
    if (lu_report_counts(report, &counts) != LU_STATUS_OK || counts.passed != 10) return 7;
    lu_report_free(report);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles a C program against the generated header and the static library.
/// Skipped when no C compiler or static archive is available.
#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let archive = profile_dir.join("liblipuncert_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !archive.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} missing", archive.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let build = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8(run.stdout).unwrap(), "ok\n");
}

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pcfi_ffi::*;

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples")
}

fn load(name: &str) -> CString {
    CString::new(std::fs::read_to_string(examples().join(name)).unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pcfi_last_error()) }.to_string_lossy().into_owned()
}

fn density(name: &str) -> *mut PcfiDensity {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pcfi_density_from_json(load(name).as_ptr(), &mut p) }, PcfiStatus::Ok);
    p
}

fn channel(name: &str) -> *mut PcfiChannel {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pcfi_channel_from_json(load(name).as_ptr(), &mut p) }, PcfiStatus::Ok);
    p
}

#[test]
fn fisher_and_bounds_through_handles() {
    let rho = density("rho3.json");
    let ch = channel("example1_channel.json");
    let (mut fi, mut qfi, mut ub, mut ub1) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(pcfi_classical_fi(ch, rho, 0.0, &mut fi), PcfiStatus::Ok);
        assert_eq!(pcfi_qfi_family(ch, rho, 0.0, &mut qfi), PcfiStatus::Ok);
        assert_eq!(pcfi_unitary_bound(rho, 0, &mut ub), PcfiStatus::Ok);
        assert_eq!(pcfi_unitary_bound(rho, 1, &mut ub1), PcfiStatus::Ok);
        pcfi_channel_free(ch);
        pcfi_density_free(rho);
    }
    assert!((fi - 0.940988).abs() < 1e-6);
    // every element targets level 1, so the non-post-selected output is static
    assert!(qfi.abs() < 1e-12);
    assert!((ub - 8.0 / 9.0).abs() < 1e-12);
    assert!((ub1 - 8.0 / 9.0).abs() < 1e-12);
    assert_eq!(last_error(), "");
}

#[test]
fn coherence_returns_json_certificate() {
    let rho = density("two_qubit_quarter.json");
    let mut value = 0.0;
    let mut json = ptr::null_mut();
    let status = unsafe { pcfi_coherence(rho, PCFI_MODE_AUTO, 0, &mut value, &mut json) };
    assert_eq!(status, PcfiStatus::Ok);
    assert!((value - 0.25).abs() < 1e-9);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["mode"], "exact_two_qubit");
    assert!(v["certificate"]["elements"].is_array());
    unsafe {
        pcfi_string_free(json);
        assert_eq!(pcfi_coherence(rho, 99, 0, &mut value, ptr::null_mut()), PcfiStatus::Validation);
        pcfi_density_free(rho);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    let mut ch = ptr::null_mut();
    let status = unsafe { pcfi_channel_from_json(load("broken_channel.json").as_ptr(), &mut ch) };
    assert_eq!(status, PcfiStatus::Validation);
    assert!(ch.is_null());
    assert!(last_error().starts_with("completeness"));

    let bad = CString::new("{not json").unwrap();
    let mut rho = ptr::null_mut();
    assert_eq!(unsafe { pcfi_density_from_json(bad.as_ptr(), &mut rho) }, PcfiStatus::Parse);

    let mut out = 0.0;
    assert_eq!(
        unsafe { pcfi_classical_fi(ptr::null(), ptr::null(), 0.0, &mut out) },
        PcfiStatus::NullPointer
    );

    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { pcfi_helstrom(invalid.as_ptr().cast(), &mut out) },
        PcfiStatus::InvalidUtf8
    );
}

#[test]
fn helstrom_and_version() {
    let mut p = 0.0;
    assert_eq!(unsafe { pcfi_helstrom(load("orthogonal_pair.json").as_ptr(), &mut p) }, PcfiStatus::Ok);
    assert!((p - 1.0).abs() < 1e-12);
    let v = unsafe { CStr::from_ptr(pcfi_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_matches_exports() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pcfi.h")).unwrap();
    for name in [
        "pcfi_density_from_json",
        "pcfi_density_free",
        "pcfi_channel_from_json",
        "pcfi_channel_free",
        "pcfi_classical_fi",
        "pcfi_qfi_family",
        "pcfi_unitary_bound",
        "pcfi_coherence",
        "pcfi_helstrom",
        "pcfi_last_error",
        "pcfi_string_free",
        "pcfi_version",
        "PCFI_STATUS_DOMAIN",
        "PCFI_MODE_SEARCH",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles and runs a C program against the header and the static library.
/// Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libpcfi_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}, skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "pcfi.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc(n + 1);
    fread(buf, 1, n, f);
    buf[n] = 0;
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    char *state_text = slurp(argv[1]);
    char *chan_text = slurp(argv[2]);
    PcfiDensity *rho = NULL;
    PcfiChannel *ch = NULL;
    if (pcfi_density_from_json(state_text, &rho) != PCFI_STATUS_OK) return 10;
    if (pcfi_channel_from_json(chan_text, &ch) != PCFI_STATUS_OK) return 11;
    double fi = 0.0;
    if (pcfi_classical_fi(ch, rho, 0.0, &fi) != PCFI_STATUS_OK) return 12;
    if (pcfi_classical_fi(NULL, rho, 0.0, &fi) != PCFI_STATUS_NULL_POINTER) return 13;
    if (strlen(pcfi_last_error()) == 0) return 14;
    printf("%.6f\n", fi);
    pcfi_channel_free(ch);
    pcfi_density_free(rho);
    free(state_text);
    free(chan_text);
    return 0;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe)
        .arg(examples().join("rho1.json"))
        .arg(examples().join("example1_channel.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "C program exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.839180");
}

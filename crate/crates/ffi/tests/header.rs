//! Checks the generated header from a C compiler's point of view.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "f2b.h"

int main(void) {
    double bmi = 0.0;
    if (f2b_compute_bmi(97.52, 1.78, &bmi) != F2B_STATUS_OK) return 1;
    if (bmi < 30.7789 || bmi > 30.7790) return 2;
    F2bBmiCategory cat;
    if (f2b_categorize(26.0, &cat) != F2B_STATUS_OK || cat != F2B_BMI_CATEGORY_OVERWEIGHT) return 3;
    if (f2b_compute_bmi(80.0, 0.0, &bmi) != F2B_STATUS_DOMAIN) return 4;
    if (f2b_last_error_message() == NULL) return 5;
    F2bDataset *ds = NULL;
    if (f2b_dataset_load("/nonexistent.csv", "/nonexistent.f2be", true, &ds) != F2B_STATUS_IO || ds != NULL) return 6;
    printf("ok %s\n", f2b_version());
    return 0;
}
"#;

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| cc)
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(include_dir().join("f2b.h")).unwrap();
    for name in [
        "f2b_last_error_message",
        "f2b_compute_bmi",
        "f2b_categorize",
        "f2b_binomial_test",
        "f2b_pearson",
        "f2b_dataset_load",
        "f2b_dataset_free",
        "f2b_model_train",
        "f2b_model_predict",
        "f2b_model_predict_raw",
        "f2b_model_save",
        "f2b_model_load",
        "f2b_model_free",
        "typedef struct F2bDataset F2bDataset",
        "typedef struct F2bModel F2bModel",
        "F2B_STATUS_CONVERGENCE = 8",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_compiles_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include_dir())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile cleanly");

    // link against the static library if cargo built it next to the test binary
    let exe = std::env::current_exe().unwrap();
    let archive = exe
        .parent()
        .and_then(Path::parent)
        .map(|d| d.join("libf2b_ffi.a"));
    let Some(archive) = archive.filter(|a| a.exists()) else {
        eprintln!("libf2b_ffi.a not found; link step skipped");
        return;
    };
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .arg("-I")
        .arg(include_dir())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

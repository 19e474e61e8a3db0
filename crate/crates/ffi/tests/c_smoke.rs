//! Compiles and runs a small C program against the generated header and the
//! static library, exercising the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "mixmeas.h"

int main(void) {
    MixmeasPrior *prior = NULL;
    if (mixmeas_prior_parse("pure", &prior) != MIXMEAS_STATUS_OK) return 1;

    double value = 0.0;
    if (mixmeas_fbar_closed(prior, 2, 0, &value) != MIXMEAS_STATUS_OK) return 2;
    if (fabs(value - 0.75) > 1e-12) return 3;

    MixmeasPovm *povm = NULL;
    if (mixmeas_povm_build(prior, 3, 0, &povm) != MIXMEAS_STATUS_OK) return 4;
    if (mixmeas_povm_element_count(povm) != 8) return 5;

    double residual = 1.0;
    if (mixmeas_povm_identity_residual(povm, &residual) != MIXMEAS_STATUS_OK) return 6;
    if (residual > 1e-9) return 7;

    if (mixmeas_fbar_closed(NULL, 1, 0, &value) != MIXMEAS_STATUS_NULL_POINTER) return 8;
    if (mixmeas_fbar_closed(prior, 99, 0, &value) != MIXMEAS_STATUS_INVALID_ARGUMENT) return 9;
    printf("last error: %s\n", mixmeas_last_error_message());

    mixmeas_povm_free(povm);
    mixmeas_prior_free(prior);
    printf("c smoke ok, version %s\n", mixmeas_version());
    return 0;
}
"#;

fn target_profile_dir() -> PathBuf {
    // test binaries live in target/<profile>/deps
    let exe = std::env::current_exe().expect("test binary path");
    exe.parent()
        .and_then(|deps| deps.parent())
        .expect("profile dir")
        .to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = target_profile_dir();

    // the staticlib is not a test-harness dependency, so build it explicitly,
    // in the same profile this test runs under
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut args = vec!["build", "-p", "mixmeas-ffi"];
    if profile_dir.file_name().is_some_and(|n| n == "release") {
        args.push("--release");
    }
    let status = Command::new(cargo)
        .args(&args)
        .current_dir(&manifest)
        .status()
        .expect("cargo runs");
    assert!(status.success(), "staticlib build failed");
    let staticlib = profile_dir.join("libmixmeas_ffi.a");
    assert!(staticlib.exists(), "missing {}", staticlib.display());

    let scratch = std::env::temp_dir().join(format!("mixmeas_c_smoke_{}", std::process::id()));
    std::fs::create_dir_all(&scratch).unwrap();
    let source = scratch.join("smoke.c");
    let binary = scratch.join("smoke");
    std::fs::write(&source, C_PROGRAM).unwrap();

    let compile = Command::new("cc")
        .arg(&source)
        .arg(&staticlib)
        .arg(format!("-I{}", manifest.join("include").display()))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&binary)
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary).output().expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c smoke ok"));
    std::fs::remove_dir_all(&scratch).ok();
}

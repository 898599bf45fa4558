//! Compiles and runs a C program against `include/semilab.h` and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "semilab.h"

int main(void) {
    double v = 0.0;
    if (semilab_poisson_delta_log(2.0, 9, &v) != SEMILAB_STATUS_OK) return 1;
    if (fabs(v - log(0.9)) > 1e-13) return 2;
    if (semilab_alpha_integral(0.0, 1.0, &v) != SEMILAB_STATUS_DOMAIN) return 3;
    if (semilab_last_error_message() == NULL) return 4;
    SemilabMmKernel *k = NULL;
    if (semilab_mm_kernel_new(1.0, 1.0, 8, 64, &k) != SEMILAB_STATUS_OK) return 5;
    double f[3] = {1.0, 2.0, 0.5};
    double out[9];
    if (semilab_mm_kernel_ln_apply(k, f, 3, out, 9) != SEMILAB_STATUS_OK) return 6;
    semilab_mm_kernel_free(k);
    SemilabResult *r = NULL;
    const char *cfg = "{\"experiment_id\": \"poisson-optimality\"}";
    if (semilab_experiment_run(cfg, &r) != SEMILAB_STATUS_OK) return 7;
    SemilabVerdict verdict;
    semilab_result_verdict(r, &verdict);
    semilab_result_free(r);
    printf("%s %d\n", semilab_version(), (int)verdict);
    return verdict == SEMILAB_VERDICT_PASS ? 0 : 8;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_header-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libsemilab_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("cc not found");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}

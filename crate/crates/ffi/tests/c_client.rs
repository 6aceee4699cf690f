//! Compiles a small C program against the generated header and the static
//! library. Skipped when no C compiler is on the PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "thermobound.h"

int main(void) {
    double w = 0.0;
    if (tb_w(0.0, &w) != TB_STATUS_OK || w != 1.0) return 1;
    if (tb_g(-1.0, &w) != TB_STATUS_DOMAIN || tb_last_error_message() == NULL) return 2;
    TbModel *model = NULL;
    if (tb_model_harmonic(1.0, 1.0, 200, NULL, &model) != TB_STATUS_OK) return 3;
    TbThermalReport r;
    if (tb_evaluate(model, 1.0, &r) != TB_STATUS_OK) return 4;
    if (fabs(r.saturation_product - 1.0) > 1e-9 || !r.holds_momentum) return 5;
    tb_model_free(model);
    printf("%s %.17g\n", tb_version(), r.product_lhs);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
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
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let lib = target_dir().join("libthermobound_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::TempDir::new().unwrap();
    let source = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&source, PROGRAM).unwrap();
    let build = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")));
    let product: f64 = stdout.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((product - 1.0819767068693265).abs() <= 1e-12);
}

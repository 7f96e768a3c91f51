//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "w2clt.h"

int main(void) {
    double xs[] = {1.0, -1.0};
    double ws[] = {0.5, 0.5};
    W2cltDist *d = NULL;
    if (w2clt_dist_new(xs, ws, 2, &d) != W2CLT_STATUS_OK) return 10;
    W2cltReport r;
    if (w2clt_w2_to_gaussian(d, &r) != W2CLT_STATUS_OK) return 11;
    if (fabs(r.distance - 0.635791) > 1e-6) return 12;
    W2cltDist *q = NULL;
    if (w2clt_dist_quantize(d, 0, &q) != W2CLT_STATUS_DOMAIN) return 13;
    if (w2clt_last_error() == NULL) return 14;
    char *csv = NULL;
    if (w2clt_rg_trace_csv(d, 2, 65536, &csv) != W2CLT_STATUS_OK) return 15;
    printf("%s", csv);
    w2clt_string_free(csv);
    w2clt_dist_free(d);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_program-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libw2clt_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!(
            "skipping: no C compiler or no static library at {}",
            lib.display()
        );
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("k,support_size,w2,mean,variance,fourth_moment,quant_error"));
}

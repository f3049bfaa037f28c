use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include "replicability.h"

int run(const char *path) {
    ReplDataset *ds = NULL;
    ReplReport *r = NULL;
    ReplSelection sel = { REPL_SELECTION_KIND_FOLLOWED, 0.0, 0 };
    ReplStatus s = repl_dataset_from_csv(path, &ds);
    if (s != REPL_STATUS_OK) return (int)s;
    s = repl_fdr_two_stage(ds, sel, 0.025, 0.05, REPL_DEPENDENCE_INDEPENDENT, 0.0, &r);
    if (s == REPL_STATUS_OK) {
        ReplScore score;
        size_t n = repl_report_r2(r);
        (void)repl_report_score(r, 0, &score);
        (void)repl_report_rejected_id(r, n);
        repl_report_free(r);
    } else {
        (void)repl_last_error_message();
    }
    repl_dataset_free(ds);
    return (int)s;
}
"#;

#[test]
fn header_compiles_as_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = match Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("skipping: no C compiler ({cc}: {e})");
            return;
        }
    };
    assert!(status.success());
}

// Compiles a small C program against the generated header and the static library.
use std::path::PathBuf;
use std::process::Command;

const SOURCE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "ibstokes.h"

int main(void) {
    IbsSolution *sol = NULL;
    IbsErrors err;
    char msg[128];
    if (strlen(ibs_version()) == 0) return 10;
    if (ibs_solve_example(IBS_METHOD_MAC, IBS_KERNEL_COSINE, 16, 1e-11, &sol) != IBS_STATUS_OK) return 11;
    if (ibs_solution_errors(sol, &err) != IBS_STATUS_OK) return 12;
    ibs_solution_free(sol);
    if (ibs_kernel_eval(99, 0.0, 1.0, NULL) != IBS_STATUS_NULL_POINTER) return 13;
    if (ibs_last_error_message(msg, sizeof msg) == 0) return 14;
    printf("%.6e\n", err.err_u_inf);
    return err.err_u_inf > 0.0 ? 0 : 15;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("ibstokes.h").exists(), "header was not generated");
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libibstokes_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "ibstokes-ffi", "--lib"])
            .arg(if profile_dir.ends_with("release") { "--release" } else { "-q" })
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(lib.exists(), "missing {}", lib.display());
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("smoke.c");
    let exe = dir.join("smoke");
    std::fs::write(&src, SOURCE).unwrap();
    let out = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

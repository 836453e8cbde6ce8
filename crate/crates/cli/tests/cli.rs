//! Exit-code and surface behaviour of the command-line tool.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squier"))
}

fn tmp(name: &str, content: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().unwrap_or(-1)
}

#[test]
fn missing_file_is_input_error() {
    assert_eq!(
        exit_code(bin().arg("enumerate").arg("no-such-file.sgp")),
        3
    );
}

#[test]
fn malformed_presentation_is_input_error() {
    let bad = tmp("bad.sgp", "alphabet: a\nrule: = a\n");
    assert_eq!(exit_code(bin().arg("enumerate").arg(bad)), 3);
}

#[test]
fn limit_exhaustion_is_inconclusive() {
    assert_eq!(
        exit_code(
            bin()
                .arg("enumerate")
                .arg(fixture("fix2.sgp"))
                .arg("--limit")
                .arg("3")
        ),
        2
    );
}

#[test]
fn unknown_subgroup_letter_is_input_error() {
    assert_eq!(
        exit_code(
            bin()
                .arg("cosets")
                .arg(fixture("fix2.sgp"))
                .arg("--subgroup")
                .arg("q q")
        ),
        3
    );
}

#[test]
fn non_subgroup_is_input_error() {
    // {a, a^2} is not closed.
    assert_eq!(
        exit_code(
            bin()
                .arg("cosets")
                .arg(fixture("fix2.sgp"))
                .arg("--subgroup")
                .arg("a; a a")
        ),
        3
    );
}

#[test]
fn verify_base_failure_is_verification_error() {
    // A PAIR whose sides are not parallel.
    let base = tmp("bad.hb", "PAIR (_|r0|+1|_) ~ 1_a a a a a\n");
    assert_eq!(
        exit_code(
            bin()
                .arg("verify-base")
                .arg(base)
                .arg(fixture("fix2.sgp"))
        ),
        1
    );
}

#[test]
fn homotopy_check_certifies_free_cancellation() {
    let base = tmp("empty.hb", "");
    let code = exit_code(
        bin()
            .arg("homotopy-check")
            .arg(fixture("fix2.sgp"))
            .arg(&base)
            .arg("--left")
            .arg("(_|r0|+1|_);(_|r0|-1|_)")
            .arg("--right")
            .arg("1_a a a a a"),
    );
    assert_eq!(code, 0);
}

#[test]
fn homotopy_check_budget_exhaustion_is_inconclusive() {
    let base = tmp("empty2.hb", "");
    let code = exit_code(
        bin()
            .arg("homotopy-check")
            .arg(fixture("fix2.sgp"))
            .arg(&base)
            .arg("--left")
            .arg("(_|r0|+1|_);(_|r0|-1|_)")
            .arg("--right")
            .arg("1_a a a a a")
            .arg("--move-budget")
            .arg("0"),
    );
    assert_eq!(code, 2);
}

#[test]
fn homotopy_check_rejects_non_parallel() {
    let base = tmp("empty3.hb", "");
    let code = exit_code(
        bin()
            .arg("homotopy-check")
            .arg(fixture("fix2.sgp"))
            .arg(&base)
            .arg("--left")
            .arg("(_|r0|+1|_)")
            .arg("--right")
            .arg("1_a a a a a"),
    );
    assert_eq!(code, 1);
}

#[test]
fn malformed_rees_is_input_error() {
    let bad = tmp("bad.rees", "group: nowhere.sgp\nI: 1\nL: 1\nP:\na\nzero: true\n");
    assert_eq!(exit_code(bin().arg("extension-present").arg(bad)), 3);
}

#[test]
fn subgroup_base_files_verify() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-kw");
    std::fs::create_dir_all(&dir).unwrap();
    let base = dir.join("kw.hb");
    let pres = dir.join("kw.sgp");
    assert_eq!(
        exit_code(
            bin()
                .arg("subgroup-base")
                .arg(fixture("fix2.sgp"))
                .arg("--subgroup")
                .arg("a a; a a a a")
                .arg("-o")
                .arg(&base)
                .arg("--pres-out")
                .arg(&pres)
        ),
        0
    );
    assert_eq!(exit_code(bin().arg("verify-base").arg(&base).arg(&pres)), 0);
}

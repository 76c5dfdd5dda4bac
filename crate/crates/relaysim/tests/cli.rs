//! End-to-end tests that drive the `relaysim` binary the way a user
//! would: real argument vectors, real stdout/stderr, real exit codes.
//!
//! The expected strings below are frozen fixtures.  The recovery-trace
//! tables in particular pin down the relay behaviour symbol by symbol;
//! if a change to the library shifts any header or placement, these
//! tests are supposed to break.

use std::fs;
use std::process::{Command, Output};

// ============================================================
// Harness helpers
// ============================================================

/// Runs the compiled binary with `args` and returns the raw output.
fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaysim"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

/// Asserts that `haystack` contains a line equal to `line` (after
/// trailing-whitespace trimming on both sides).
fn assert_has_line(haystack: &str, line: &str) {
    assert!(
        haystack.lines().any(|l| l.trim_end() == line.trim_end()),
        "missing line {line:?} in output:\n{haystack}"
    );
}

// ============================================================
// capacity
// ============================================================

#[test]
fn capacity_reports_rates_and_the_chain_code() {
    let out = run(&["capacity", "-L", "2", "-T", "9", "-N", "2,2,2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(
        &text,
        "network: relays=2, delay T=9, link budgets [2, 2, 2]",
    );
    assert_has_line(
        &text,
        "link capacity C(T, N_j): link 1: 4/5, link 2: 4/5, link 3: 4/5",
    );
    assert_has_line(&text, "chain rate upper bound: 2/3");
    assert_has_line(
        &text,
        "chain code: k=4, widest block 6, per-link (n, k, delay): (6, 4, 5), (6, 4, 5), (6, 4, 5)",
    );
    assert_has_line(&text, "rate with 3-bit headers over GF(2^8): 16/33");
    assert_has_line(&text, "mdf rate: 1/2, per-hop delay split [3, 3, 3]");
    assert_has_line(&text, "if rate: 2/5, end-to-end budget 6");
}

#[test]
fn capacity_handles_zero_rate_networks_gracefully() {
    let out = run(&["capacity", "-T", "3", "-N", "2,2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(&text, "chain rate upper bound: 0");
    assert_has_line(&text, "chain code: none (zero rate at this delay)");
    assert_has_line(&text, "mdf rate: 0");
    assert_has_line(&text, "if rate: 0, end-to-end budget 4");
}

#[test]
fn capacity_without_budgets_is_a_usage_error() {
    let out = run(&["capacity", "-T", "3"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("missing link budgets"));
}

#[test]
fn relay_count_must_match_the_budget_list() {
    let out = run(&["capacity", "-L", "3", "-T", "9", "-N", "2,2,2"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("relays"));
}

// ============================================================
// verify
// ============================================================

#[test]
fn verify_exhaustive_passes_and_reports_the_pattern_count() {
    let out = run(&["verify", "-T", "3", "-N", "1,1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(
        &text,
        "verify scheme=sdf relays=1 T=3 N=[1, 1] mode=exhaustive",
    );
    assert_has_line(&text, "patterns: 100, frames per pattern: 6");
    assert_has_line(&text, "PASS (0 failures)");
}

#[test]
fn verify_covers_every_scheme_in_one_invocation() {
    let out = run(&["verify", "--scheme", "sdf,mdf,if", "-T", "3", "-N", "1,1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    for scheme in ["sdf", "mdf", "if"] {
        assert_has_line(
            &text,
            &format!("verify scheme={scheme} relays=1 T=3 N=[1, 1] mode=exhaustive"),
        );
    }
    assert_eq!(text.matches("PASS (0 failures)").count(), 3);
}

#[test]
fn verify_sliding_samples_admissible_patterns() {
    let out = run(&[
        "verify",
        "--sliding",
        "--samples",
        "400",
        "--seed",
        "11",
        "-T",
        "4",
        "-N",
        "2,1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(
        &text,
        "verify scheme=sdf relays=1 T=4 N=[2, 1] mode=sliding window 5",
    );
    assert!(text.contains("patterns: 400, frames per pattern: 7, sampler redraws: "));
    assert_has_line(&text, "PASS (0 failures)");
}

#[test]
fn verify_rejects_enumerations_beyond_the_guard() {
    let out = run(&["verify", "-T", "12", "-N", "3,3"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("enumeration guard"));
    assert!(
        err.contains("--sliding"),
        "should point at the sampling escape hatch"
    );
}

// ============================================================
// simulate
// ============================================================

#[test]
fn simulate_emits_one_csv_row_per_scheme_and_alpha() {
    let out = run(&[
        "simulate",
        "--scheme",
        "sdf,if",
        "-T",
        "3",
        "-N",
        "1,1",
        "--alpha",
        "0.02,0.05",
        "--frames",
        "20000",
        "--seed",
        "5",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "header plus four rows:\n{text}");
    assert_eq!(
        lines[0],
        "scheme,L,T,budgets,alpha,frames,losses,loss_ratio,ci95,bound,seed"
    );
    assert!(lines[1].starts_with("sdf,1,3,1|1,0.02,20000,"));
    assert!(lines[2].starts_with("sdf,1,3,1|1,0.05,20000,"));
    assert!(lines[3].starts_with("if,1,3,1|1,0.02,20000,"));
    assert!(lines[4].starts_with("if,1,3,1|1,0.05,20000,"));
    // Only the sdf rows carry an analytical bound column.
    assert!(!lines[1].ends_with(",5") || lines[1].split(',').nth(9).unwrap() != "");
    assert_eq!(lines[3].split(',').nth(9).unwrap(), "");
}

#[test]
fn simulate_is_deterministic_for_a_fixed_seed() {
    let args = [
        "simulate", "--scheme", "sdf", "-T", "3", "-N", "1,1", "--alpha", "0.03", "--frames",
        "30000", "--seed", "97",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(
        first.stdout, second.stdout,
        "same seed must give identical CSV"
    );

    let moved = run(&[
        "simulate", "--scheme", "sdf", "-T", "3", "-N", "1,1", "--alpha", "0.03", "--frames",
        "30000", "--seed", "98",
    ]);
    assert_ne!(
        first.stdout, moved.stdout,
        "a different seed should move the estimate"
    );
}

#[test]
fn simulate_writes_the_csv_to_a_file_when_asked() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "simulate",
        "--scheme",
        "if",
        "-T",
        "3",
        "-N",
        "1,1",
        "--alpha",
        "0.02",
        "--frames",
        "5000",
        "--seed",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(
        stdout_of(&out).is_empty(),
        "rows go to the file, not stdout"
    );
    let written = fs::read_to_string(&path).expect("output file");
    assert!(written.starts_with("scheme,L,T,budgets,alpha,frames,losses,"));
    assert_eq!(written.lines().count(), 2);
}

#[test]
fn simulate_bound_only_prints_the_analytical_row() {
    let out = run(&[
        "simulate",
        "--scheme",
        "sdf",
        "-L",
        "2",
        "-T",
        "9",
        "-N",
        "2,2,2",
        "--alpha",
        "0.01",
        "--bound-only",
        "--seed",
        "17",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(&text, "sdf,2,9,2|2|2,0.01,0,0,,,0.0007959158841516522,17");
}

#[test]
fn simulate_bound_only_is_refused_for_schemes_without_a_bound() {
    let out = run(&[
        "simulate",
        "--scheme",
        "mdf",
        "-T",
        "3",
        "-N",
        "1,1",
        "--alpha",
        "0.01",
        "--bound-only",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("bound"));
}

#[test]
fn simulate_rejects_probabilities_outside_the_unit_interval() {
    let out = run(&[
        "simulate", "--scheme", "sdf", "-T", "3", "-N", "1,1", "--alpha", "1.5", "--frames", "100",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("probability"));
}

#[test]
fn unknown_schemes_are_usage_errors() {
    let out = run(&[
        "simulate", "--scheme", "bogus", "-T", "3", "-N", "1,1", "--alpha", "0.01",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("bogus"));
}

// ============================================================
// config files
// ============================================================

#[test]
fn config_files_supply_defaults_and_flags_override_them() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("net.cfg");
    fs::write(
        &path,
        "# three-hop demo network\n\
         l = 2\n\
         t = 9\n\
         n = 2,2,2\n\
         scheme = sdf\n\
         alpha = 0.02\n\
         frames = 20000\n\
         seed = 41\n",
    )
    .expect("write config");
    let cfg = path.to_str().unwrap();

    let from_file = run(&["simulate", "--config", cfg]);
    assert_eq!(
        exit_code(&from_file),
        0,
        "stderr: {}",
        stderr_of(&from_file)
    );
    let from_flags = run(&[
        "simulate", "--scheme", "sdf", "-L", "2", "-T", "9", "-N", "2,2,2", "--alpha", "0.02",
        "--frames", "20000", "--seed", "41",
    ]);
    assert_eq!(
        from_file.stdout, from_flags.stdout,
        "config run must match flag run"
    );

    // A flag beats the file: move the seed and the estimate shifts with it.
    let overridden = run(&["simulate", "--config", cfg, "--seed", "42"]);
    assert_eq!(exit_code(&overridden), 0);
    assert_ne!(from_file.stdout, overridden.stdout);
    assert!(stdout_of(&overridden)
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",42"));
}

#[test]
fn malformed_config_files_are_usage_errors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.cfg");
    fs::write(&path, "t 9\n").expect("write config");
    let out = run(&["capacity", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("expected key=value"));
}

#[test]
fn config_files_can_drive_a_trace() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("trace.cfg");
    fs::write(&path, "t = 3\nn = 1,1\nerase = 1:i\n").expect("write config");
    let out = run(&["trace", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("source r_0 (emits on link 1, erased at [5])"));
    assert_has_line(&text, "all frames recovered by their deadline");
}

// ============================================================
// trace
// ============================================================

/// One erasure on the source link: the relay reshuffles the two frames
/// in flight across the next two slots, then returns to steady state.
#[test]
fn trace_single_relay_recovery_is_symbol_exact() {
    let out = run(&["trace", "-T", "3", "-N", "1,1", "--erase", "1:i"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(
        &text,
        "sdf: k=2, blocks=[3, 3], widest=3, rate=2/3 (anchor i=5)",
    );
    assert!(text.contains("source r_0 (emits on link 1, erased at [5])"));
    assert!(text.contains("relay r_1 (emits on link 2)"));

    // Relay output around the erasure: steady 123, then 223 and 113
    // while the delayed symbols are squeezed through, then 123 again.
    assert_has_line(
        &text,
        "header | 123 |   123 |   123 |   123 |   123 |   123 |   223 |   113 |   123 |   123 |   123 |    123 |    123",
    );
    assert_has_line(
        &text,
        "pos 1  |   z | s0[0] | s1[0] | s2[0] | s3[0] | s4[0] | s6[1] | s6[0] | s7[0] | s8[0] | s9[0] | s10[0] | s11[0]",
    );
    assert_has_line(
        &text,
        "pos 2  |   z | s0[1] | s1[1] | s2[1] | s3[1] | s4[1] | s5[1] | s5[0] | s7[1] | s8[1] | s9[1] | s10[1] | s11[1]",
    );
    assert_has_line(
        &text,
        "done | - | s0 | s1 | s2 | s3 | s4 | - | s5+s6 | s7 | s8 | s9 |  - |  -",
    );
    assert_has_line(&text, "all frames recovered by their deadline");
}

/// Erasures on two consecutive links: the second relay sees the first
/// relay's reshuffled stream minus one packet, infers what was lost,
/// and still hands every frame to the destination on time.
#[test]
fn trace_two_relay_recovery_is_symbol_exact() {
    let out = run(&[
        "trace", "-L", "2", "-T", "4", "-N", "1,1,1", "--erase", "1:i", "--erase", "2:i+2",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_has_line(
        &text,
        "sdf: k=2, blocks=[3, 3, 3], widest=3, rate=2/3 (anchor i=6)",
    );
    assert!(text.contains("relay r_1 (emits on link 2, erased at [8])"));
    assert!(text.contains("relay r_2 (emits on link 3)"));

    assert_has_line(
        &text,
        "header | 123 | 123 |   123 |   123 |   123 |   123 |   123 |   123 |   223 |   213 |   113 |   123 |    123 |    123 |    123 |    123",
    );
    assert_has_line(
        &text,
        "pos 1  |   z |   z | s0[0] | s1[0] | s2[0] | s3[0] | s4[0] | s5[0] | s7[1] | s8[1] | s8[0] | s9[0] | s10[0] | s11[0] | s12[0] | s13[0]",
    );
    assert_has_line(
        &text,
        "pos 2  |   z |   z | s0[1] | s1[1] | s2[1] | s3[1] | s4[1] | s5[1] | s6[1] | s6[0] | s7[0] | s9[1] | s10[1] | s11[1] | s12[1] | s13[1]",
    );
    assert_has_line(
        &text,
        "done | - | - | s0 | s1 | s2 | s3 | s4 | s5 | - | s6 | s7+s8 | s9 | s10 | s11 |  - |  -",
    );
    assert_has_line(&text, "all frames recovered by their deadline");
}

#[test]
fn trace_erase_specs_are_validated() {
    let beyond = run(&["trace", "-T", "3", "-N", "1,1", "--erase", "9:i"]);
    assert_eq!(exit_code(&beyond), 2);
    assert!(stderr_of(&beyond).contains("link"));

    let garbled = run(&["trace", "-T", "3", "-N", "1,1", "--erase", "1:x"]);
    assert_eq!(exit_code(&garbled), 2);
}

#[test]
fn trace_anchor_and_horizon_are_adjustable() {
    let out = run(&[
        "trace",
        "-T",
        "3",
        "-N",
        "1,1",
        "--erase",
        "1:i",
        "--anchor",
        "7",
        "--horizon",
        "14",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("(anchor i=7)"));
    assert!(text.contains("erased at [7]"));
    assert!(text.contains("| 13"), "horizon of 14 slots ends at t=13");
    assert!(!text.contains("| 14"));
}

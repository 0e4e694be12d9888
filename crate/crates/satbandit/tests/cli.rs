//! End-to-end checks of the CLI surface: subcommands, flag overrides,
//! config and schedule files, and exit codes (0 success, 2 parameter
//! error, 3 selfcheck failure).

use std::fs;
use std::process::Command;

fn satbandit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_satbandit"))
}

#[test]
fn simulate_emits_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let status = satbandit()
            .args([
                "simulate",
                "--family",
                "swap-window",
                "--policies",
                "fixed:1,uniform",
                "--grid",
                "T=300;L=3;delta=0.45;S=0.5",
                "--replications",
                "4",
                "--seed",
                "7",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment_id,policy,family,T,L,K,delta,S,replication,seed,regret,wrong_pulls,runtime_ms"
    );
    assert_eq!(lines.count(), 8); // 1 point x 2 policies x 4 replications
    assert!(text.contains("swap-window"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.toml");
    fs::write(
        &cfg_path,
        r#"
experiment = "simulate"
seed = 1
replications = 2
policies = ["round-robin"]
family = "alternating"

[grid]
T = [64]
L = [2]
delta = [0.3]
S = [0.5]
"#,
    )
    .unwrap();
    let out = dir.path().join("records.csv");
    let status = satbandit()
        .args(["simulate", "--config"])
        .arg(&cfg_path)
        .args(["--replications", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6); // header + 5 replications (override)
}

#[test]
fn schedule_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("sched.toml");
    fs::write(
        &sched,
        r#"
K = 2
T = 10
S = 0.5
change_points = [1, 6, 11]
segment_means = [[0.9, 0.1], [0.1, 0.9]]
"#,
    )
    .unwrap();
    let out = dir.path().join("records.csv");
    let status = satbandit()
        .args(["simulate", "--schedule"])
        .arg(&sched)
        .args([
            "--policies",
            "fixed:1",
            "--replications",
            "3",
            "--seed",
            "2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    // Arm 1 is satisficing on [1,5] and not on [6,10]: 5 wrong pulls.
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2], "schedule");
        assert_eq!(cols[11], "5"); // wrong_pulls
    }
}

#[test]
fn parameter_errors_exit_2() {
    // Even L is infeasible for every swap-window grid point.
    let status = satbandit()
        .args([
            "simulate",
            "--family",
            "swap-window",
            "--policies",
            "fixed:1",
            "--grid",
            "T=300;L=4;delta=0.45;S=0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // Unknown policy id.
    let status = satbandit()
        .args([
            "simulate",
            "--family",
            "alternating",
            "--policies",
            "greedy",
            "--grid",
            "T=64;L=1;delta=0.3;S=0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // Missing instance spec.
    let status = satbandit()
        .args(["simulate", "--policies", "uniform"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn selfcheck_passes() {
    let output = satbandit().arg("selfcheck").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("[ ok ] seed derivation"));
    assert!(text.contains("selfcheck: all invariants hold"));
}

#[test]
fn estimators_subcommand_reports() {
    let output = satbandit()
        .args([
            "estimators",
            "--family",
            "single-switch",
            "--policies",
            "fixed:1",
            "--grid",
            "T=416;L=2;delta=0.25;S=0.5",
            "--replications",
            "20",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("scan-first-arm"));
    assert!(text.contains("coin-mixed"));
    assert!(text.contains("deterministic implication"));
}

use std::process::{Command, Output};

use quadform_games::cli::Report;

fn qfgames(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfgames"))
        .args(args)
        .env_remove("QFGAMES_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gap_example() {
    let o = qfgames(&["gap", "--lambda", "1.41421356237", "--a", "0", "--N", "100", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Report = serde_json::from_str(&stdout(&o)).unwrap();
    let gap = r.summary["gap"].as_f64().unwrap();
    assert!((gap - 0.35355).abs() < 1e-5);
    assert_eq!(r.params["N"], 100);
}

#[test]
fn play_twice_is_byte_identical() {
    let args = ["play", "--variant", "hpw", "--alice", "dummy", "--bob", "random", "--beta", "0.1", "--seed", "7", "--rounds", "50"];
    let (a, b) = (qfgames(&args), qfgames(&args));
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("# param seed=7\n") && text.contains("# param variant=hpw\n"));
}

#[test]
fn transversality_example() {
    let o = qfgames(&["transversality", "--a", "4", "--tau", "0.1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Report = serde_json::from_str(&stdout(&o)).unwrap();
    for k in ["plus_upper", "plus_lower", "minus_upper", "minus_lower"] {
        assert_eq!(r.summary[&format!("lie_span_rank_{k}")], 3);
    }
    assert!(r.summary["theta_min_upper"].as_f64().unwrap() > 0.0);
}

#[test]
fn json_round_trips() {
    let o = qfgames(&["play", "--variant", "hpw", "--alice", "avoid", "--beta", "0.07", "--target", "arc", "--seed", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let r: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(r.to_json(), text);
    assert!(r.transcript.is_some());
    assert_eq!(r.summary["failed_times"], serde_json::json!([]));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["gap", "--lambda", "x", "--N", "5"][..],
        &["gap", "--lambda", "-2", "--N", "5"],
        &["gap", "--lambda", "2", "--N", "0"],
        &["play", "--variant", "haw", "--alice", "avoid", "--beta", "0.07"],
        &["play", "--variant", "hpw", "--beta", "0.3"],
        &["nonsense"],
    ] {
        let o = qfgames(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.trim().is_empty(), "{args:?}");
    }
    // library-level rejections are one line
    let o = qfgames(&["gap", "--lambda", "2", "--N", "0"]);
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim().lines().count(), 1);
}

#[test]
fn failed_checks_exit_with_two() {
    // the avoidance constants cannot be derived for so small a time step
    let o = qfgames(&["transversality", "--a", "4", "--game-tau", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("# passed=false"));
}

#[test]
fn output_directory_from_environment() {
    let dir = std::env::temp_dir().join(format!("qfgames-cli-{}", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_qfgames"))
        .args(["orbit", "--lambda", "sqrt2", "--tmax", "1", "--step", "0.25"])
        .env("QFGAMES_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("orbit.csv")).unwrap();
    assert!(text.contains("# param lambda=1.4142135623730951\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn suites_are_deterministic() {
    let args = ["suite", "avoid-z", "--games", "3"];
    let (a, b) = (qfgames(&args), qfgames(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("# summary games=12\n"));
    let args = ["suite", "bounded", "--games", "3", "--rounds", "40"];
    let (a, b) = (qfgames(&args), qfgames(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

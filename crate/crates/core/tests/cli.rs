use std::path::PathBuf;
use std::process::{Command, Output};

use shiftlab::harness::{parse_csv, parse_json};

fn shiftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shiftlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn walk_csv_by_default() {
    let text = stdout(&shiftlab(&["walk", "--trials", "200"]));
    let (cols, rows) = parse_csv(&text).unwrap();
    assert_eq!(cols[0], "p");
    assert_eq!(rows.len(), 12);
}

#[test]
fn flag_and_positional_experiment_agree() {
    let a = stdout(&shiftlab(&["bounds"]));
    let b = stdout(&shiftlab(&["--experiment", "bounds"]));
    assert_eq!(a, b);
    assert!(!shiftlab(&["bounds", "--experiment", "walk"])
        .status
        .success());
}

#[test]
fn json_echoes_the_effective_config() {
    let text = stdout(&shiftlab(&[
        "walk", "--trials", "150", "--seed", "5", "--format", "json",
    ]));
    let r = parse_json(&text).unwrap();
    assert_eq!((r.config.trials, r.seed), (150, 5));
    assert!(!text.contains("workers"));
}

#[test]
fn flags_override_config_file() {
    let path = scratch("precedence.conf");
    std::fs::write(
        &path,
        "experiment = walk\ntrials = 300\nseed = 77\nformat = json\n",
    )
    .unwrap();
    let text = stdout(&shiftlab(&[
        "--config",
        path.to_str().unwrap(),
        "--trials",
        "250",
    ]));
    let r = parse_json(&text).unwrap();
    assert_eq!((r.config.trials, r.config.seed), (250, 77));
}

#[test]
fn out_writes_the_report() {
    let path = scratch("bounds.csv");
    let out = shiftlab(&["bounds", "--out", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("n,p_samples,"));
}

#[test]
fn test_prg_requires_allow_insecure() {
    let args = ["separation", "--n", "4", "--trials", "200", "--prg", "test"];
    let out = shiftlab(&args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("allow-insecure"));
    let mut allowed = args.to_vec();
    allowed.push("--allow-insecure");
    stdout(&shiftlab(&allowed));
}

#[test]
fn worker_count_does_not_change_output() {
    let base = [
        "distinguish",
        "--n",
        "10",
        "--trials",
        "1000",
        "--train-size",
        "50",
        "--format",
        "json",
    ];
    let one = stdout(&shiftlab(&[&base[..], &["--workers", "1"]].concat()));
    let four = stdout(&shiftlab(&[&base[..], &["--workers", "4"]].concat()));
    assert_eq!(one, four);
}

#[test]
fn bad_input_is_rejected() {
    assert!(!shiftlab(&["telepathy"]).status.success());
    assert!(!shiftlab(&["walk", "--format", "xml"]).status.success());
    assert!(!shiftlab(&["codec", "--payload", "zz"]).status.success());
    assert!(!shiftlab(&["separation", "--votes", "2"]).status.success());
    assert!(!shiftlab(&[]).status.success());
}

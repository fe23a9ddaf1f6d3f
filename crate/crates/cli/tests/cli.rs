use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lr-broadcast"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lr-broadcast-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_writes_table_and_manifest() {
    let out = scratch("solve.csv");
    let o = run(&["solve", "--file-size", "12", "--window", "4", "--p", "0.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("x0,x1,value,action\n"));
    assert!(csv.lines().any(|l| l == "10,12,4,0"));
    assert_eq!(csv.lines().count(), 1 + 13 * 13);
    let manifest = fs::read_to_string(out.with_extension("csv.manifest")).unwrap();
    assert!(manifest.contains("command=solve"));
    assert!(manifest.contains("file_size=12"));
}

#[test]
fn solve_prints_start_value() {
    let o = run(&["solve", "--file-size", "1", "--window", "1", "--p", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("V(0,0) = 2.666667"));
}

#[test]
fn config_errors_exit_two() {
    let o = run(&["solve", "--file-size", "10", "--window", "3", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a multiple"));
    assert_eq!(run(&["solve", "--file-size", "4"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--policy", "fifo", "--N", "2", "--file-size", "4", "--window", "2", "--p", "0.5"]).status.code(), Some(2));
}

#[test]
fn check_lr_grid() {
    let out = scratch("check.csv");
    let o = run(&[
        "check-lr", "--file-size", "8,12,24", "--window", "2,4,5", "--p", "0.1,0.5,0.9",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("F,K,p,check,examined,violations,worst_margin,note\n"));
    // K=5 never divides these F and is reported per row
    assert!(csv.lines().any(|l| l.starts_with("8,5,0.1,invalid_config")));
    for line in csv.lines().skip(1) {
        let fields: Vec<_> = line.split(',').collect();
        assert_eq!(fields[5], "0", "{line}");
    }
}

#[test]
fn check_lr_single_batch_is_vacuous() {
    let o = run(&["check-lr", "--file-size", "4", "--window", "4", "--p", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("decision states      0"));
}

#[test]
fn oracle_reports_and_refuses() {
    let o = run(&["oracle", "--file-size", "4", "--window", "2", "--p", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("256 policies; LR optimal"));
    let o = run(&["oracle", "--file-size", "2", "--window", "1", "--p", "0.5"]);
    assert!(stdout(&o).contains("4 policies; LR optimal"));
    let o = run(&["oracle", "--file-size", "100", "--window", "2", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("decision states") && err.contains("1048576"), "{err}");
}

#[test]
fn simulate_two_receivers_against_dp() {
    let o = run(&[
        "simulate", "--policy", "lr", "--N", "2", "--file-size", "12", "--window", "4", "--p", "0.5",
        "--trials", "10000", "--seed", "42",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("DP V(0,0) = 27.569"), "{text}");
    assert!(text.contains("is within the 95% CI"), "{text}");
}

#[test]
fn sweep_csv_and_replay_are_byte_identical() {
    let out = scratch("sweep.csv");
    let o = run(&[
        "sweep", "--policies", "lr,rrnc,rs", "--receivers", "3", "--file-size", "60", "--p", "0.6",
        "--windows", "5,7,60", "--trials", "50", "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    // K=7 does not divide 60: rows are skipped and the exit code flags it
    assert_eq!(o.status.code(), Some(2));
    let first = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = first.lines().collect();
    assert_eq!(lines[0], "policy,N,F,K,p,n_trials,mean_slots,stddev,ci95_half_width");
    assert_eq!(lines.len(), 1 + 6);
    // K = F: identical statistics for every policy
    let full: Vec<_> = lines[4..].iter().map(|l| l.split_once(',').unwrap().1).collect();
    assert!(full.iter().all(|l| *l == full[0]));

    let manifest = out.with_extension("csv.manifest");
    fs::remove_file(&out).unwrap();
    let o = run(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn simulate_codec_mode() {
    let out = scratch("codec_sim.csv");
    let o = run(&[
        "simulate", "--policies", "lr,rs", "--receivers", "3", "--file-size", "24", "--window", "6", "--p", "0.7",
        "--trials", "20", "--mode", "codec", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let manifest = fs::read_to_string(out.with_extension("csv.manifest")).unwrap();
    assert!(manifest.contains("mode=codec"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn codec_validate_reports() {
    let o = run(&["codec-validate", "--window", "16", "--payload-len", "64", "--batches", "2000", "--seed", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("round trips: 2000/2000"));
    let o = run(&["codec-validate", "--batches", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("round trips: 0/0"));
}

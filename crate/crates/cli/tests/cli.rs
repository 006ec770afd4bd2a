use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use xsat::analysis::{profile_run, BranchEvent};

fn xsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xsat"))
        .args(args)
        .output()
        .expect("run xsat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn count_prints_only_the_number() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "a.cnf",
        "c example\np cnf 7 3\n1 2 3 0\n1 2 6 0\n7 -4 0\n",
    );
    let out = xsat(&["count", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "6\n");
    let out = xsat(&["oracle", &file]);
    assert_eq!(stdout(&out), "6\n");
}

#[test]
fn header_mismatch_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "a.cnf", "p cnf 4 5\n1 2 3 0\n");
    let out = xsat(&["count", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n");
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn stats_and_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let gen = xsat(&[
        "gen",
        "--vars",
        "20",
        "--clauses",
        "8",
        "--width-min",
        "3",
        "--width-max",
        "6",
        "--seed",
        "3",
    ]);
    let file = write(dir.path(), "g.cnf", &stdout(&gen));
    let stats = dir.path().join("stats.txt");
    let trace = dir.path().join("trace.txt");
    let out = xsat(&[
        "count",
        &file,
        "--oracle-check",
        "--stats",
        stats.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1);

    let stats = fs::read_to_string(stats).unwrap();
    for key in ["nodes=", "max_depth=", "max_lambda="] {
        assert!(stats.lines().any(|l| l.starts_with(key)), "{stats}");
    }
    let events: Vec<BranchEvent> = fs::read_to_string(trace)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let nodes: u64 = stats
        .lines()
        .find_map(|l| l.strip_prefix("nodes="))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(profile_run(events).nodes, nodes);
}

#[test]
fn oracle_check_refuses_large_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let gen = xsat(&[
        "gen",
        "--vars",
        "40",
        "--clauses",
        "3",
        "--width-min",
        "3",
        "--width-max",
        "3",
        "--seed",
        "1",
    ]);
    let file = write(dir.path(), "big.cnf", &stdout(&gen));
    let out = xsat(&["count", "--oracle-check", &file]);
    assert_eq!(out.status.code(), Some(0), "only 9 variables occur");

    let clauses: String = (0..10)
        .map(|i| format!("{} {} {} 0\n", 3 * i + 1, 3 * i + 2, 3 * i + 3))
        .collect();
    let file = write(dir.path(), "wide.cnf", &format!("p cnf 30 10\n{clauses}"));
    assert_eq!(stdout(&xsat(&["count", &file])), "59049\n");
    let out = xsat(&["count", "--oracle-check", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cap"));
}

#[test]
fn gen_is_deterministic_and_writes_files() {
    let args = [
        "gen",
        "--vars",
        "10",
        "--clauses",
        "6",
        "--width-min",
        "3",
        "--width-max",
        "5",
        "--seed",
        "7",
    ];
    let a = xsat(&args);
    let b = xsat(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("p cnf 10 6\n"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.cnf");
    let mut with_output = args.to_vec();
    with_output.extend(["-o", path.to_str().unwrap()]);
    let c = xsat(&with_output);
    assert!(c.stdout.is_empty());
    assert_eq!(fs::read(path).unwrap(), a.stdout);

    let mono = xsat(&[
        "gen",
        "--vars",
        "10",
        "--clauses",
        "6",
        "--width-min",
        "3",
        "--width-max",
        "5",
        "--seed",
        "7",
        "--monotone",
    ]);
    assert!(!stdout(&mono).lines().skip(1).any(|l| l.contains('-')));
}

#[test]
fn gen_rejects_infeasible_caps() {
    let out = xsat(&[
        "gen",
        "--vars",
        "5",
        "--clauses",
        "10",
        "--width-min",
        "3",
        "--width-max",
        "3",
        "--max-degree",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).is_empty());
}

#[test]
fn tau_prints_six_decimals() {
    assert_eq!(stdout(&xsat(&["tau", "9", "5", "5"])), "1.199493\n");
    assert_eq!(stdout(&xsat(&["tau", "4", "4"])), "1.189207\n");
    assert_eq!(
        stdout(&xsat(&["tau", "1", "1", "--tol", "1e-12"])),
        "2.000000\n"
    );
    assert_eq!(xsat(&["tau", "0", "3"]).status.code(), Some(1));
    assert_eq!(xsat(&["tau"]).status.code(), Some(1));
}

#[test]
fn verify_bounds_table() {
    let out = xsat(&["verify-bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("1.199493"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn usage_and_parse_errors_exit_one() {
    assert_eq!(xsat(&[]).status.code(), Some(1));
    assert_eq!(xsat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(xsat(&["count"]).status.code(), Some(1));
    assert_eq!(
        xsat(&["count", "/definitely/not/here.cnf"]).status.code(),
        Some(1)
    );
    assert_eq!(xsat(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 3 0\n");
    let out = xsat(&["count", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

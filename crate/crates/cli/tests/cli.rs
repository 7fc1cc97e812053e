use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rqaoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqaoa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of a `key   value` line in the default report.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(key)).then(|| parts.collect::<Vec<_>>().join(" "))
        })
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn brute_complete_graphs() {
    for (m, want) in [("6", 9.0), ("4", 4.0)] {
        let o = rqaoa(&["brute", "--complete", m]);
        assert!(o.status.success());
        let v: f64 = field(&stdout(&o), "optimum").parse().unwrap();
        assert_eq!(v, want);
    }
}

#[test]
fn brute_path_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path3.txt");
    fs::write(&path, "# path on 3 vertices\n0 1\n1 2\n").unwrap();
    let o = rqaoa(&["brute", "--graph", path.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "optimum"), "2.00000000000000");
    assert_eq!(field(&out, "cut"), "0:+1 1:-1 2:+1");
}

#[test]
fn brute_reads_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.json");
    let model = rqaoa_core::IsingModel::maxcut(&[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
    fs::write(&path, rqaoa_core::ising::to_json(&model)).unwrap();
    let o = rqaoa(&["brute", "--graph", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "optimum"), "2.00000000000000");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 0 1\n").unwrap();
    let missing = dir.path().join("missing.txt");
    for args in [
        vec!["brute", "--graph", bad.to_str().unwrap()],
        vec!["brute", "--graph", missing.to_str().unwrap()],
        vec!["brute"],
        vec!["brute", "--complete", "4", "--graph", bad.to_str().unwrap()],
        vec!["qaoa", "--complete", "4", "--level", "0"],
        vec![
            "verify",
            "--check",
            "qaoa-bound",
            "--n-min",
            "5",
            "--n-max",
            "4",
        ],
        vec!["rqaoa", "--complete", "6", "--nc", "1"],
        vec!["--threads", "0", "brute", "--complete", "4"],
        vec!["frobnicate"],
    ] {
        let o = rqaoa(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn qaoa_ratio_below_bound() {
    let o = rqaoa(&["qaoa", "--complete", "8", "--level", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let ratio: f64 = field(&out, "ratio").parse().unwrap();
    assert!(ratio < 1.0 - 1.0 / 128.0);
    assert_eq!(field(&out, "below_bound"), "true");

    let o = rqaoa(&["qaoa", "--complete", "4", "--level", "1"]);
    let ratio: f64 = field(&stdout(&o), "ratio").parse().unwrap();
    assert!(ratio < 1.0);
}

#[test]
fn qaoa_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let o = rqaoa(&[
            "--threads",
            threads,
            "qaoa",
            "--complete",
            "6",
            "--grid",
            "24",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "n");
    assert_eq!(rows[1][2], "qaoa");
}

#[test]
fn rqaoa_k10_exact() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = rqaoa(&[
        "rqaoa",
        "--complete",
        "10",
        "--level",
        "1",
        "--nc",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(field(&out, "value").parse::<f64>().unwrap(), 25.0);
    assert_eq!(field(&out, "ratio").parse::<f64>().unwrap(), 1.0);
    let rows = csv_rows(&csv);
    assert_eq!(
        rows[0],
        [
            "n",
            "vertices",
            "algorithm",
            "level",
            "value",
            "optimum",
            "ratio",
            "bound_1_minus_1_over_8n2",
            "below_bound"
        ]
    );
    assert_eq!(rows[1][8], "false");
}

/// (eliminated, sign, surviving) triples from `-v` trace lines.
fn trace_moves(out: &str) -> Vec<String> {
    out.lines()
        .filter(|l| l.starts_with("round "))
        .map(|l| {
            l.split_whitespace()
                .skip(2)
                .take(4)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

#[test]
fn providers_agree_on_k12() {
    let run = |mode| {
        stdout(&rqaoa(&[
            "-v",
            "rqaoa",
            "--complete",
            "12",
            "--nc",
            "4",
            "--correlations",
            mode,
        ]))
    };
    let analytic = run("analytic");
    let simulated = run("statevector");
    let moves = trace_moves(&analytic);
    assert_eq!(moves.len(), 4);
    assert_eq!(moves, trace_moves(&simulated));
    assert_eq!(field(&analytic, "value"), field(&simulated, "value"));
    assert_eq!(field(&analytic, "cut"), field(&simulated, "cut"));
}

#[test]
fn analytic_refused_on_general_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    fs::write(&path, "0 1\n1 2\n2 3\n").unwrap();
    let o = rqaoa(&[
        "rqaoa",
        "--graph",
        path.to_str().unwrap(),
        "--nc",
        "2",
        "--correlations",
        "analytic",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seeded_random_ties_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k6.txt");
    let mut text = String::new();
    for i in 0..6 {
        for j in i + 1..6 {
            text.push_str(&format!("{i} {j} 1\n"));
        }
    }
    fs::write(&path, text).unwrap();
    let args = [
        "-v",
        "rqaoa",
        "--graph",
        path.to_str().unwrap(),
        "--seed",
        "7",
        "--tie-break",
        "random",
        "--nc",
        "2",
    ];
    let first = rqaoa(&args);
    let second = rqaoa(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(field(&stdout(&first), "value").parse::<f64>().unwrap(), 9.0);
}

#[test]
fn verify_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    for (check, lo, hi) in [
        ("g-positivity", "4", "100"),
        ("qaoa-bound", "4", "200"),
        ("rqaoa-exact", "2", "6"),
        ("oracle-agreement", "2", "4"),
        ("beta-stationarity", "2", "10"),
    ] {
        let csv = dir.path().join(format!("{check}.csv"));
        let o = rqaoa(&[
            "verify",
            "--check",
            check,
            "--n-min",
            lo,
            "--n-max",
            hi,
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{check}: {}", stdout(&o));
        let rows = csv_rows(&csv);
        assert_eq!(
            rows[0],
            ["check", "n", "metric", "value", "limit", "status"]
        );
        assert!(rows[1..].iter().all(|r| r[5] == "PASS"), "{check}");
    }
}

#[test]
fn sweep_columns_and_claims() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = rqaoa(&[
        "sweep",
        "--n-min",
        "2",
        "--n-max",
        "12",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&csv);
    assert_eq!(
        rows[0],
        [
            "n",
            "vertices",
            "qaoa1_ratio",
            "rqaoa1_ratio",
            "bound_1_minus_1_over_8n2"
        ]
    );
    assert_eq!(rows.len(), 12);
    for r in &rows[1..] {
        let n: usize = r[0].parse().unwrap();
        let q: f64 = r[2].parse().unwrap();
        let rq: f64 = r[3].parse().unwrap();
        let bound: f64 = r[4].parse().unwrap();
        assert_eq!(r[1], (2 * n).to_string());
        assert_eq!(rq, 1.0);
        if n >= 4 {
            assert!(q < bound);
        }
    }
    let again = dir.path().join("again.csv");
    rqaoa(&[
        "sweep",
        "--n-min",
        "2",
        "--n-max",
        "12",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());
}

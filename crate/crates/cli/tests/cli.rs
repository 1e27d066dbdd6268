use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdv-ginibre"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_at_twelve_digits() {
    let o = run(&["constants", "--digits", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("quantity,value\n"));
    assert!(s.contains("1.042186978869"), "{s}");
    assert!(s.contains("1.165194315878"), "{s}");
    assert!(!s.contains('\r'));
}

#[test]
fn trivial_potential_is_zero() {
    let o = run(&["potential", "--gamma", "0", "--x-min", "-2", "--x-max", "2", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("x,q,q_x,u,int_q,int_q2,int_u,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        for cell in row.split(',').skip(1) {
            assert_eq!(cell, "0.000000000000000e+00");
        }
    }
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        vec!["potential", "--gamma", "1.5"],
        vec!["distribution", "--s-min", "3", "--s-max", "1"],
        vec!["conserved", "--t", "0.5"],
        vec!["mc", "--n", "0"],
        vec!["no-such-command"],
        vec!["verify-asymptotics", "--gamma", "0"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn seeded_monte_carlo_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let csv = dir.path().join(format!("{name}.csv"));
        let json = dir.path().join(format!("{name}.json"));
        let o = run(&[
            "mc",
            "--n",
            "12",
            "--trials",
            "40",
            "--seed",
            "7",
            "--output",
            csv.to_str().unwrap(),
            "--summary",
            json.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push((fs::read(&csv).unwrap(), fs::read_to_string(&json).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary: serde_json::Value = serde_json::from_str(&outputs[0].1).unwrap();
    assert_eq!(summary["seed"], 7);
    assert!(summary["ks_distance"].as_f64().unwrap() > 0.0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn fit_is_sorted_json() {
    let o = run(&["fit-lkappa"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let keys: Vec<usize> = ["\"l1\"", "\"l2\"", "\"l3\"", "\"residual\""]
        .iter()
        .map(|k| s.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert!((v["l2"].as_f64().unwrap() - 0.678_838_896_962).abs() < 1e-9);
}

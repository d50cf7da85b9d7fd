use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sos-ggm"))
        .args(args)
        .env_remove("SOS_GGM_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn pairs(v: &Value) -> Vec<(f64, f64)> {
    v["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["a"].as_f64().unwrap(), s["b"].as_f64().unwrap()))
        .collect()
}

#[test]
fn solve_k3_tau5_lists_five_laws() {
    let v = json(&["solve", "--k", "3", "--tau", "5"]);
    assert_eq!(v["count"], 5);
    let p = pairs(&v);
    for (a, b) in [(0.5, 0.5), (1.0, 1.0), (2.0, 2.0)] {
        assert!(p
            .iter()
            .any(|q| (q.0 - a).abs() < 1e-12 && (q.1 - b).abs() < 1e-12));
    }
    for s in v["solutions"].as_array().unwrap() {
        for r in s["residuals"].as_array().unwrap() {
            assert!(r.as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn solve_below_first_transition_gives_the_free_law() {
    let v = json(&["solve", "--k", "2", "--tau", "3"]);
    assert_eq!(pairs(&v), vec![(1.0, 1.0)]);
}

#[test]
fn unit_field_matches_zero_field() {
    let plain = json(&["solve", "--k", "2", "--tau", "5"]);
    let field = json(&["solve", "--k", "2", "--tau", "5", "--h1", "1", "--h2", "1"]);
    let mut a = pairs(&plain);
    // The field solver lists ordered pairs; fold them back to a <= b.
    let mut b: Vec<(f64, f64)> = pairs(&field)
        .into_iter()
        .map(|(x, y)| (x.min(y), x.max(y)))
        .collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!(
            (x.0 - y.0).abs() < 1e-10 && (x.1 - y.1).abs() < 1e-10,
            "{x:?} vs {y:?}"
        );
    }
}

#[test]
fn solve_csv_has_header_and_rows() {
    let out = run(&["solve", "--k", "2", "--tau", "7", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,branch,index,residual_1,residual_2"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn scan_k2_reports_three_transitions() {
    let out = run(&[
        "scan",
        "--k",
        "2",
        "--tau-min",
        "2.1",
        "--tau-max",
        "8",
        "--steps",
        "600",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 601, "header plus one row per step");
    let transitions: Vec<f64> = text
        .lines()
        .filter_map(|l| l.strip_prefix("# transition,"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    let expected = [4.0, 6.0, 2.0 + 2.0 * 5f64.sqrt()];
    assert_eq!(transitions.len(), 3);
    for (t, e) in transitions.iter().zip(expected) {
        assert!((t - e).abs() < 1e-5, "{t} vs {e}");
    }
    assert!(text.contains("# exceptional,6.47213595"));
}

#[test]
fn field_grid_has_region_column() {
    let out = run(&[
        "scan",
        "--k",
        "2",
        "--tau-min",
        "3",
        "--tau-max",
        "6",
        "--steps",
        "3",
        "--h-min",
        "0.5",
        "--h-max",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("tau,h,k,n_equal,n_unequal,n_total,n_ggm_upper,region\n"));
    assert_eq!(
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("tau"))
            .count(),
        9
    );
}

#[test]
fn h_min_requires_h_max() {
    let out = run(&[
        "scan",
        "--k",
        "2",
        "--tau-min",
        "3",
        "--tau-max",
        "6",
        "--h-min",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

fn table_total(v: &Value) -> f64 {
    v["table"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e[1].as_f64().unwrap())
        .sum()
}

#[test]
fn pinned_and_mixed_tables_are_normalised() {
    let base = [
        "ggm", "--k", "2", "--tau", "7", "--index", "0", "--radius", "1", "--window", "10",
    ];
    let pinned = json(&base);
    assert_eq!(pinned["pin"], 0);
    assert!((table_total(&pinned) - 1.0).abs() < 1e-12);
    let mut mixed_args = base.to_vec();
    mixed_args.push("--mixed");
    let mixed = json(&mixed_args);
    assert_eq!(mixed["pin"], "mixed");
    assert!((table_total(&mixed) - 1.0).abs() < 1e-12);
}

#[test]
fn consistency_check_passes() {
    let v = json(&[
        "ggm",
        "--k",
        "2",
        "--tau",
        "7",
        "--radius",
        "2",
        "--window",
        "10",
        "--check-consistency",
    ]);
    let c = &v["consistency"];
    assert_eq!(c["passed"], true);
    assert!(c["max_abs_diff"].as_f64().unwrap() < 1e-8);
}

#[test]
fn budget_env_var_is_honoured() {
    let args = [
        "ggm", "--k", "2", "--tau", "7", "--radius", "1", "--window", "10",
    ];
    let out = Command::new(env!("CARGO_BIN_EXE_sos-ggm"))
        .args(args)
        .env("SOS_GGM_BUDGET", "100")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["table"].is_null());
    assert!(v["omitted"].as_str().unwrap().contains("budget"));
    assert_eq!(out.status.code(), Some(2));
    // The flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_sos-ggm"))
        .args(args)
        .args(["--budget", "100000"])
        .env("SOS_GGM_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_input_exits_with_usage_code() {
    for args in [
        vec!["solve", "--k", "2", "--tau", "2"],
        vec!["solve", "--k", "2", "--tau", "1.5"],
        vec!["solve", "--k", "1", "--tau", "5"],
        vec!["solve", "--k", "2", "--tau", "five"],
        vec!["ggm", "--k", "2", "--tau", "3", "--index", "7"],
        vec!["verify", "--only", "no_such_check"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn verify_single_check_passes() {
    let out = run(&["verify", "--only", "factorization"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("PASS factorization"));
    assert!(text.ends_with("1 of 1 checks passed\n"));
}

#[test]
fn verify_json_is_reproducible() {
    let args = [
        "verify",
        "--only",
        "descartes,swap_symmetry",
        "--seed",
        "7",
        "--json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("sos-ggm-cli-test-{}.json", std::process::id()));
    let out = run(&[
        "solve",
        "--k",
        "2",
        "--tau",
        "7",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["count"], 5);
    std::fs::remove_file(path).unwrap();
}

use std::process::{Command, Output};

use quasizero::bounds::{quadrangle, BoundReport};
use quasizero::zeros::enumerate_zeros;
use quasizero::{Complex64, Family, Quasipolynomial};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasizero")).args(args).env_remove("QUASIZERO_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

fn unit() -> Quasipolynomial {
    Quasipolynomial::new(1, Complex64::new(1.0, 0.0)).unwrap()
}

#[test]
fn zeros_csv_rows_round_trip() {
    let o = run(&["zeros", "--k", "1", "--a", "1+0i", "--nu", "1..40", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "nu,guess_re,guess_im,zero_re,zero_im,residual,newton_iters");
    // nu = 1..4 sit below nu_min and are listed in the skip note.
    assert_eq!(lines.len() - 1, 36);
    assert!(text.contains("# skipped (|nu| < 5): 1 2 3 4"));
    assert!(text.contains("# spacing nu 5..40"));

    let lib = enumerate_zeros(&unit(), 1, 40).unwrap();
    for (line, rec) in lines[1..].iter().zip(&lib.records) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<i64>().unwrap(), rec.nu);
        assert_eq!(f[1].parse::<f64>().unwrap(), rec.guess.re);
        assert_eq!(f[2].parse::<f64>().unwrap(), rec.guess.im);
        assert_eq!(f[3].parse::<f64>().unwrap(), rec.refined.re);
        assert_eq!(f[4].parse::<f64>().unwrap(), rec.refined.im);
        assert_eq!(f[5].parse::<f64>().unwrap(), rec.residual);
        assert_eq!(f[6].parse::<usize>().unwrap(), rec.newton_iters);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn zeros_json_round_trips() {
    let o = run(&["zeros", "--k", "2", "--a", "0.5-0.5i", "--nu", "-12..-5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "zeros");
    assert_eq!(doc["config"]["a"], "0.5-0.5i");
    assert!(doc["timings"].is_null());
    let q = Quasipolynomial::new(2, Complex64::new(0.5, -0.5)).unwrap();
    let lib = enumerate_zeros(&q, -12, -5).unwrap();
    let parsed: Vec<quasizero::zeros::ZeroRecord> = serde_json::from_value(doc["results"]["records"].clone()).unwrap();
    assert_eq!(parsed, lib.records);
}

#[test]
fn empty_index_range_is_not_an_error() {
    let o = run(&["zeros", "--k", "1", "--a", "1+0i", "--nu", "0..0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(data_lines(&text).len(), 1);
    assert!(text.contains("# skipped (|nu| < 5): 0"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["zeros", "--a", "1+"][..],
        &["zeros", "--nu", "4..2"],
        &["count", "--rect", "0,4,8,14", "--disk", "0,0,2"],
        &["count"],
        &["geometry", "--curve", "gamma", "--n", "1"],
        &["geometry", "--curve", "gamma", "--j", "1", "--im", "10..20"],
        &["geometry", "--quadrangle", "--nu", "2", "--h", "2"],
        &["bounds", "--ineq", "eq3", "--h", "0.1"],
        &["bounds", "--ineq", "eq9"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn count_examples() {
    let o = run(&["count", "--k", "1", "--a", "1+0i", "--rect", "0,4,8,14"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("count: 1\n"));
    let o = run(&["count", "--k", "1", "--a", "1+0i", "--disk", "0,0,2"]);
    assert!(stdout(&o).starts_with("count: 1\n"));
    let o = run(&["count", "--disk", "0,0,2", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["results"]["count"], 1);
    assert_eq!(doc["results"]["contour"]["shape"], "disk");
}

#[test]
fn bounds_examples() {
    let o = run(&[
        "bounds",
        "--ineq",
        "eq3",
        "--k",
        "1",
        "--a",
        "1+0i",
        "--h",
        "auto+0.5",
        "--samples",
        "10000",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let report: BoundReport = serde_json::from_value(doc["results"].clone()).unwrap();
    assert!(report.pass);
    assert!(report.min_ratio >= 0.5);
    assert_eq!(report.seed, 7);
    assert_eq!(report.h, std::f64::consts::LN_2 + 0.5);

    let o = run(&["bounds", "--ineq", "eq7", "--delta", "0.5", "--nu-hi", "30", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["results"]["min_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn failing_probe_exits_1() {
    let o = run(&["bounds", "--ineq", "eq4-printed", "--samples", "5000"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["results"]["pass"], false);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_environment_overrides_flag() {
    let args = ["bounds", "--ineq", "eq4", "--samples", "3000", "--seed", "1"];
    let with_env =
        Command::new(env!("CARGO_BIN_EXE_quasizero")).args(args).env("QUASIZERO_SEED", "99").output().unwrap();
    let flag = run(&["bounds", "--ineq", "eq4", "--samples", "3000", "--seed", "99"]);
    let a: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    let b: Value = serde_json::from_slice(&flag.stdout).unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["config"]["resolved_seed"], 99);

    let bad = Command::new(env!("CARGO_BIN_EXE_quasizero")).args(args).env("QUASIZERO_SEED", "x").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gamma_rows_sit_on_the_level() {
    let o = run(&["geometry", "--curve", "gamma", "--S", "1", "--j", "2", "--h", "2", "--im", "10..200", "--n", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "re,im");
    assert_eq!(lines.len() - 1, 256);
    let q = unit();
    for line in &lines[1..] {
        let (re, im) = line.split_once(',').unwrap();
        let z = Complex64::new(re.parse().unwrap(), im.parse().unwrap());
        assert!((q.sigma(Family::S1, z).unwrap() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn quadrangle_corners_and_diag() {
    let o = run(&["geometry", "--quadrangle", "--nu", "10", "--h", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 5);
    let cell = quadrangle(&unit(), 10, 2.0).unwrap();
    for (line, c) in lines[1..].iter().zip(cell.corners) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1].parse::<f64>().unwrap(), c.re);
        assert_eq!(f[2].parse::<f64>().unwrap(), c.im);
    }
    let diag = text.lines().find_map(|l| l.strip_prefix("# diag ")).unwrap();
    assert_eq!(diag.parse::<f64>().unwrap(), cell.diag);
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("quasizero-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zeros.csv");
    let o = run(&["zeros", "--nu", "5..9", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let direct = run(&["zeros", "--nu", "5..9"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

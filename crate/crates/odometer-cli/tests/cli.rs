use num::BigRational;
use std::process::{Command, Output};

fn odometer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odometer"))
        .args(args)
        .env_remove("ODOMETER_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_rat(s: &str) -> BigRational {
    let (n, d) = s.split_once('/').unwrap();
    BigRational::new(n.parse().unwrap(), d.parse().unwrap())
}

#[test]
fn claim1_k1_verifies_with_count() {
    let out = odometer(&["verify", "claim1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"verdict\":\"verified\""));
    assert!(text.contains("8128"));
}

#[test]
fn claim1_k0_is_a_usage_error() {
    let out = odometer(&["verify", "claim1", "--k", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = odometer(&["verify", "claim1", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn measure_b1_image_of_64_is_small() {
    let out = odometer(&["measure", "--set", "B1", "--n", "64", "--direction", "image"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // "measure":"[lo, hi]" with exact rationals; the upper end must be
    // at most 1/128 (coordinate 7 of the image is forced to 1)
    let tail = text.split("\"measure\":\"[").nth(1).unwrap();
    let inner = tail.split(']').next().unwrap();
    let hi = parse_rat(inner.split(", ").nth(1).unwrap().trim());
    assert!(hi <= BigRational::new(1.into(), 128.into()));
}

#[test]
fn witness_quarter_epsilon_verifies() {
    let out = odometer(&["witness", "--epsilon", "1/4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"verdict\":\"verified\""));
    assert!(text.contains("mu_A"));
    assert!(text.contains("mu_fj_A"));
}

#[test]
fn witness_epsilon_out_of_range_is_usage_error() {
    for eps in ["1", "0", "3/2"] {
        let out = odometer(&["witness", "--epsilon", eps]);
        assert_eq!(out.status.code(), Some(3), "eps={eps}");
    }
}

#[test]
fn sc_gap_default_construction_verifies() {
    let out = odometer(&["verify", "sc-gap"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"verdict\":\"verified\""));
}

#[test]
fn nonatomic_check_refutes_for_example_d() {
    let out = odometer(&["verify", "nonatomic"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("\"verdict\":\"refuted\""));
}

#[test]
fn dc1_reports_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("t1.ndjson");
    let f2 = dir.path().join("t4.ndjson");
    let args = ["verify", "dc1", "--k", "1", "--l", "2", "--samples", "5", "--smallest", "3",
        "--seed", "9"];
    let a = odometer(&[&args[..], &["--threads", "1", "--output", f1.to_str().unwrap()]].concat());
    let b = odometer(&[&args[..], &["--threads", "4", "--output", f2.to_str().unwrap()]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let r1 = std::fs::read(&f1).unwrap();
    let r2 = std::fs::read(&f2).unwrap();
    assert!(!r1.is_empty());
    assert_eq!(r1, r2);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_supplies_the_seed_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# campaign defaults\nseed = 9\nthreads = 1\n").unwrap();
    let base = ["verify", "dc1", "--k", "1", "--l", "2", "--samples", "4", "--smallest", "2"];
    let via_cfg = odometer(&[&base[..], &["--config", cfg.to_str().unwrap()]].concat());
    let via_flag = odometer(&[&base[..], &["--seed", "9", "--threads", "1"]].concat());
    assert_eq!(via_cfg.stdout, via_flag.stdout);
    // a flag overrides the file
    let overridden =
        odometer(&[&base[..], &["--config", cfg.to_str().unwrap(), "--seed", "10"]].concat());
    assert!(stdout(&overridden).contains("\"seed\":\"10\""));
}

#[test]
fn orbit_writes_a_csv_scan_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let out = odometer(&["orbit", "--indicator", "1,1,1,1", "--p", "2", "--steps", "16",
        "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.trim_end().lines().collect();
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[0], "n,norm_pp");
    assert!(lines[16].starts_with("16,"));
}

#[test]
fn bad_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "wat = 1\n").unwrap();
    let out = odometer(&["--config", cfg.to_str().unwrap(), "verify", "claim1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

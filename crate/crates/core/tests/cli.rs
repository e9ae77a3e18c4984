use std::fs;
use std::process::{Command, Output};

fn backscatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_backscatter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("defaults.cfg");
    fs::write(&cfg, "# defaults\nrho = 0.3\nomega2_db = 0\n").unwrap();
    let o = backscatter(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in ["psi = 0.9006", "harvested_energy = 0.00853814968245", "rate = 18051.8871071", "outage_probability = 1"] {
        assert!(text.contains(key), "missing `{key}` in\n{text}");
    }
}

#[test]
fn analyze_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "rho = 1.5\n").unwrap();
    let o = backscatter(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho must satisfy"));

    fs::write(&cfg, "speed = 3\n").unwrap();
    assert_eq!(
        backscatter(&["analyze", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(backscatter(&["analyze", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        backscatter(&["analyze", "--config", "/nonexistent/x.cfg"]).status.code(),
        Some(1)
    );
}

#[test]
fn figure_fig6b_csv_anchor() {
    let o = backscatter(&["figure", "fig6b", "--format", "csv", "--trials", "2000"]);
    assert!(o.status.success());
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (alpha, snr, rate) = (col("alpha"), col("omega2_db"), col("rate_det"));
    let row = reader
        .records()
        .map(|r| r.unwrap())
        .find(|r| r[alpha].parse::<f64>().unwrap() == 0.1 && r[snr].parse::<f64>().unwrap() == 0.0)
        .unwrap();
    let value: f64 = row[rate].parse().unwrap();
    assert!((value - 4536.555_030_48).abs() < 1e-6, "{value}");
}

#[test]
fn csv_cells_round_trip_at_twelve_digits() {
    let o = backscatter(&["figure", "fig7a", "--trials", "1000"]);
    let text = stdout(&o);
    let j = backscatter(&["figure", "fig7a", "--trials", "1000", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for (rec, row) in reader.records().zip(json["rows"].as_array().unwrap()) {
        for (cell, exact) in rec.unwrap().iter().zip(row.as_array().unwrap()) {
            let parsed: f64 = cell.parse().unwrap();
            let exact = exact.as_f64().unwrap();
            let tol = exact.abs() * 5e-12;
            assert!((parsed - exact).abs() <= tol, "{cell} vs {exact}");
        }
    }
}

#[test]
fn json_output_carries_seed_and_params() {
    let o = backscatter(&["sweep", "--axis", "rho", "--range", "0.1:0.9:0.2", "--metrics", "outage_closed,rate_det", "--format", "json", "--seed", "31"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 31);
    assert_eq!(v["columns"], serde_json::json!(["rho", "outage_closed", "rate_det"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["params"]["b"], 1e6);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = backscatter(&["sweep", "--axis", "d1", "--values", "5,10", "--metrics", "harvest_det", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("d1,harvest_det\n5,0.00853814968245\n"));
}

#[test]
fn sweep_row_errors_exit_two() {
    let o = backscatter(&["sweep", "--axis", "alpha", "--values", "0.1,1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
    let o = backscatter(&["sweep", "--axis", "nope", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = backscatter(&["sweep", "--axis", "rho", "--values", "0.3", "--metrics", "speed"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_repeats_byte_for_byte() {
    let args = ["simulate", "--trials", "200000", "--seed", "42", "--set", "psi_override=0.002"];
    let a = backscatter(&args);
    let b = backscatter(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "3"]);
    assert_eq!(backscatter(&with_workers).stdout, a.stdout);
}

#[test]
fn balance_subcommand() {
    let o = backscatter(&["balance", "--g1", "1", "--g2", "1", "--set", "omega1=1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rho = v["rows"][0][2].as_f64().unwrap();
    assert!((rho - 25.0 / (25.0 + 0.45 * 25.0)).abs() < 1e-12);
}

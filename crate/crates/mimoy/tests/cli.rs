//! End-to-end checks of the command-line surface: flags, exit codes and
//! file formats.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimoy"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("net.conf");
    std::fs::write(&path, text).unwrap();
    path
}

const ER_CONF: &str = "N = 1\nM1 = 2\nM2 = 2\nM3 = 2\nmode = er-ua\n";

#[test]
fn simulate_writes_curve_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), ER_CONF);
    let out = dir.path().join("curve.csv");
    let status = bin()
        .args([
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "distributed-cs",
            "--snr-db",
            "0,10",
            "--trials",
            "2000",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3); // header + one row per grid point
    assert_eq!(lines[0], mimoy::harness::CURVE_CSV_HEADER);

    // unknown scheme: exit 2 with the valid-name list on stderr
    let output = bin()
        .args([
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "psycho-cs",
            "--snr-db",
            "0",
            "--trials",
            "10",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("centralized-cs") && stderr.contains("random-gs"));

    // zero trials: config invariant, exit 3
    let status = bin()
        .args([
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "random-cs",
            "--snr-db",
            "0",
            "--trials",
            "0",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // unwritable output: exit 4
    let status = bin()
        .args([
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "random-cs",
            "--snr-db",
            "0",
            "--trials",
            "10",
            "--out",
            "/nonexistent-dir/x.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn simulate_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), ER_CONF);
    let out = dir.path().join("curve.json");
    let status = bin()
        .args([
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "random-gs",
            "--snr-db",
            "5",
            "--trials",
            "500",
            "--out",
            out.to_str().unwrap(),
            "--format",
            "json",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows[0]["scheme"], "random-gs");
    assert_eq!(rows[0]["trials"], 500);
    for key in [
        "scheme", "mode", "n", "m1", "m2", "m3", "rho_th", "snr_db", "trials", "outages",
        "p_hat", "ci_low", "ci_high", "seed",
    ] {
        assert!(rows[0].get(key).is_some(), "missing key {key}");
    }
}

#[test]
fn bounds_ranges_arity_and_exponent_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lb.csv");
    let output = bin()
        .args([
            "bounds", "--rho-th", "1", "--snr-db",
            "0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20",
            "--m", "2,3", "--which", "lb-cs", "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 21);
    for row in rows {
        let p: f64 = row.split(',').nth(10).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&p), "p = {p}");
    }

    // group-wise high-SNR approximation reports its diversity exponent
    let output = bin()
        .args([
            "bounds", "--snr-db", "40,50", "--m", "3", "--which", "hs-lb-gs",
            "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("diversity_exponent=3"), "stdout: {stdout}");

    // cluster-wise upper bound needs three sizes
    let output = bin()
        .args([
            "bounds", "--snr-db", "10", "--m", "2,3", "--which", "ub-cs",
            "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn protocol_ledger_csv() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "N = 1\nM = 3\nmode = er-ua\n");
    let out = dir.path().join("ledger.csv");
    let output = bin()
        .args([
            "protocol",
            "--config",
            conf.to_str().unwrap(),
            "--scheme",
            "distributed-gs",
            "--trials",
            "50",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains(
        "beacons,responses,feedback_msgs,feedback_bits,relay_metric_ops,user_metric_ops"
    ));
    assert_eq!(lines.count(), 50);
    assert!(String::from_utf8_lossy(&output.stdout).contains("decision agreement 50/50"));
}

#[test]
fn dmt_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dmt.csv");
    let status = bin()
        .args([
            "dmt", "--pattern", "cs", "--m", "2,3,4", "--r", "0,1.5,3",
            "--out", out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with(",2")); // d(0) = min(2,3,4)
    assert!(rows[2].ends_with(",0")); // d(3) = 0
}

#[test]
fn reproduce_emits_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "reproduce",
            "fig11",
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--trials-scale",
            "0.002",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["figure"], "fig11");
    let series = manifest["series"].as_array().unwrap();
    // two simulated series plus four analytical companions
    assert_eq!(series.len(), 6);
    for s in series {
        let file = dir.path().join(s["file"].as_str().unwrap());
        assert!(file.exists(), "missing {file:?}");
    }

    let status = bin()
        .args(["reproduce", "fig99", "--out-dir", dir.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn selftest_passes_and_fault_injection_names_the_kernel() {
    let output = bin().args(["selftest"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stdout));

    let output = bin()
        .args(["selftest"])
        .env("MIMOY_SELFTEST_FAULT", "bessel_k1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("bessel_k1"), "stdout: {stdout}");
}

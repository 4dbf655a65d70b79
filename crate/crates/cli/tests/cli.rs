use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qst(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qst"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("QST_OUTPUT_DIR")
        .output()
        .expect("qst runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qst(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// (comment lines, header, data rows)
fn read_csv(path: &Path) -> (Vec<String>, String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut comments = Vec::new();
    let header = loop {
        let l = lines.next().unwrap();
        if l.starts_with('#') {
            comments.push(l.to_string());
        } else {
            break l.to_string();
        }
    };
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (comments, header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn without_timestamp(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with("# generated:")).collect::<Vec<_>>().join("\n")
}

fn summary(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_reports_both_sign_conventions() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["spectrum", "--n", "7", "--omega-max", "10", "--steps", "4"]);
    let (comments, header, rows) = read_csv(&dir.path().join("spectrum_N7.csv"));
    assert_eq!(header, "omega,k,lambda_plus,lambda_minus");
    assert!(comments[0].starts_with("# qst "));
    assert!(comments.iter().any(|c| c.starts_with("# config: {")));
    assert_eq!(rows.len(), 5 * 7);
    // Bipartite chain: flipping the fields mirrors the spectrum.
    for block in rows.chunks(7) {
        for k in 0..7 {
            let plus = num(&block[k][2]);
            let minus = num(&block[6 - k][3]);
            assert!((plus + minus).abs() < 1e-10);
        }
    }
}

#[test]
fn ipr_marks_localized_pairs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["ipr", "--n", "18", "--omega-min", "50", "--omega-max", "50", "--steps", "0"]);
    let (_, header, rows) = read_csv(&dir.path().join("ipr_N18.csv"));
    assert_eq!(header, "omega,k,energy,ipr,role");
    assert_eq!(rows.iter().filter(|r| r[4] == "barrier").count(), 2);
    for r in rows.iter().filter(|r| r[4] != "band") {
        assert!((2.0..=2.2).contains(&num(&r[3])), "{r:?}");
    }
}

#[test]
fn transfer_series_and_peak() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["transfer", "--n", "10", "--omega", "5", "--T", "200", "--dt", "0.5"]);
    let (_, header, rows) = read_csv(&dir.path().join("transfer_N10_w5.csv"));
    assert_eq!(header, "t,abs_f,avg_fidelity,concurrence");
    assert_eq!(rows.len(), 401);
    let s = summary(&dir.path().join("transfer.json"));
    let peak = s["results"]["runs"][0]["peak_avg_fidelity"].as_f64().unwrap();
    let grid_best = rows.iter().map(|r| num(&r[2])).fold(0.0, f64::max);
    assert!(peak >= grid_best - 1e-12 && peak <= 1.0);
    assert_eq!(s["experiment"], "transfer");
    assert_eq!(s["config"]["T"], 200.0);
}

#[test]
fn transfer_accepts_profile_block() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("chain.toml");
    fs::write(&profile, "n_sites = 6\nfields = [0.0, 8.0, 0.0, 0.0, 8.0, 0.0]\n").unwrap();
    ok(dir.path(), &["transfer", "--profile", profile.to_str().unwrap(), "--T", "50"]);
    let explicit = read_csv(&dir.path().join("transfer_N6_profile.csv")).2;
    ok(dir.path(), &["transfer", "--n", "6", "--omega", "8", "--T", "50"]);
    let barrier = read_csv(&dir.path().join("transfer_N6_w8.csv")).2;
    assert_eq!(explicit, barrier);
}

#[test]
fn maxfid_grid_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["maxfid", "--n-min", "10", "--n-max", "12", "--omega-max", "10", "--omega-steps", "2", "--T", "300"]);
    let (_, header, rows) = read_csv(&dir.path().join("maxfid_N10-12.csv"));
    assert_eq!(header, "n,omega,max_avg_fidelity,max_concurrence,t_peak");
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let (f, c) = (num(&r[2]), num(&r[3]));
        assert!((0.5..=1.0).contains(&f));
        assert!((c / 3.0 + c * c / 6.0 + 0.5 - f).abs() < 1e-12);
    }
}

#[test]
fn scaling_slopes_follow_parity() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["scaling", "--points", "6"]);
    let s = summary(&dir.path().join("scaling.json"));
    let fits = s["results"]["fits"].as_array().unwrap();
    let even = fits[0]["slope"].as_f64().unwrap();
    let odd = fits[1]["slope"].as_f64().unwrap();
    assert!((even - 2.0).abs() < 0.1 && (odd - 1.0).abs() < 0.1, "{even} {odd}");
}

#[test]
fn disorder_is_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["disorder", "--n", "8", "--omega", "10", "--b-max", "1", "--b-steps", "2", "--samples", "24", "--T", "500"];
    ok(a.path(), &[&args[..], &["--threads", "1"]].concat());
    ok(b.path(), &[&args[..], &["--threads", "3"]].concat());
    let (comments, header, rows) = read_csv(&a.path().join("disorder_N8.csv"));
    assert_eq!(header, "b,omega,mean,stderr,n_samples,seed");
    assert!(comments.iter().any(|c| c.contains("ChaCha8Rng")));
    assert_eq!(rows.len(), 3);
    assert!(num(&rows[0][3]) < 1e-12);
    assert_eq!(read_csv(&b.path().join("disorder_N8.csv")).2, rows);
}

#[test]
fn leakage_reports_optimum_per_length() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["leakage", "--n", "8,10", "--omega-min", "10", "--omega-max", "30", "--omega-steps", "2", "--samples", "16", "--T", "800"]);
    let rows = read_csv(&dir.path().join("leakage.csv")).2;
    let best = read_csv(&dir.path().join("leakage_optimum.csv")).2;
    assert_eq!((rows.len(), best.len()), (6, 2));
    for b in &best {
        let top = rows.iter().filter(|r| r[0] == b[0]).map(|r| num(&r[2])).fold(f64::MIN, f64::max);
        assert_eq!(num(&b[2]), top);
    }
}

#[test]
fn ebit_writes_one_dataset_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["ebit", "--n", "12", "--omega", "3,6", "--dt", "1"]);
    assert!(stdout.contains("omega=3: peak concurrence"));
    for w in [3, 6] {
        let (comments, header, _) = read_csv(&dir.path().join(format!("ebit_N12_w{w}.csv")));
        assert_eq!(header, "t,abs_p_Nm1,abs_p_N,concurrence");
        assert!(comments.iter().any(|c| c.starts_with("# window: [0, ")));
    }
}

#[test]
fn protocol_small_chain() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["protocol", "--n", "8", "--k1", "12", "--k2", "6", "--storage", "40", "--sample-step", "0.1"]);
    let (_, header, rows) = read_csv(&dir.path().join("protocol_N8_step.csv"));
    assert_eq!(header, "t,omega2,omegaNm1,abs_f,avg_fidelity");
    assert_eq!((num(&rows[0][1]), num(&rows[0][2])), (12.0, 0.0));
    assert_eq!((num(&rows.last().unwrap()[1]), num(&rows.last().unwrap()[2])), (0.0, 12.0));
    let s = summary(&dir.path().join("protocol_N8.json"))["results"]["runs"][0].clone();
    assert!(s["final_avg_fidelity"].as_f64().unwrap() > 0.9);
    assert!(s["max_norm_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn effective_comparison_per_length() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["effective", "--n", "12,13", "--omega-min", "10", "--omega-max", "20", "--steps", "2"]);
    for n in [12, 13] {
        let (_, header, rows) = read_csv(&dir.path().join(format!("effective_N{n}.csv")));
        assert_eq!(header, "omega,gap_exact,gap_effective,ratio");
        assert_eq!(rows.len(), 3);
    }
}

#[test]
fn oracle_check_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["oracle-check"]);
    assert!(stdout.lines().next().unwrap().starts_with("check"));
    assert_eq!(stdout.matches("PASS").count(), 7);
}

#[test]
fn config_file_matches_flags() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(a.path(), &["ebit", "--n", "10", "--omega", "4", "--T", "300"]);
    let cfg = b.path().join("exp.toml");
    fs::write(&cfg, "experiment = \"ebit\"\nn = 10\nomega = [4]\nT = 300\n").unwrap();
    ok(b.path(), &["run", "--config", cfg.to_str().unwrap()]);
    let name = "ebit_N10_w4.csv";
    assert_eq!(without_timestamp(&a.path().join(name)), without_timestamp(&b.path().join(name)));
}

#[test]
fn reruns_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("spectrum_N9.csv");
    ok(dir.path(), &["spectrum", "--n", "9", "--steps", "10"]);
    let first = without_timestamp(&file);
    ok(dir.path(), &["spectrum", "--n", "9", "--steps", "10"]);
    assert_eq!(first, without_timestamp(&file));
}

#[test]
fn summary_flag_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["effective", "--n", "20", "--omega-min", "20", "--omega-max", "20", "--steps", "0", "--summary"]);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["tool"], "qst");
    assert_eq!(v["results"]["at_omega_max"][0]["n_sites"], 20);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_qst"))
        .args(["spectrum", "--n", "4", "--steps", "1"])
        .env("QST_OUTPUT_DIR", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("spectrum_N4.csv").exists());
}

#[test]
fn failures_emit_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["ebit", "--n", "4"], "invalid-input"),
        (&["maxfid", "--no-such-flag"], "usage"),
        (&["run", "--config", "/nonexistent/exp.toml"], "invalid-config"),
    ];
    for (args, kind) in cases {
        let out = qst(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let rec: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
        assert_eq!(rec["error"], kind);
        assert!(rec["message"].as_str().unwrap().len() > 3);
    }
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"spectrum\"\nn = \"many\"\n").unwrap();
    let out = qst(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

//! End-to-end runs of the `g2flow` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn g2flow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2flow")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    // events trail the rows as `# event,<kind>,<t>` comments
    let rows = lines.filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn linear_profile_columns() {
    let tmp = TempDir::new().unwrap();
    let o = g2flow(tmp.path(), &["--out", "s", "structure", "--kind", "linear", "--b0", "2", "--grid", "21"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&tmp.path().join("s/profile.csv"));
    assert_eq!(h, ["t", "A1", "A2", "A3", "B1", "B2", "B3"]);
    assert_eq!(rows.len(), 21);
    let t = column(&h, &rows, "t");
    let a1 = column(&h, &rows, "A1");
    let b1 = column(&h, &rows, "B1");
    for k in 0..t.len() {
        assert!((a1[k] - t[k] / 2.0).abs() <= 1e-14 * (1.0 + t[k]));
        let b = (4.0 + t[k] * t[k] / 4.0).sqrt();
        assert!((b1[k] - b).abs() <= 1e-14 * b);
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("s/structure.json")).unwrap()).unwrap();
    assert_eq!(json["b0"].as_f64(), Some(2.0));
}

#[test]
fn clarke_family_from_profile() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&g2flow(d, &["--out", "s", "structure", "--kind", "bryant-salamon", "--r-max", "5", "--grid", "41"])), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("s/structure.json")).unwrap()).unwrap();
    let t_max = json["t_max"].as_f64().unwrap();
    // same t grid as the profile, minus its t = 0 row
    let t_end = format!("{t_max:.17e}");
    let o = g2flow(
        d,
        &["--out", "x", "--t-end", &t_end, "--grid", "40", "solve", "--kind", "bryant-salamon", "--r-max", "5", "--family", "theta-x1", "--x1", "2"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (ph, prow) = csv(&d.join("s/profile.csv"));
    let (sh, srow) = csv(&d.join("x/solution.csv"));
    let (pt, a, b) = (column(&ph, &prow, "t"), column(&ph, &prow, "A1"), column(&ph, &prow, "B1"));
    let (st, f) = (column(&sh, &srow, "t"), column(&sh, &srow, "f1p"));
    assert_eq!(st.len(), 40);
    let x1 = 2.0;
    for k in 0..st.len() {
        assert!((pt[k + 1] - st[k]).abs() < 1e-12 * t_max);
        let clarke = 2.0 * x1 * a[k + 1].powi(2) / (1.0 + x1 * (b[k + 1].powi(2) - 1.0 / 3.0));
        let got = a[k + 1] * f[k];
        assert!((got - clarke).abs() <= 1e-6 * clarke.abs(), "t={} {got} {clarke}", st[k]);
    }
}

#[test]
fn theta_y0_at_origin_is_theta_zero() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let common = ["--t-end", "4", "--grid", "50", "solve", "--kind", "bryant-salamon", "--r-max", "10"];
    let run = |out: &str, fam: &[&str]| {
        let mut args = vec!["--out", out];
        args.extend(common);
        args.extend(fam);
        assert_eq!(code(&g2flow(d, &args)), 0);
        csv(&d.join(out).join("solution.csv"))
    };
    let (h0, r0) = run("z", &["--family", "theta-zero"]);
    let (h1, r1) = run("y", &["--family", "theta-y0", "--y0", "0"]);
    for name in ["f1p", "f2p", "f3p", "f1m", "f2m", "f3m"] {
        let (u, v) = (column(&h0, &r0, name), column(&h1, &r1, name));
        for (p, q) in u.iter().zip(&v) {
            assert!((p - q).abs() <= 1e-8 * (1.0 + p.abs()), "{name}: {p} vs {q}");
        }
    }
}

#[test]
fn blow_up_exits_with_numeric_code() {
    let tmp = TempDir::new().unwrap();
    let o = g2flow(
        tmp.path(),
        &["--out", "o", "--t-end", "5", "solve", "--kind", "bryant-salamon", "--r-max", "10", "--family", "theta-y0", "--y0", "10"],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("blow-up"));
    // the partial trajectory is still written
    let text = fs::read_to_string(tmp.path().join("o/solution.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# event,blow-up,")), "{text}");
}

#[test]
fn nonpositive_b0_file_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&g2flow(d, &["--out", "s", "structure", "--kind", "linear", "--b0", "1", "--grid", "11"])), 0);
    let path = d.join("s/structure.json");
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    json["b0"] = serde_json::json!(-1.0);
    fs::write(d.join("bad.json"), json.to_string()).unwrap();
    let o = g2flow(d, &["--out", "o", "solve", "--structure", "bad.json", "--family", "theta-zero"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("b0"));
}

#[test]
fn imported_structure_matches_builtin() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&g2flow(d, &["--out", "s", "--grid", "4001", "structure", "--kind", "linear", "--b0", "1", "--t-max", "10"])), 0);
    let base = ["--t-end", "3", "--grid", "30"];
    let mut a = base.to_vec();
    a.extend(["--out", "a", "solve", "--kind", "linear", "--b0", "1", "--family", "theta-y0", "--y0", "0.5"]);
    let mut b = base.to_vec();
    b.extend(["--out", "b", "solve", "--structure", "s/structure.json", "--family", "theta-y0", "--y0", "0.5"]);
    assert_eq!(code(&g2flow(d, &a)), 0);
    let o = g2flow(d, &b);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (ha, ra) = csv(&d.join("a/solution.csv"));
    let (hb, rb) = csv(&d.join("b/solution.csv"));
    let (u, v) = (column(&ha, &ra, "f1p"), column(&hb, &rb, "f1p"));
    for (p, q) in u.iter().zip(&v) {
        assert!((p - q).abs() <= 1e-6 * (1.0 + p.abs()), "{p} vs {q}");
    }
}

#[test]
fn scan_writes_rows_and_rejects_empty_grid() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let o = g2flow(
        d,
        &["--out", "sc", "--t-end", "2", "scan", "--kind", "linear", "--b0", "1", "--family", "theta-y0", "--from", "-1", "--to", "1", "--points", "5"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&d.join("sc/scan.csv"));
    assert_eq!(h, ["param", "exists_to_t_end", "blowup_t", "exit_t", "sup_residual"]);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1] == "true"));
    assert!(column(&h, &rows, "sup_residual").iter().all(|&r| r < 1e-8));

    let o = g2flow(d, &["--out", "e", "scan", "--kind", "linear", "--b0", "1", "--family", "theta-y0", "--from", "0", "--to", "1", "--points", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_passes_and_fails_on_tight_thresholds() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let o = g2flow(d, &["--out", "v", "verify", "--kind", "linear", "--b0", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let (h, rows) = csv(&d.join("v/summary.csv"));
    assert_eq!(h, ["report", "pass", "metric", "value"]);
    assert!(rows.iter().all(|r| r[1] == "true"));
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("v/reports.json")).unwrap()).unwrap();
    assert!(reports.as_array().is_some_and(|a| !a.is_empty()));

    fs::write(d.join("th.json"), r#"{"residual": 1e-30}"#).unwrap();
    let o = g2flow(d, &["--out", "w", "verify", "--kind", "linear", "--b0", "1", "--thresholds", "th.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_keys_are_configuration_errors() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("run.json"), r#"{"structure": {"kind": "linear", "b0": 1, "colour": "red"}}"#).unwrap();
    assert_eq!(code(&g2flow(d, &["--config", "run.json", "--out", "o", "structure"])), 2);
    fs::write(d.join("th.json"), r#"{"residual": 1e-8, "bogus": 1}"#).unwrap();
    assert_eq!(code(&g2flow(d, &["--out", "o", "verify", "--kind", "linear", "--b0", "1", "--thresholds", "th.json"])), 2);
    assert_eq!(code(&g2flow(d, &["--out", "o", "solve", "--kind", "linear", "--b0", "1", "--family", "nonsense"])), 2);
}

#[test]
fn config_file_supplies_flags() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("run.json"),
        r#"{"structure": {"kind": "linear", "b0": 1}, "family": {"kind": "theta-x1", "x1": 3}, "solver": {"t_end": 2}, "outputs": {"grid": 8}}"#,
    )
    .unwrap();
    let o = g2flow(d, &["--config", "run.json", "--out", "o", "solve"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&d.join("o/solution.csv"));
    assert_eq!(rows.len(), 8);
    assert_eq!(column(&h, &rows, "t").last().copied(), Some(2.0));
    // the flag wins over the file
    let o = g2flow(d, &["--config", "run.json", "--out", "p", "--grid", "3", "solve"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv(&d.join("p/solution.csv")).1.len(), 3);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let args = |out: &'static str| {
        vec!["--out", out, "--t-end", "3", "scan", "--kind", "bryant-salamon", "--r-max", "10", "--family", "theta-y0", "--from", "-1.5", "--to", "1.5", "--points", "7"]
    };
    assert_eq!(code(&g2flow(d, &args("a"))), 0);
    assert_eq!(code(&g2flow(d, &args("b"))), 0);
    assert_eq!(fs::read(d.join("a/scan.csv")).unwrap(), fs::read(d.join("b/scan.csv")).unwrap());
}

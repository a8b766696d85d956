//! `g2flow`: build structures, solve instanton families, scan parameters and
//! run the verification battery.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical event (blow-up, failed gate, integrator failure).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{merge, RunConfig};
use g2flow::format::{fmt17, json_f64};
use g2flow::instantons::{
    abelian_connection, abelian_connection_raw, flat_pid, solve_p1, solve_pid, theta_x1, theta_y0, theta_zero,
    InstantonSolution,
};
use g2flow::ode::{EventKind, IntegrateOptions};
use g2flow::singular_ivp::{SolveOptions, DEFAULT_EPS, DEFAULT_ORDER, DEFAULT_TOL};
use g2flow::structures::{
    make_bryant_salamon, make_linear_example_with_horizon, make_su23_structure, Parity, Profile, SeriesR,
    StructureData,
};
use g2flow::verify::{invariance_report_reflected, log_grid, residual_report, run_battery, summary_csv, BatteryConfig, Thresholds};

#[derive(Parser, Debug)]
#[command(name = "g2flow", version, about = "Invariant G2-instantons on cohomogeneity-one coclosed G2-structures")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integrator tolerance (absolute and relative).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Switch point between the boundary series and the integrator.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Order of the boundary series.
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// Number of output samples.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a structure as JSON plus a profile CSV.
    Structure(StructureArgs),
    /// Solve one instanton family.
    Solve {
        #[command(flatten)]
        structure: StructureArgs,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Solve a family over a grid of its parameter.
    Scan {
        #[command(flatten)]
        structure: StructureArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run the verification battery.
    Verify {
        #[command(flatten)]
        structure: StructureArgs,
        /// Thresholds JSON; unknown keys are rejected.
        #[arg(long)]
        thresholds: Option<String>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct StructureArgs {
    /// bryant-salamon, su23, linear or file.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long = "r-max")]
    r_max: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    /// Structure JSON for kind `file`.
    #[arg(long)]
    path: Option<String>,
    /// Shorthand for `--kind file --path <structure>`.
    #[arg(long)]
    structure: Option<String>,
    /// Odd Taylor coefficients of A1 for kind `su23`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a1: Option<Vec<f64>>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct FamilyArgs {
    /// theta-x1, theta-zero, theta-y0, abelian, abelian-raw, flat-plus,
    /// flat-minus, p1 or pid.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long = "a-plus", value_delimiter = ',', allow_hyphen_values = true)]
    a_plus: Option<Vec<f64>>,
    #[arg(long = "a-minus", value_delimiter = ',', allow_hyphen_values = true)]
    a_minus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    f1: Option<Vec<f64>>,
    #[arg(long = "b0-minus", allow_hyphen_values = true)]
    b0_minus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u3: Option<f64>,
}

#[derive(Debug)]
enum Failure {
    Verify(String),
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<g2flow::Error> for Failure {
    fn from(e: g2flow::Error) -> Self {
        use g2flow::Error as E;
        match e {
            E::Malgrange(_) | E::Numerical(_) | E::StepUnderflow { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn cfg_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verify(m) => eprintln!("verification failed: {m}"),
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Numeric(m) => eprintln!("numerical event: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(p) = path else { return Ok(RunConfig::default()) };
    let text = fs::read_to_string(p).map_err(|e| cfg_err(format!("cannot read {}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", p.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    merge(&mut cfg.outputs.dir, cli.out.map(|p| p.to_string_lossy().into_owned()));
    merge(&mut cfg.outputs.grid, cli.grid);
    merge(&mut cfg.solver.tol, cli.tol);
    merge(&mut cfg.solver.eps, cli.eps);
    merge(&mut cfg.solver.order, cli.order);
    merge(&mut cfg.solver.t_end, cli.t_end);
    match cli.command {
        Command::Structure(s) => {
            merge_structure(&mut cfg, s);
            cmd_structure(&cfg)
        }
        Command::Solve { structure, family } => {
            merge_structure(&mut cfg, structure);
            merge_family(&mut cfg, family)?;
            cmd_solve(&cfg)
        }
        Command::Scan { structure, family, values, from, to, points } => {
            merge_structure(&mut cfg, structure);
            merge_family(&mut cfg, family)?;
            merge(&mut cfg.scan.values, values);
            merge(&mut cfg.scan.from, from);
            merge(&mut cfg.scan.to, to);
            merge(&mut cfg.scan.points, points);
            cmd_scan(&cfg)
        }
        Command::Verify { structure, thresholds } => {
            merge_structure(&mut cfg, structure);
            merge(&mut cfg.thresholds, thresholds);
            cmd_verify(&cfg)
        }
    }
}

fn merge_structure(cfg: &mut RunConfig, a: StructureArgs) {
    let s = &mut cfg.structure;
    if a.structure.is_some() {
        s.kind = Some("file".into());
        s.path = a.structure;
    }
    merge(&mut s.kind, a.kind);
    merge(&mut s.r_max, a.r_max);
    merge(&mut s.b0, a.b0);
    merge(&mut s.path, a.path);
    merge(&mut s.a1, a.a1);
    merge(&mut s.t_max, a.t_max);
}

fn triple(name: &str, v: Option<Vec<f64>>) -> CliResult<Option<[f64; 3]>> {
    match v {
        None => Ok(None),
        Some(v) => v.try_into().map(Some).map_err(|v: Vec<f64>| cfg_err(format!("--{name} needs 3 values, got {}", v.len()))),
    }
}

fn merge_family(cfg: &mut RunConfig, a: FamilyArgs) -> CliResult<()> {
    let f = &mut cfg.family;
    merge(&mut f.kind, a.family);
    merge(&mut f.x1, a.x1);
    merge(&mut f.y0, a.y0);
    merge(&mut f.t0, a.t0);
    merge(&mut f.a_plus, triple("a-plus", a.a_plus)?);
    merge(&mut f.a_minus, triple("a-minus", a.a_minus)?);
    merge(&mut f.f1, triple("f1", a.f1)?);
    merge(&mut f.b0_minus, a.b0_minus);
    merge(&mut f.u2, a.u2);
    merge(&mut f.u3, a.u3);
    Ok(())
}

fn normalized(kind: &str) -> String {
    kind.to_ascii_lowercase().replace('-', "_")
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> CliResult<f64> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(cfg_err(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(cfg_err(format!("{name} must be positive, got {v}")))
    }
}

fn build_structure(cfg: &RunConfig) -> CliResult<StructureData> {
    let c = &cfg.structure;
    let kind = normalized(c.kind.as_deref().unwrap_or("bryant_salamon"));
    match kind.as_str() {
        "bryant_salamon" => {
            let r_max = c.r_max.unwrap_or(20.0);
            if !(r_max > 1.0 && r_max <= 1e4) {
                return Err(cfg_err(format!("r_max = {r_max} outside (1, 10000]")));
            }
            Ok(make_bryant_salamon(r_max)?)
        }
        "linear" => {
            let b0 = positive("b0", c.b0.unwrap_or(1.0))?;
            let t_max = positive("t_max", c.t_max.unwrap_or(100.0))?;
            Ok(make_linear_example_with_horizon(b0, t_max)?)
        }
        "su23" => {
            let b0 = positive("b0", c.b0.ok_or_else(|| cfg_err("su23 structure needs b0"))?)?;
            let odd = c.a1.clone().ok_or_else(|| cfg_err("su23 structure needs the a1 coefficients"))?;
            if odd.is_empty() {
                return Err(cfg_err("a1 coefficient list is empty"));
            }
            let mut coeffs = vec![0.0; 2 * odd.len()];
            for (k, v) in odd.iter().enumerate() {
                coeffs[2 * k + 1] = *v;
            }
            let t_max = positive("t_max", c.t_max.unwrap_or(10.0))?;
            let series = SeriesR::new(Parity::Odd, coeffs)?;
            Ok(make_su23_structure(Profile::from_series(series), b0, t_max)?)
        }
        "file" => {
            let path = c.path.as_deref().ok_or_else(|| cfg_err("file structure needs a path"))?;
            let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {path}: {e}")))?;
            Ok(StructureData::import_json(&text).map_err(|e| cfg_err(format!("{path}: {e}")))?)
        }
        other => Err(cfg_err(format!("unknown structure kind '{other}'"))),
    }
}

fn out_dir(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = PathBuf::from(cfg.outputs.dir.as_deref().unwrap_or("."));
    fs::create_dir_all(&dir).map_err(|e| cfg_err(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn grid_size(cfg: &RunConfig, default: usize) -> CliResult<usize> {
    let n = cfg.outputs.grid.unwrap_or(default);
    if !(2..=1_000_000).contains(&n) {
        return Err(cfg_err(format!("grid = {n} outside [2, 1000000]")));
    }
    Ok(n)
}

/// Write all files or none.
fn write_all(files: &[(PathBuf, String)]) -> CliResult<()> {
    for (k, (p, body)) in files.iter().enumerate() {
        if let Err(e) = fs::write(p, body) {
            for (q, _) in &files[..k] {
                let _ = fs::remove_file(q);
            }
            return Err(cfg_err(format!("cannot write {}: {e}", p.display())));
        }
    }
    Ok(())
}

fn cmd_structure(cfg: &RunConfig) -> CliResult<()> {
    let s = build_structure(cfg)?;
    let n = grid_size(cfg, 2001)?;
    let dir = out_dir(cfg)?;
    write_all(&[(dir.join("structure.json"), s.export_json(n) + "\n"), (dir.join("profile.csv"), s.profile_csv(n))])?;
    println!("{}: b0 = {}, b2 = {}, t_max = {}", s.label(), fmt17(s.b0()), fmt17(s.b2()), fmt17(s.t_max()));
    Ok(())
}

fn solve_options(cfg: &RunConfig) -> CliResult<SolveOptions> {
    let eps = in_range("eps", cfg.solver.eps.unwrap_or(DEFAULT_EPS), 1e-6, 0.5)?;
    let tol = in_range("tol", cfg.solver.tol.unwrap_or(DEFAULT_TOL), 1e-15, 1e-3)?;
    let order = cfg.solver.order.unwrap_or(DEFAULT_ORDER);
    if !(1..=30).contains(&order) {
        return Err(cfg_err(format!("order = {order} outside [1, 30]")));
    }
    Ok(SolveOptions { eps, order, integrate: IntegrateOptions::with_tol(tol) })
}

fn t_end(cfg: &RunConfig, s: &StructureData) -> CliResult<f64> {
    let t = positive("t_end", cfg.solver.t_end.unwrap_or(10.0_f64.min(s.t_max())))?;
    if t > s.t_max() {
        return Err(cfg_err(format!("t_end = {t} exceeds the structure horizon {}", fmt17(s.t_max()))));
    }
    Ok(t)
}

fn need(name: &str, v: Option<f64>) -> CliResult<f64> {
    v.ok_or_else(|| cfg_err(format!("family needs --{name}")))
}

/// Family constructor with an optional override of its scanned parameter.
fn build_family(cfg: &RunConfig, s: &StructureData, param: Option<f64>) -> CliResult<InstantonSolution> {
    let f = &cfg.family;
    let kind = normalized(f.kind.as_deref().ok_or_else(|| cfg_err("no family given"))?);
    let opts = solve_options(cfg)?;
    let t_end = t_end(cfg, s)?;
    let sol = match kind.as_str() {
        "theta_x1" => {
            let x1 = param.map_or_else(|| need("x1", f.x1), Ok)?;
            if !(x1 >= 0.0) {
                return Err(cfg_err(format!("x1 must be non-negative, got {x1}")));
            }
            theta_x1(s, x1)?
        }
        "theta_zero" => theta_zero(s)?,
        "theta_y0" => theta_y0(s, param.map_or_else(|| need("y0", f.y0), Ok)?, t_end, &opts)?,
        "abelian" => abelian_connection(s, need("t0", f.t0)?, f.a_plus.ok_or_else(|| cfg_err("family needs --a-plus"))?)?,
        "abelian_raw" => abelian_connection_raw(
            s,
            need("t0", f.t0)?,
            f.a_plus.ok_or_else(|| cfg_err("family needs --a-plus"))?,
            f.a_minus.ok_or_else(|| cfg_err("family needs --a-minus"))?,
        )?,
        "flat_plus" => flat_pid(1)?,
        "flat_minus" => flat_pid(-1)?,
        "p1" => solve_p1(s, f.f1.ok_or_else(|| cfg_err("family needs --f1"))?, t_end, &opts)?,
        "pid" => solve_pid(
            s,
            param.map_or_else(|| need("b0-minus", f.b0_minus), Ok)?,
            f.u2.unwrap_or(0.0),
            f.u3.unwrap_or(0.0),
            t_end,
            &opts,
        )?,
        other => return Err(cfg_err(format!("unknown family '{other}'"))),
    };
    Ok(sol)
}

fn blowup_t(sol: &InstantonSolution) -> Option<f64> {
    sol.trajectory.as_ref().and_then(|tr| tr.event(EventKind::BlowUp)).map(|e| e.t)
}

fn cmd_solve(cfg: &RunConfig) -> CliResult<()> {
    let s = build_structure(cfg)?;
    let sol = build_family(cfg, &s, None)?;
    let t_end = t_end(cfg, &s)?;
    let n = grid_size(cfg, 200)?;
    let (lo, hi) = sol.range();
    let t_hi = t_end.min(hi);
    let grid: Vec<f64> = (1..=n).map(|k| t_hi * k as f64 / n as f64).filter(|t| *t > lo).collect();
    let csv = sol.to_csv(&s, &grid)?;
    let mut side = sol.sidecar_json();
    if let Some(m) = &sol.malgrange {
        side["malgrange"] = m.to_json();
        println!("{}", serde_json::to_string_pretty(&m.to_json()).expect("json"));
    }
    if let Some(tr) = &sol.trajectory {
        let meta: serde_json::Map<String, serde_json::Value> =
            tr.meta.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        side["solver"] = serde_json::Value::Object(meta);
        side["events"] = tr
            .events
            .iter()
            .map(|e| serde_json::json!({ "kind": e.kind.as_str(), "t": json_f64(e.t) }))
            .collect();
    }
    side["t_end"] = json_f64(t_hi);
    let dir = out_dir(cfg)?;
    write_all(&[
        (dir.join("solution.csv"), csv),
        (dir.join("solution.json"), serde_json::to_string_pretty(&side).expect("json") + "\n"),
    ])?;
    if let Some(t) = blowup_t(&sol) {
        return Err(Failure::Numeric(format!("blow-up at t = {} before t_end = {}", fmt17(t), fmt17(t_end))));
    }
    if hi < t_end {
        return Err(Failure::Numeric(format!("solution ends at t = {} before t_end = {}", fmt17(hi), fmt17(t_end))));
    }
    Ok(())
}

fn scan_values(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let c = &cfg.scan;
    let v = if let Some(v) = &c.values {
        v.clone()
    } else {
        match (c.from, c.to, c.points) {
            (Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                n => (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect(),
            },
            (None, None, None) => Vec::new(),
            _ => return Err(cfg_err("scan range needs from, to and points")),
        }
    };
    if v.is_empty() {
        return Err(cfg_err("empty parameter grid"));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(cfg_err(format!("non-finite parameter value {x}")));
    }
    Ok(v)
}

fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var("G2FLOW_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(cfg_err(format!("G2FLOW_THREADS must be a positive integer, got '{s}'"))),
        },
    }
}

struct ScanRow {
    param: f64,
    exists: bool,
    blowup_t: Option<f64>,
    exit_t: Option<f64>,
    sup_residual: Option<f64>,
    error: Option<String>,
}

fn scan_point(cfg: &RunConfig, s: &StructureData, p: f64, t_end: f64) -> ScanRow {
    let mut row = ScanRow { param: p, exists: false, blowup_t: None, exit_t: None, sup_residual: None, error: None };
    let sol = match build_family(cfg, s, Some(p)) {
        Ok(sol) => sol,
        Err(Failure::Config(m) | Failure::Numeric(m) | Failure::Verify(m)) => {
            row.error = Some(m);
            return row;
        }
    };
    let hi = sol.range().1.min(t_end);
    row.exists = sol.range().1 >= t_end;
    row.blowup_t = blowup_t(&sol);
    let th = Thresholds::default();
    if let Some(tr) = sol.trajectory.as_ref().filter(|tr| tr.dim() == 2) {
        // negative y0 lives in the mirror image of R under y -> -y
        let sign = if tr.y.first().is_some_and(|y| y[1] < 0.0) { -1.0 } else { 1.0 };
        if let Ok(r) = invariance_report_reflected(tr, sign, &th) {
            row.exit_t = r.metrics.get("exit_t").copied();
        }
    }
    if hi > 1e-2 {
        match residual_report(s, &sol, &log_grid(1e-2, hi, 60), &th) {
            Ok(r) => row.sup_residual = Some(r.metrics["sup_residual"]),
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    row
}

fn cmd_scan(cfg: &RunConfig) -> CliResult<()> {
    let values = scan_values(cfg)?;
    let kind = normalized(cfg.family.kind.as_deref().ok_or_else(|| cfg_err("no family given"))?);
    if !matches!(kind.as_str(), "theta_x1" | "theta_y0" | "pid") {
        return Err(cfg_err(format!("family '{kind}' has no scan parameter (use theta-x1, theta-y0 or pid)")));
    }
    let s = build_structure(cfg)?;
    let t_end = t_end(cfg, &s)?;
    solve_options(cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| cfg_err(format!("thread pool: {e}")))?;
    let rows: Vec<ScanRow> = pool.install(|| values.par_iter().map(|p| scan_point(cfg, &s, *p, t_end)).collect());
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut csv = String::from("param,exists_to_t_end,blowup_t,exit_t,sup_residual\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(r.param),
            r.exists,
            opt(r.blowup_t),
            opt(r.exit_t),
            opt(r.sup_residual)
        ));
        if let Some(e) = &r.error {
            eprintln!("param {}: {e}", fmt17(r.param));
        }
    }
    let dir = out_dir(cfg)?;
    write_all(&[(dir.join("scan.csv"), csv)])?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} points, {} failed", rows.len(), failed);
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> CliResult<()> {
    let th = match &cfg.thresholds {
        None => Thresholds::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| cfg_err(format!("cannot read {p}: {e}")))?;
            Thresholds::from_json(&text)?
        }
    };
    let s = build_structure(cfg)?;
    if !s.is_su23_symmetric() {
        return Err(cfg_err("the battery needs an SU(2)^3-symmetric structure"));
    }
    let bc = BatteryConfig {
        solve: solve_options(cfg)?,
        t_end: cfg.solver.t_end.unwrap_or(10.0).min(s.t_max()),
        ..BatteryConfig::default()
    };
    let reports = run_battery(&s, &bc, &th)?;
    let json: Vec<serde_json::Value> = reports.iter().map(|r| r.to_json()).collect();
    let dir = out_dir(cfg)?;
    write_all(&[
        (dir.join("reports.json"), serde_json::to_string_pretty(&json).expect("json") + "\n"),
        (dir.join("summary.csv"), summary_csv(&reports)),
    ])?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    for r in &reports {
        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed.join(", ")))
    }
}

//! Quantitative checks on computed instantons.
//!
//! Every report's `pass` flag is a function of its metrics and a fixed
//! [`Thresholds`] value only.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    constraint_value, curvature_direct, curvature_full, curvature_lemma2, minus, plus, ConnectionCoeffs, LieForm,
    Su2Vec, DT,
};
use crate::error::{Error, Result};
use crate::format::{fmt17, json_f64};
use crate::instantons::{
    coefficient_derivative, connection_at, flat_pid, lemma3_residuals, p1_ivp, pid_ivp, theta_x1, theta_y0,
    theta_zero, Bundle, Family, InstantonSolution,
};
use crate::ode::Trajectory;
use crate::singular_ivp::{malgrange_check, SolveOptions};
use crate::structures::StructureData;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), pass: false, metrics: BTreeMap::new(), notes: Vec::new() }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> serde_json::Value {
        let metrics: serde_json::Map<String, serde_json::Value> =
            self.metrics.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        serde_json::json!({ "name": self.name, "pass": self.pass, "metrics": metrics, "notes": self.notes })
    }
}

/// Summary table `report,pass,metric,value`, one row per metric.
pub fn summary_csv(reports: &[Report]) -> String {
    let mut out = String::from("report,pass,metric,value\n");
    for r in reports {
        for (k, v) in &r.metrics {
            out.push_str(&format!("{},{},{},{}\n", r.name, r.pass, k, fmt17(*v)));
        }
    }
    out
}

/// Pass/fail thresholds; loadable from JSON with unknown keys rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub residual: f64,
    pub constraint: f64,
    pub parity_fit: f64,
    pub parity_defect: f64,
    pub parity_param: f64,
    pub abelian_exponent: f64,
    pub invariance_slack: f64,
    pub bubbling_slope_min: f64,
    pub bubbling_slope_max: f64,
    pub convergence_fit: f64,
    pub curvature: f64,
    pub spectrum: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            residual: 1e-8,
            constraint: 1e-12,
            parity_fit: 1e-8,
            parity_defect: 1e-6,
            parity_param: 1e-4,
            abelian_exponent: 0.02,
            invariance_slack: 1e-9,
            bubbling_slope_min: -1.2,
            bubbling_slope_max: -0.8,
            convergence_fit: 0.1,
            curvature: 1e-3,
            spectrum: 1e-8,
        }
    }
}

impl Thresholds {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("thresholds: {e}")))
    }
}

/// `n` points spaced evenly in `log t` on `[a, b]`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| match k {
            0 => a,
            k if k + 1 == n => b,
            _ => (la + (lb - la) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

// ---------------------------------------------------------------------------

/// Sup and mean of the invariant instanton residuals and the constraint.
pub fn residual_report(s: &StructureData, sol: &InstantonSolution, grid: &[f64], th: &Thresholds) -> Result<Report> {
    let (lo, hi) = sol.range();
    if grid.is_empty() {
        return Err(Error::Domain("empty residual grid".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(**t > lo && **t <= hi && **t > 0.0)) {
        return Err(Error::Domain(format!("grid point {t} outside the solution range ({lo}, {hi}]")));
    }
    let mut rep = Report::new(format!("residual/{}", sol.family.as_str()));
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    let mut con: f64 = 0.0;
    let mut worst_t = grid[0];
    for &t in grid {
        let r = lemma3_residuals(s, sol, t)?.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
        if r > sup {
            sup = r;
            worst_t = t;
        }
        sum += r;
        if !sol.is_abelian() {
            con = con.max(constraint_value(&connection_at(sol, t)?, s, t)?.max_abs());
        }
    }
    rep.metric("sup_residual", sup);
    rep.metric("mean_residual", sum / grid.len() as f64);
    rep.metric("sup_constraint", con);
    rep.metric("worst_t", worst_t);
    rep.pass = sup <= th.residual && con <= th.constraint;
    rep.notes.push("derivatives by five-point stencil, step 1e-5*max(t,1)".into());
    Ok(rep)
}

struct Fit {
    /// Coefficients in the scaled variable `t/t_ref`.
    scaled: Vec<f64>,
    powers: Vec<i32>,
    t_ref: f64,
    rel_residual: f64,
}

impl Fit {
    fn coeff(&self, p: i32) -> f64 {
        let k = self.powers.iter().position(|q| *q == p).expect("fitted power");
        self.scaled[k] / self.t_ref.powi(p)
    }
}

/// Normalization for fit metrics; signals below `FIT_FLOOR` (for instance
/// the vanishing correction of a flat connection) are measured absolutely.
const FIT_FLOOR: f64 = 1e-3;

fn data_scale(y: &[f64]) -> f64 {
    y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(FIT_FLOOR)
}

/// Unweighted least squares `y ≈ Σ c_p t^p` in the scaled variable.
fn polyfit(t: &[f64], y: &[f64], powers: &[i32]) -> Result<Fit> {
    if t.len() < powers.len() + 2 {
        return Err(Error::Domain(format!("{} samples are too few for {} coefficients", t.len(), powers.len())));
    }
    let t_ref = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m = DMatrix::from_fn(t.len(), powers.len(), |i, j| (t[i] / t_ref).powi(powers[j]));
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e12) {
        return Err(Error::Numerical(format!("ill-conditioned fit (condition {cond:.3e})")));
    }
    let rhs = DVector::from_column_slice(y);
    let c = svd.solve(&rhs, 0.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let r = &m * &c - &rhs;
    let scale = data_scale(y);
    let rel = (r.norm_squared() / y.len() as f64).sqrt() / scale;
    Ok(Fit { scaled: c.iter().copied().collect(), powers: powers.to_vec(), t_ref, rel_residual: rel })
}

/// Least-squares slope of `log|y|` against `log t`.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

const ODD: [i32; 4] = [1, 3, 5, 7];
const EVEN: [i32; 4] = [0, 2, 4, 6];
const ALL: [i32; 8] = [0, 1, 2, 3, 4, 5, 6, 7];

/// Largest scaled coefficient of the powers of the wrong parity, relative to
/// the data scale.
fn parity_defect(t: &[f64], y: &[f64], wrong: i32) -> Result<f64> {
    let f = polyfit(t, y, &ALL)?;
    let scale = data_scale(y);
    Ok(f.powers.iter().zip(&f.scaled).filter(|(p, _)| *p % 2 == wrong).fold(0.0f64, |m, (_, c)| m.max(c.abs())) / scale)
}

/// Boundary-pattern fit on a log-spaced grid in `[t_fit/100, t_fit]`:
/// `P₁`: `f⁺` odd, `f⁻` even with `f⁻(0) = 0`; `P_id`: `t f⁺` even with value 2 and
/// `f⁻` even; abelian: `c^±` even with `c(0) = 0` and the leading exponents.
pub fn parity_report(s: &StructureData, sol: &InstantonSolution, t_fit: f64, th: &Thresholds) -> Result<Report> {
    let grid = log_grid(t_fit * 1e-2, t_fit, 40);
    let mut rep = Report::new(format!("parity/{}", sol.family.as_str()));
    let mut fit_res: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut param_err: f64 = 0.0;
    let vals: Vec<([f64; 3], [f64; 3])> = grid.iter().map(|&t| sol.f_values(s, t)).collect::<Result<_>>()?;
    let raw: Vec<([f64; 3], [f64; 3])> = grid.iter().map(|&t| sol.coefficients(t)).collect::<Result<_>>()?;
    if sol.is_abelian() {
        let near = log_grid(1e-3, 1e-2, 20);
        let near_vals: Vec<([f64; 3], [f64; 3])> = near.iter().map(|&t| sol.coefficients(t)).collect::<Result<_>>()?;
        for i in 0..3 {
            let p: Vec<f64> = raw.iter().map(|v| v.0[i]).collect();
            if p.iter().any(|v| *v != 0.0) {
                defect = defect.max(parity_defect(&grid, &p, 1)?);
                let f = polyfit(&grid, &p, &[2, 4, 6])?;
                fit_res = fit_res.max(f.rel_residual);
                let e = loglog_slope(&near, &near_vals.iter().map(|v| v.0[i]).collect::<Vec<_>>());
                rep.metric(&format!("exponent_plus_{}", i + 1), e);
                param_err = param_err.max((e - 2.0).abs());
            }
            let m: Vec<f64> = near_vals.iter().map(|v| v.1[i]).collect();
            if m.iter().any(|v| *v != 0.0) {
                let e = loglog_slope(&near, &m);
                rep.metric(&format!("exponent_minus_{}", i + 1), e);
                param_err = param_err.max((e + 4.0).abs());
            }
        }
        rep.metric("fit_residual", fit_res);
        rep.metric("parity_defect", defect);
        rep.metric("exponent_error", param_err);
        rep.pass = fit_res <= th.parity_fit && defect <= th.parity_defect && param_err <= th.abelian_exponent;
        rep.notes.push("exponents fitted on [1e-3, 1e-2]".into());
        return Ok(rep);
    }
    let comps = if matches!(sol.family, Family::Su22General) { 3 } else { 1 };
    for i in 0..comps {
        let p: Vec<f64> = vals.iter().map(|v| v.0[i]).collect();
        let m: Vec<f64> = vals.iter().map(|v| v.1[i]).collect();
        let idx = i + 1;
        match sol.bundle {
            Bundle::P1 => {
                if p.iter().all(|v| *v == 0.0) {
                    rep.metric(&format!("x1_{idx}"), 0.0);
                    continue;
                }
                let f = polyfit(&grid, &p, &ODD)?;
                fit_res = fit_res.max(f.rel_residual);
                defect = defect.max(parity_defect(&grid, &p, 0)?);
                let x1 = f.coeff(1);
                rep.metric(&format!("x1_{idx}"), x1);
                let expected = sol.param("x1").or_else(|| sol.param(&format!("f1_{idx}")));
                if let Some(e) = expected {
                    param_err = param_err.max((x1 - e).abs() / e.abs().max(1.0));
                }
                if m.iter().any(|v| *v != 0.0) {
                    let g = polyfit(&grid, &m, &[2, 4, 6])?;
                    fit_res = fit_res.max(g.rel_residual);
                    defect = defect.max(parity_defect(&grid, &m, 1)?);
                }
            }
            Bundle::Pid => {
                // t f⁺ = 2 + x₁t² + … is even
                let q: Vec<f64> = grid.iter().zip(&p).map(|(t, v)| t * v).collect();
                let f = polyfit(&grid, &q, &EVEN)?;
                fit_res = fit_res.max(f.rel_residual);
                defect = defect.max(parity_defect(&grid, &q, 1)?);
                param_err = param_err.max((f.coeff(0) - 2.0).abs() / 2.0);
                rep.metric(&format!("x1_{idx}"), f.coeff(2));
                let y0 = if m.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    let g = polyfit(&grid, &m, &EVEN)?;
                    fit_res = fit_res.max(g.rel_residual);
                    defect = defect.max(parity_defect(&grid, &m, 1)?);
                    g.coeff(0)
                };
                rep.metric(&format!("y0_{idx}"), y0);
                let expected = match sol.family {
                    Family::ThetaZero => Some(0.0),
                    Family::ThetaY0 => sol.param("y0"),
                    Family::Su22General => sol.param("b0_minus"),
                    _ => None,
                };
                if let Some(e) = expected {
                    param_err = param_err.max((y0 - e).abs() / e.abs().max(1.0));
                }
            }
        }
    }
    rep.metric("fit_residual", fit_res);
    rep.metric("parity_defect", defect);
    rep.metric("parameter_error", param_err);
    rep.pass = fit_res <= th.parity_fit && defect <= th.parity_defect && param_err <= th.parity_param;
    Ok(rep)
}

/// Containment of a `(x⁺, x⁻)` trajectory in `[0,1]²`, checked at the samples
/// and at the midpoints of consecutive samples.
pub fn invariance_report(traj: &Trajectory, th: &Thresholds) -> Result<Report> {
    invariance_report_reflected(traj, 1.0, th)
}

/// As [`invariance_report`] with `x⁻` multiplied by `sign` first, so that
/// trajectories starting below the `x⁻ = 0` line are checked against the
/// mirror image of the region.
pub fn invariance_report_reflected(traj: &Trajectory, sign: f64, th: &Thresholds) -> Result<Report> {
    if traj.dim() != 2 {
        return Err(Error::Domain(format!("expected a (x+, x-) trajectory, got dimension {}", traj.dim())));
    }
    let mut rep = Report::new("invariance");
    let mut pts: Vec<(f64, Vec<f64>)> = traj.t.iter().copied().zip(traj.y.iter().cloned()).collect();
    for w in traj.t.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        if let Some(y) = traj.eval(m) {
            pts.push((m, y));
        }
    }
    for (_, y) in pts.iter_mut() {
        y[1] *= sign;
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (mut pmin, mut pmax, mut mmin, mut mmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let slack = th.invariance_slack;
    let mut exit = None;
    for (t, y) in &pts {
        pmin = pmin.min(y[0]);
        pmax = pmax.max(y[0]);
        mmin = mmin.min(y[1]);
        mmax = mmax.max(y[1]);
        let inside = y.iter().all(|v| *v >= -slack && *v <= 1.0 + slack);
        if !inside && exit.is_none() {
            exit = Some(*t);
        }
    }
    rep.metric("min_x_plus", pmin);
    rep.metric("max_x_plus", pmax);
    rep.metric("min_x_minus", mmin);
    rep.metric("max_x_minus", mmax);
    rep.metric("t_end", traj.t_end());
    if let Some(t) = exit {
        rep.metric("exit_t", t);
        rep.notes.push(format!("left [0,1]^2 at t = {}", fmt17(t)));
    }
    rep.pass = exit.is_none();
    Ok(rep)
}

/// Trajectory in `(x⁺, x⁻)` sampled from an SU(2)³ solution.
pub fn pm_samples(sol: &InstantonSolution, grid: &[f64]) -> Result<Trajectory> {
    let mut tr = Trajectory::default();
    for &t in grid {
        let (p, m) = sol.coefficients(t)?;
        tr.t.push(t);
        tr.y.push(vec![p[0], m[0]]);
    }
    Ok(tr)
}

/// ASD profile `λt²/(1 + λt²)`.
pub fn asd_profile(lambda: f64, t: f64) -> f64 {
    lambda * t * t / (1.0 + lambda * t * t)
}

fn asd_profile_derivative(lambda: f64, t: f64) -> f64 {
    let q = 1.0 + lambda * t * t;
    2.0 * lambda * t / (q * q)
}

/// Scale constant `c` with `A x = (c t²/2)/(1 + c t²/2 + …)`, from a fit of
/// `t²/(A x) = 2/c + p₁t² + p₂t⁴` on `[10⁻³, 10⁻²]`.
pub fn bubbling_constant(sol: &InstantonSolution) -> Result<f64> {
    let grid = log_grid(1e-3, 1e-2, 24);
    let y: Vec<f64> = grid.iter().map(|&t| Ok(t * t / sol.coefficients(t)?.0[0])).collect::<Result<_>>()?;
    let f = polyfit(&grid, &y, &[0, 2, 4])?;
    Ok(2.0 / f.coeff(0))
}

/// Rescaled `θ^{x₁}` against the ASD profile on the unit ball, with
/// `δ = √(2λ/c)`. Metrics: `c`, `δ`, and sup distances of the profile and its
/// radial derivative.
pub fn bubbling_report(s: &StructureData, x1: f64, lambda: f64, radii: &[f64], th: &Thresholds) -> Result<Report> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let sol = theta_x1(s, x1)?;
    let c = bubbling_constant(&sol)?;
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("scale constant c = {c} is not positive")));
    }
    let delta = (2.0 * lambda / c).sqrt();
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for &r in radii {
        if r <= 0.0 {
            continue;
        }
        let t = delta * r;
        let v = sol.coefficients(t)?.0[0];
        d0 = d0.max((v - asd_profile(lambda, r)).abs());
        let dv = coefficient_derivative(&sol, t)?[1].a_plus[0].0[0] * delta;
        d1 = d1.max((dv - asd_profile_derivative(lambda, r)).abs());
    }
    let mut rep = Report::new(format!("bubbling/x1={}", fmt17(x1)));
    rep.metric("c", c);
    rep.metric("delta", delta);
    rep.metric("sup_distance", d0);
    rep.metric("sup_derivative_distance", d1);
    rep.metric("scaled_bound", d0 * c / (lambda * lambda));
    rep.pass = d0.is_finite() && d1.is_finite();
    let _ = th;
    Ok(rep)
}

/// Bubbling over several `x₁`: distances strictly decreasing, `δ` decreasing,
/// and the log-log slope of the distance against `c` within the thresholds.
pub fn bubbling_sweep_report(s: &StructureData, x1s: &[f64], lambda: f64, th: &Thresholds) -> Result<Report> {
    let radii: Vec<f64> = (1..=200).map(|k| k as f64 / 200.0).collect();
    let reps: Vec<Report> = x1s.iter().map(|&x| bubbling_report(s, x, lambda, &radii, th)).collect::<Result<_>>()?;
    let c: Vec<f64> = reps.iter().map(|r| r.metrics["c"]).collect();
    let d: Vec<f64> = reps.iter().map(|r| r.metrics["sup_distance"]).collect();
    let dl: Vec<f64> = reps.iter().map(|r| r.metrics["delta"]).collect();
    let mut rep = Report::new("bubbling");
    for (k, r) in reps.iter().enumerate() {
        rep.metric(&format!("c_{k}"), c[k]);
        rep.metric(&format!("sup_distance_{k}"), d[k]);
        rep.metric(&format!("sup_derivative_distance_{k}"), r.metrics["sup_derivative_distance"]);
        rep.metric(&format!("delta_{k}"), dl[k]);
    }
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    let delta_decreasing = dl.windows(2).all(|w| w[1] < w[0]);
    let slope = loglog_slope(&c, &d);
    rep.metric("loglog_slope", slope);
    rep.metric("strictly_decreasing", decreasing as i32 as f64);
    rep.pass = decreasing && delta_decreasing && slope >= th.bubbling_slope_min && slope <= th.bubbling_slope_max;
    rep.notes.push(format!("lambda = {}", fmt17(lambda)));
    Ok(rep)
}

/// Sup over a window of `|A x^{(x₁)} − A x₀|` for each `x₁`, strictly
/// decreasing and fitted to `c₁/(1 + x₁c₂)` via `1/d = 1/c₁ + (c₂/c₁)x₁`.
pub fn convergence_report(s: &StructureData, x1s: &[f64], window: (f64, f64), th: &Thresholds) -> Result<Report> {
    let (ta, tb) = window;
    if !(ta > 0.0 && tb > ta && tb <= s.t_max()) {
        return Err(Error::Domain(format!("window [{ta}, {tb}] outside (0, {}]", s.t_max())));
    }
    let z = theta_zero(s)?;
    let grid: Vec<f64> = (0..=400).map(|k| ta + (tb - ta) * k as f64 / 400.0).collect();
    let base: Vec<f64> = grid.iter().map(|&t| Ok(z.coefficients(t)?.0[0])).collect::<Result<_>>()?;
    let mut rep = Report::new("convergence");
    let mut d = Vec::new();
    for (k, &x1) in x1s.iter().enumerate() {
        let sol = theta_x1(s, x1)?;
        let mut sup: f64 = 0.0;
        for (t, b) in grid.iter().zip(&base) {
            sup = sup.max((sol.coefficients(*t)?.0[0] - b).abs());
        }
        rep.metric(&format!("sup_difference_{k}"), sup);
        d.push(sup);
    }
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    // linear fit of 1/d against x₁
    let n = x1s.len() as f64;
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let mx = x1s.iter().sum::<f64>() / n;
    let my = inv.iter().sum::<f64>() / n;
    let sxy: f64 = x1s.iter().zip(&inv).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = x1s.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let icpt = my - slope * mx;
    let c1 = 1.0 / icpt;
    let c2 = slope * c1;
    let fit_err = x1s
        .iter()
        .zip(&d)
        .map(|(x, v)| ((c1 / (1.0 + x * c2)) - v).abs() / v)
        .fold(0.0f64, f64::max);
    rep.metric("c1", c1);
    rep.metric("c2", c2);
    rep.metric("fit_residual", fit_err);
    rep.pass = decreasing && c1 > 0.0 && c2 > 0.0 && fit_err <= th.convergence_fit;
    Ok(rep)
}

/// Limit of the connection coefficients at the singular orbit.
fn boundary_connection(s: Option<&StructureData>, sol: &InstantonSolution) -> Result<([f64; 3], [f64; 3])> {
    let b0 = || s.map(|s| s.b0()).ok_or_else(|| Error::Precondition("structure needed for b0".into()));
    Ok(match (sol.family, sol.bundle) {
        (Family::ThetaX1, _) | (Family::Su22General, Bundle::P1) => ([0.0; 3], [0.0; 3]),
        (Family::ThetaZero, _) => ([1.0; 3], [0.0; 3]),
        (Family::ThetaY0, _) => ([1.0; 3], [b0()? * sol.param("y0").unwrap_or(0.0); 3]),
        (Family::Su22General, Bundle::Pid) => ([1.0; 3], [b0()? * sol.param("b0_minus").unwrap_or(0.0); 3]),
        (Family::FlatPlus, _) => ([1.0; 3], [1.0; 3]),
        (Family::FlatMinus, _) => ([1.0; 3], [-1.0; 3]),
        (Family::Abelian, _) => return Err(Error::Precondition("curvature limit needs a non-abelian solution".into())),
    })
}

fn block_distance(f: &LieForm<f64>, g: &LieForm<f64>, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|(a, b)| f.coeff(&[*a, *b]).sub(&g.coeff(&[*a, *b])).max_abs()).fold(0.0, f64::max)
}

/// Curvature near the singular orbit against the curvature of the boundary
/// connection, blockwise, at `t ∈ {10⁻², 10⁻³, 10⁻⁴}`.
///
/// For the canonical limit `a⁺ = T_i`, `a⁻ = 0` the `η⁻∧η⁻` block of the
/// target is `−2T_i` on each `η_j⁻∧η_k⁻` (ordered cyclic pairs); for `P₁`
/// solutions the target is zero.
pub fn curvature_boundary_report(s: Option<&StructureData>, sol: &InstantonSolution, th: &Thresholds) -> Result<Report> {
    let (bp, bm) = boundary_connection(s, sol)?;
    let target = curvature_lemma2(&ConnectionCoeffs::diagonal(bp, bm));
    let mm: Vec<(usize, usize)> = (0..3).map(|i| (minus((i + 1) % 3).min(minus((i + 2) % 3)), minus((i + 1) % 3).max(minus((i + 2) % 3)))).collect();
    let pp: Vec<(usize, usize)> = (0..3).map(|i| (plus((i + 1) % 3).min(plus((i + 2) % 3)), plus((i + 1) % 3).max(plus((i + 2) % 3)))).collect();
    let mixed: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (plus(i), minus(j)))).collect();
    let dt: Vec<(usize, usize)> = (1..7).map(|k| (DT, k)).collect();
    let mut rep = Report::new(format!("curvature_boundary/{}", sol.family.as_str()));
    let mut last = (f64::NAN, f64::NAN);
    for (k, t) in [1e-2, 1e-3, 1e-4].iter().enumerate() {
        let v = coefficient_derivative(sol, *t)?;
        let f = curvature_full(&v[0], &v[1]);
        let dmm = block_distance(&f, &target, &mm);
        let other = block_distance(&f, &target, &pp).max(block_distance(&f, &target, &mixed)).max(block_distance(&f, &target, &dt));
        rep.metric(&format!("minus_minus_distance_{k}"), dmm);
        rep.metric(&format!("other_blocks_{k}"), other);
        last = (dmm, other);
    }
    rep.metric("target_minus_minus", target.coeff(&[mm[0].0, mm[0].1]).0[0]);
    rep.pass = last.0 <= th.curvature && last.1 <= th.curvature;
    rep.notes.push("target: curvature of the limiting connection at t = 0; ordered cyclic pairs (j,k)".into());
    Ok(rep)
}

/// Random rational connections: brute-force curvature against the closed form.
pub fn algebra_oracle_report(count: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_q = |rng: &mut ChaCha8Rng| BigRational::new(BigInt::from(rng.random_range(-9i64..=9)), BigInt::from(rng.random_range(1i64..=5)));
    let mut mismatches = 0usize;
    for _ in 0..count {
        let mut v = || Su2Vec::new(rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        let c = ConnectionCoeffs { a_plus: [v(), v(), v()], a_minus: [v(), v(), v()] };
        if curvature_direct(&c) != curvature_lemma2(&c) {
            mismatches += 1;
        }
    }
    let mut flat_nonzero = 0;
    for sign in [1i64, -1] {
        let one = BigRational::from_integer(BigInt::from(1));
        let m = BigRational::from_integer(BigInt::from(sign));
        let c = ConnectionCoeffs::diagonal([one.clone(), one.clone(), one], [m.clone(), m.clone(), m]);
        if !curvature_direct(&c).is_zero() {
            flat_nonzero += 1;
        }
    }
    let mut rep = Report::new("algebra_oracle");
    rep.metric("samples", count as f64);
    rep.metric("mismatches", mismatches as f64);
    rep.metric("flat_nonzero", flat_nonzero as f64);
    rep.pass = mismatches == 0 && flat_nonzero == 0;
    rep.notes.push("exact rational arithmetic".into());
    rep
}

/// Spectra of the linearised boundary problems on `P₁` and `P_id`.
pub fn spectrum_report(s: &StructureData, th: &Thresholds) -> Result<Report> {
    let mut rep = Report::new("spectra");
    let p1 = p1_ivp(s, [0.3, -0.2, 0.5])?;
    let r1 = malgrange_check(&p1.ivp, 1e-8)?;
    let mut e1: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let want = if i != j { 0.0 } else if i < 3 { -2.0 } else { -6.0 };
            e1 = e1.max((r1.jacobian[(i, j)] - want).abs());
        }
    }
    let (pid, _) = pid_ivp(s, 0.7, 0.1, -0.2)?;
    let r2 = malgrange_check(&pid, 1e-8)?;
    let ev = r2.sorted_eigenvalues();
    let want = [-8.0, -8.0, -6.0, -2.0, 0.0, 0.0];
    let e2 = ev.iter().zip(want).map(|(z, w)| (z.re - w).abs().max(z.im.abs())).fold(0.0f64, f64::max);
    rep.metric("p1_jacobian_error", e1);
    rep.metric("pid_spectrum_error", e2);
    rep.metric("p1_statement_variant_matches", p1.matches_statement as i32 as f64);
    rep.metric("p1_proof_variant_matches", p1.matches_proof as i32 as f64);
    rep.pass = e1 <= th.spectrum && e2 <= th.spectrum && r1.gate_pass && r2.gate_pass;
    Ok(rep)
}

/// Parameters of the default battery.
#[derive(Clone)]
pub struct BatteryConfig {
    pub x1s: Vec<f64>,
    /// Multiples of `1/b₀`.
    pub y0_fractions: Vec<f64>,
    pub t_end: f64,
    pub residual_window: (f64, f64),
    pub solve: SolveOptions,
    pub invariance_t_end: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            x1s: vec![0.0, 1.0, 10.0],
            y0_fractions: vec![0.0, 0.5, -0.5, 1.0, -1.0],
            t_end: 10.0,
            residual_window: (1e-2, 10.0),
            solve: SolveOptions::default(),
            invariance_t_end: 50.0,
        }
    }
}

/// The default verification battery on one SU(2)³-symmetric structure.
pub fn run_battery(s: &StructureData, cfg: &BatteryConfig, th: &Thresholds) -> Result<Vec<Report>> {
    let mut out = vec![algebra_oracle_report(200, 7), spectrum_report(s, th)?];
    let t_hi = cfg.residual_window.1.min(s.t_max());
    let grid = log_grid(cfg.residual_window.0, t_hi, 60);
    let mut sols = Vec::new();
    for &x1 in &cfg.x1s {
        sols.push(theta_x1(s, x1)?);
    }
    sols.push(theta_zero(s)?);
    let t_end = cfg.t_end.min(s.t_max());
    for &f in &cfg.y0_fractions {
        sols.push(theta_y0(s, f / s.b0(), t_end, &cfg.solve)?);
    }
    for sol in &sols {
        let mut r = residual_report(s, sol, &grid, th)?;
        r.name = format!("{}({})", r.name, params_label(sol));
        out.push(r);
    }
    for sol in sols.iter().filter(|s| s.param("x1").is_none_or(|x| x > 0.0)) {
        // θ^{x₁} varies on the scale 1/√x₁; keep the fit window inside it
        let t_fit = 0.1 * sol.param("x1").map_or(1.0, |x| 1.0f64.min(1.0 / x.sqrt()));
        let mut r = parity_report(s, sol, t_fit, th)?;
        r.name = format!("{}({})", r.name, params_label(sol));
        out.push(r);
    }
    for sol in sols.iter().filter(|s| s.family == Family::ThetaX1) {
        let mut r = curvature_boundary_report(Some(s), sol, th)?;
        r.name = format!("{}({})", r.name, params_label(sol));
        out.push(r);
    }
    for sign in [1, -1] {
        let f = flat_pid(sign)?;
        out.push(curvature_boundary_report(None, &f, th)?);
    }
    let inv_end = cfg.invariance_t_end.min(s.t_max());
    for frac in [0.1, 0.5, 0.9] {
        let sol = theta_y0(s, frac / s.b0(), inv_end, &cfg.solve)?;
        let mut r = invariance_report(sol.trajectory.as_ref().expect("trajectory"), th)?;
        r.name = format!("invariance(y0={}/b0)", fmt17(frac));
        out.push(r);
    }
    out.push(bubbling_sweep_report(s, &[10.0, 100.0, 1000.0, 10000.0], 1.0, th)?);
    if s.t_max() >= 5.0 {
        out.push(convergence_report(s, &[1.0, 10.0, 100.0], (1.0, 5.0), th)?);
    }
    Ok(out)
}

fn params_label(sol: &InstantonSolution) -> String {
    sol.params.iter().map(|(k, v)| format!("{k}={}", fmt17(*v))).collect::<Vec<_>>().join(";")
}

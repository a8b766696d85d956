//! Explicit instanton families, the diagonal instanton ODEs, and the
//! singular-orbit reductions for the bundles `P₁` and `P_id`.
//!
//! Connections are diagonal, `a_i^± = c_i^± T_i`; solutions store the scalar
//! coefficients `c_i^±`. The `f`-coordinates are `f_i⁺ = c_i⁺/A_i` and
//! `f_i⁻ = c_i⁻/B_i`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{bracket, cyclic, ConnectionCoeffs, Su2Vec};
use crate::error::{Error, Result};
use crate::format::{csv_row, json_f64};
use crate::jet::Jet;
use crate::ode::Trajectory;
use crate::quadrature::{Antiderivative, Func};
use crate::singular_ivp::{malgrange_check, solve_singular, MalgrangeReport, SingularIVP, SingularSystem, SolveOptions};
use crate::structures::{ProfileState, SeriesR, StructureData, T_SWITCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Abelian,
    ThetaX1,
    ThetaZero,
    ThetaY0,
    FlatPlus,
    FlatMinus,
    Su22General,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Abelian => "abelian",
            Family::ThetaX1 => "theta_x1",
            Family::ThetaZero => "theta_zero",
            Family::ThetaY0 => "theta_y0",
            Family::FlatPlus => "flat_plus",
            Family::FlatMinus => "flat_minus",
            Family::Su22General => "su22_general",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bundle {
    P1,
    Pid,
}

impl Bundle {
    pub fn as_str(&self) -> &'static str {
        match self {
            Bundle::P1 => "P1",
            Bundle::Pid => "Pid",
        }
    }
}

/// Diagonal connection coefficients `(c⁺, c⁻)` at one time.
pub type Diag = ([f64; 3], [f64; 3]);
pub type DiagEvaluator = Arc<dyn Fn(f64) -> Result<Diag> + Send + Sync>;
/// Time-dependent vector field that may reject its arguments.
pub type VectorField = Arc<dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Tag attached to `θ_{y₀}` solutions with `|y₀| > 1/b₀`.
pub const OUTSIDE_PROVEN_FAMILY: &str = "outside_proven_family";

#[derive(Clone)]
pub struct InstantonSolution {
    pub family: Family,
    pub bundle: Bundle,
    pub params: BTreeMap<String, f64>,
    pub tags: Vec<String>,
    pub structure_label: Option<String>,
    pub trajectory: Option<Trajectory>,
    pub malgrange: Option<MalgrangeReport>,
    eval: DiagEvaluator,
    t_min: f64,
    t_max: f64,
}

impl std::fmt::Debug for InstantonSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InstantonSolution")
            .field("family", &self.family)
            .field("bundle", &self.bundle)
            .field("params", &self.params)
            .field("range", &(self.t_min, self.t_max))
            .finish()
    }
}

impl InstantonSolution {
    fn new(family: Family, bundle: Bundle, params: &[(&str, f64)], eval: DiagEvaluator, t_max: f64) -> Self {
        InstantonSolution {
            family,
            bundle,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            tags: Vec::new(),
            structure_label: None,
            trajectory: None,
            malgrange: None,
            eval,
            t_min: 0.0,
            t_max,
        }
    }

    fn on(mut self, s: &StructureData) -> Self {
        self.structure_label = Some(s.label().to_string());
        self
    }

    pub fn is_abelian(&self) -> bool {
        self.family == Family::Abelian
    }

    /// Open-closed range `(t_min, t_max]` on which the solution is defined.
    pub fn range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Scalar coefficients `(c⁺, c⁻)` at `t`.
    pub fn coefficients(&self, t: f64) -> Result<Diag> {
        let tol = 1e-12 * self.t_max.abs().max(1.0);
        if !(t > self.t_min && t <= self.t_max + tol) {
            return Err(Error::Domain(format!(
                "t = {t} outside the solution range ({}, {}]",
                self.t_min, self.t_max
            )));
        }
        (self.eval)(t)
    }

    /// `f`-coordinates at `t`.
    pub fn f_values(&self, s: &StructureData, t: f64) -> Result<Diag> {
        let (p, m) = self.coefficients(t)?;
        let st = s.state(t);
        Ok(([0, 1, 2].map(|i| p[i] / st.a[i]), [0, 1, 2].map(|i| m[i] / st.b[i])))
    }

    /// JSON sidecar `{family, params, bundle, structure_label}`.
    pub fn sidecar_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> =
            self.params.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        serde_json::json!({
            "family": self.family.as_str(),
            "params": params,
            "bundle": self.bundle.as_str(),
            "structure_label": self.structure_label,
            "tags": self.tags,
        })
    }

    /// CSV `t,f1p,f2p,f3p,f1m,f2m,f3m,residual_max` on the given times.
    pub fn to_csv(&self, s: &StructureData, grid: &[f64]) -> Result<String> {
        let mut out = String::from("t,f1p,f2p,f3p,f1m,f2m,f3m,residual_max\n");
        for &t in grid {
            let (p, m) = self.f_values(s, t)?;
            let r = residual_max(s, self, t)?;
            let row = [t, p[0], p[1], p[2], m[0], m[1], m[2], r];
            out.push_str(&csv_row(&row));
            out.push('\n');
        }
        if let Some(tr) = &self.trajectory {
            for e in &tr.events {
                out.push_str(&format!("# event,{},{}\n", e.kind.as_str(), crate::format::fmt17(e.t)));
            }
        }
        Ok(out)
    }
}

/// Connection at `t` as Lie-algebra-valued coefficients `a_i^± = c_i^± T_i`.
pub fn connection_at(sol: &InstantonSolution, t: f64) -> Result<ConnectionCoeffs<f64>> {
    let (p, m) = sol.coefficients(t)?;
    Ok(ConnectionCoeffs::diagonal(p, m))
}

/// Abelian connection embedded as `a_i^± = c_i^± T₃`.
pub fn connection_at_along_t3(sol: &InstantonSolution, t: f64) -> Result<ConnectionCoeffs<f64>> {
    let (p, m) = sol.coefficients(t)?;
    let e = |c: f64| Su2Vec::new(0.0, 0.0, c);
    Ok(ConnectionCoeffs { a_plus: p.map(e), a_minus: m.map(e) })
}

fn require_symmetric(s: &StructureData) -> Result<()> {
    if !s.is_su23_symmetric() {
        return Err(Error::Precondition(format!("structure '{}' is not SU(2)^3-symmetric", s.label())));
    }
    Ok(())
}

fn positive_t(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("the instanton equations need t > 0, got {t}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ODE right-hand sides

/// `(x, y) ↦ (ẋ, ẏ)` with `ẋ = F x + y² − x²`, `ẏ = (2x − G) y`.
pub fn su23_rhs(s: &StructureData) -> Result<VectorField> {
    require_symmetric(s)?;
    let cf = s.coefficients();
    Ok(Arc::new(move |t, v| {
        positive_t(t)?;
        let f = cf.signed_f(t)?;
        let g = cf.g(0, t)?;
        let (x, y) = (v[0], v[1]);
        Ok(vec![f * x + y * y - x * x, (2.0 * x - g) * y])
    }))
}

/// The same system in `x⁺ = A x`, `x⁻ = B y`.
pub fn su23_rhs_pm(s: &StructureData) -> Result<VectorField> {
    require_symmetric(s)?;
    let s = s.clone();
    Ok(Arc::new(move |t, v| {
        positive_t(t)?;
        let st = s.state(t);
        Ok(pm_rhs(&st, v[0], v[1]).to_vec())
    }))
}

fn pm_rhs(st: &ProfileState, xp: f64, xm: f64) -> [f64; 2] {
    let (a, b) = (st.a[0], st.b[0]);
    [(xp / a) * (1.0 - a * a / (b * b) - xp) + (a / (b * b)) * xm * xm, (2.0 * xm / a) * (xp - 1.0)]
}

/// The six diagonal equations in `f`-coordinates:
/// `ḟ_i⁺ = −F_i f_i⁺ + f_j⁻f_k⁻ − f_j⁺f_k⁺`, `ḟ_i⁻ = −G_i f_i⁻ + f_j⁻f_k⁺ + f_j⁺f_k⁻`.
pub fn su22_rhs(s: &StructureData) -> VectorField {
    let cf = s.coefficients();
    Arc::new(move |t, f| {
        positive_t(t)?;
        let mut out = vec![0.0; 6];
        for i in 0..3 {
            let (j, k) = cyclic(i);
            out[i] = -cf.f(i, t)? * f[i] + f[3 + j] * f[3 + k] - f[j] * f[k];
            out[3 + i] = -cf.g(i, t)? * f[3 + i] + f[3 + j] * f[k] + f[j] * f[3 + k];
        }
        Ok(out)
    })
}

/// The diagonal equations in connection coefficients `c_i^±`.
fn diag_rhs(st: &ProfileState, p: &[f64; 3], m: &[f64; 3]) -> Diag {
    let (a, b) = (&st.a, &st.b);
    let mut dp = [0.0; 3];
    let mut dm = [0.0; 3];
    for i in 0..3 {
        let (j, k) = cyclic(i);
        let pb = a[i] / (b[j] * b[k]);
        let pa = a[i] / (a[j] * a[k]);
        dp[i] = -(pb - pa) * p[i] + pb * m[j] * m[k] - pa * p[j] * p[k];
        let q1 = b[i] / (b[j] * a[k]);
        let q2 = b[i] / (a[j] * b[k]);
        dm[i] = -(q1 + q2) * m[i] + q1 * m[j] * p[k] + q2 * p[j] * m[k];
    }
    (dp, dm)
}

// ---------------------------------------------------------------------------
// Residuals

const STENCIL_REL: f64 = 1e-5;

/// Connection and its stencil derivative at `t`; one-sided near the ends of
/// the range.
pub fn coefficient_derivative(sol: &InstantonSolution, t: f64) -> Result<Vec<ConnectionCoeffs<f64>>> {
    let h = STENCIL_REL * t.max(1.0);
    let (lo, hi) = sol.range();
    let at = |x: f64| connection_at(sol, x);
    let comb = |pts: &[(f64, f64)]| -> Result<ConnectionCoeffs<f64>> {
        let mut acc = ConnectionCoeffs::zero();
        for &(x, w) in pts {
            let c = at(x)?;
            for i in 0..3 {
                acc.a_plus[i] = acc.a_plus[i].add(&c.a_plus[i].scale(&w));
                acc.a_minus[i] = acc.a_minus[i].add(&c.a_minus[i].scale(&w));
            }
        }
        Ok(acc)
    };
    let d = if t - 2.0 * h > lo && t + 2.0 * h <= hi {
        let w = 1.0 / (12.0 * h);
        comb(&[(t - 2.0 * h, w), (t - h, -8.0 * w), (t + h, 8.0 * w), (t + 2.0 * h, -w)])?
    } else if t - 2.0 * h <= lo {
        let w = 1.0 / (6.0 * h);
        comb(&[(t, -11.0 * w), (t + h, 18.0 * w), (t + 2.0 * h, -9.0 * w), (t + 3.0 * h, 2.0 * w)])?
    } else {
        let w = 1.0 / (6.0 * h);
        comb(&[(t, 11.0 * w), (t - h, -18.0 * w), (t - 2.0 * h, 9.0 * w), (t - 3.0 * h, -2.0 * w)])?
    };
    Ok(vec![at(t)?, d])
}

/// Residuals of the invariant instanton equations at `t`, normalised so the
/// derivative enters with coefficient one:
/// `ȧ_i⁺ + (A_i/(B_jB_k) − A_i/(A_jA_k)) a_i⁺ − A_i/(2B_jB_k)[a_j⁻,a_k⁻] + A_i/(2A_jA_k)[a_j⁺,a_k⁺]`
/// and
/// `ȧ_i⁻ + (B_i/(B_jA_k) + B_i/(A_jB_k)) a_i⁻ − B_i/(2B_jA_k)[a_j⁻,a_k⁺] − B_i/(2A_jB_k)[a_j⁺,a_k⁻]`.
/// Brackets are dropped for abelian solutions. Derivatives are taken with a
/// five-point stencil of step `10⁻⁵·max(t, 1)`.
pub fn lemma3_residuals(s: &StructureData, sol: &InstantonSolution, t: f64) -> Result<[Su2Vec<f64>; 6]> {
    positive_t(t)?;
    let v = coefficient_derivative(sol, t)?;
    let (c, dc) = (&v[0], &v[1]);
    let st = s.state(t);
    let (a, b) = (&st.a, &st.b);
    let br = |x: &Su2Vec<f64>, y: &Su2Vec<f64>| if sol.is_abelian() { Su2Vec::zero() } else { bracket(x, y) };
    let mut out: [Su2Vec<f64>; 6] = std::array::from_fn(|_| Su2Vec::zero());
    for i in 0..3 {
        let (j, k) = cyclic(i);
        let pb = a[i] / (b[j] * b[k]);
        let pa = a[i] / (a[j] * a[k]);
        out[i] = dc.a_plus[i]
            .add(&c.a_plus[i].scale(&(pb - pa)))
            .sub(&br(&c.a_minus[j], &c.a_minus[k]).scale(&(0.5 * pb)))
            .add(&br(&c.a_plus[j], &c.a_plus[k]).scale(&(0.5 * pa)));
        let q1 = b[i] / (b[j] * a[k]);
        let q2 = b[i] / (a[j] * b[k]);
        out[3 + i] = dc.a_minus[i]
            .add(&c.a_minus[i].scale(&(q1 + q2)))
            .sub(&br(&c.a_minus[j], &c.a_plus[k]).scale(&(0.5 * q1)))
            .sub(&br(&c.a_plus[j], &c.a_minus[k]).scale(&(0.5 * q2)));
    }
    Ok(out)
}

/// Largest absolute residual component at `t`.
pub fn residual_max(s: &StructureData, sol: &InstantonSolution, t: f64) -> Result<f64> {
    Ok(lemma3_residuals(s, sol, t)?.iter().map(|r| r.max_abs()).fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Explicit families

/// Abelian instantons with `a_i⁺(t₀)` prescribed and `a_i⁻ ≡ 0`.
pub fn abelian_connection(s: &StructureData, t0: f64, aplus_t0: [f64; 3]) -> Result<InstantonSolution> {
    abelian_impl(s, t0, aplus_t0, [0.0; 3])
}

/// Abelian solutions including the `a_i⁻ ∼ t⁻⁴` branch, which does not
/// extend over the singular orbit.
pub fn abelian_connection_raw(
    s: &StructureData,
    t0: f64,
    aplus_t0: [f64; 3],
    aminus_t0: [f64; 3],
) -> Result<InstantonSolution> {
    let mut sol = abelian_impl(s, t0, aplus_t0, aminus_t0)?;
    sol.tags.push("raw".into());
    Ok(sol)
}

/// Regularised log-derivatives of the linear equations:
/// `A_i/(B_jB_k) − A_i/(A_jA_k) + 2/t` and `B_i/(B_jA_k) + B_i/(A_jB_k) − 4/t`.
fn abelian_rates(s: &StructureData, i: usize) -> (Antiderivative, Antiderivative) {
    let cf = s.coefficients();
    let n = cf.tf_series(i).coeffs().len();
    let a = s.a_series(i).jet(n + 1);
    let t_ad_over_a = &a.derivative() / &a.div_t_pow(1);
    let b = s.b_series(i).jet(n + 1);
    let t_bd_over_b = (&b.derivative() / &b.resized(n)).mul_t_pow(1);
    let plus = (&(&cf.tf_series(i).jet(n) - &t_ad_over_a.resized(n)) + 2.0).div_t_pow(1);
    let minus = (&(&cf.tg_series(i).jet(n) - &t_bd_over_b) - 4.0).div_t_pow(1);
    let (j, k) = cyclic(i);
    let s1 = s.clone();
    let fp: Func = Arc::new(move |x| {
        let st = s1.state(x);
        st.a[i] / (st.b[j] * st.b[k]) - st.a[i] / (st.a[j] * st.a[k]) + 2.0 / x
    });
    let s2 = s.clone();
    let fm: Func = Arc::new(move |x| {
        let st = s2.state(x);
        st.b[i] / (st.b[j] * st.a[k]) + st.b[i] / (st.a[j] * st.b[k]) - 4.0 / x
    });
    let switch = T_SWITCH;
    (
        Antiderivative::new(fp, Some(plus.integral()), switch, s.t_max()),
        Antiderivative::new(fm, Some(minus.integral()), switch, s.t_max()),
    )
}

fn abelian_impl(s: &StructureData, t0: f64, ap: [f64; 3], am: [f64; 3]) -> Result<InstantonSolution> {
    if !(t0 > 0.0 && t0 < s.t_max()) {
        return Err(Error::Domain(format!("t0 = {t0} must lie in (0, {})", s.t_max())));
    }
    let rates: Vec<(Antiderivative, Antiderivative)> = (0..3)
        .map(|i| if ap[i] != 0.0 || am[i] != 0.0 { abelian_rates(s, i) } else { abelian_rates_zero() })
        .collect();
    let base: Vec<(f64, f64)> = rates.iter().map(|(p, m)| (p.eval(t0), m.eval(t0))).collect();
    let rates = Arc::new(rates);
    let eval: DiagEvaluator = Arc::new(move |t| {
        let mut p = [0.0; 3];
        let mut m = [0.0; 3];
        let r = t / t0;
        for i in 0..3 {
            if ap[i] != 0.0 {
                p[i] = ap[i] * r * r * (-(rates[i].0.eval(t) - base[i].0)).exp();
            }
            if am[i] != 0.0 {
                m[i] = am[i] * r.powi(-4) * (-(rates[i].1.eval(t) - base[i].1)).exp();
            }
        }
        Ok((p, m))
    });
    let params = [
        ("t0", t0),
        ("a_plus_t0_1", ap[0]),
        ("a_plus_t0_2", ap[1]),
        ("a_plus_t0_3", ap[2]),
        ("a_minus_t0_1", am[0]),
        ("a_minus_t0_2", am[1]),
        ("a_minus_t0_3", am[2]),
    ];
    Ok(InstantonSolution::new(Family::Abelian, Bundle::P1, &params, eval, s.t_max()).on(s))
}

fn abelian_rates_zero() -> (Antiderivative, Antiderivative) {
    let z: Func = Arc::new(|_| 0.0);
    (Antiderivative::new(z.clone(), Some(Jet::zeros(2)), 1.0, 1.0), Antiderivative::new(z, Some(Jet::zeros(2)), 1.0, 1.0))
}

/// `θ^{x₁}` on `P₁`: `A x = x₁ A E/(1 + x₁ J)` with
/// `E(t) = t·exp ∫₀ᵗ (F − 1/ξ)` and `J = ∫₀ᵗ E`, so that `x = x₁t + O(t³)`.
pub fn theta_x1(s: &StructureData, x1: f64) -> Result<InstantonSolution> {
    require_symmetric(s)?;
    if !(x1 >= 0.0) {
        return Err(Error::Precondition(format!("theta_x1 needs x1 >= 0, got {x1}")));
    }
    let ints = s.su23_integrals()?;
    let s2 = s.clone();
    let eval: DiagEvaluator = Arc::new(move |t| {
        if x1 == 0.0 {
            return Ok(([0.0; 3], [0.0; 3]));
        }
        let a = s2.state(t).a[0];
        let v = x1 * a * ints.e(t) / (1.0 + x1 * ints.j(t));
        Ok(([v; 3], [0.0; 3]))
    });
    Ok(InstantonSolution::new(Family::ThetaX1, Bundle::P1, &[("x1", x1)], eval, s.t_max()).on(s))
}

/// `θ₀` on `P_id`: `A x₀ = A E/J`, with `A x₀ → 1` as `t → 0`.
pub fn theta_zero(s: &StructureData) -> Result<InstantonSolution> {
    require_symmetric(s)?;
    let ints = s.su23_integrals()?;
    let s2 = s.clone();
    let eval: DiagEvaluator = Arc::new(move |t| {
        let a = s2.state(t).a[0];
        let v = a * ints.e(t) / ints.j(t);
        Ok(([v; 3], [0.0; 3]))
    });
    Ok(InstantonSolution::new(Family::ThetaZero, Bundle::Pid, &[], eval, s.t_max()).on(s))
}

/// Flat connections `a_i⁺ = T_i`, `a_i⁻ = sign·T_i`.
pub fn flat_pid(sign: i32) -> Result<InstantonSolution> {
    let (family, m) = match sign {
        1 => (Family::FlatPlus, 1.0),
        -1 => (Family::FlatMinus, -1.0),
        _ => return Err(Error::Domain(format!("sign must be +1 or -1, got {sign}"))),
    };
    let eval: DiagEvaluator = Arc::new(move |_| Ok(([1.0; 3], [m; 3])));
    Ok(InstantonSolution::new(family, Bundle::Pid, &[("sign", m)], eval, f64::INFINITY))
}

/// `θ_{y₀}` on `P_id`, solved from the singular orbit. For `|y₀| > 1/b₀` the
/// solution is tagged [`OUTSIDE_PROVEN_FAMILY`] and may end at a blow-up
/// event.
pub fn theta_y0(s: &StructureData, y0: f64, t_end: f64, opts: &SolveOptions) -> Result<InstantonSolution> {
    let b = su23_pid_ivp(s, y0)?;
    let traj = solve_singular(&b.ivp, t_end, opts)?;
    let mut sol = trajectory_solution(Family::ThetaY0, Bundle::Pid, &[("y0", y0)], traj)?.on(s);
    sol.malgrange = Some(malgrange_check(&b.ivp, 1e-8)?);
    if y0.abs() > 1.0 / s.b0() * (1.0 + 1e-14) {
        sol.tags.push(OUTSIDE_PROVEN_FAMILY.into());
    }
    Ok(sol)
}

/// Wrap a trajectory in stored coordinates (`(x⁺, x⁻)` or the six `c_i^±`).
fn trajectory_solution(family: Family, bundle: Bundle, params: &[(&str, f64)], traj: Trajectory) -> Result<InstantonSolution> {
    let dim = traj.dim();
    if dim != 2 && dim != 6 {
        return Err(Error::Domain(format!("unexpected state dimension {dim}")));
    }
    let t_end = traj.t_end();
    let tr = Arc::new(traj.clone());
    let eval: DiagEvaluator = Arc::new(move |t| {
        let y = tr.eval(t).ok_or_else(|| Error::Domain(format!("t = {t} outside the computed trajectory")))?;
        if y.len() == 2 {
            Ok(([y[0]; 3], [y[1]; 3]))
        } else {
            Ok(([y[0], y[1], y[2]], [y[3], y[4], y[5]]))
        }
    });
    let mut sol = InstantonSolution::new(family, bundle, params, eval, t_end);
    sol.trajectory = Some(traj);
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Singular-orbit reductions

/// Substitution `f_i⁺ = t^e (P_i(t) + t^m u_i)`, `f_i⁻ = t^d (Q_i(t) + t^n v_i)`
/// into the diagonal equations, giving `t u̇ = …`, `t v̇ = …` regular at 0.
/// With one component the SU(2)³-symmetric system is obtained.
#[derive(Clone)]
pub struct DiagonalReduction {
    s: StructureData,
    comps: usize,
    e: i32,
    d: usize,
    lead_plus: Vec<Vec<f64>>,
    m_plus: usize,
    lead_minus: Vec<Vec<f64>>,
    m_minus: usize,
    tf: Vec<SeriesR>,
    tg: Vec<SeriesR>,
}

fn poly_jet(c: &[f64], n: usize) -> Jet {
    if c.is_empty() {
        return Jet::zeros(n);
    }
    Jet::new(c.to_vec()).resized(n)
}

fn poly_eval(c: &[f64], t: f64) -> (f64, f64) {
    let v = c.iter().rev().fold(0.0, |acc, x| acc * t + x);
    let d = c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, x)| acc * t + k as f64 * x);
    (v, d)
}

impl DiagonalReduction {
    fn idx(&self, i: usize) -> (usize, usize) {
        if self.comps == 1 {
            (0, 0)
        } else {
            cyclic(i)
        }
    }

    /// Series of `t ḣ` and `t k̇` before removing the known leading parts,
    /// for the polynomial path with reduced coefficients `w`; length `len`.
    fn raw_series(&self, w: &[Jet], len: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let avail = self.tf[0].coeffs().len().min(self.tg[0].coeffs().len());
        if len > avail {
            return Err(Error::Numerical(format!("series order {len} exceeds the {avail} structure coefficients")));
        }
        let c = self.comps;
        let pad = |j: &Jet| j.resized(len);
        let h: Vec<Jet> =
            (0..c).map(|i| &poly_jet(&self.lead_plus[i], len) + &pad(&w[i]).mul_t_pow(self.m_plus)).collect();
        let k: Vec<Jet> =
            (0..c).map(|i| &poly_jet(&self.lead_minus[i], len) + &pad(&w[c + i]).mul_t_pow(self.m_minus)).collect();
        let e = self.e;
        let kk_pow = (1 + 2 * self.d as i32 - e) as usize;
        let hh_pow = (1 + e) as usize;
        let mut rp = Vec::with_capacity(c);
        let mut rm = Vec::with_capacity(c);
        for i in 0..c {
            let (j, l) = self.idx(i);
            let tf = self.tf[i].jet(len);
            let tg = self.tg[i].jet(len);
            let p = &(&(&h[i] * -(e as f64)) - &(&tf * &h[i])) + &(&k[j] * &k[l]).mul_t_pow(kk_pow);
            rp.push(&p - &(&h[j] * &h[l]).mul_t_pow(hh_pow));
            let q = &(&k[i] * -(self.d as f64)) - &(&tg * &k[i]);
            rm.push(&q + &(&(&k[j] * &h[l]) + &(&h[j] * &k[l])).mul_t_pow(hh_pow));
        }
        Ok((rp, rm))
    }

    /// Largest coefficient of the orders that must vanish identically
    /// (below `t^m` in the plus equations, below `t^n` in the minus ones).
    pub fn singular_balance(&self, w: &[f64]) -> Result<f64> {
        let len = self.m_plus.max(self.m_minus) + 1;
        let jets: Vec<Jet> = w.iter().map(|v| Jet::constant(*v, 1)).collect();
        let (rp, rm) = self.raw_series(&jets, len)?;
        let mut worst: f64 = 0.0;
        for i in 0..self.comps {
            let lp = &rp[i] - &(poly_jet(&self.lead_plus[i], len + 1).derivative().mul_t_pow(1));
            let lm = &rm[i] - &(poly_jet(&self.lead_minus[i], len + 1).derivative().mul_t_pow(1));
            worst = worst.max(lp.low_order_residue(self.m_plus)).max(lm.low_order_residue(self.m_minus));
        }
        Ok(worst)
    }

    fn state_at(&self, t: f64) -> ProfileState {
        self.s.state(t)
    }
}

impl SingularSystem for DiagonalReduction {
    fn dim(&self) -> usize {
        2 * self.comps
    }

    fn t_rhs_series(&self, w: &[Jet]) -> Result<Vec<Jet>> {
        let n = w[0].len();
        let len = n + self.m_plus.max(self.m_minus);
        let (rp, rm) = self.raw_series(w, len)?;
        let c = self.comps;
        let mut out = Vec::with_capacity(2 * c);
        for i in 0..c {
            let lead = poly_jet(&self.lead_plus[i], len + 1).derivative().mul_t_pow(1);
            let u = w[i].resized(len).mul_t_pow(self.m_plus) * self.m_plus as f64;
            out.push((&(&rp[i] - &lead) - &u).div_t_pow(self.m_plus).resized(n));
        }
        for i in 0..c {
            let lead = poly_jet(&self.lead_minus[i], len + 1).derivative().mul_t_pow(1);
            let v = w[c + i].resized(len).mul_t_pow(self.m_minus) * self.m_minus as f64;
            out.push((&(&rm[i] - &lead) - &v).div_t_pow(self.m_minus).resized(n));
        }
        Ok(out)
    }

    fn rhs(&self, t: f64, w: &[f64]) -> Vec<f64> {
        let c = self.comps;
        let cf = self.s.coefficients();
        let hv: Vec<(f64, f64)> = (0..c)
            .map(|i| {
                let (p, dp) = poly_eval(&self.lead_plus[i], t);
                (p + t.powi(self.m_plus as i32) * w[i], dp)
            })
            .collect();
        let kv: Vec<(f64, f64)> = (0..c)
            .map(|i| {
                let (q, dq) = poly_eval(&self.lead_minus[i], t);
                (q + t.powi(self.m_minus as i32) * w[c + i], dq)
            })
            .collect();
        let e = self.e;
        let mut out = vec![0.0; 2 * c];
        for i in 0..c {
            let (j, l) = self.idx(i);
            let tf = t * cf.f(i, t).unwrap_or(f64::NAN);
            let tg = t * cf.g(i, t).unwrap_or(f64::NAN);
            let (h, k) = (hv[i].0, kv[i].0);
            let th = -(e as f64) * h - tf * h + t.powi(1 + 2 * self.d as i32 - e) * kv[j].0 * kv[l].0
                - t.powi(1 + e) * hv[j].0 * hv[l].0;
            let tk = -(self.d as f64) * k - tg * k + t.powi(1 + e) * (kv[j].0 * hv[l].0 + hv[j].0 * kv[l].0);
            let mp = self.m_plus as i32;
            let mm = self.m_minus as i32;
            out[i] = (th - t * hv[i].1 - mp as f64 * t.powi(mp) * w[i]) / t.powi(mp + 1);
            out[c + i] = (tk - t * kv[i].1 - mm as f64 * t.powi(mm) * w[c + i]) / t.powi(mm + 1);
        }
        out
    }

    fn to_physical(&self, t: f64, w: &[f64]) -> Vec<f64> {
        let c = self.comps;
        let st = self.state_at(t);
        let mut out = vec![0.0; 2 * c];
        for i in 0..c {
            let (p, _) = poly_eval(&self.lead_plus[i], t);
            let (q, _) = poly_eval(&self.lead_minus[i], t);
            let h = p + t.powi(self.m_plus as i32) * w[i];
            let k = q + t.powi(self.m_minus as i32) * w[c + i];
            out[i] = st.a[i] * t.powi(self.e) * h;
            out[c + i] = st.b[i] * t.powi(self.d as i32) * k;
        }
        out
    }

    fn physical_rhs(&self, t: f64, p: &[f64]) -> Vec<f64> {
        let st = self.state_at(t);
        if self.comps == 1 {
            return pm_rhs(&st, p[0], p[1]).to_vec();
        }
        let (dp, dm) = diag_rhs(&st, &[p[0], p[1], p[2]], &[p[3], p[4], p[5]]);
        vec![dp[0], dp[1], dp[2], dm[0], dm[1], dm[2]]
    }
}

impl DiagonalReduction {
    fn new(
        s: &StructureData,
        comps: usize,
        (e, d): (i32, usize),
        lead_plus: Vec<Vec<f64>>,
        m_plus: usize,
        lead_minus: Vec<Vec<f64>>,
        m_minus: usize,
    ) -> Self {
        let cf = s.coefficients();
        DiagonalReduction {
            s: s.clone(),
            comps,
            e,
            d,
            lead_plus,
            m_plus,
            lead_minus,
            m_minus,
            tf: (0..3).map(|i| cf.tf_series(i).clone()).collect(),
            tg: (0..3).map(|i| cf.tg_series(i).clone()).collect(),
        }
    }
}

/// Solve `M₋₁(w) = 0` with some components fixed. `M₋₁` is affine, so it is
/// probed exactly and solved in the least-squares sense; an inconsistent
/// system is an error.
pub fn solve_boundary(sys: &dyn SingularSystem, fixed: &[(usize, f64)]) -> Result<Vec<f64>> {
    let n = sys.dim();
    let mut base = vec![0.0; n];
    for &(i, v) in fixed {
        base[i] = v;
    }
    let r0 = sys.m_minus1(&base)?;
    let free: Vec<usize> = (0..n).filter(|i| !fixed.iter().any(|(j, _)| j == i)).collect();
    let mut jac = DMatrix::zeros(n, free.len());
    for (col, &j) in free.iter().enumerate() {
        let mut y = base.clone();
        y[j] += 1.0;
        let r = sys.m_minus1(&y)?;
        for i in 0..n {
            jac[(i, col)] = r[i] - r0[i];
        }
    }
    let rhs = DVector::from_iterator(n, r0.iter().map(|v| -v));
    let x = jac
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(format!("boundary solve failed: {e}")))?;
    let mut y = base;
    for (col, &j) in free.iter().enumerate() {
        y[j] = x[col];
    }
    let res = sys.m_minus1(&y)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = r0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if res > 1e-10 * scale {
        return Err(Error::Precondition(format!("boundary equations M_-1(y0) = 0 are inconsistent (residual {res:.3e})")));
    }
    Ok(y)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// SU(2)³ reduction on `P₁`: `x = x₁t + t³u`, `y = t²v`.
#[derive(Clone, Debug)]
pub struct Su23P1Boundary {
    pub ivp: SingularIVP,
    pub u0: f64,
    pub v0: f64,
    /// `u(0) = −x₁²/2 − x₁(4a₁₃ + 1/(4b₀²))`.
    pub quoted_u0: f64,
    pub matches_quoted: bool,
}

pub fn su23_p1_ivp(s: &StructureData, x1: f64) -> Result<Su23P1Boundary> {
    require_symmetric(s)?;
    let sys = DiagonalReduction::new(s, 1, (1, 2), vec![vec![x1]], 2, vec![vec![]], 0);
    let y0 = solve_boundary(&sys, &[])?;
    let a13 = s.a3()[0];
    let b0 = s.b0();
    let quoted_u0 = -x1 * x1 / 2.0 - x1 * (4.0 * a13 + 1.0 / (4.0 * b0 * b0));
    let matches_quoted = close(y0[0], quoted_u0) && y0[1].abs() < 1e-12;
    let ivp = SingularIVP::new(Arc::new(sys), y0.clone(), format!("su23-P1(x1={x1})"))?;
    Ok(Su23P1Boundary { ivp, u0: y0[0], v0: y0[1], quoted_u0, matches_quoted })
}

/// SU(2)³ reduction on `P_id`: `x = 2/t + t u`, `y = y₀ + t²v`.
#[derive(Clone, Debug)]
pub struct Su23PidBoundary {
    pub ivp: SingularIVP,
    pub u0: f64,
    pub v0: f64,
    /// `u(0) = y₀²/4 − 4a₁₃ − 1/(4b₀²)`.
    pub quoted_u0: f64,
    /// `v(0) = y₀³/4 − y₀(1/(4b₀²) − b₂/b₀)` as printed.
    pub quoted_v0: f64,
    /// `v(0) = y₀³/4 − y₀(1/(4b₀²) + b₂/b₀)`.
    pub corrected_v0: f64,
    pub u0_matches: bool,
    pub v0_matches_quoted: bool,
    pub v0_matches_corrected: bool,
}

pub fn su23_pid_ivp(s: &StructureData, y0: f64) -> Result<Su23PidBoundary> {
    require_symmetric(s)?;
    let sys = DiagonalReduction::new(s, 1, (-1, 0), vec![vec![2.0]], 2, vec![vec![y0]], 2);
    let bal = sys.singular_balance(&[0.0, 0.0])?;
    if bal > 1e-10 {
        return Err(Error::Precondition(format!("leading balance fails for the P_id ansatz (residual {bal:.3e})")));
    }
    let w = solve_boundary(&sys, &[])?;
    let (a13, b0, b2) = (s.a3()[0], s.b0(), s.b2());
    let quoted_u0 = y0 * y0 / 4.0 - 4.0 * a13 - 1.0 / (4.0 * b0 * b0);
    let quoted_v0 = y0.powi(3) / 4.0 - y0 * (1.0 / (4.0 * b0 * b0) - b2 / b0);
    let corrected_v0 = y0.powi(3) / 4.0 - y0 * (1.0 / (4.0 * b0 * b0) + b2 / b0);
    let ivp = SingularIVP::new(Arc::new(sys), w.clone(), format!("su23-Pid(y0={y0})"))?;
    Ok(Su23PidBoundary {
        ivp,
        u0: w[0],
        v0: w[1],
        quoted_u0,
        quoted_v0,
        corrected_v0,
        u0_matches: close(w[0], quoted_u0),
        v0_matches_quoted: close(w[1], quoted_v0),
        v0_matches_corrected: close(w[1], corrected_v0),
    })
}

/// `P₁` reduction `f_i⁺ = f_{i,1}t + t³u_i`, `f_i⁻ = t²v_i`.
#[derive(Clone, Debug)]
pub struct P1Boundary {
    pub ivp: SingularIVP,
    pub u0: [f64; 3],
    /// `−(1/(4b₀²) + 2a_{j,3} + 2a_{k,3}) f_{i,1} − f_{j,1}f_{k,1}`.
    pub statement_variant: [f64; 3],
    /// The same with `−f_{j,1}f_{k,1}/2`.
    pub proof_variant: [f64; 3],
    pub matches_statement: bool,
    pub matches_proof: bool,
}

pub fn p1_ivp(s: &StructureData, f1: [f64; 3]) -> Result<P1Boundary> {
    let sys = DiagonalReduction::new(
        s,
        3,
        (1, 2),
        f1.iter().map(|v| vec![*v]).collect(),
        2,
        vec![vec![]; 3],
        0,
    );
    let y0 = solve_boundary(&sys, &[])?;
    let a3 = s.a3();
    let b0 = s.b0();
    let lin = |i: usize| {
        let (j, k) = cyclic(i);
        -(1.0 / (4.0 * b0 * b0) + 2.0 * a3[j] + 2.0 * a3[k]) * f1[i]
    };
    let quad = |i: usize| {
        let (j, k) = cyclic(i);
        f1[j] * f1[k]
    };
    let statement_variant = [0, 1, 2].map(|i| lin(i) - quad(i));
    let proof_variant = [0, 1, 2].map(|i| lin(i) - 0.5 * quad(i));
    let u0 = [y0[0], y0[1], y0[2]];
    let matches_statement = (0..3).all(|i| close(u0[i], statement_variant[i]));
    let matches_proof = (0..3).all(|i| close(u0[i], proof_variant[i]));
    let ivp = SingularIVP::new(Arc::new(sys), y0, format!("P1(f1={f1:?})"))?;
    Ok(P1Boundary { ivp, u0, statement_variant, proof_variant, matches_statement, matches_proof })
}

/// Boundary data of the `P_id` family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PidBoundaryData {
    pub b0_minus: f64,
    pub b2_plus: f64,
    pub u2_0: f64,
    pub u3_0: f64,
    pub u1_0: f64,
    pub v0: f64,
    /// Largest coefficient of the order `t⁻³` balance.
    pub singular_balance: f64,
    /// `v(0) = b₀⁻b₂⁺ − b₂b₀⁻/b₀`.
    pub quoted_v0: f64,
    /// Right side of the quoted formula for `u₁(0) + u₂(0) + u₃(0)`.
    pub quoted_u_sum: f64,
    pub v0_matches_quoted: bool,
    pub u_sum_matches_quoted: bool,
}

/// `P_id` reduction `f_i⁺ = 2/t + (b₂⁺ − 4a_{i,3})t + t³u_i`,
/// `f_i⁻ = b₀⁻ + t²v_i`, with `4b₂⁺ = (b₀⁻)² − 1/b₀²`.
pub fn pid_ivp(s: &StructureData, b0_minus: f64, u2_0: f64, u3_0: f64) -> Result<(SingularIVP, PidBoundaryData)> {
    let (b0, b2) = (s.b0(), s.b2());
    let a3 = s.a3();
    let a5 = s.a5();
    let b2_plus = (b0_minus * b0_minus - 1.0 / (b0 * b0)) / 4.0;
    let sys = DiagonalReduction::new(
        s,
        3,
        (-1, 0),
        (0..3).map(|i| vec![2.0, 0.0, b2_plus - 4.0 * a3[i]]).collect(),
        4,
        vec![vec![b0_minus]; 3],
        2,
    );
    let bal = sys.singular_balance(&[0.0; 6])?;
    if bal > 1e-10 {
        return Err(Error::Precondition(format!(
            "order t^-3 balance 4 b2+ = (b0-)^2 - 1/b0^2 violated (residual {bal:.3e})"
        )));
    }
    let y0 = solve_boundary(&sys, &[(1, u2_0), (2, u3_0)])?;
    let quoted_v0 = b0_minus * b2_plus - b2 * b0_minus / b0;
    let sum_a5: f64 = a5.iter().sum();
    let sum_a3sq: f64 = a3.iter().map(|a| a * a).sum();
    let quoted_u_sum = -b2_plus * b2_plus / 2.0 - b2_plus / (4.0 * b0 * b0) + b2 / b0.powi(3)
        + b0_minus * b0_minus * b2_plus
        - b2 * b0_minus * b0_minus / b0
        - 4.0 * sum_a5
        + 8.0 * sum_a3sq;
    let u_sum = y0[0] + y0[1] + y0[2];
    let data = PidBoundaryData {
        b0_minus,
        b2_plus,
        u2_0,
        u3_0,
        u1_0: y0[0],
        v0: y0[3],
        singular_balance: bal,
        quoted_v0,
        quoted_u_sum,
        v0_matches_quoted: (3..6).all(|i| close(y0[i], quoted_v0)),
        u_sum_matches_quoted: close(u_sum, quoted_u_sum),
    };
    let ivp = SingularIVP::new(Arc::new(sys), y0, format!("Pid(b0-={b0_minus},u2={u2_0},u3={u3_0})"))?;
    Ok((ivp, data))
}

/// Solve a `P₁` boundary problem outward to `t_end`.
pub fn solve_p1(s: &StructureData, f1: [f64; 3], t_end: f64, opts: &SolveOptions) -> Result<InstantonSolution> {
    let b = p1_ivp(s, f1)?;
    let traj = solve_singular(&b.ivp, t_end, opts)?;
    let params = [("f1_1", f1[0]), ("f1_2", f1[1]), ("f1_3", f1[2])];
    let mut sol = trajectory_solution(Family::Su22General, Bundle::P1, &params, traj)?.on(s);
    sol.malgrange = Some(malgrange_check(&b.ivp, 1e-8)?);
    Ok(sol)
}

/// Solve a `P_id` boundary problem outward to `t_end`.
pub fn solve_pid(
    s: &StructureData,
    b0_minus: f64,
    u2_0: f64,
    u3_0: f64,
    t_end: f64,
    opts: &SolveOptions,
) -> Result<InstantonSolution> {
    let (ivp, _) = pid_ivp(s, b0_minus, u2_0, u3_0)?;
    let traj = solve_singular(&ivp, t_end, opts)?;
    let params = [("b0_minus", b0_minus), ("u2_0", u2_0), ("u3_0", u3_0)];
    let mut sol = trajectory_solution(Family::Su22General, Bundle::Pid, &params, traj)?.on(s);
    sol.malgrange = Some(malgrange_check(&ivp, 1e-8)?);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::curvature_direct;
    use crate::structures::{make_bryant_salamon, make_linear_example};

    fn bs() -> StructureData {
        make_bryant_salamon(12.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn pm_critical_points() {
        let s = bs();
        let f = su23_rhs_pm(&s).unwrap();
        for t in [0.05, 0.7, 3.0] {
            for p in [[0.0, 0.0], [1.0, 1.0], [1.0, -1.0]] {
                let d = f(t, &p).unwrap();
                assert!(d[0].abs() < 1e-13 && d[1].abs() < 1e-13, "{t} {p:?} {d:?}");
            }
        }
    }

    #[test]
    fn pm_is_chain_rule_of_xy() {
        let s = bs();
        let f = su23_rhs(&s).unwrap();
        let g = su23_rhs_pm(&s).unwrap();
        for (t, x, y) in [(0.3, 1.2, -0.4), (2.0, 0.1, 0.9), (5.0, -0.7, 0.2)] {
            let st = s.state(t);
            let (a, ad, b, bd) = (st.a[0], st.a_dot[0], st.b[0], st.b_dot[0]);
            let d = f(t, &[x, y]).unwrap();
            let e = g(t, &[a * x, b * y]).unwrap();
            assert!((e[0] - (ad * x + a * d[0])).abs() < 1e-12);
            assert!((e[1] - (bd * y + b * d[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn y_sign_flip_is_a_symmetry() {
        let s = bs();
        let f = su23_rhs(&s).unwrap();
        let a = f(0.8, &[0.3, 0.5]).unwrap();
        let b = f(0.8, &[0.3, -0.5]).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], -b[1]);
    }

    #[test]
    fn su22_reduces_to_su23() {
        let s = bs();
        let f = su22_rhs(&s);
        let g = su23_rhs(&s).unwrap();
        let d = f(1.3, &[0.4, 0.4, 0.4, 0.2, 0.2, 0.2]).unwrap();
        let e = g(1.3, &[0.4, 0.2]).unwrap();
        assert!((d[0] - e[0]).abs() < 1e-12 && (d[4] - e[1]).abs() < 1e-12);
        assert!(f(0.0, &[0.0; 6]).is_err());
        assert!(f(1.0, &[0.0; 6]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn flat_connections_are_flat_and_solve_the_system() {
        for sign in [1, -1] {
            let sol = flat_pid(sign).unwrap();
            assert!(curvature_direct(&connection_at(&sol, 2.0).unwrap()).is_zero());
            let s = bs();
            let f = su22_rhs(&s);
            let st = s.state(1.1);
            let sg = sign as f64;
            let y: Vec<f64> = (0..3).map(|i| 1.0 / st.a[i]).chain((0..3).map(|i| sg / st.b[i])).collect();
            let d = f(1.1, &y).unwrap();
            for i in 0..3 {
                assert!((d[i] + st.a_dot[i] / (st.a[i] * st.a[i])).abs() < 1e-12);
                assert!((d[3 + i] + sg * st.b_dot[i] / (st.b[i] * st.b[i])).abs() < 1e-12);
            }
        }
        assert!(flat_pid(0).is_err());
    }

    #[test]
    fn theta_x1_matches_clarke() {
        let s = bs();
        for x1 in [0.1, 1.0, 10.0] {
            let sol = theta_x1(&s, x1).unwrap();
            for t in [0.01, 0.3, 2.0, 7.0] {
                let st = s.state(t);
                let (a, b) = (st.a[0], st.b[0]);
                let clarke = 2.0 * x1 * a * a / (1.0 + x1 * (b * b - 1.0 / 3.0));
                assert!(rel(sol.coefficients(t).unwrap().0[0], clarke) < 1e-9);
            }
        }
        assert!(theta_x1(&s, -1.0).is_err());
        assert_eq!(theta_x1(&s, 0.0).unwrap().coefficients(1.0).unwrap(), ([0.0; 3], [0.0; 3]));
    }

    #[test]
    fn theta_zero_linear_closed_form() {
        let b0 = 0.8;
        let s = make_linear_example(b0).unwrap();
        let sol = theta_zero(&s).unwrap();
        for t in [1e-3, 0.1, 1.0, 4.0] {
            let q = t * t / 4.0;
            let exact = q / ((q + b0 * b0) * (1.0 + q / (b0 * b0)).ln());
            assert!(rel(sol.coefficients(t).unwrap().0[0], exact) < 1e-9, "{t}");
        }
    }

    #[test]
    fn p1_spectrum_and_variant() {
        for s in [bs(), make_linear_example(1.0).unwrap()] {
            let b = p1_ivp(&s, [0.3, -0.2, 0.5]).unwrap();
            let r = malgrange_check(&b.ivp, 1e-10).unwrap();
            assert!(r.gate_pass);
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i != j { 0.0 } else if i < 3 { -2.0 } else { -6.0 };
                    assert!((r.jacobian[(i, j)] - want).abs() < 1e-8);
                }
            }
            assert!(b.matches_proof && !b.matches_statement);
        }
    }

    #[test]
    fn pid_spectrum_and_quoted_values() {
        for s in [bs(), make_linear_example(1.0).unwrap()] {
            let (ivp, data) = pid_ivp(&s, 0.7, 0.1, -0.2).unwrap();
            let r = malgrange_check(&ivp, 1e-10).unwrap();
            assert!(r.gate_pass);
            let ev: Vec<f64> = r.sorted_eigenvalues().iter().map(|z| z.re).collect();
            for (a, b) in ev.iter().zip([-8.0, -8.0, -6.0, -2.0, 0.0, 0.0]) {
                assert!((a - b).abs() < 1e-8, "{ev:?}");
            }
            assert!(data.v0_matches_quoted && data.u_sum_matches_quoted, "{data:?}");
        }
        let s = bs();
        let (_, d) = pid_ivp(&s, 0.0, 0.0, 0.0).unwrap();
        assert!((d.b2_plus + 1.0 / (4.0 * s.b0() * s.b0())).abs() < 1e-15);
        assert!(d.v0.abs() < 1e-14);
    }

    #[test]
    fn su23_pid_boundary_verdicts() {
        let s = bs();
        let y0 = 0.6;
        let b = su23_pid_ivp(&s, y0).unwrap();
        assert!(b.u0_matches && b.v0_matches_corrected && !b.v0_matches_quoted);
        let p = su23_p1_ivp(&s, 2.0).unwrap();
        assert!(p.matches_quoted);
    }

    #[test]
    fn theta_y0_zero_matches_theta_zero() {
        let s = bs();
        let sol = theta_y0(&s, 0.0, 5.0, &SolveOptions::default()).unwrap();
        let z = theta_zero(&s).unwrap();
        for t in [0.01, 0.5, 2.0, 5.0] {
            let a = sol.coefficients(t).unwrap().0[0];
            let b = z.coefficients(t).unwrap().0[0];
            assert!(rel(a, b) < 1e-6, "{t} {a} {b}");
        }
    }

    #[test]
    fn abelian_zero_and_scaling() {
        let s = bs();
        let z = abelian_connection(&s, 1.0, [0.0; 3]).unwrap();
        assert_eq!(z.coefficients(0.5).unwrap(), ([0.0; 3], [0.0; 3]));
        let sol = abelian_connection(&s, 1.0, [1.0, 2.0, 0.5]).unwrap();
        let (p, m) = sol.coefficients(1.0).unwrap();
        assert!(rel(p[1], 2.0) < 1e-14 && m == [0.0; 3]);
        assert!(abelian_connection(&s, 0.0, [1.0; 3]).is_err());
        assert!(residual_max(&s, &sol, 0.7).unwrap() < 1e-8);
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Copy of `sol` with `δ` added to every `a⁺` coefficient.
    pub(crate) fn offset(sol: &InstantonSolution, delta: f64) -> InstantonSolution {
        let inner = sol.eval.clone();
        let eval: DiagEvaluator = Arc::new(move |t| {
            let (p, m) = inner(t)?;
            Ok((p.map(|v| v + delta), m))
        });
        InstantonSolution { eval, trajectory: None, ..sol.clone() }
    }
}

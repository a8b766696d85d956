//! Singular initial value problems `ẏ = M₋₁(y)/t + M(t, y)`, `y(0) = y₀`.
//!
//! A problem admits a unique real-analytic solution near `t = 0` when
//! `M₋₁(y₀) = 0` and `h·Id − dM₋₁(y₀)` is invertible for every integer
//! `h ≥ 1`. The solution is built as a power series on `[0, eps]` and then
//! continued with an adaptive integrator.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::ode::{integrate, IntegrateOptions, SeriesSegment, Trajectory};
use crate::structures::{Parity, SeriesR};

/// Eigenvalues closer than this to a positive integer count as resonant.
pub const EIGEN_TOL: f64 = 1e-8;
pub const DEFAULT_ORDER: usize = 8;
pub const DEFAULT_EPS: f64 = 1e-2;
pub const DEFAULT_TOL: f64 = 1e-12;

/// A singular system in reduced coordinates, optionally with a regular
/// ("physical") formulation used away from `t = 0`.
pub trait SingularSystem: Send + Sync {
    fn dim(&self) -> usize;

    /// `t·ẏ` as a truncated series in `t` along the polynomial path whose
    /// coefficients are the given jets (all of one length `n`); the result has
    /// length `n`.
    fn t_rhs_series(&self, y: &[Jet]) -> Result<Vec<Jet>>;

    /// `ẏ` at `t > 0` in reduced coordinates.
    fn rhs(&self, t: f64, y: &[f64]) -> Vec<f64>;

    /// `M₋₁(y)`.
    fn m_minus1(&self, y: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<Jet> = y.iter().map(|v| Jet::constant(*v, 1)).collect();
        Ok(self.t_rhs_series(&jets)?.iter().map(|j| j.coeff(0)).collect())
    }

    /// Exact Jacobian of `M₋₁`, when available.
    fn exact_jacobian(&self, _y: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Map from reduced to physical coordinates at `t > 0`.
    fn to_physical(&self, _t: f64, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }

    /// Right-hand side in physical coordinates.
    fn physical_rhs(&self, t: f64, p: &[f64]) -> Vec<f64> {
        self.rhs(t, p)
    }
}

type MMinus1Fn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
type MFn = Arc<dyn Fn(&Jet, &[Jet]) -> Vec<Jet> + Send + Sync>;
type JacFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// A singular system given by closures that work on truncated series; the
/// pointwise right-hand side evaluates them on one-term series.
#[derive(Clone)]
pub struct FnSystem {
    dim: usize,
    m_minus1: MMinus1Fn,
    m: MFn,
    jacobian: Option<JacFn>,
}

impl FnSystem {
    pub fn new(
        dim: usize,
        m_minus1: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        m: impl Fn(&Jet, &[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Self {
        FnSystem { dim, m_minus1: Arc::new(m_minus1), m: Arc::new(m), jacobian: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }
}

impl SingularSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn t_rhs_series(&self, y: &[Jet]) -> Result<Vec<Jet>> {
        let n = y[0].len();
        let t = Jet::var(n);
        let a = (self.m_minus1)(y);
        let b = (self.m)(&t, y);
        Ok(a.iter().zip(&b).map(|(p, q)| p + &(&t * q)).collect())
    }

    fn rhs(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let jets: Vec<Jet> = y.iter().map(|v| Jet::constant(*v, 1)).collect();
        let tj = Jet::constant(t, 1);
        let a = (self.m_minus1)(&jets);
        let b = (self.m)(&tj, &jets);
        a.iter().zip(&b).map(|(p, q)| p.coeff(0) / t + q.coeff(0)).collect()
    }

    fn exact_jacobian(&self, y: &[f64]) -> Option<DMatrix<f64>> {
        self.jacobian.as_ref().map(|j| j(y))
    }
}

#[derive(Clone)]
pub struct SingularIVP {
    pub system: Arc<dyn SingularSystem>,
    pub y0: Vec<f64>,
    pub label: String,
}

impl std::fmt::Debug for SingularIVP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SingularIVP").field("label", &self.label).field("y0", &self.y0).finish()
    }
}

impl SingularIVP {
    pub fn new(system: Arc<dyn SingularSystem>, y0: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if y0.len() != system.dim() {
            return Err(Error::Domain(format!("initial value has length {}, expected {}", y0.len(), system.dim())));
        }
        Ok(SingularIVP { system, y0, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }
}

#[derive(Clone, Debug)]
pub struct MalgrangeReport {
    pub residual_at_y0: f64,
    pub jacobian: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub gate_pass: bool,
    pub offending_h: Option<u64>,
}

impl MalgrangeReport {
    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn sorted_eigenvalues(&self) -> Vec<Complex64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        use crate::format::json_f64;
        let n = self.jacobian.nrows();
        serde_json::json!({
            "residual_at_y0": json_f64(self.residual_at_y0),
            "jacobian": (0..n).map(|i| (0..n).map(|j| json_f64(self.jacobian[(i, j)])).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "eigenvalues": self.sorted_eigenvalues().iter().map(|z| serde_json::json!([json_f64(z.re), json_f64(z.im)])).collect::<Vec<_>>(),
            "gate_pass": self.gate_pass,
            "offending_h": self.offending_h,
        })
    }
}

/// Central differences with one Richardson extrapolation.
pub fn numerical_jacobian(f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, y: &[f64]) -> Result<DMatrix<f64>> {
    let n = y.len();
    let m = f(y)?.len();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        let h = 1e-3 * y[j].abs().max(1.0);
        let diff = |h: f64| -> Result<Vec<f64>> {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[j] += h;
            ym[j] -= h;
            let (a, b) = (f(&yp)?, f(&ym)?);
            Ok(a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect())
        };
        let d1 = diff(h)?;
        let d2 = diff(0.5 * h)?;
        for i in 0..m {
            jac[(i, j)] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    Ok(jac)
}

fn positive_integer_resonance(eigs: &[Complex64]) -> Option<u64> {
    eigs.iter()
        .filter(|z| z.im.abs() <= EIGEN_TOL)
        .filter_map(|z| {
            let h = z.re.round();
            (h >= 1.0 && (z.re - h).abs() <= EIGEN_TOL).then_some(h as u64)
        })
        .min()
}

/// Check existence conditions at `y₀`: `‖M₋₁(y₀)‖ ≤ tol` and no eigenvalue
/// of `dM₋₁(y₀)` at a positive integer.
pub fn malgrange_check(ivp: &SingularIVP, tol: f64) -> Result<MalgrangeReport> {
    let sys = &ivp.system;
    let m0 = sys
        .m_minus1(&ivp.y0)
        .map_err(|e| Error::Numerical(format!("{}: evaluating M_-1 at y0 failed: {e}", ivp.label)))?;
    let residual = m0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let jac = match sys.exact_jacobian(&ivp.y0) {
        Some(j) => j,
        None => numerical_jacobian(&|y| sys.m_minus1(y), &ivp.y0)?,
    };
    let eigenvalues: Vec<Complex64> = jac.clone().complex_eigenvalues().iter().copied().collect();
    let offending_h = positive_integer_resonance(&eigenvalues);
    let gate_pass = residual <= tol && offending_h.is_none() && eigenvalues.iter().all(|z| z.re.is_finite());
    Ok(MalgrangeReport { residual_at_y0: residual, jacobian: jac, eigenvalues, gate_pass, offending_h })
}

/// Taylor coefficients `c[k][i]`, `k = 0..=order`, of the unique analytic
/// solution; `c[0] = y₀`.
pub fn series_coefficients(ivp: &SingularIVP, order: usize) -> Result<Vec<Vec<f64>>> {
    let report = malgrange_check(ivp, 1e-8)?;
    if !report.gate_pass {
        return Err(Error::Malgrange(format!(
            "{}: residual {:.3e}, resonance at h = {:?}",
            ivp.label, report.residual_at_y0, report.offending_h
        )));
    }
    let n = ivp.dim();
    let mut c: Vec<Vec<f64>> = vec![ivp.y0.clone()];
    for k in 1..=order {
        // R_k is affine in c_k with linear part dM₋₁(y₀); probe it exactly
        let eval = |ck: &[f64]| -> Result<Vec<f64>> {
            let jets: Vec<Jet> = (0..n)
                .map(|i| {
                    let mut v: Vec<f64> = c.iter().map(|row| row[i]).collect();
                    v.push(ck[i]);
                    Jet::new(v)
                })
                .collect();
            Ok(ivp.system.t_rhs_series(&jets)?.iter().map(|j| j.coeff(k)).collect())
        };
        let zero = vec![0.0; n];
        let r0 = eval(&zero)?;
        let mut mat = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut e = zero.clone();
            e[j] = 1.0;
            let rj = eval(&e)?;
            for i in 0..n {
                mat[(i, j)] = -(rj[i] - r0[i]);
            }
            mat[(j, j)] += k as f64;
        }
        let ck = mat
            .lu()
            .solve(&DVector::from_vec(r0))
            .ok_or_else(|| Error::Numerical(format!("{}: singular solve at order {k}", ivp.label)))?;
        c.push(ck.iter().copied().collect());
    }
    Ok(c)
}

/// Series solution as one [`SeriesR`] per component.
pub fn series_bootstrap(ivp: &SingularIVP, order: usize) -> Result<Vec<SeriesR>> {
    let c = series_coefficients(ivp, order)?;
    Ok((0..ivp.dim())
        .map(|i| SeriesR::new(Parity::None, c.iter().map(|row| row[i]).collect()).expect("no parity"))
        .collect())
}

#[derive(Clone)]
pub struct SolveOptions {
    pub eps: f64,
    pub order: usize,
    pub integrate: IntegrateOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eps: DEFAULT_EPS, order: DEFAULT_ORDER, integrate: IntegrateOptions::with_tol(DEFAULT_TOL) }
    }
}

/// Series on `[0, eps]`, then adaptive integration in physical coordinates
/// on `[eps, t1]`. Stored states are physical. The handoff mismatch between
/// the series at `eps` and an integration from `eps/2` is recorded in
/// `meta["handoff_mismatch"]`.
pub fn solve_singular(ivp: &SingularIVP, t1: f64, opts: &SolveOptions) -> Result<Trajectory> {
    let eps = opts.eps;
    if !(eps > 0.0 && t1 > eps) {
        return Err(Error::Domain(format!("need 0 < eps < t1, got eps = {eps}, t1 = {t1}")));
    }
    let coeffs = series_coefficients(ivp, opts.order)?;
    let sys = ivp.system.clone();
    let sys_map = sys.clone();
    let segment = SeriesSegment {
        coeffs,
        t_end: eps,
        map: Arc::new(move |t, y| sys_map.to_physical(t, y)),
    };
    let p_eps = segment.eval(eps);
    let rhs = |t: f64, p: &[f64]| sys.physical_rhs(t, p);
    let mut traj = integrate(&rhs, eps, t1, &p_eps, &opts.integrate)?;
    let half = segment.eval(0.5 * eps);
    let check = integrate(&rhs, 0.5 * eps, eps, &half, &IntegrateOptions::with_tol(opts.integrate.tol))?;
    let end = check.y.last().expect("sample");
    let mismatch = end.iter().zip(&p_eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    traj.meta.insert("handoff_mismatch".into(), mismatch);
    traj.meta.insert("eps".into(), eps);
    traj.meta.insert("order".into(), opts.order as f64);
    let samples: Vec<f64> = (1..=8).map(|k| eps * k as f64 / 8.0).collect();
    Ok(traj.with_series(segment, &samples))
}

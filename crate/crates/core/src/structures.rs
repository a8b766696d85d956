//! Cohomogeneity-one coclosed G2-structure profiles `(A_i, B_i)` on
//! `R⁴ × S³`, and the coefficient functions of the instanton equations.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{fmt17, json_f64};
use crate::interp::MonotoneCubic;
use crate::jet::Jet;
use crate::quadrature::{Antiderivative, Func};

/// Number of Taylor coefficients carried for built-in profiles.
pub const SERIES_TERMS: usize = 24;
/// Below this time profiles are evaluated from their series.
pub const T_SWITCH: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Taylor coefficients at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesR {
    parity: Parity,
    coeffs: Vec<f64>,
}

impl SeriesR {
    pub fn new(parity: Parity, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("empty series".into()));
        }
        let bad = match parity {
            Parity::Even => coeffs.iter().skip(1).step_by(2).any(|c| *c != 0.0),
            Parity::Odd => coeffs.iter().step_by(2).any(|c| *c != 0.0),
            Parity::None => false,
        };
        if bad {
            return Err(Error::Domain(format!("series coefficients violate {parity:?} parity")));
        }
        Ok(SeriesR { parity, coeffs })
    }

    /// Project a jet onto the given parity, zeroing the other coefficients.
    pub fn from_jet(j: &Jet, parity: Parity) -> Self {
        let mut c = j.coeffs().to_vec();
        for (k, v) in c.iter_mut().enumerate() {
            let keep = match parity {
                Parity::Even => k % 2 == 0,
                Parity::Odd => k % 2 == 1,
                Parity::None => true,
            };
            if !keep {
                *v = 0.0;
            }
        }
        SeriesR { parity, coeffs: c }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn jet(&self, n: usize) -> Jet {
        Jet::new(self.coeffs.clone()).resized(n)
    }

    pub fn eval(&self, t: f64) -> f64 {
        Jet::new(self.coeffs.clone()).eval(t)
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        Jet::new(self.coeffs.clone()).eval_derivative(t)
    }
}

/// Value and first derivative of a scalar function of `t`.
pub type Evaluator = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// A single profile function with its Taylor series at `t = 0`.
#[derive(Clone)]
pub struct Profile {
    eval: Evaluator,
    series: SeriesR,
    switch: f64,
}

impl Profile {
    /// `eval` is used for `t > switch`, the series below.
    pub fn new(eval: Evaluator, series: SeriesR, switch: f64) -> Self {
        Profile { eval, series, switch }
    }

    pub fn from_series(series: SeriesR) -> Self {
        let s = series.clone();
        Profile::new(Arc::new(move |t| (s.eval(t), s.eval_derivative(t))), series, 0.0)
    }

    /// Monotone cubic interpolation through samples, series below `switch`.
    pub fn sampled(t: Vec<f64>, v: Vec<f64>, series: SeriesR, switch: f64) -> Result<Self> {
        let m = MonotoneCubic::new(t, v)
            .ok_or_else(|| Error::Domain("samples must have increasing abscissae".into()))?;
        Ok(Profile::new(Arc::new(move |t| m.eval(t)), series, switch))
    }

    pub fn value_and_derivative(&self, t: f64) -> (f64, f64) {
        if t <= self.switch {
            (self.series.eval(t), self.series.eval_derivative(t))
        } else {
            (self.eval)(t)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_and_derivative(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.value_and_derivative(t).1
    }

    pub fn series(&self) -> &SeriesR {
        &self.series
    }
}

/// All profile values at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileState {
    pub a: [f64; 3],
    pub a_dot: [f64; 3],
    pub b: [f64; 3],
    pub b_dot: [f64; 3],
}

pub type JointEvaluator = Arc<dyn Fn(f64) -> ProfileState + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum StructureKind {
    BryantSalamon { r_max: f64 },
    Su23,
    LinearExample,
    Sampled,
    Custom,
}

#[derive(Clone)]
pub struct StructureData {
    label: String,
    kind: StructureKind,
    joint: JointEvaluator,
    switch: f64,
    a_series: [SeriesR; 3],
    b_series: [SeriesR; 3],
    b0: f64,
    b2: f64,
    t_max: f64,
    symmetric: bool,
    /// Abscissae where the profiles are only piecewise smooth.
    knots: Arc<Vec<f64>>,
    cache: Arc<StructureCache>,
}

#[derive(Default)]
struct StructureCache {
    coefficients: OnceLock<Arc<CoefficientFns>>,
    su23: OnceLock<Arc<Su23Integrals>>,
}

impl std::fmt::Debug for StructureData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StructureData")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("b0", &self.b0)
            .field("b2", &self.b2)
            .field("t_max", &self.t_max)
            .finish()
    }
}

fn check_a_series(s: &SeriesR) -> Result<()> {
    if s.parity() != Parity::Odd || (s.coeff(1) - 0.5).abs() > 1e-12 {
        return Err(Error::Precondition("A series must be odd with leading coefficient 1/2".into()));
    }
    Ok(())
}

fn check_b_series(s: &SeriesR, b0: f64) -> Result<()> {
    if s.parity() != Parity::Even || (s.coeff(0) - b0).abs() > 1e-12 * b0.max(1.0) {
        return Err(Error::Precondition("B series must be even with constant term b0".into()));
    }
    Ok(())
}

impl StructureData {
    /// General constructor from a joint evaluator and Taylor data. `b0`
    /// and `b2` are read from the `B` series, which must agree in their first
    /// two even coefficients.
    pub fn from_parts(
        label: impl Into<String>,
        kind: StructureKind,
        joint: JointEvaluator,
        a_series: [SeriesR; 3],
        b_series: [SeriesR; 3],
        t_max: f64,
        switch: f64,
    ) -> Result<Self> {
        let b0 = b_series[0].coeff(0);
        let b2 = b_series[0].coeff(2);
        if !(b0 > 0.0) {
            return Err(Error::Domain(format!("b0 must be positive, got {b0}")));
        }
        for s in &a_series {
            check_a_series(s)?;
        }
        for s in &b_series {
            check_b_series(s, b0)?;
            if (s.coeff(2) - b2).abs() > 1e-12 * (1.0 + b2.abs()) {
                return Err(Error::Precondition("all B series must share b2".into()));
            }
        }
        if !(t_max > 0.0) {
            return Err(Error::Domain("t_max must be positive".into()));
        }
        let symmetric = a_series[1..].iter().all(|s| s == &a_series[0])
            && b_series[1..].iter().all(|s| s == &b_series[0]);
        Ok(StructureData {
            label: label.into(),
            kind,
            joint,
            switch,
            a_series,
            b_series,
            b0,
            b2,
            t_max,
            symmetric,
            knots: Arc::new(Vec::new()),
            cache: Arc::new(StructureCache::default()),
        })
    }

    /// General SU(2)²-invariant structure from six user profiles.
    pub fn from_profiles(label: impl Into<String>, a: [Profile; 3], b: [Profile; 3], t_max: f64) -> Result<Self> {
        let a_series = [a[0].series.clone(), a[1].series.clone(), a[2].series.clone()];
        let b_series = [b[0].series.clone(), b[1].series.clone(), b[2].series.clone()];
        let joint: JointEvaluator = Arc::new(move |t| {
            let mut st = ProfileState { a: [0.0; 3], a_dot: [0.0; 3], b: [0.0; 3], b_dot: [0.0; 3] };
            for i in 0..3 {
                (st.a[i], st.a_dot[i]) = a[i].value_and_derivative(t);
                (st.b[i], st.b_dot[i]) = b[i].value_and_derivative(t);
            }
            st
        });
        let s = StructureData::from_parts(label, StructureKind::Custom, joint, a_series, b_series, t_max, 0.0)?;
        s.check_positive()?;
        Ok(s)
    }

    fn check_positive(&self) -> Result<()> {
        let n = 200;
        for k in 1..=n {
            let t = self.t_max * k as f64 / n as f64;
            let st = self.state(t);
            if st.a.iter().chain(&st.b).any(|v| !(*v > 0.0)) {
                return Err(Error::Domain(format!("profile is not positive at t = {t}")));
            }
        }
        Ok(())
    }

    /// Points where the profiles may have discontinuous second derivatives
    /// (sample abscissae of interpolated profiles); quadrature tables break
    /// there.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &StructureKind {
        &self.kind
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn is_su23_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn a_series(&self, i: usize) -> &SeriesR {
        &self.a_series[i]
    }

    pub fn b_series(&self, i: usize) -> &SeriesR {
        &self.b_series[i]
    }

    pub fn a3(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.a_series[i].coeff(3))
    }

    pub fn a5(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.a_series[i].coeff(5))
    }

    /// Profile values; series-based for `t ≤ switch`.
    pub fn state(&self, t: f64) -> ProfileState {
        if t <= self.switch {
            let mut st = ProfileState { a: [0.0; 3], a_dot: [0.0; 3], b: [0.0; 3], b_dot: [0.0; 3] };
            for i in 0..3 {
                st.a[i] = self.a_series[i].eval(t);
                st.a_dot[i] = self.a_series[i].eval_derivative(t);
                st.b[i] = self.b_series[i].eval(t);
                st.b_dot[i] = self.b_series[i].eval_derivative(t);
            }
            st
        } else {
            (self.joint)(t)
        }
    }

    pub fn a_values(&self, t: f64) -> [f64; 3] {
        self.state(t).a
    }

    pub fn b_values(&self, t: f64) -> [f64; 3] {
        self.state(t).b
    }

    /// Evaluator view of `A_i`.
    pub fn a_profile(&self, i: usize) -> Profile {
        let s = self.clone();
        Profile::new(
            Arc::new(move |t| {
                let st = s.state(t);
                (st.a[i], st.a_dot[i])
            }),
            self.a_series[i].clone(),
            0.0,
        )
    }

    /// Evaluator view of `B_i`.
    pub fn b_profile(&self, i: usize) -> Profile {
        let s = self.clone();
        Profile::new(
            Arc::new(move |t| {
                let st = s.state(t);
                (st.b[i], st.b_dot[i])
            }),
            self.b_series[i].clone(),
            0.0,
        )
    }

    /// Coefficient functions, computed once per structure.
    pub fn coefficients(&self) -> Arc<CoefficientFns> {
        self.cache.coefficients.get_or_init(|| Arc::new(coefficient_functions(self))).clone()
    }

    /// Integrals used by the explicit SU(2)³ families.
    pub fn su23_integrals(&self) -> Result<Arc<Su23Integrals>> {
        if !self.symmetric {
            return Err(Error::Precondition("structure is not SU(2)^3-symmetric".into()));
        }
        if let Some(v) = self.cache.su23.get() {
            return Ok(v.clone());
        }
        let v = Arc::new(Su23Integrals::new(self));
        Ok(self.cache.su23.get_or_init(|| v).clone())
    }

    /// Sample grid `t_k = t_max·k/(n−1)`, `k = 0..n`.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n).map(|k| self.t_max * k as f64 / (n - 1) as f64).collect()
    }

    /// CSV table `t,A1,A2,A3,B1,B2,B3`.
    pub fn profile_csv(&self, n: usize) -> String {
        let mut out = String::from("t,A1,A2,A3,B1,B2,B3\n");
        for t in self.sample_grid(n) {
            let st = self.state(t);
            let row: Vec<String> = std::iter::once(t).chain(st.a).chain(st.b).map(fmt17).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON document with Taylor data and `n` samples.
    pub fn export_json(&self, n: usize) -> String {
        let grid = self.sample_grid(n);
        let states: Vec<ProfileState> = grid.iter().map(|&t| self.state(t)).collect();
        let cols = |f: &dyn Fn(&ProfileState) -> [f64; 3]| -> serde_json::Value {
            serde_json::Value::Array(
                (0..3)
                    .map(|i| serde_json::Value::Array(states.iter().map(|st| json_f64(f(st)[i])).collect()))
                    .collect(),
            )
        };
        let arr = |v: &[f64]| serde_json::Value::Array(v.iter().map(|x| json_f64(*x)).collect());
        let doc = serde_json::json!({
            "label": self.label,
            "b0": json_f64(self.b0),
            "b2": json_f64(self.b2),
            "a3": arr(&self.a3()),
            "a5": arr(&self.a5()),
            "samples": {
                "t": arr(&grid),
                "A": cols(&|st| st.a),
                "B": cols(&|st| st.b),
            },
            "series": {
                "A": self.a_series.iter().map(|c| arr(c.coeffs())).collect::<Vec<_>>(),
                "B": self.b_series.iter().map(|c| arr(c.coeffs())).collect::<Vec<_>>(),
            },
            "t_max": json_f64(self.t_max),
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    /// Rebuild a structure from [`StructureData::export_json`] output. The
    /// profiles interpolate the samples monotonically; Taylor data below the
    /// first positive sample comes from `(b0, b2, a3, a5)`.
    pub fn import_json(text: &str) -> Result<Self> {
        let doc: StructureDoc = serde_json::from_str(text)?;
        if !(doc.b0 > 0.0) {
            return Err(Error::Domain(format!("b0 must be positive, got {}", doc.b0)));
        }
        let n = doc.samples.t.len();
        if n < 2 || doc.samples.a.iter().chain(&doc.samples.b).any(|c| c.len() != n) {
            return Err(Error::Config("sample columns have inconsistent lengths".into()));
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..3 {
            let (sa, sb) = match &doc.series {
                Some(sd) => (SeriesR::new(Parity::Odd, sd.a[i].clone())?, SeriesR::new(Parity::Even, sd.b[i].clone())?),
                None => (
                    SeriesR::new(Parity::Odd, vec![0.0, 0.5, 0.0, doc.a3[i], 0.0, doc.a5[i]])?,
                    SeriesR::new(Parity::Even, vec![doc.b0, 0.0, doc.b2])?,
                ),
            };
            if (sa.coeff(3) - doc.a3[i]).abs() > 1e-12 * (1.0 + doc.a3[i].abs())
                || (sb.coeff(0) - doc.b0).abs() > 1e-12 * (1.0 + doc.b0.abs())
            {
                return Err(Error::Config("series disagree with b0/a3".into()));
            }
            a.push(Profile::sampled(doc.samples.t.clone(), doc.samples.a[i].clone(), sa, 0.0)?);
            b.push(Profile::sampled(doc.samples.t.clone(), doc.samples.b[i].clone(), sb, 0.0)?);
        }
        let a: [Profile; 3] = a.try_into().ok().unwrap();
        let b: [Profile; 3] = b.try_into().ok().unwrap();
        let a_series = [0, 1, 2].map(|i| a[i].series.clone());
        let b_series = [0, 1, 2].map(|i| b[i].series.clone());
        let joint: JointEvaluator = Arc::new(move |t| {
            let mut st = ProfileState { a: [0.0; 3], a_dot: [0.0; 3], b: [0.0; 3], b_dot: [0.0; 3] };
            for i in 0..3 {
                (st.a[i], st.a_dot[i]) = a[i].value_and_derivative(t);
                (st.b[i], st.b_dot[i]) = b[i].value_and_derivative(t);
            }
            st
        });
        // interpolation is exact at every sample, including t = 0
        let mut s =
            StructureData::from_parts(doc.label, StructureKind::Sampled, joint, a_series, b_series, doc.t_max, 0.0)?;
        s.knots = Arc::new(doc.samples.t);
        Ok(s)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    label: String,
    b0: f64,
    b2: f64,
    a3: [f64; 3],
    a5: [f64; 3],
    samples: SamplesDoc,
    #[serde(default)]
    series: Option<SeriesDoc>,
    t_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDoc {
    #[serde(rename = "A")]
    a: [Vec<f64>; 3],
    #[serde(rename = "B")]
    b: [Vec<f64>; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplesDoc {
    t: Vec<f64>,
    #[serde(rename = "A")]
    a: [Vec<f64>; 3],
    #[serde(rename = "B")]
    b: [Vec<f64>; 3],
}

/// `b₂ = 1/(8b₀) − b₀ Σ a_{i,3}` for a coclosed structure.
pub fn b2_from_data(b0: f64, a3: [f64; 3]) -> Result<f64> {
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("b0 must be positive, got {b0}")));
    }
    Ok(1.0 / (8.0 * b0) - b0 * (a3[0] + a3[1] + a3[2]))
}

/// `A = t/2`, `B = √(b₀² + t²/4)`.
pub fn make_linear_example(b0: f64) -> Result<StructureData> {
    make_linear_example_with_horizon(b0, 100.0)
}

pub fn make_linear_example_with_horizon(b0: f64, t_max: f64) -> Result<StructureData> {
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("b0 must be positive, got {b0}")));
    }
    let n = SERIES_TERMS;
    let a = SeriesR::new(Parity::Odd, {
        let mut c = vec![0.0; n];
        c[1] = 0.5;
        c
    })?;
    let t = Jet::var(n);
    let bj = (&(&t * &t) * 0.25 + b0 * b0).sqrt();
    let b = SeriesR::from_jet(&bj, Parity::Even);
    let joint: JointEvaluator = Arc::new(move |t| {
        let b = (b0 * b0 + 0.25 * t * t).sqrt();
        let bd = 0.25 * t / b;
        ProfileState { a: [0.5 * t; 3], a_dot: [0.5; 3], b: [b; 3], b_dot: [bd; 3] }
    });
    StructureData::from_parts(
        format!("linear-example(b0={})", fmt17(b0)),
        StructureKind::LinearExample,
        joint,
        [a.clone(), a.clone(), a],
        [b.clone(), b.clone(), b],
        t_max,
        0.0,
    )
}

fn bs_speed(w: f64) -> f64 {
    let w2 = w * w;
    2.0 * (1.0 + w2).powf(1.5) / (3.0 + 3.0 * w2 + w2 * w2).sqrt()
}

/// Map between `t` and `u = √(r − 1)` for the Bryant–Salamon metric.
struct BsCoordinate {
    t_of_u: Antiderivative,
    u_of_t: Jet,
    u_max: f64,
}

impl BsCoordinate {
    fn new(r_max: f64) -> Self {
        let n = SERIES_TERMS + 2;
        let w = Jet::var(n);
        let w2 = &w * &w;
        let g = &(&(&w2 + 1.0).powf(1.5) * 2.0) / &(&(&w2 * 3.0 + 3.0) + &(&w2 * &w2)).sqrt();
        let t_of_w = g.integral().resized(n);
        let u_of_t = t_of_w.reversion();
        let u_max = (r_max - 1.0).sqrt();
        let f: Func = Arc::new(bs_speed);
        let t_of_u = Antiderivative::new(f, Some(t_of_w), 0.05, u_max);
        BsCoordinate { t_of_u, u_of_t, u_max }
    }

    fn u(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t <= 0.05 {
            return self.u_of_t.eval(t);
        }
        // bracket then safeguarded Newton; t(u) is strictly increasing
        let mut lo = 0.0;
        let mut hi = self.u_max.max(1.0);
        while self.t_of_u.eval(hi) < t {
            hi *= 2.0;
        }
        let mut u = (t.sqrt()).clamp(lo, hi);
        if t < 1.0 {
            u = self.u_of_t.eval(t.min(0.3)).clamp(lo, hi);
        }
        for _ in 0..100 {
            let r = self.t_of_u.eval(u) - t;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let mut next = u - r / bs_speed(u);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - u).abs() <= 1e-15 * u.max(1e-300);
            u = next;
            if done {
                break;
            }
        }
        u
    }
}

/// Bryant–Salamon complete G2-metric on `R⁴ × S³` with `r ∈ [1, r_max]`.
pub fn make_bryant_salamon(r_max: f64) -> Result<StructureData> {
    if !(r_max > 1.0) {
        return Err(Error::Domain(format!("r_max must exceed 1, got {r_max}")));
    }
    let coord = Arc::new(BsCoordinate::new(r_max));
    let n = SERIES_TERMS;
    let u = coord.u_of_t.resized(n);
    let u2 = &u * &u;
    let r = &u2 + 1.0;
    let aj = &(&u * &(&(&u2 * 3.0 + 3.0) + &(&u2 * &u2)).sqrt()) / &(&r.sqrt() * 3.0);
    let b0 = (1.0f64 / 3.0).sqrt();
    let bj = &r * b0;
    let a = SeriesR::from_jet(&aj, Parity::Odd);
    let b = SeriesR::from_jet(&bj, Parity::Even);
    let t_max = coord.t_of_u.eval(coord.u_max);
    let c = coord.clone();
    let joint: JointEvaluator = Arc::new(move |t| {
        let u = c.u(t);
        let u2 = u * u;
        let r = 1.0 + u2;
        let q = (3.0 + 3.0 * u2 + u2 * u2).sqrt();
        let a = u * q / (3.0 * r.sqrt());
        let a_dot = 1.0 / 3.0 + 1.0 / (6.0 * r * r * r);
        let b = r * b0;
        let b_dot = b0 * u * q / r.powf(1.5);
        ProfileState { a: [a; 3], a_dot: [a_dot; 3], b: [b; 3], b_dot: [b_dot; 3] }
    });
    StructureData::from_parts(
        format!("bryant-salamon(r_max={})", fmt17(r_max)),
        StructureKind::BryantSalamon { r_max },
        joint,
        [a.clone(), a.clone(), a],
        [b.clone(), b.clone(), b],
        t_max,
        1e-3,
    )
}

/// Radial coordinate `r(t)` of the Bryant–Salamon metric.
pub fn bryant_salamon_r(s: &StructureData, t: f64) -> f64 {
    s.state(t).b[0] * 3.0f64.sqrt()
}

/// SU(2)³-invariant coclosed structure determined by `A₁ = A₂ = A₃` and
/// `b₀`: `B` solves `(A²B²)' = A²B²/A + A³` with `B(0) = b₀`.
pub fn make_su23_structure(a1: Profile, b0: f64, t_max: f64) -> Result<StructureData> {
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("b0 must be positive, got {b0}")));
    }
    check_a_series(a1.series())?;
    let n = a1.series().coeffs().len().max(6);
    for k in 1..=400 {
        let t = t_max * k as f64 / 400.0;
        if !(a1.value(t) > 0.0) {
            return Err(Error::Domain(format!("A1 is not positive at t = {t}")));
        }
    }
    let aj = a1.series().jet(n);
    let alpha = aj.div_t_pow(1).scale(2.0); // 2A/t
    let m = alpha.len();
    // B series from t ω' + 2(1 − 1/α) ω = t² α³/8, ω = A²B²/t²
    let beta = &Jet::constant(1.0, m) - &alpha.recip();
    let rhs = (&(&alpha * &alpha) * &alpha).scale(0.125).mul_t_pow(2);
    let mut omega = vec![0.0; m];
    omega[0] = 0.25 * b0 * b0;
    for k in 1..m {
        let s: f64 = (1..=k).map(|j| beta.coeff(j) * omega[k - j]).sum();
        omega[k] = (rhs.coeff(k) - 2.0 * s) / k as f64;
    }
    let omega = Jet::new(omega);
    let bj = (&(&omega * 4.0) / &(&alpha * &alpha)).sqrt();
    let b_series = SeriesR::from_jet(&bj, Parity::Even);

    // R(t) = ∫₀ᵗ (1/A − 2/ξ) dξ, E = 4t² e^R, I(t) = ∫₀ᵗ A³/E
    let reg = (&alpha.recip() * 2.0 - 2.0).div_t_pow(1);
    let r_series = reg.integral();
    let a_eval = a1.clone();
    let reg_f: Func = Arc::new(move |x| 1.0 / a_eval.value(x) - 2.0 / x);
    let r_table = Arc::new(Antiderivative::new(reg_f, Some(r_series.clone()), T_SWITCH, t_max));
    let m2 = r_series.len().min(alpha.len());
    let i_integrand = (&(&alpha.resized(m2) * &alpha.resized(m2)) * &alpha.resized(m2))
        .scale(1.0 / 32.0)
        .mul_t_pow(1)
        / r_series.resized(m2).exp();
    let i_series = i_integrand.integral();
    let a_eval = a1.clone();
    let rt = r_table.clone();
    let i_f: Func = Arc::new(move |x| {
        let a = a_eval.value(x);
        a * a * a / (4.0 * x * x * rt.eval(x).exp())
    });
    let i_table = Arc::new(Antiderivative::new(i_f, Some(i_series), T_SWITCH, t_max));

    let a_series = a1.series().clone();
    let joint: JointEvaluator = Arc::new(move |t| {
        let (a, a_dot) = a1.value_and_derivative(t);
        let e = 4.0 * t * t * r_table.eval(t).exp();
        let w = e * (b0 * b0 / 16.0 + i_table.eval(t));
        let b = w.sqrt() / a;
        let b_dot = b * (0.5 / a + 0.5 * a / (b * b) - a_dot / a);
        ProfileState { a: [a; 3], a_dot: [a_dot; 3], b: [b; 3], b_dot: [b_dot; 3] }
    });
    StructureData::from_parts(
        format!("su23(b0={})", fmt17(b0)),
        StructureKind::Su23,
        joint,
        [a_series.clone(), a_series.clone(), a_series],
        [b_series.clone(), b_series.clone(), b_series],
        t_max,
        T_SWITCH,
    )
}

/// Coefficients of the diagonal instanton equations
/// `ḟ_i⁺ + F_i f_i⁺ = f_j⁻f_k⁻ − f_j⁺f_k⁺`,
/// `ḟ_i⁻ + G_i f_i⁻ = f_j⁻f_k⁺ + f_j⁺f_k⁻`.
pub struct CoefficientFns {
    s: StructureData,
    tf: [SeriesR; 3],
    tg: [SeriesR; 3],
}

/// Series of `t·F_i` and `t·G_i` from the profile series.
fn coefficient_series(s: &StructureData) -> ([SeriesR; 3], [SeriesR; 3]) {
    let n = s.a_series.iter().chain(&s.b_series).map(|x| x.coeffs().len()).min().unwrap();
    let a: Vec<Jet> = s.a_series.iter().map(|x| x.jet(n)).collect();
    let b: Vec<Jet> = s.b_series.iter().map(|x| x.jet(n - 1)).collect();
    let al: Vec<Jet> = a.iter().map(|x| x.div_t_pow(1)).collect();
    let ad: Vec<Jet> = a.iter().map(|x| x.derivative()).collect();
    let bd: Vec<Jet> = b.iter().map(|x| x.derivative().resized(n - 1)).collect();
    let t2 = Jet::var(n - 1).mul_t_pow(1);
    let mut tf = Vec::new();
    let mut tg = Vec::new();
    for i in 0..3 {
        let (j, k) = crate::algebra::cyclic(i);
        let f = &(&ad[i] / &al[i]) + &(&(&t2 * &al[i]) / &(&b[j] * &b[k]));
        let f = &f - &(&al[i] / &(&al[j] * &al[k]));
        let g = &(&(&bd[i] / &b[i]).mul_t_pow(1) + &(&b[i] / &(&b[j] * &al[k])))
            + &(&b[i] / &(&al[j] * &b[k]));
        tf.push(SeriesR::from_jet(&f, Parity::Even));
        tg.push(SeriesR::from_jet(&g, Parity::Even));
    }
    (tf.try_into().unwrap(), tg.try_into().unwrap())
}

pub fn coefficient_functions(s: &StructureData) -> CoefficientFns {
    let (tf, tg) = coefficient_series(s);
    CoefficientFns { s: s.clone(), tf, tg }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("coefficient functions need t > 0, got {t}")));
    }
    Ok(())
}

impl CoefficientFns {
    /// `F_i(t)`.
    pub fn f(&self, i: usize, t: f64) -> Result<f64> {
        check_t(t)?;
        if t <= T_SWITCH.min(self.s.switch.max(1e-3)) {
            return Ok(self.tf[i].eval(t) / t);
        }
        let st = self.s.state(t);
        Ok(f_from_state(&st, i))
    }

    /// `G_i(t)`.
    pub fn g(&self, i: usize, t: f64) -> Result<f64> {
        check_t(t)?;
        if t <= T_SWITCH.min(self.s.switch.max(1e-3)) {
            return Ok(self.tg[i].eval(t) / t);
        }
        let st = self.s.state(t);
        Ok(g_from_state(&st, i))
    }

    /// `F = −F₁` in the SU(2)³-symmetric case, the coefficient in
    /// `ẋ = F x + y² − x²`.
    pub fn signed_f(&self, t: f64) -> Result<f64> {
        if !self.s.symmetric {
            return Err(Error::Precondition("signed F needs an SU(2)^3-symmetric structure".into()));
        }
        Ok(-self.f(0, t)?)
    }

    pub fn tf_series(&self, i: usize) -> &SeriesR {
        &self.tf[i]
    }

    pub fn tg_series(&self, i: usize) -> &SeriesR {
        &self.tg[i]
    }

    /// Series of `t·F` for the signed SU(2)³ coefficient.
    pub fn signed_tf_series(&self) -> SeriesR {
        let c: Vec<f64> = self.tf[0].coeffs().iter().map(|v| -v).collect();
        SeriesR::new(Parity::Even, c).expect("even")
    }

    pub fn structure(&self) -> &StructureData {
        &self.s
    }
}

pub fn f_from_state(st: &ProfileState, i: usize) -> f64 {
    let (j, k) = crate::algebra::cyclic(i);
    st.a_dot[i] / st.a[i] + st.a[i] / (st.b[j] * st.b[k]) - st.a[i] / (st.a[j] * st.a[k])
}

pub fn g_from_state(st: &ProfileState, i: usize) -> f64 {
    let (j, k) = crate::algebra::cyclic(i);
    st.b_dot[i] / st.b[i] + st.b[i] / (st.b[j] * st.a[k]) + st.b[i] / (st.a[j] * st.b[k])
}

/// Integrals entering the explicit SU(2)³ instantons:
/// `E(t) = t·exp ∫₀ᵗ (F(ξ) − 1/ξ) dξ` and `J(t) = ∫₀ᵗ E`.
pub struct Su23Integrals {
    log_reg: Antiderivative,
    j: Antiderivative,
}

impl Su23Integrals {
    fn new(s: &StructureData) -> Self {
        let cf = s.coefficients();
        let tfs = cf.signed_tf_series();
        let n = tfs.coeffs().len();
        let reg = (&tfs.jet(n) - 1.0).div_t_pow(1);
        let log_series = reg.integral();
        let c2 = cf.clone();
        let reg_f: Func = Arc::new(move |x| c2.signed_f(x).expect("t > 0") - 1.0 / x);
        let log_reg = Antiderivative::with_breaks(reg_f, Some(log_series.clone()), T_SWITCH, s.t_max, s.knots());
        let e_series = log_series.exp().mul_t_pow(1);
        let j_series = e_series.integral();
        let lr = log_reg.clone();
        let e_f: Func = Arc::new(move |x| x * lr.eval(x).exp());
        let j = Antiderivative::with_breaks(e_f, Some(j_series), T_SWITCH, s.t_max, s.knots());
        Su23Integrals { log_reg, j }
    }

    pub fn e(&self, t: f64) -> f64 {
        t * self.log_reg.eval(t).exp()
    }

    pub fn j(&self, t: f64) -> f64 {
        self.j.eval(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn series_parity_is_enforced() {
        assert!(SeriesR::new(Parity::Odd, vec![0.0, 0.5, 0.1]).is_err());
        assert!(SeriesR::new(Parity::Even, vec![1.0, 0.0, 0.1]).is_ok());
    }

    #[test]
    fn b2_examples() {
        assert_eq!(b2_from_data(1.0, [0.0; 3]).unwrap(), 0.125);
        assert_eq!(b2_from_data(0.5, [1.0, 0.0, 0.0]).unwrap(), -0.25);
        assert!(b2_from_data(0.0, [0.0; 3]).is_err());
    }

    #[test]
    fn linear_example_closed_form() {
        let s = make_linear_example(1.5).unwrap();
        assert_eq!(s.b_values(0.0)[0], 1.5);
        assert!(rel(s.b_values(3.0)[0], 1.5 * 2f64.sqrt()) < 1e-15);
        assert_eq!(s.a_series(0).coeff(1), 0.5);
        assert!(s.a_series(0).coeffs().iter().enumerate().all(|(k, c)| k == 1 || *c == 0.0));
        assert!(rel(s.b2(), 1.0 / (8.0 * 1.5)) < 1e-15);
        assert!(make_linear_example(0.0).is_err());
    }

    #[test]
    fn bryant_salamon_boundary_values() {
        let s = make_bryant_salamon(5.0).unwrap();
        assert_eq!(s.a_values(0.0)[0], 0.0);
        assert_eq!(s.b0(), (1.0f64 / 3.0).sqrt());
        assert!((s.state(0.0).a_dot[0] - 0.5).abs() < 1e-15);
        assert!((s.a3()[0] + 0.125).abs() < 1e-14);
        assert!(make_bryant_salamon(1.0).is_err());
    }

    #[test]
    fn bryant_salamon_coordinate_inverts() {
        let s = make_bryant_salamon(20.0).unwrap();
        for t in [0.02, 0.5, 1.0, 3.0, 10.0] {
            let r = bryant_salamon_r(&s, t);
            // t(r) = ∫₁^r ds / √(1 − s⁻³), substituting s = 1 + w²
            let tr = crate::quadrature::integrate(&|w: f64| bs_speed(w), 0.0, (r - 1.0).sqrt(), 1e-14);
            assert!((tr - t).abs() < 1e-12 * t.max(1.0), "t={t}");
        }
        // dense sweep: r(t) must be increasing with slope √(1 − r⁻³)
        let mut prev = 1.0;
        for k in 1..4000 {
            let t = 0.005 * k as f64;
            let r = bryant_salamon_r(&s, t);
            assert!(r > prev, "t={t}");
            prev = r;
        }
    }

    #[test]
    fn coefficient_leading_terms() {
        for s in [make_bryant_salamon(10.0).unwrap(), make_linear_example(1.0).unwrap()] {
            let c = coefficient_functions(&s);
            for i in 0..3 {
                assert!((c.tf_series(i).coeff(0) + 1.0).abs() < 1e-13);
                assert!((c.tg_series(i).coeff(0) - 4.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn linear_signed_f_closed_form() {
        let b0 = 0.8;
        let s = make_linear_example(b0).unwrap();
        let c = coefficient_functions(&s);
        for t in [0.05, 0.4, 2.0, 9.0] {
            let expect = 1.0 / t - t / (2.0 * (b0 * b0 + t * t / 4.0));
            assert!(rel(c.signed_f(t).unwrap(), expect) < 1e-13);
        }
        let c1 = coefficient_functions(&make_linear_example(1.0).unwrap());
        assert!((c1.signed_tf_series().coeff(2) + 0.5).abs() < 1e-14);
        assert!(c.f(0, 0.0).is_err());
    }

    #[test]
    fn su23_from_linear_profile_is_closed_form() {
        let b0 = 0.7;
        let a = Profile::from_series(SeriesR::new(Parity::Odd, vec![0.0, 0.5]).unwrap());
        let s = make_su23_structure(a, b0, 10.0).unwrap();
        for t in [0.0, 0.005, 0.3, 2.0, 9.5] {
            let b = s.b_values(t)[0];
            assert!((b * b - (b0 * b0 + t * t / 4.0)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn json_roundtrip_preserves_samples() {
        let s = make_linear_example(1.0).unwrap();
        let text = s.export_json(11);
        let back = StructureData::import_json(&text).unwrap();
        for t in s.sample_grid(11) {
            for i in 0..3 {
                assert_eq!(back.a_values(t)[i], s.a_values(t)[i]);
                assert_eq!(back.b_values(t)[i], s.b_values(t)[i]);
            }
        }
        assert!(StructureData::import_json("{\"label\":\"x\",\"oops\":1}").is_err());
    }
}

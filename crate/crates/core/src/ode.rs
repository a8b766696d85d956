//! Adaptive Dormand–Prince 8(5,3) integration with 7th-order dense output
//! and event localisation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dop853_tableau::*;
use crate::error::{Error, Result};
use crate::format::{csv_row, fmt17};

/// Right-hand side `ẏ = f(t, y)`.
pub type Rhs<'a> = &'a (dyn Fn(f64, &[f64]) -> Vec<f64> + Sync);

/// Predicate that is true while the state is inside the region of interest.
pub type Region = Arc<dyn Fn(f64, &[f64]) -> bool + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    BlowUp,
    RegionExit,
    Horizon,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::BlowUp => "blow-up",
            EventKind::RegionExit => "region-exit",
            EventKind::Horizon => "horizon",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
}

#[derive(Clone)]
pub struct EventSpec {
    /// Stop once the Euclidean norm of the state exceeds this value.
    pub blowup_threshold: f64,
    /// Stop when this predicate turns false.
    pub region: Option<Region>,
    /// Bisection tolerance in `t` for event times.
    pub localize_tol: f64,
}

impl Default for EventSpec {
    fn default() -> Self {
        EventSpec { blowup_threshold: 1e8, region: None, localize_tol: 1e-8 }
    }
}

#[derive(Clone)]
pub struct IntegrateOptions {
    /// Used as both absolute and relative tolerance.
    pub tol: f64,
    pub events: EventSpec,
    /// Optional output grid; otherwise samples are the accepted steps.
    pub grid: Option<Vec<f64>>,
    pub max_steps: usize,
    pub h_init: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { tol: 1e-10, events: EventSpec::default(), grid: None, max_steps: 1_000_000, h_init: None }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegrateOptions { tol, ..Default::default() }
    }
}

/// Dense output on one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 8],
}

impl DenseSegment {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        (0..r[0].len())
            .map(|i| {
                r[0][i]
                    + s * (r[1][i]
                        + s1 * (r[2][i]
                            + s * (r[3][i] + s1 * (r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]))))))
            })
            .collect()
    }
}

/// Maps reduced coordinates to stored coordinates on the series segment.
pub type SeriesMap = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Truncated Taylor solution near `t = 0`, valid on `[0, t_end]`.
#[derive(Clone)]
pub struct SeriesSegment {
    /// `coeffs[k][i]` is the `t^k` coefficient of component `i`.
    pub coeffs: Vec<Vec<f64>>,
    pub t_end: f64,
    pub map: SeriesMap,
}

impl SeriesSegment {
    pub fn reduced(&self, t: f64) -> Vec<f64> {
        let dim = self.coeffs[0].len();
        (0..dim).map(|i| self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c[i])).collect()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (self.map)(t, &self.reduced(t))
    }
}

/// Samples of a solution plus the data to evaluate it anywhere in range.
#[derive(Clone, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub events: Vec<Event>,
    /// Solver settings and statistics.
    pub meta: BTreeMap<String, f64>,
    segments: Vec<DenseSegment>,
    series: Option<SeriesSegment>,
}

impl std::fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trajectory")
            .field("samples", &self.t.len())
            .field("t_end", &self.t_end())
            .field("events", &self.events)
            .finish()
    }
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.y.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn t_start(&self) -> f64 {
        self.t.first().copied().unwrap_or(f64::NAN)
    }

    pub fn t_end(&self) -> f64 {
        self.t.last().copied().unwrap_or(f64::NAN)
    }

    pub fn event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn series(&self) -> Option<&SeriesSegment> {
        self.series.as_ref()
    }

    /// Prepend a series segment on `[0, t_end]` together with its samples.
    pub fn with_series(mut self, series: SeriesSegment, samples: &[f64]) -> Self {
        let mut t: Vec<f64> = samples.to_vec();
        let mut y: Vec<Vec<f64>> = samples.iter().map(|&s| series.eval(s)).collect();
        let first = self.t.first().copied();
        if let (Some(a), Some(b)) = (t.last(), first) {
            if *a >= b {
                t.pop();
                y.pop();
            }
        }
        t.append(&mut self.t);
        y.append(&mut self.y);
        self.t = t;
        self.y = y;
        self.series = Some(series);
        self
    }

    /// State at `t` from the series segment or the dense output.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        if let Some(s) = &self.series {
            if t >= 0.0 && t <= s.t_end {
                return Some(s.eval(t));
            }
        }
        let seg = self.segment_at(t)?;
        Some(seg.eval(t))
    }

    fn segment_at(&self, t: f64) -> Option<&DenseSegment> {
        if self.segments.is_empty() {
            return None;
        }
        let first = &self.segments[0];
        let last = self.segments.last().unwrap();
        let tol = 1e-12 * t.abs().max(1.0);
        if t < first.t0 - tol || t > last.t_end() + tol {
            return None;
        }
        let k = self.segments.partition_point(|s| s.t_end() < t);
        Some(&self.segments[k.min(self.segments.len() - 1)])
    }

    /// CSV with header `t,y0,...` and trailing event comment lines.
    pub fn to_csv(&self) -> String {
        let dim = self.dim();
        let mut out = String::from("t");
        for i in 0..dim {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for (t, y) in self.t.iter().zip(&self.y) {
            out.push_str(&fmt17(*t));
            out.push(',');
            out.push_str(&csv_row(y));
            out.push('\n');
        }
        for e in &self.events {
            out.push_str(&format!("# event,{},{}\n", e.kind.as_str(), fmt17(e.t)));
        }
        out
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    (0..y.len())
        .map(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        .collect()
}

fn lincomb(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n).map(|i| terms.iter().map(|(c, k)| c * k[i]).sum()).collect()
}

struct Step {
    y_new: Vec<f64>,
    err: f64,
    k: Vec<Vec<f64>>,
}

fn try_step(f: Rhs, t: f64, y: &[f64], k1: &[f64], h: f64, tol: f64) -> Step {
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + C6 * h, &axpy(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = f(t + C7 * h, &axpy(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
    let k8 = f(t + C8 * h, &axpy(y, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
    let k9 = f(
        t + C9 * h,
        &axpy(y, h, &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]),
    );
    let k10 = f(
        t + C10 * h,
        &axpy(y, h, &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)]),
    );
    let k11 = f(
        t + C11 * h,
        &axpy(
            y,
            h,
            &[(A111, k1), (A114, &k4), (A115, &k5), (A116, &k6), (A117, &k7), (A118, &k8), (A119, &k9), (A1110, &k10)],
        ),
    );
    let k12 = f(
        t + h,
        &axpy(
            y,
            h,
            &[
                (A121, k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
    );
    let incr = lincomb(&[(B1, k1), (B6, &k6), (B7, &k7), (B8, &k8), (B9, &k9), (B10, &k10), (B11, &k11), (B12, &k12)]);
    let y_new: Vec<f64> = y.iter().zip(&incr).map(|(a, d)| a + h * d).collect();
    let e1: Vec<f64> = (0..y.len()).map(|i| incr[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i]).collect();
    let e2 = lincomb(&[(ER1, k1), (ER6, &k6), (ER7, &k7), (ER8, &k8), (ER9, &k9), (ER10, &k10), (ER11, &k11), (ER12, &k12)]);
    let n = y.len();
    let (mut err, mut err2) = (0.0, 0.0);
    for i in 0..n {
        let sk = tol + tol * y[i].abs().max(y_new[i].abs());
        err += (e1[i] / sk).powi(2);
        err2 += (e2[i] / sk).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err * (1.0 / (n as f64 * deno)).sqrt();
    let err = if y_new.iter().all(|v| v.is_finite()) { err } else { f64::INFINITY };
    Step { y_new, err, k: vec![k1.to_vec(), k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12] }
}

fn dense(f: Rhs, t: f64, y: &[f64], h: f64, st: &Step, k13: &[f64]) -> DenseSegment {
    let k = &st.k;
    let (k1, k6, k7, k8, k9, k10, k11, k12) = (&k[0], &k[5], &k[6], &k[7], &k[8], &k[9], &k[10], &k[11]);
    let ydiff: Vec<f64> = st.y_new.iter().zip(y).map(|(a, b)| a - b).collect();
    let bspl: Vec<f64> = (0..y.len()).map(|i| h * k1[i] - ydiff[i]).collect();
    let r4: Vec<f64> = (0..y.len()).map(|i| ydiff[i] - h * k13[i] - bspl[i]).collect();
    let k14 = f(
        t + C14 * h,
        &axpy(
            y,
            h,
            &[(A141, k1), (A147, k7), (A148, k8), (A149, k9), (A1410, k10), (A1411, k11), (A1412, k12), (A1413, k13)],
        ),
    );
    let k15 = f(
        t + C15 * h,
        &axpy(
            y,
            h,
            &[(A151, k1), (A156, k6), (A157, k7), (A158, k8), (A1511, k11), (A1512, k12), (A1513, k13), (A1514, &k14)],
        ),
    );
    let k16 = f(
        t + C16 * h,
        &axpy(
            y,
            h,
            &[(A161, k1), (A166, k6), (A167, k7), (A168, k8), (A169, k9), (A1613, k13), (A1614, &k14), (A1615, &k15)],
        ),
    );
    let row = |d: [f64; 12]| -> Vec<f64> {
        let v = lincomb(&[
            (d[0], k1),
            (d[1], k6),
            (d[2], k7),
            (d[3], k8),
            (d[4], k9),
            (d[5], k10),
            (d[6], k11),
            (d[7], k12),
            (d[8], k13),
            (d[9], &k14),
            (d[10], &k15),
            (d[11], &k16),
        ]);
        v.into_iter().map(|x| h * x).collect()
    };
    let r5 = row([D41, D46, D47, D48, D49, D410, D411, D412, D413, D414, D415, D416]);
    let r6 = row([D51, D56, D57, D58, D59, D510, D511, D512, D513, D514, D515, D516]);
    let r7 = row([D61, D66, D67, D68, D69, D610, D611, D612, D613, D614, D615, D616]);
    let r8 = row([D71, D76, D77, D78, D79, D710, D711, D712, D713, D714, D715, D716]);
    DenseSegment { t0: t, h, r: [y.to_vec(), ydiff, bspl, r4, r5, r6, r7, r8] }
}

struct Controller {
    reject: bool,
}

impl Controller {
    const ALPHA: f64 = 1.0 / 8.0;
    const SAFE: f64 = 0.9;
    const MIN_SCALE: f64 = 0.333;
    const MAX_SCALE: f64 = 6.0;

    /// `Ok(next h)` on acceptance, `Err(retry h)` on rejection.
    fn decide(&mut self, err: f64, h: f64) -> std::result::Result<f64, f64> {
        if err <= 1.0 {
            let scale = if err == 0.0 {
                Self::MAX_SCALE
            } else {
                (Self::SAFE * err.powf(-Self::ALPHA)).clamp(Self::MIN_SCALE, Self::MAX_SCALE)
            };
            let next = if self.reject { h * scale.min(1.0) } else { h * scale };
            self.reject = false;
            Ok(next)
        } else {
            self.reject = true;
            let scale = if err.is_finite() { Self::MIN_SCALE.max(Self::SAFE * err.powf(-Self::ALPHA)) } else { 0.1 };
            Err(h * scale)
        }
    }
}

fn rms_scaled(v: &[f64], y: &[f64], tol: f64) -> f64 {
    let n = v.len() as f64;
    (v.iter().zip(y).map(|(a, b)| (a / (tol + tol * b.abs())).powi(2)).sum::<f64>() / n).sqrt()
}

fn initial_step(f: Rhs, t: f64, y: &[f64], k1: &[f64], tol: f64, span: f64) -> f64 {
    let d0 = rms_scaled(y, y, tol);
    let d1 = rms_scaled(k1, y, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = axpy(y, h0, &[(1.0, k1)]);
    let k2 = f(t + h0, &y1);
    let diff: Vec<f64> = k2.iter().zip(k1).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y, tol) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(1.0 / 8.0) };
    (100.0 * h0).min(h1).min(span)
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Bisection for the first time in `[a, b]` where `bad` becomes true, given
/// that it is false at `a` and true at `b`.
fn localize(seg: &DenseSegment, mut a: f64, mut b: f64, tol: f64, bad: &dyn Fn(f64, &[f64]) -> bool) -> f64 {
    while b - a > tol {
        let m = 0.5 * (a + b);
        if bad(m, &seg.eval(m)) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Integrate `ẏ = f(t, y)` from `t0` to `t1 > t0`.
///
/// Integration stops early at a blow-up or region-exit event; the returned
/// trajectory then ends at the localised event time. On step-size underflow
/// an error carrying the last accepted state is returned.
pub fn integrate(f: Rhs, t0: f64, t1: f64, y0: &[f64], opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(t1 > t0) {
        return Err(Error::Domain(format!("integration interval [{t0}, {t1}] is empty")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let ev = &opts.events;
    let bad = |t: f64, y: &[f64]| -> bool {
        let n = norm(y);
        !n.is_finite() || n > ev.blowup_threshold || ev.region.as_ref().map(|r| !r(t, y)).unwrap_or(false)
    };
    let kind_at = |t: f64, y: &[f64]| -> EventKind {
        let n = norm(y);
        if !n.is_finite() || n > ev.blowup_threshold {
            EventKind::BlowUp
        } else {
            let _ = t;
            EventKind::RegionExit
        }
    };
    let mut traj = Trajectory::default();
    let mut grid_iter = opts.grid.as_ref().map(|g| {
        let mut g: Vec<f64> = g.iter().copied().filter(|x| *x >= t0 && *x <= t1).collect();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g.dedup();
        g.into_iter().peekable()
    });
    traj.t.push(t0);
    traj.y.push(y0.to_vec());
    if let Some(g) = grid_iter.as_mut() {
        while g.peek().is_some_and(|x| *x <= t0) {
            g.next();
        }
    }
    if bad(t0, y0) {
        traj.events.push(Event { kind: kind_at(t0, y0), t: t0 });
        return Ok(traj);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(f, t, &y, &k1, opts.tol, t1 - t0));
    let mut ctl = Controller { reject: false };
    let mut steps = 0usize;
    let mut rejected = 0usize;
    traj.meta.insert("tol".into(), opts.tol);
    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!("step budget exhausted at t = {t}")));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let st = try_step(f, t, &y, &k1, h, opts.tol);
        match ctl.decide(st.err, h) {
            Err(h_retry) => {
                rejected += 1;
                h = h_retry;
                if h.abs() <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, state: y });
                }
                continue;
            }
            Ok(h_next) => {
                let t_new = if last { t1 } else { t + h };
                let k13 = f(t_new, &st.y_new);
                let seg = dense(f, t, &y, h, &st, &k13);
                // event scan at step end and interior dense points
                let probes = 8;
                let mut hit = None;
                let mut prev = t;
                for p in 1..=probes {
                    let tp = if p == probes { t_new } else { t + h * p as f64 / probes as f64 };
                    let yp = if p == probes { st.y_new.clone() } else { seg.eval(tp) };
                    if bad(tp, &yp) {
                        hit = Some((prev, tp));
                        break;
                    }
                    prev = tp;
                }
                let t_stop = hit.map(|(a, b)| localize(&seg, a, b, ev.localize_tol, &bad));
                let limit = t_stop.unwrap_or(t_new);
                traj.meta.insert("accepted_steps".into(), (steps - rejected) as f64);
                traj.meta.insert("rejected_steps".into(), rejected as f64);
                // output samples
                match grid_iter.as_mut() {
                    Some(g) => {
                        while let Some(&x) = g.peek() {
                            if x > limit {
                                break;
                            }
                            traj.t.push(x);
                            traj.y.push(if x == t_new { st.y_new.clone() } else { seg.eval(x) });
                            g.next();
                        }
                    }
                    None => {
                        if t_stop.is_none() {
                            traj.t.push(t_new);
                            traj.y.push(st.y_new.clone());
                        }
                    }
                }
                traj.segments.push(seg);
                if let Some(te) = t_stop {
                    let seg = traj.segments.last().unwrap();
                    let ye = seg.eval(te);
                    if traj.t.last().is_some_and(|l| *l < te) {
                        traj.t.push(te);
                        traj.y.push(ye.clone());
                    }
                    traj.events.push(Event { kind: kind_at(te, &ye), t: te });
                    return Ok(traj);
                }
                t = t_new;
                y = st.y_new;
                k1 = k13;
                if last {
                    traj.events.push(Event { kind: EventKind::Horizon, t });
                    return Ok(traj);
                }
                h = h_next;
                if h.abs() <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, state: y });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_accurate() {
        let f = |_t: f64, y: &[f64]| vec![-y[0]];
        let tr = integrate(&f, 0.0, 5.0, &[1.0], &IntegrateOptions::with_tol(1e-12)).unwrap();
        assert!((tr.y.last().unwrap()[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert_eq!(tr.events.last().unwrap().kind, EventKind::Horizon);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let f = |_t: f64, y: &[f64]| vec![y[1], -y[0]];
        let tr = integrate(&f, 0.0, 10.0, &[0.0, 1.0], &IntegrateOptions::with_tol(1e-12)).unwrap();
        for k in 0..=200 {
            let t = 0.05 * k as f64;
            let y = tr.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn grid_output_is_honoured() {
        let f = |_t: f64, y: &[f64]| vec![y[0]];
        let grid: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
        let opts = IntegrateOptions { grid: Some(grid.clone()), ..IntegrateOptions::with_tol(1e-12) };
        let tr = integrate(&f, 0.0, 1.0, &[1.0], &opts).unwrap();
        assert_eq!(tr.t, grid);
        for (t, y) in tr.t.iter().zip(&tr.y) {
            assert!((y[0] - t.exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn blow_up_is_localised() {
        // y = 1/(1.1 − t)
        let f = |_t: f64, y: &[f64]| vec![y[0] * y[0]];
        let tr = integrate(&f, 0.0, 2.0, &[1.0 / 1.1], &IntegrateOptions::default()).unwrap();
        let e = tr.event(EventKind::BlowUp).expect("blow-up event");
        assert!((e.t - 1.1).abs() < 1e-4, "t = {}", e.t);
    }

    #[test]
    fn region_exit_is_localised() {
        let f = |_t: f64, _y: &[f64]| vec![1.0];
        let region: Region = Arc::new(|_t, y: &[f64]| y[0] < 0.75);
        let opts = IntegrateOptions {
            events: EventSpec { region: Some(region), ..Default::default() },
            ..Default::default()
        };
        let tr = integrate(&f, 0.0, 3.0, &[0.0], &opts).unwrap();
        let e = tr.event(EventKind::RegionExit).unwrap();
        assert!((e.t - 0.75).abs() < 1e-8);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let f = |_t: f64, y: &[f64]| y.to_vec();
        assert!(integrate(&f, 1.0, 1.0, &[1.0], &IntegrateOptions::default()).is_err());
    }

    #[test]
    fn csv_has_header_and_events() {
        let f = |_t: f64, y: &[f64]| vec![-y[0], 0.0];
        let tr = integrate(&f, 0.0, 1.0, &[1.0, 2.0], &IntegrateOptions::default()).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,y0,y1\n"));
        assert!(csv.trim_end().ends_with("# event,horizon,1"));
    }
}

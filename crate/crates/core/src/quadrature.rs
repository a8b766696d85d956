//! Gauss–Kronrod quadrature and tabulated antiderivatives.

use std::sync::Arc;

use crate::jet::Jet;

pub type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel; returns the estimate and `|K15 − G7|`.
pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (k, e, _) = gk15_abs(f, a, b);
    (k, e)
}

/// As [`gk15`], also returning the Kronrod estimate of `∫|f|`.
fn gk15_abs(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut kabs = fc.abs() * WGK[7];
    for i in 0..7 {
        let x = h * XGK[i];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[i] * (f1 + f2);
        kabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), kabs * h.abs())
}

/// Adaptive Gauss–Kronrod integration. The tolerance is absolute-plus-relative
/// for the whole interval and is shared among subintervals by length; panels
/// whose error estimate is at the rounding level of `∫|f|` are accepted.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e, vabs) = gk15_abs(f, a, b);
        let floor = 50.0 * f64::EPSILON * vabs;
        if e <= tol.max(floor) || depth >= 30 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let (v, _, _) = gk15_abs(f, a, b);
    rec(f, a, b, tol * (1.0 + v.abs()), 0)
}

/// `x ↦ ∫_0^x g` for smooth `g` on `[0, x_max]`, tabulated on a fixed grid.
///
/// Below `switch` the antiderivative comes from a Taylor series when one is
/// supplied. Above it, a value is the tabulated integral up to the nearest
/// node plus a single Kronrod panel, so evaluation is smooth in `x`.
#[derive(Clone)]
pub struct Antiderivative {
    integrand: Func,
    series: Option<Jet>,
    switch: f64,
    nodes: Vec<f64>,
    cum: Vec<f64>,
}

/// Grid used for tables: spacing `base` up to 1, then geometric.
fn table_grid(start: f64, end: f64, base: f64) -> Vec<f64> {
    let mut nodes = vec![start];
    let mut x = start;
    while x < end {
        let step = base * x.max(1.0);
        x = (x + step).min(end);
        nodes.push(x);
    }
    nodes
}

const PANEL_TOL: f64 = 1e-15;

impl Antiderivative {
    /// `series` is the Taylor series of the antiderivative itself (zero
    /// constant term), valid on `[0, switch]`.
    pub fn new(integrand: Func, series: Option<Jet>, switch: f64, x_max: f64) -> Self {
        Self::with_breaks(integrand, series, switch, x_max, &[])
    }

    /// As [`Antiderivative::new`] for an integrand that is smooth only
    /// between the given breakpoints; every breakpoint becomes a table node.
    pub fn with_breaks(integrand: Func, series: Option<Jet>, switch: f64, x_max: f64, breaks: &[f64]) -> Self {
        let start = if series.is_some() { switch } else { 0.0 };
        let end = x_max.max(start);
        let mut nodes = table_grid(start, end, 1.0 / 32.0);
        nodes.extend(breaks.iter().copied().filter(|b| *b > start && *b < end));
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup();
        let mut cum = Vec::with_capacity(nodes.len());
        let base = series.as_ref().map(|s| s.eval(start)).unwrap_or(0.0);
        cum.push(base);
        for w in nodes.windows(2) {
            let prev = *cum.last().unwrap();
            cum.push(prev + integrate(integrand.as_ref(), w[0], w[1], PANEL_TOL));
        }
        Antiderivative { integrand, series, switch, nodes, cum }
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn integrand(&self, x: f64) -> f64 {
        if x <= self.switch {
            if let Some(s) = &self.series {
                return s.eval_derivative(x);
            }
        }
        (self.integrand)(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let Some(s) = &self.series {
            if x <= self.switch {
                return s.eval(x);
            }
        }
        let k = match self.nodes.binary_search_by(|n| n.partial_cmp(&x).unwrap()) {
            Ok(k) => return self.cum[k],
            Err(0) => 0,
            Err(k) => k - 1,
        };
        // beyond the table the last node serves as base
        let k = k.min(self.nodes.len() - 1);
        self.cum[k] + integrate(self.integrand.as_ref(), self.nodes[k], x, PANEL_TOL)
    }
}

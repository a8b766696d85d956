//! Truncated power series in one variable `t`.
//!
//! A [`Jet`] of length `n` stores the Taylor coefficients `c[0..n]` and
//! represents `c[0] + c[1] t + ... + c[n-1] t^(n-1) + O(t^n)`. Binary
//! operations truncate to the shorter operand.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn new(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "a jet needs at least one coefficient");
        Jet { c }
    }

    pub fn zeros(n: usize) -> Self {
        Jet::new(vec![0.0; n])
    }

    pub fn constant(v: f64, n: usize) -> Self {
        let mut c = vec![0.0; n];
        c[0] = v;
        Jet::new(c)
    }

    /// The independent variable `t`.
    pub fn var(n: usize) -> Self {
        let mut c = vec![0.0; n];
        if n > 1 {
            c[1] = 1.0;
        }
        Jet::new(c)
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.c
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.c[k] = v;
    }

    /// Truncate or zero-pad to length `n`.
    pub fn resized(&self, n: usize) -> Jet {
        let mut c = self.c.clone();
        c.resize(n.max(1), 0.0);
        Jet::new(c)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    /// Value of the derivative of the truncated polynomial at `t`.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..self.c.len()).rev() {
            acc = acc * t + k as f64 * self.c[k];
        }
        acc
    }

    /// Derivative; the result keeps length `n - 1` (at least 1).
    pub fn derivative(&self) -> Jet {
        if self.c.len() == 1 {
            return Jet::zeros(1);
        }
        Jet::new((1..self.c.len()).map(|k| k as f64 * self.c[k]).collect())
    }

    /// Antiderivative vanishing at zero, of length `n + 1`.
    pub fn integral(&self) -> Jet {
        let mut c = Vec::with_capacity(self.c.len() + 1);
        c.push(0.0);
        c.extend(self.c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        Jet::new(c)
    }

    /// Multiply by `t^k`, keeping the length.
    pub fn mul_t_pow(&self, k: usize) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for i in 0..n.saturating_sub(k) {
            c[i + k] = self.c[i];
        }
        Jet::new(c)
    }

    /// Divide by `t^k`, dropping the `k` lowest coefficients. The caller is
    /// responsible for those being zero; see [`Jet::low_order_residue`].
    pub fn div_t_pow(&self, k: usize) -> Jet {
        if k >= self.c.len() {
            return Jet::zeros(1);
        }
        Jet::new(self.c[k..].to_vec())
    }

    /// Largest magnitude among the `k` lowest coefficients.
    pub fn low_order_residue(&self, k: usize) -> f64 {
        self.c.iter().take(k).fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet::new(self.c.iter().map(|a| a * s).collect())
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.c[0];
        assert!(a0 != 0.0, "reciprocal of a jet with zero constant term");
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s / a0;
        }
        Jet::new(r)
    }

    pub fn sqrt(&self) -> Jet {
        let a0 = self.c[0];
        assert!(a0 > 0.0, "square root of a jet with non-positive constant term");
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = a0.sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| r[j] * r[k - j]).sum();
            r[k] = (self.c[k] - s) / (2.0 * r[0]);
        }
        Jet::new(r)
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = self.c[0].exp();
        // r' = a' r
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * r[k - j]).sum();
            r[k] = s / k as f64;
        }
        Jet::new(r)
    }

    pub fn ln(&self) -> Jet {
        let a0 = self.c[0];
        assert!(a0 > 0.0, "logarithm of a jet with non-positive constant term");
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = a0.ln();
        // a r' = a'
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * r[j] * self.c[k - j]).sum();
            r[k] = (k as f64 * self.c[k] - s) / (k as f64 * a0);
        }
        Jet::new(r)
    }

    /// `self^p` for real `p`, constant term positive.
    pub fn powf(&self, p: f64) -> Jet {
        (self.ln().scale(p)).exp()
    }

    /// Composition `self(inner(t))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Jet) -> Jet {
        assert!(inner.c[0] == 0.0, "inner series must vanish at zero");
        let n = inner.len();
        let mut acc = Jet::constant(self.coeff(self.c.len() - 1), n);
        for k in (0..self.c.len() - 1).rev() {
            acc = &acc * inner + self.c[k];
        }
        acc
    }

    /// Compositional inverse of a series with `c0 = 0` and `c1 != 0`.
    pub fn reversion(&self) -> Jet {
        assert!(self.c[0] == 0.0 && self.coeff(1) != 0.0, "series is not invertible");
        let n = self.c.len();
        let t = Jet::var(n);
        let d = self.derivative().resized(n);
        let mut u = t.scale(1.0 / self.c[1]);
        // Newton on self(u) = t; quadratic convergence in the order
        let mut steps = 1;
        while (1usize << steps) < 2 * n {
            steps += 1;
        }
        for _ in 0..steps {
            let resid = &self.compose(&u) - &t;
            let slope = d.compose(&u);
            u = &u - &(&resid / &slope);
            u.c[0] = 0.0;
        }
        u
    }
}

fn binary_len(a: &Jet, b: &Jet) -> usize {
    a.c.len().min(b.c.len())
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = binary_len(self, rhs);
        Jet::new((0..n).map(|k| self.c[k] + rhs.c[k]).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = binary_len(self, rhs);
        Jet::new((0..n).map(|k| self.c[k] - rhs.c[k]).collect())
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = binary_len(self, rhs);
        let mut r = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                r[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Jet::new(r)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += rhs;
        Jet::new(c)
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, rhs: f64) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        &self / &rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

/// Arithmetic shared by plain numbers and truncated series, so that one
/// expression of a right-hand side serves both the pointwise integrator and
/// the series bootstrap.
pub trait Arith:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
}

impl Arith for f64 {}
impl Arith for Jet {}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn exp_ln_roundtrip() {
        let a = Jet::new(vec![1.5, 0.3, -0.2, 0.7, 0.1, 0.0, 0.05]);
        let b = a.ln().exp();
        for k in 0..a.len() {
            assert!(close(a.coeff(k), b.coeff(k), 1e-14));
        }
    }

    #[test]
    fn exp_of_t_is_factorial_series() {
        let e = Jet::var(8).exp();
        let mut f = 1.0;
        for k in 0..8 {
            if k > 0 {
                f *= k as f64;
            }
            assert!(close(e.coeff(k), 1.0 / f, 1e-15));
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let a = Jet::new(vec![4.0, 1.0, -3.0, 0.5, 2.0]);
        let s = a.sqrt();
        let b = &s * &s;
        for k in 0..a.len() {
            assert!(close(a.coeff(k), b.coeff(k), 1e-14));
        }
    }

    #[test]
    fn reversion_of_sine_is_arcsine() {
        let n = 10;
        let mut sin = Jet::zeros(n);
        let mut f = 1.0;
        for k in 1..n {
            f *= k as f64;
            if k % 2 == 1 {
                sin.set_coeff(k, if k % 4 == 1 { 1.0 } else { -1.0 } / f);
            }
        }
        let asin = sin.reversion();
        // arcsin t = t + t^3/6 + 3 t^5/40 + 5 t^7/112 + 35 t^9/1152
        let expect = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, 5.0 / 112.0, 0.0, 35.0 / 1152.0];
        for k in 0..n {
            assert!(close(asin.coeff(k), expect[k], 1e-13), "k={k}");
        }
    }

    #[test]
    fn division_by_t_power_drops_low_terms() {
        let a = Jet::new(vec![0.0, 0.0, 3.0, 4.0]);
        assert_eq!(a.div_t_pow(2).coeffs(), &[3.0, 4.0]);
        assert_eq!(a.mul_t_pow(1).coeffs(), &[0.0, 0.0, 0.0, 3.0]);
        assert_eq!(a.low_order_residue(2), 0.0);
    }

    #[test]
    fn integral_and_derivative_invert() {
        let a = Jet::new(vec![1.0, 2.0, 3.0]);
        let b = a.integral().derivative();
        assert_eq!(a.coeffs(), b.coeffs());
        assert!(close(a.integral().eval(2.0), 2.0 + 4.0 + 8.0, 1e-15));
    }
}

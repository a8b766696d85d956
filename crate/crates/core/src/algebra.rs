//! su(2)-valued invariant forms on the principal orbits.
//!
//! The coframe is ordered `(dt, η₁⁺, η₂⁺, η₃⁺, η₁⁻, η₂⁻, η₃⁻)` and indexed
//! `0..7`. The generators satisfy `[T_i, T_j] = 2 ε_ijk T_k`. Everything is
//! generic over [`Scalar`], so the same code runs on `f64` and on exact
//! rationals.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::Neg;

use num::rational::BigRational;
use num::traits::{FromPrimitive, Num, ToPrimitive};

use crate::error::{Error, Result};
use crate::structures::StructureData;

pub trait Scalar:
    Num + Clone + Debug + PartialEq + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync
{
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer conversion")
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {}
impl Scalar for BigRational {}

pub const DT: usize = 0;

/// Coframe index of `η_i⁺` for `i ∈ {0,1,2}`.
pub const fn plus(i: usize) -> usize {
    1 + i
}

/// Coframe index of `η_i⁻` for `i ∈ {0,1,2}`.
pub const fn minus(i: usize) -> usize {
    4 + i
}

/// Cyclic successors `(j, k)` of `i`.
pub const fn cyclic(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Su2Vec<S: Scalar>(pub [S; 3]);

impl<S: Scalar> Su2Vec<S> {
    pub fn zero() -> Self {
        Su2Vec([S::zero(), S::zero(), S::zero()])
    }

    /// Generator `T_i`, `i ∈ {0,1,2}`.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = S::one();
        v
    }

    pub fn new(a: S, b: S, c: S) -> Self {
        Su2Vec([a, b, c])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Su2Vec([
            self.0[0].clone() + o.0[0].clone(),
            self.0[1].clone() + o.0[1].clone(),
            self.0[2].clone() + o.0[2].clone(),
        ])
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        Su2Vec([
            self.0[0].clone() * s.clone(),
            self.0[1].clone() * s.clone(),
            self.0[2].clone() * s.clone(),
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.to_f64_lossy().abs()).fold(0.0, f64::max)
    }
}

/// Lie bracket of su(2): twice the cross product.
pub fn bracket<S: Scalar>(u: &Su2Vec<S>, v: &Su2Vec<S>) -> Su2Vec<S> {
    let [a1, a2, a3] = &u.0;
    let [b1, b2, b3] = &v.0;
    let two = S::from_int(2);
    Su2Vec([
        two.clone() * (a2.clone() * b3.clone() - a3.clone() * b2.clone()),
        two.clone() * (a3.clone() * b1.clone() - a1.clone() * b3.clone()),
        two * (a1.clone() * b2.clone() - a2.clone() * b1.clone()),
    ])
}

/// Sort a list of coframe indices, returning the permutation sign, or `None`
/// if an index repeats.
fn normalize(idx: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = idx.to_vec();
    let mut odd = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, odd))
    }
}

/// An su(2)-valued form with constant coefficients on the coframe, stored on
/// strictly increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct LieForm<S: Scalar> {
    degree: usize,
    terms: BTreeMap<Vec<usize>, Su2Vec<S>>,
}

impl<S: Scalar> LieForm<S> {
    pub fn zero(degree: usize) -> Self {
        LieForm { degree, terms: BTreeMap::new() }
    }

    /// `coeff ⊗ η^{idx[0]} ∧ ... ∧ η^{idx[p-1]}` in any index order.
    pub fn monomial(idx: &[usize], coeff: Su2Vec<S>) -> Self {
        let mut f = Self::zero(idx.len());
        f.add_term(idx, coeff);
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn add_term(&mut self, idx: &[usize], coeff: Su2Vec<S>) {
        assert_eq!(idx.len(), self.degree, "term degree mismatch");
        assert!(idx.iter().all(|&i| i < 7), "coframe index out of range");
        let Some((key, odd)) = normalize(idx) else {
            return;
        };
        let c = if odd { coeff.scale(&-S::one()) } else { coeff };
        let sum = match self.terms.get(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    /// Coefficient on the given index tuple (any order, sign-adjusted).
    pub fn coeff(&self, idx: &[usize]) -> Su2Vec<S> {
        match normalize(idx) {
            None => Su2Vec::zero(),
            Some((key, odd)) => {
                let c = self.terms.get(&key).cloned().unwrap_or_else(Su2Vec::zero);
                if odd {
                    c.scale(&-S::one())
                } else {
                    c
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Su2Vec<S>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.degree, o.degree);
        let mut r = self.clone();
        for (k, v) in &o.terms {
            r.add_term(k, v.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut r = Self::zero(self.degree);
        for (k, v) in &self.terms {
            r.add_term(k, v.scale(s));
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.max_abs()).fold(0.0, f64::max)
    }
}

/// Differential of a single coframe element as a list of signed 2-monomials.
fn d_coframe(a: usize) -> Vec<(i64, [usize; 2])> {
    if a == DT {
        return vec![];
    }
    let (i, sign_minus) = if a < 4 { (a - 1, false) } else { (a - 4, true) };
    let (j, k) = cyclic(i);
    if !sign_minus {
        vec![(-2, [plus(j), plus(k)]), (-2, [minus(j), minus(k)])]
    } else {
        vec![(-2, [plus(j), minus(k)]), (-2, [minus(j), plus(k)])]
    }
}

/// Exterior derivative of a form with constant coefficients, using the
/// Maurer–Cartan equations and the Leibniz rule. Degree 3 and higher is not
/// supported.
pub fn exterior_derivative<S: Scalar>(f: &LieForm<S>) -> Result<LieForm<S>> {
    if f.degree >= 3 {
        return Err(Error::Unsupported(format!(
            "exterior derivative of a degree-{} form",
            f.degree
        )));
    }
    let mut out = LieForm::zero(f.degree + 1);
    for (idx, c) in &f.terms {
        for (pos, &a) in idx.iter().enumerate() {
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            for (s, pair) in d_coframe(a) {
                let mut new_idx = Vec::with_capacity(idx.len() + 1);
                new_idx.extend_from_slice(&idx[..pos]);
                new_idx.extend_from_slice(&pair);
                new_idx.extend_from_slice(&idx[pos + 1..]);
                out.add_term(&new_idx, c.scale(&S::from_int(sign * s)));
            }
        }
    }
    Ok(out)
}

/// Exterior derivative when the coefficients depend on `t`: `time_derivative`
/// holds the `t`-derivatives of the coefficients of `f` and contributes
/// `dt ∧ ḟ`.
pub fn exterior_derivative_t<S: Scalar>(
    f: &LieForm<S>,
    time_derivative: &LieForm<S>,
) -> Result<LieForm<S>> {
    if time_derivative.degree != f.degree {
        return Err(Error::Domain("time derivative has the wrong degree".into()));
    }
    let mut out = exterior_derivative(f)?;
    for (idx, c) in &time_derivative.terms {
        let mut new_idx = vec![DT];
        new_idx.extend_from_slice(idx);
        out.add_term(&new_idx, c.clone());
    }
    Ok(out)
}

/// Wedge of two su(2)-valued 1-forms through the bracket:
/// `[a∧b](X,Y) = [a(X),b(Y)] − [a(Y),b(X)]`.
pub fn bracket_wedge<S: Scalar>(a: &LieForm<S>, b: &LieForm<S>) -> Result<LieForm<S>> {
    if a.degree != 1 || b.degree != 1 {
        return Err(Error::Unsupported("bracket wedge beyond 1-forms".into()));
    }
    let mut out = LieForm::zero(2);
    for (ia, ca) in &a.terms {
        for (ib, cb) in &b.terms {
            out.add_term(&[ia[0], ib[0]], bracket(ca, cb));
        }
    }
    Ok(out)
}

/// Coefficients `a_i^±` of an invariant connection `Σ a_i⁺ η_i⁺ + a_i⁻ η_i⁻`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoeffs<S: Scalar> {
    pub a_plus: [Su2Vec<S>; 3],
    pub a_minus: [Su2Vec<S>; 3],
}

impl<S: Scalar> ConnectionCoeffs<S> {
    pub fn zero() -> Self {
        ConnectionCoeffs {
            a_plus: [Su2Vec::zero(), Su2Vec::zero(), Su2Vec::zero()],
            a_minus: [Su2Vec::zero(), Su2Vec::zero(), Su2Vec::zero()],
        }
    }

    /// Diagonal connection `a_i^± = f_i^± T_i`.
    pub fn diagonal(f_plus: [S; 3], f_minus: [S; 3]) -> Self {
        let [p0, p1, p2] = f_plus;
        let [m0, m1, m2] = f_minus;
        ConnectionCoeffs {
            a_plus: [
                Su2Vec::basis(0).scale(&p0),
                Su2Vec::basis(1).scale(&p1),
                Su2Vec::basis(2).scale(&p2),
            ],
            a_minus: [
                Su2Vec::basis(0).scale(&m0),
                Su2Vec::basis(1).scale(&m1),
                Su2Vec::basis(2).scale(&m2),
            ],
        }
    }

    /// The scalars `(f_i⁺, f_i⁻)` if the connection is diagonal.
    pub fn diagonal_view(&self) -> Option<([S; 3], [S; 3])> {
        let diag = |v: &[Su2Vec<S>; 3]| -> Option<[S; 3]> {
            for (i, x) in v.iter().enumerate() {
                for (j, c) in x.0.iter().enumerate() {
                    if i != j && !c.is_zero() {
                        return None;
                    }
                }
            }
            Some([v[0].0[0].clone(), v[1].0[1].clone(), v[2].0[2].clone()])
        };
        Some((diag(&self.a_plus)?, diag(&self.a_minus)?))
    }

    /// The connection as a 1-form.
    pub fn one_form(&self) -> LieForm<S> {
        let mut f = LieForm::zero(1);
        for i in 0..3 {
            f.add_term(&[plus(i)], self.a_plus[i].clone());
            f.add_term(&[minus(i)], self.a_minus[i].clone());
        }
        f
    }
}

/// Curvature `da + ½[a∧a]` of the slice connection, by brute force.
pub fn curvature_direct<S: Scalar>(c: &ConnectionCoeffs<S>) -> LieForm<S> {
    let a = c.one_form();
    let da = exterior_derivative(&a).expect("1-form");
    let aa = bracket_wedge(&a, &a).expect("1-forms");
    let half = S::one() / S::from_int(2);
    da.add(&aa.scale(&half))
}

/// Curvature of the slice connection from the closed-form expression.
pub fn curvature_lemma2<S: Scalar>(c: &ConnectionCoeffs<S>) -> LieForm<S> {
    let two = S::from_int(2);
    let (p, m) = (&c.a_plus, &c.a_minus);
    let mut f = LieForm::zero(2);
    for i in 0..3 {
        let (j, k) = cyclic(i);
        f.add_term(&[plus(i), minus(i)], bracket(&p[i], &m[i]));
        let mp = p[i].scale(&-two.clone());
        let mm = m[i].scale(&-two.clone());
        f.add_term(&[plus(j), plus(k)], mp.add(&bracket(&p[j], &p[k])));
        f.add_term(&[minus(j), minus(k)], mp.add(&bracket(&m[j], &m[k])));
        f.add_term(&[minus(j), plus(k)], mm.add(&bracket(&m[j], &p[k])));
        f.add_term(&[plus(j), minus(k)], mm.add(&bracket(&p[j], &m[k])));
    }
    f
}

/// Full curvature `dt ∧ ȧ + F_a` of a connection in temporal gauge.
pub fn curvature_full<S: Scalar>(c: &ConnectionCoeffs<S>, c_dot: &ConnectionCoeffs<S>) -> LieForm<S> {
    let mut f = curvature_lemma2(c);
    for i in 0..3 {
        f.add_term(&[DT, plus(i)], c_dot.a_plus[i].clone());
        f.add_term(&[DT, minus(i)], c_dot.a_minus[i].clone());
    }
    f
}

/// `Σ_i [a_i⁺, a_i⁻] / (A_i B_i)` for given profile values.
pub fn constraint_value_with<S: Scalar>(c: &ConnectionCoeffs<S>, a: &[S; 3], b: &[S; 3]) -> Su2Vec<S> {
    let mut out = Su2Vec::zero();
    for i in 0..3 {
        let w = S::one() / (a[i].clone() * b[i].clone());
        out = out.add(&bracket(&c.a_plus[i], &c.a_minus[i]).scale(&w));
    }
    out
}

/// Constraint of the instanton equations at time `t > 0`.
pub fn constraint_value(c: &ConnectionCoeffs<f64>, s: &StructureData, t: f64) -> Result<Su2Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("constraint needs t > 0, got {t}")));
    }
    let (a, b) = (s.a_values(t), s.b_values(t));
    Ok(constraint_value_with(c, &a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }


    fn t(i: usize) -> Su2Vec<Q> {
        Su2Vec::basis(i)
    }

    #[test]
    fn bracket_of_generators() {
        assert_eq!(bracket(&t(0), &t(1)), t(2).scale(&q(2, 1)));
        assert_eq!(bracket(&t(1), &t(2)), t(0).scale(&q(2, 1)));
        let u = Su2Vec::new(1.0, 2.0, 3.0);
        let v = Su2Vec::new(4.0, 5.0, 6.0);
        assert_eq!(bracket(&u, &v).0, [-6.0, 12.0, -6.0]);
        assert!(bracket(&u, &u).is_zero());
    }

    #[test]
    fn maurer_cartan_of_first_coframe_vector() {
        let e = LieForm::monomial(&[plus(0)], t(0));
        let d = exterior_derivative(&e).unwrap();
        let mut expect = LieForm::zero(2);
        expect.add_term(&[plus(1), plus(2)], t(0).scale(&q(-2, 1)));
        expect.add_term(&[minus(1), minus(2)], t(0).scale(&q(-2, 1)));
        assert_eq!(d, expect);
        let e = LieForm::monomial(&[minus(0)], t(0));
        let d = exterior_derivative(&e).unwrap();
        let mut expect = LieForm::zero(2);
        expect.add_term(&[plus(1), minus(2)], t(0).scale(&q(-2, 1)));
        expect.add_term(&[minus(1), plus(2)], t(0).scale(&q(-2, 1)));
        assert_eq!(d, expect);
    }

    #[test]
    fn dt_is_closed_and_degree_three_is_rejected() {
        let e = LieForm::monomial(&[DT], t(1));
        assert!(exterior_derivative(&e).unwrap().is_zero());
        let f = LieForm::monomial(&[1, 2, 3], t(0));
        assert!(matches!(exterior_derivative(&f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn d_squared_vanishes_on_coframe() {
        for a in 0..7 {
            let e = LieForm::monomial(&[a], t(0));
            let dd = exterior_derivative(&exterior_derivative(&e).unwrap()).unwrap();
            assert!(dd.is_zero(), "d d of coframe {a}");
        }
    }

    #[test]
    fn wedge_normalization_tracks_sign() {
        let f = LieForm::monomial(&[3, 1], t(0));
        assert_eq!(f.coeff(&[1, 3]), t(0).scale(&q(-1, 1)));
        assert!(LieForm::monomial(&[2, 2], t(0)).is_zero());
    }

    #[test]
    fn flat_connections_have_zero_curvature() {
        for sign in [1, -1] {
            let c = ConnectionCoeffs::diagonal(
                [q(1, 1), q(1, 1), q(1, 1)],
                [q(sign, 1), q(sign, 1), q(sign, 1)],
            );
            assert!(curvature_direct(&c).is_zero());
            assert!(curvature_lemma2(&c).is_zero());
        }
        assert!(curvature_direct(&ConnectionCoeffs::<Q>::zero()).is_zero());
    }

    #[test]
    fn canonical_connection_curvature() {
        let c = ConnectionCoeffs::diagonal([q(1, 1), q(1, 1), q(1, 1)], [q(0, 1), q(0, 1), q(0, 1)]);
        let mut expect = LieForm::zero(2);
        for i in 0..3 {
            let (j, k) = cyclic(i);
            expect.add_term(&[minus(j), minus(k)], t(i).scale(&q(-2, 1)));
        }
        assert_eq!(curvature_direct(&c), expect);
        assert_eq!(curvature_lemma2(&c), expect);
    }

    #[test]
    fn constraint_examples() {
        let mut c = ConnectionCoeffs::<Q>::zero();
        c.a_plus[0] = t(0);
        c.a_minus[0] = t(1);
        let one = [q(1, 1), q(1, 1), q(1, 1)];
        assert_eq!(constraint_value_with(&c, &one, &one), t(2).scale(&q(2, 1)));
        let d = ConnectionCoeffs::diagonal([q(3, 2), q(-1, 1), q(5, 7)], [q(2, 1), q(1, 3), q(-4, 1)]);
        assert!(constraint_value_with(&d, &one, &one).is_zero());
    }

    fn arb_q() -> impl Strategy<Value = Q> {
        (-30i64..30, 1i64..7).prop_map(|(n, d)| q(n, d))
    }

    fn arb_vec() -> impl Strategy<Value = Su2Vec<Q>> {
        (arb_q(), arb_q(), arb_q()).prop_map(|(a, b, c)| Su2Vec::new(a, b, c))
    }

    fn arb_conn() -> impl Strategy<Value = ConnectionCoeffs<Q>> {
        proptest::collection::vec(arb_vec(), 6).prop_map(|v| ConnectionCoeffs {
            a_plus: [v[0].clone(), v[1].clone(), v[2].clone()],
            a_minus: [v[3].clone(), v[4].clone(), v[5].clone()],
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_is_antisymmetric_and_satisfies_jacobi(a in arb_vec(), b in arb_vec(), c in arb_vec()) {
            prop_assert_eq!(bracket(&a, &b), bracket(&b, &a).scale(&q(-1, 1)));
            let j = bracket(&a, &bracket(&b, &c))
                .add(&bracket(&b, &bracket(&c, &a)))
                .add(&bracket(&c, &bracket(&a, &b)));
            prop_assert!(j.is_zero());
        }

        #[test]
        fn d_squared_vanishes_on_one_forms(v in proptest::collection::vec(arb_vec(), 7)) {
            let mut f = LieForm::zero(1);
            for (a, c) in v.into_iter().enumerate() {
                f.add_term(&[a], c);
            }
            let dd = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
            prop_assert!(dd.is_zero());
        }

        #[test]
        fn d_squared_vanishes_on_functions(c in arb_vec(), cdot in arb_vec()) {
            let f = LieForm::monomial(&[], c);
            let fdot = LieForm::monomial(&[], cdot);
            let df = exterior_derivative_t(&f, &fdot).unwrap();
            prop_assert!(exterior_derivative(&df).unwrap().is_zero());
        }

        #[test]
        fn direct_curvature_equals_closed_form(c in arb_conn()) {
            prop_assert_eq!(curvature_direct(&c), curvature_lemma2(&c));
        }

        #[test]
        fn diagonal_view_roundtrips(p in proptest::collection::vec(arb_q(), 6)) {
            let c = ConnectionCoeffs::diagonal(
                [p[0].clone(), p[1].clone(), p[2].clone()],
                [p[3].clone(), p[4].clone(), p[5].clone()],
            );
            let (fp, fm) = c.diagonal_view().unwrap();
            prop_assert_eq!(ConnectionCoeffs::diagonal(fp, fm), c);
        }
    }
}

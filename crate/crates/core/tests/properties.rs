//! Randomized checks of the structural invariants of structures, solutions,
//! singular IVPs and reports.

use std::sync::Arc;

use proptest::prelude::*;

use g2flow::format::fmt17;
use g2flow::instantons::{connection_at, pid_ivp, residual_max, theta_x1, theta_y0, InstantonSolution};
use g2flow::jet::Jet;
use g2flow::singular_ivp::{malgrange_check, FnSystem, SingularIVP, SolveOptions, EIGEN_TOL};
use g2flow::structures::{
    make_linear_example_with_horizon, make_su23_structure, Parity, Profile, SeriesR, StructureData,
};
use g2flow::verify::{residual_report, Thresholds};

fn su23(a3: f64, b0: f64) -> StructureData {
    let a1 = Profile::from_series(SeriesR::new(Parity::Odd, vec![0.0, 0.5, 0.0, a3]).unwrap());
    make_su23_structure(a1, b0, 3.0).unwrap()
}

fn check_structure(s: &StructureData) -> Result<(), TestCaseError> {
    for k in 1..=60 {
        let t = s.t_max() * k as f64 / 60.0;
        let (a, b) = (s.a_values(t), s.b_values(t));
        prop_assert!(a.iter().chain(&b).all(|v| *v > 0.0), "non-positive profile at t = {}", t);
    }
    for i in 0..3 {
        let (a, b) = (s.a_series(i), s.b_series(i));
        prop_assert_eq!(a.coeff(1), 0.5);
        prop_assert!((b.coeff(0) - s.b0()).abs() <= 1e-15 * s.b0());
        for k in 0..a.coeffs().len() {
            if k % 2 == 0 {
                prop_assert_eq!(a.coeff(k), 0.0);
            } else {
                prop_assert_eq!(b.coeff(k), 0.0);
            }
        }
    }
    let cf = s.coefficients();
    let t = 1e-5;
    for i in 0..3 {
        prop_assert!((t * cf.f(i, t).unwrap() + 1.0).abs() < 1e-6);
        prop_assert!((t * cf.g(i, t).unwrap() - 4.0).abs() < 1e-6);
    }
    Ok(())
}

fn diag_at(sol: &InstantonSolution, s: &StructureData, t: f64) -> ([f64; 3], [f64; 3]) {
    sol.f_values(s, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_structures_are_admissible(b0 in 0.1f64..4.0, t_max in 1.0f64..50.0) {
        check_structure(&make_linear_example_with_horizon(b0, t_max).unwrap())?;
    }

    #[test]
    fn su23_structures_are_admissible(a3 in -0.04f64..0.1, b0 in 0.2f64..2.0) {
        check_structure(&su23(a3, b0))?;
    }

    #[test]
    fn theta_x1_is_a_diagonal_instanton(x1 in 0.0f64..30.0, b0 in 0.3f64..2.0, t in 0.01f64..8.0) {
        let s = make_linear_example_with_horizon(b0, 10.0).unwrap();
        let sol = theta_x1(&s, x1).unwrap();
        prop_assert!(residual_max(&s, &sol, t).unwrap() < 1e-8);
        let c = connection_at(&sol, t).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    prop_assert_eq!(c.a_plus[i].0[j], 0.0);
                    prop_assert_eq!(c.a_minus[i].0[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn theta_y0_is_odd_in_y0(y in 0.0f64..1.0) {
        let s = make_linear_example_with_horizon(1.0, 10.0).unwrap();
        let opts = SolveOptions::default();
        let p = theta_y0(&s, y, 3.0, &opts).unwrap();
        let m = theta_y0(&s, -y, 3.0, &opts).unwrap();
        for t in [0.05, 0.5, 1.7, 3.0] {
            let (pp, pm) = diag_at(&p, &s, t);
            let (mp, mm) = diag_at(&m, &s, t);
            for i in 0..3 {
                prop_assert!((pp[i] - mp[i]).abs() <= 1e-9 * (1.0 + pp[i].abs()));
                prop_assert!((pm[i] + mm[i]).abs() <= 1e-9 * (1.0 + pm[i].abs()));
            }
        }
    }

    #[test]
    fn trajectories_are_ordered_and_finite(y in -1.0f64..1.0, b0 in 0.5f64..2.0) {
        let s = make_linear_example_with_horizon(b0, 10.0).unwrap();
        let sol = theta_y0(&s, y / b0, 4.0, &SolveOptions::default()).unwrap();
        let tr = sol.trajectory.as_ref().unwrap();
        prop_assert!(tr.t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(tr.y.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn pid_boundary_relations(b0m in -2.0f64..2.0, u2 in -1.0f64..1.0, u3 in -1.0f64..1.0, b0 in 0.5f64..2.0) {
        let s = make_linear_example_with_horizon(b0, 10.0).unwrap();
        let (ivp, d) = pid_ivp(&s, b0m, u2, u3).unwrap();
        prop_assert!((4.0 * d.b2_plus - (b0m * b0m - 1.0 / (b0 * b0))).abs() < 1e-13);
        prop_assert!((d.v0 - (b0m * d.b2_plus - s.b2() * b0m / b0)).abs() < 1e-12);
        prop_assert!((d.u1_0 + d.u2_0 + d.u3_0 - d.quoted_u_sum).abs() < 1e-10);
        prop_assert!(d.singular_balance.abs() < 1e-12);
        prop_assert!(malgrange_check(&ivp, 1e-8).unwrap().residual_at_y0 < 1e-8);
    }

    // M₋₁(y) = diag(λ)(y − c): the gate fails exactly on positive-integer λ.
    #[test]
    fn malgrange_gate_flags_integer_eigenvalues(
        lambdas in proptest::collection::vec(prop_oneof![(-6i32..7).prop_map(f64::from), -6.0f64..6.0], 1..4),
        shift in -1.0f64..1.0,
    ) {
        let n = lambdas.len();
        let l = lambdas.clone();
        let sys = FnSystem::new(
            n,
            move |y: &[Jet]| y.iter().zip(&l).map(|(v, k)| (v - shift).scale(*k)).collect(),
            move |_t: &Jet, y: &[Jet]| y.iter().map(|v| Jet::zeros(v.len())).collect(),
        );
        let ivp = SingularIVP::new(Arc::new(sys), vec![shift; n], "diagonal").unwrap();
        let r = malgrange_check(&ivp, 1e-10).unwrap();
        let resonant = lambdas
            .iter()
            .filter(|k| **k >= 1.0 - EIGEN_TOL && (*k - k.round()).abs() <= EIGEN_TOL)
            .map(|k| k.round() as u64)
            .min();
        prop_assert_eq!(r.offending_h, resonant);
        prop_assert_eq!(r.gate_pass, resonant.is_none());
        prop_assert!(r.residual_at_y0 <= 1e-14);
    }

    #[test]
    fn residual_pass_is_a_function_of_metrics(x1 in 0.0f64..5.0, tight in any::<bool>()) {
        let s = make_linear_example_with_horizon(1.0, 10.0).unwrap();
        let sol = theta_x1(&s, x1).unwrap();
        let mut th = Thresholds::default();
        if tight {
            th.residual = 1e-300;
        }
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let a = residual_report(&s, &sol, &grid, &th).unwrap();
        let b = residual_report(&s, &sol, &grid, &th).unwrap();
        prop_assert_eq!(&a.metrics, &b.metrics);
        let sup = a.metrics["sup_residual"];
        let con = a.metrics["sup_constraint"];
        prop_assert_eq!(a.pass, sup <= th.residual && con <= th.constraint);
    }

    #[test]
    fn fmt17_roundtrips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn thresholds_reject_unknown_keys(key in "[a-z]{3,12}") {
        let known = ["residual", "constraint", "curvature", "spectrum"];
        prop_assume!(!known.contains(&key.as_str()) && !key.starts_with("parity") && !key.starts_with("bubbling"));
        let doc = format!("{{\"{key}\": 1.0}}");
        prop_assert!(Thresholds::from_json(&doc).is_err());
    }
}

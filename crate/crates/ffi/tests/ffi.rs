use std::ffi::CString;
use std::ptr;

use g2flow_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { g2_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn linear(b0: f64) -> *mut G2Structure {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { g2_structure_linear(b0, &mut s) }, G2Status::Ok);
    s
}

#[test]
fn theta_zero_on_linear_structure() {
    let s = linear(1.0);
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(g2_theta_zero(s, &mut sol), G2Status::Ok);
        let (mut p, mut m) = ([0.0; 3], [0.0; 3]);
        assert_eq!(g2_solution_coefficients(sol, 2.0, p.as_mut_ptr(), m.as_mut_ptr()), G2Status::Ok);
        let mut r = f64::NAN;
        assert_eq!(g2_solution_residual(sol, 2.0, &mut r), G2Status::Ok);
        assert!(r < 1e-10, "residual {r}");
        assert!(m.iter().all(|&c| c == 0.0));
        assert!(p[0] == p[1] && p[1] == p[2]);
        g2_solution_free(sol);
        g2_structure_free(s);
    }
}

#[test]
fn theta_y0_matches_theta_zero_at_origin() {
    let s = linear(1.0);
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(g2_theta_zero(s, &mut a), G2Status::Ok);
        assert_eq!(g2_theta_y0(s, 0.0, 3.0, &mut b), G2Status::Ok);
        let mut tm = 0.0;
        assert_eq!(g2_solution_t_max(b, &mut tm), G2Status::Ok);
        assert!(tm >= 3.0);
        for &t in &[0.5, 1.5, 3.0] {
            let (mut pa, mut ma, mut pb, mut mb) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
            g2_solution_f_values(a, t, pa.as_mut_ptr(), ma.as_mut_ptr());
            g2_solution_f_values(b, t, pb.as_mut_ptr(), mb.as_mut_ptr());
            for i in 0..3 {
                assert!((pa[i] - pb[i]).abs() < 1e-8, "t={t} {pa:?} {pb:?}");
                assert!((ma[i] - mb[i]).abs() < 1e-8);
            }
        }
        g2_solution_free(a);
        g2_solution_free(b);
        g2_structure_free(s);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(g2_structure_linear(-1.0, &mut s), G2Status::Domain);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(g2_structure_linear(1.0, ptr::null_mut()), G2Status::NullPointer);
        assert_eq!(last_error(), "out is null");

        let mut sol = ptr::null_mut();
        assert_eq!(g2_theta_zero(ptr::null(), &mut sol), G2Status::NullPointer);

        let bad = CString::new("{\"not\": 1}").unwrap();
        assert_eq!(g2_structure_from_json(bad.as_ptr(), &mut s), G2Status::Config);

        let s = linear(1.0);
        // blow-up truncates the range rather than failing
        assert_eq!(g2_theta_y0(s, 10.0, 5.0, &mut sol), G2Status::Ok);
        let mut tm = f64::NAN;
        g2_solution_t_max(sol, &mut tm);
        assert!(tm < 1.0, "{tm}");
        let (mut p, mut m) = ([0.0; 3], [0.0; 3]);
        assert_eq!(g2_solution_coefficients(sol, 2.0, p.as_mut_ptr(), m.as_mut_ptr()), G2Status::Domain);
        g2_solution_free(sol);
        g2_structure_free(s);

        g2_structure_free(ptr::null_mut());
        g2_solution_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_buffer_is_terminated() {
    unsafe {
        g2_structure_linear(1.0, ptr::null_mut());
        let mut buf = [1 as std::ffi::c_char; 4];
        let n = g2_last_error_message(buf.as_mut_ptr(), buf.len());
        assert_eq!(n, "out is null".len());
        assert_eq!(buf[3], 0);
        assert_eq!(buf[0] as u8, b'o');
    }
}

#[test]
fn curvature_forms_agree() {
    let p: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
    let m: Vec<f64> = (0..9).map(|i| (i as f64 * 1.3 + 0.2).cos()).collect();
    let mut d = f64::NAN;
    assert_eq!(unsafe { g2_curvature_discrepancy(p.as_ptr(), m.as_ptr(), &mut d) }, G2Status::Ok);
    assert!(d < 1e-12, "{d}");
}

#[test]
fn bryant_salamon_info() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(g2_structure_bryant_salamon(10.0, &mut s), G2Status::Ok);
        let (mut b0, mut tm) = (0.0, 0.0);
        assert_eq!(g2_structure_info(s, &mut b0, &mut tm), G2Status::Ok);
        assert!((b0 - 1.0 / 3f64.sqrt()).abs() < 1e-15, "{b0}");
        assert!(tm > 0.0);
        g2_structure_free(s);
    }
}

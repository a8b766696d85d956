//! C ABI over the g2flow library.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every function returns a [`G2Status`]; on
//! failure the message is available from [`g2_last_error_message`] on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use g2flow::algebra::{curvature_direct, curvature_lemma2, ConnectionCoeffs, Su2Vec};
use g2flow::instantons::{flat_pid, residual_max, theta_x1, theta_y0, theta_zero, InstantonSolution};
use g2flow::singular_ivp::SolveOptions;
use g2flow::structures::{make_bryant_salamon, make_linear_example, StructureData};
use g2flow::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum G2Status {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Precondition = 3,
    Numerical = 4,
    Config = 5,
    InvalidUtf8 = 6,
    Panic = 99,
}

/// Opaque structure handle.
pub struct G2Structure(StructureData);

/// Opaque solution handle; keeps its structure alive.
pub struct G2Solution {
    sol: InstantonSolution,
    structure: StructureData,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> G2Status {
    match e {
        Error::Domain(_) => G2Status::Domain,
        Error::Precondition(_) | Error::Unsupported(_) => G2Status::Precondition,
        Error::Malgrange(_) | Error::Numerical(_) | Error::StepUnderflow { .. } => G2Status::Numerical,
        Error::Config(_) | Error::Io(_) | Error::Json(_) => G2Status::Config,
    }
}

fn guard(f: impl FnOnce() -> Result<(), G2Status>) -> G2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => G2Status::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            G2Status::Panic
        }
    }
}

fn lib<T>(r: g2flow::Result<T>) -> Result<T, G2Status> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn null(what: &str) -> G2Status {
    set_error(format!("{what} is null"));
    G2Status::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, G2Status> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), G2Status> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn g2_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Bryant–Salamon structure with `r ∈ [1, r_max]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_structure_bryant_salamon(r_max: f64, out: *mut *mut G2Structure) -> G2Status {
    guard(|| {
        let s = lib(make_bryant_salamon(r_max))?;
        write(out, Box::into_raw(Box::new(G2Structure(s))), "out")
    })
}

/// Structure with `A = t/2`, `B = √(b₀² + t²/4)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_structure_linear(b0: f64, out: *mut *mut G2Structure) -> G2Status {
    guard(|| {
        let s = lib(make_linear_example(b0))?;
        write(out, Box::into_raw(Box::new(G2Structure(s))), "out")
    })
}

/// Structure from the JSON written by the `structure` command.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_structure_from_json(json: *const c_char, out: *mut *mut G2Structure) -> G2Status {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(e.to_string());
            G2Status::InvalidUtf8
        })?;
        let s = lib(StructureData::import_json(text))?;
        write(out, Box::into_raw(Box::new(G2Structure(s))), "out")
    })
}

/// # Safety
/// `s` must be a live handle; `b0` and `t_max` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn g2_structure_info(s: *const G2Structure, b0: *mut f64, t_max: *mut f64) -> G2Status {
    guard(|| {
        let s = &deref(s, "structure")?.0;
        write(b0, s.b0(), "b0")?;
        write(t_max, s.t_max(), "t_max")
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn g2_structure_free(s: *mut G2Structure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn solution_out(s: &StructureData, sol: InstantonSolution, out: *mut *mut G2Solution) -> Result<(), G2Status> {
    write(out, Box::into_raw(Box::new(G2Solution { sol, structure: s.clone() })), "out")
}

/// Explicit `θ^{x₁}` family, `x₁ ≥ 0`.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_theta_x1(s: *const G2Structure, x1: f64, out: *mut *mut G2Solution) -> G2Status {
    guard(|| {
        let s = &deref(s, "structure")?.0;
        let sol = lib(theta_x1(s, x1))?;
        solution_out(s, sol, out)
    })
}

/// Explicit `θ₀`.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_theta_zero(s: *const G2Structure, out: *mut *mut G2Solution) -> G2Status {
    guard(|| {
        let s = &deref(s, "structure")?.0;
        let sol = lib(theta_zero(s))?;
        solution_out(s, sol, out)
    })
}

/// `θ_{y₀}` solved from the singular orbit to `t_end` with default options.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_theta_y0(s: *const G2Structure, y0: f64, t_end: f64, out: *mut *mut G2Solution) -> G2Status {
    guard(|| {
        let s = &deref(s, "structure")?.0;
        let sol = lib(theta_y0(s, y0, t_end, &SolveOptions::default()))?;
        solution_out(s, sol, out)
    })
}

/// Flat connection with `f⁻ = sign/B`, `sign = ±1`.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_flat(s: *const G2Structure, sign: i32, out: *mut *mut G2Solution) -> G2Status {
    guard(|| {
        let s = &deref(s, "structure")?.0;
        let sol = lib(flat_pid(sign))?;
        solution_out(s, sol, out)
    })
}

/// Largest `t` at which the solution can be evaluated.
///
/// # Safety
/// `sol` must be a live handle and `t_max` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_solution_t_max(sol: *const G2Solution, t_max: *mut f64) -> G2Status {
    guard(|| {
        let sol = deref(sol, "solution")?;
        write(t_max, sol.sol.range().1, "t_max")
    })
}

/// Diagonal connection coefficients `c_i^±` at `t` (`a_i^± = c_i^± T_i`).
///
/// # Safety
/// `sol` must be a live handle; `plus` and `minus` must each point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn g2_solution_coefficients(
    sol: *const G2Solution,
    t: f64,
    plus: *mut f64,
    minus: *mut f64,
) -> G2Status {
    guard(|| {
        let sol = deref(sol, "solution")?;
        if plus.is_null() || minus.is_null() {
            return Err(null("output array"));
        }
        let (p, m) = lib(sol.sol.coefficients(t))?;
        std::ptr::copy_nonoverlapping(p.as_ptr(), plus, 3);
        std::ptr::copy_nonoverlapping(m.as_ptr(), minus, 3);
        Ok(())
    })
}

/// Diagonal coefficients `f_i^±` (the `c_i^±` divided by `A_i`, `B_i`).
///
/// # Safety
/// As [`g2_solution_coefficients`].
#[no_mangle]
pub unsafe extern "C" fn g2_solution_f_values(
    sol: *const G2Solution,
    t: f64,
    plus: *mut f64,
    minus: *mut f64,
) -> G2Status {
    guard(|| {
        let sol = deref(sol, "solution")?;
        if plus.is_null() || minus.is_null() {
            return Err(null("output array"));
        }
        let (p, m) = lib(sol.sol.f_values(&sol.structure, t))?;
        std::ptr::copy_nonoverlapping(p.as_ptr(), plus, 3);
        std::ptr::copy_nonoverlapping(m.as_ptr(), minus, 3);
        Ok(())
    })
}

/// Largest absolute instanton-equation residual at `t`.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_solution_residual(sol: *const G2Solution, t: f64, out: *mut f64) -> G2Status {
    guard(|| {
        let sol = deref(sol, "solution")?;
        let r = lib(residual_max(&sol.structure, &sol.sol, t))?;
        write(out, r, "out")
    })
}

/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn g2_solution_free(sol: *mut G2Solution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Largest coefficient difference between the brute-force curvature and
/// the closed form for the connection with `a_i^+ = Σ_j plus[3i+j] T_j`
/// and likewise for `minus`.
///
/// # Safety
/// `plus` and `minus` must each point to 9 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_curvature_discrepancy(plus: *const f64, minus: *const f64, out: *mut f64) -> G2Status {
    guard(|| {
        if plus.is_null() || minus.is_null() {
            return Err(null("input array"));
        }
        let p = std::slice::from_raw_parts(plus, 9);
        let m = std::slice::from_raw_parts(minus, 9);
        let v = |a: &[f64], i: usize| Su2Vec::new(a[3 * i], a[3 * i + 1], a[3 * i + 2]);
        let c = ConnectionCoeffs { a_plus: [v(p, 0), v(p, 1), v(p, 2)], a_minus: [v(m, 0), v(m, 1), v(m, 2)] };
        let d = curvature_direct(&c).sub(&curvature_lemma2(&c)).max_abs();
        write(out, d, "out")
    })
}

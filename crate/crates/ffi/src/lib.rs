//! C ABI over the `thetawave` solver.
//!
//! A curve and initial phase become an opaque [`TwSolution`] handle. Every
//! call returns a [`TwStatus`]; on failure the message is kept per thread
//! and can be copied out with [`tw_last_error`]. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use thetawave::curve::{build_solution_params, period_lattice, SolutionParams};
use thetawave::elliptic::CurveParams;
use thetawave::solution::{eval_amp2, eval_p, sample_grid, GridSpec};
use thetawave::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    Numerical = 4,
    RealityRejected = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque solution handle.
pub struct TwSolution {
    params: SolutionParams,
}

/// The seven curve integrals.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TwConstants {
    pub a_plus: f64,
    pub b_plus: f64,
    pub a_minus: f64,
    pub b_minus: f64,
    pub b1_minus: f64,
    pub d_minus: f64,
    pub f_minus: f64,
}

/// Derived solution parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TwParams {
    pub frb_minus: f64,
    pub frb_plus: f64,
    pub kappa1: f64,
    pub k: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub k0_re: f64,
    pub k0_im: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Periods and lattice translations; `t_prime` is valid when
/// `has_t_prime` is nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TwPeriods {
    pub x: f64,
    pub t: f64,
    pub t_prime: f64,
    pub has_t_prime: i32,
    pub x1: f64,
    pub t1: f64,
    pub x2: f64,
    pub t2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> TwStatus {
    match err {
        Error::InvalidParams(_) => TwStatus::InvalidParams,
        Error::Domain(_) => TwStatus::Domain,
        Error::ComplexPhaseRejected | Error::RealityViolation(_) => TwStatus::RealityRejected,
        _ => TwStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TwStatus>) -> TwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside thetawave".into());
            TwStatus::Panic
        }
    }
}

fn lift<T>(r: thetawave::Result<T>) -> Result<T, TwStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), TwStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(TwStatus::NullPointer);
    }
    Ok(())
}

/// Build a solution handle. On success `*out` owns a handle that must be
/// released with [`tw_solution_free`].
///
/// # Safety
/// `out` must be null or valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_new(
    lambda0: f64,
    a: f64,
    b: f64,
    c: f64,
    z_re1: f64,
    z_im1: f64,
    z_re2: f64,
    z_im2: f64,
    out: *mut *mut TwSolution,
) -> TwStatus {
    guard(|| {
        non_null(out, "out")?;
        let curve = lift(CurveParams::new(lambda0, a, b, c))?;
        let z = [Complex64::new(z_re1, z_im1), Complex64::new(z_re2, z_im2)];
        let params = lift(build_solution_params(&curve, z))?;
        *out = Box::into_raw(Box::new(TwSolution { params }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or come from [`tw_solution_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_free(h: *mut TwSolution) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Add `dk2` to `K2`, e.g. to run a negative control.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_shift_k2(h: *mut TwSolution, dk2: f64) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        (*h).params.k2 += dk2;
        Ok(())
    })
}

/// `p(x, t)`.
///
/// # Safety
/// `h` must be a live handle; `re` and `im` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_eval(
    h: *const TwSolution,
    x: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let p = lift(eval_p(x, t, &(*h).params))?;
        *re = p.re;
        *im = p.im;
        Ok(())
    })
}

/// `|p(x, t)|²` from the theta-product form.
///
/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_amp2(h: *const TwSolution, x: f64, t: f64, out: *mut f64) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        *out = lift(eval_amp2(x, t, &(*h).params))?;
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_constants(h: *const TwSolution, out: *mut TwConstants) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        let k = (*h).params.constants;
        *out = TwConstants {
            a_plus: k.a_plus,
            b_plus: k.b_plus,
            a_minus: k.a_minus,
            b_minus: k.b_minus,
            b1_minus: k.b1_minus,
            d_minus: k.d_minus,
            f_minus: k.f_minus,
        };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_params(h: *const TwSolution, out: *mut TwParams) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        let p = &(*h).params;
        *out = TwParams {
            frb_minus: p.frb_minus,
            frb_plus: p.frb_plus,
            kappa1: p.kappa1,
            k: p.k,
            kappa2: p.kappa2,
            delta: p.delta,
            k0_re: p.k0.re,
            k0_im: p.k0.im,
            k1: p.k1,
            k2: p.k2,
        };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tw_solution_periods(h: *const TwSolution, out: *mut TwPeriods) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        let p = &(*h).params;
        let lat = lift(period_lattice(&p.curve, &p.constants))?;
        *out = TwPeriods {
            x: lat.x,
            t: lat.t,
            t_prime: lat.t_prime.unwrap_or(0.0),
            has_t_prime: lat.t_prime.is_some() as i32,
            x1: lat.x1,
            t1: lat.t1,
            x2: lat.x2,
            t2: lat.t2,
        };
        Ok(())
    })
}

/// Sample `|p|` on an `nx × nt` grid into `out[i * nt + j]`.
///
/// # Safety
/// `h` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tw_sample_abs(
    h: *const TwSolution,
    x0: f64,
    x1: f64,
    t0: f64,
    t1: f64,
    nx: usize,
    nt: usize,
    out: *mut f64,
    len: usize,
) -> TwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        let spec = lift(GridSpec::new(x0, x1, t0, t1, nx, nt))?;
        if len < nx * nt {
            set_error(format!("buffer holds {len} values, grid needs {}", nx * nt));
            return Err(TwStatus::BufferTooSmall);
        }
        let field = lift(sample_grid(&spec, &(*h).params))?;
        let dst = std::slice::from_raw_parts_mut(out, nx * nt);
        for (d, v) in dst.iter_mut().zip(&field.values) {
            *d = v.norm();
        }
        Ok(())
    })
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tw_status_string(status: TwStatus) -> *const c_char {
    let s: &'static CStr = match status {
        TwStatus::Ok => c"ok",
        TwStatus::NullPointer => c"null pointer argument",
        TwStatus::InvalidParams => c"invalid curve parameters",
        TwStatus::Domain => c"argument outside the domain",
        TwStatus::Numerical => c"numerical failure",
        TwStatus::RealityRejected => c"initial phase fails the reality condition",
        TwStatus::BufferTooSmall => c"output buffer too small",
        TwStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

#[no_mangle]
pub extern "C" fn tw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

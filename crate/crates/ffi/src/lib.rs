//! C interface to the `irig` solver.
//!
//! Every function returns an [`IrigStatus`]; on failure a message is kept
//! per thread and can be read with [`irig_last_error`]. Objects are opaque
//! handles created by `*_new`-style functions and released with the
//! matching `*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use irig::harness::config::RunConfig;
use irig::harness::generators::{
    gen_constrained_problem, gen_selection_problem, hinge_problem, ConstrainedSpec, SelectionSpec, UpperSpec,
};
use irig::harness::metrics::emit_metrics_csv;
use irig::harness::rate::fit_rate;
use irig::harness::svmlight::load_svmlight;
use irig::schedules::{rate_schedule, validate, PowerSchedule};
use irig::solver::{run_irig, solve_regularized_reference, RecordPlan, RunOptions, RunOutput};
use irig::{DenseVector, Error, ProblemInstance};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrigStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    InvalidSchedule = 5,
    Infeasible = 6,
    Parse = 7,
    Io = 8,
    Config = 9,
    RateFit = 10,
    Panic = 11,
}

/// Problem instance handle.
pub struct IrigProblem {
    inner: ProblemInstance,
}

/// Step/regularization schedule handle.
pub struct IrigSchedule {
    inner: PowerSchedule,
}

/// Finished run: averaged iterate and trace.
pub struct IrigRun {
    inner: RunOutput,
}

/// One recorded trace row. Unknown values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrigTraceRow {
    pub k: u64,
    pub f_bar: f64,
    pub f_gap: f64,
    pub h_bar: f64,
    pub dist_xstar: f64,
    pub gamma_k: f64,
    pub lambda_k: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(IrigStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => IrigStatus::DimensionMismatch,
            Error::NonFinite(_) => IrigStatus::NonFinite,
            Error::InvalidArgument(_) => IrigStatus::InvalidArgument,
            Error::InvalidSchedule(_) => IrigStatus::InvalidSchedule,
            Error::Infeasible(_) => IrigStatus::Infeasible,
            Error::Parse { .. } => IrigStatus::Parse,
            Error::Config(_) => IrigStatus::Config,
            Error::TooFewRows(_) | Error::NonPositiveGaps { .. } => IrigStatus::RateFit,
            Error::Io { .. } => IrigStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IrigStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IrigStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IrigStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            IrigStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure(IrigStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(src: &DenseVector, buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), found: len }.into());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(src.as_slice().as_ptr(), buf, len);
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn irig_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Two-dimensional test problem: `f1 = f2 = |x1|`,
/// `h = ½‖x − (1, 1.5)‖²` on `[-2, 2]²`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_p2(out: *mut *mut IrigProblem) -> IrigStatus {
    guard(|| emit(out, IrigProblem { inner: gen_selection_problem(&SelectionSpec::p2())? }))
}

/// Selection problem `f_i = Σ_{j∈Z} |x_j|` (`multiplicity` copies) on the
/// cube `[-half_width, half_width]^dim`. The upper level is
/// `(mu/2)‖x − center‖²`, or the elastic net with `mu` when `center` is NULL.
///
/// # Safety
/// `zero_coords` must hold `n_zero` entries; `center`, if not NULL, `dim`.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_selection(
    dim: usize,
    half_width: f64,
    zero_coords: *const usize,
    n_zero: usize,
    multiplicity: usize,
    center: *const f64,
    mu: f64,
    out: *mut *mut IrigProblem,
) -> IrigStatus {
    guard(|| {
        let upper = if center.is_null() {
            UpperSpec::ElasticNet { mu }
        } else {
            UpperSpec::Shifted { center: slice(center, dim, "center")?.to_vec(), mu }
        };
        let spec = SelectionSpec {
            dim,
            half_width,
            zero_coords: slice(zero_coords, n_zero, "zero_coords")?.to_vec(),
            multiplicity,
            upper,
        };
        emit(out, IrigProblem { inner: gen_selection_problem(&spec)? })
    })
}

/// Feasibility problem for `⟨c_i, x⟩ ≤ d_i`, one penalty component per
/// constraint, on the box `[lower, upper]`. `normals` is row-major
/// `n_constraints × dim`. Upper level as in [`irig_problem_selection`].
///
/// # Safety
/// Arrays must have the stated lengths; `center` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_constrained(
    dim: usize,
    normals: *const f64,
    offsets: *const f64,
    n_constraints: usize,
    lower: *const f64,
    upper: *const f64,
    center: *const f64,
    mu: f64,
    out: *mut *mut IrigProblem,
) -> IrigStatus {
    guard(|| {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()).into());
        }
        let normals = slice(normals, n_constraints * dim, "normals")?;
        let offsets = slice(offsets, n_constraints, "offsets")?;
        let upper_spec = if center.is_null() {
            UpperSpec::ElasticNet { mu }
        } else {
            UpperSpec::Shifted { center: slice(center, dim, "center")?.to_vec(), mu }
        };
        let spec = ConstrainedSpec {
            constraints: normals.chunks(dim).map(<[f64]>::to_vec).zip(offsets.iter().copied()).collect(),
            lower: slice(lower, dim, "lower")?.to_vec(),
            upper_bounds: slice(upper, dim, "upper")?.to_vec(),
            upper: upper_spec,
        };
        emit(out, IrigProblem { inner: gen_constrained_problem(&spec)? })
    })
}

/// Hinge-loss problem from an svmlight file split into `m` batches, with
/// an elastic-net upper level on the cube of the given half width.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_svmlight(
    path: *const c_char,
    m: usize,
    mu_h: f64,
    half_width: f64,
    out: *mut *mut IrigProblem,
) -> IrigStatus {
    guard(|| {
        let data = load_svmlight(path_arg(path)?)?;
        emit(out, IrigProblem { inner: hinge_problem(&data, m, mu_h, half_width)? })
    })
}

/// Problem described by the `[problem]` section of a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_from_config(path: *const c_char, out: *mut *mut IrigProblem) -> IrigStatus {
    guard(|| {
        let cfg = RunConfig::from_path(path_arg(path)?)?;
        emit(out, IrigProblem { inner: cfg.build_instance()? })
    })
}

/// # Safety
/// `p` must be a live handle; the out pointers must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_info(
    p: *const IrigProblem,
    dim: *mut usize,
    m: *mut usize,
    mu_h: *mut f64,
) -> IrigStatus {
    guard(|| {
        let p = &handle(p, "problem")?.inner;
        if !dim.is_null() {
            *dim = p.dim();
        }
        if !m.is_null() {
            *m = p.m();
        }
        if !mu_h.is_null() {
            *mu_h = p.mu_h();
        }
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irig_problem_free(p: *mut IrigProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `γ_k = gamma0/(k+1)^a`, `λ_k = lambda0/(k+1)^b`, averaging weights `γ_k^r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irig_schedule_new(
    gamma0: f64,
    lambda0: f64,
    a: f64,
    b: f64,
    r: f64,
    out: *mut *mut IrigSchedule,
) -> IrigStatus {
    guard(|| emit(out, IrigSchedule { inner: PowerSchedule::new(gamma0, lambda0, a, b, r)? }))
}

/// Schedule with `a = (1+ε)/2`, `b = 1/2 − ε`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn irig_schedule_rate(
    epsilon: f64,
    gamma0: f64,
    lambda0: f64,
    r: f64,
    out: *mut *mut IrigSchedule,
) -> IrigStatus {
    guard(|| emit(out, IrigSchedule { inner: rate_schedule(epsilon, gamma0, lambda0, r)? }))
}

/// Writes the violation bitmask to `mask`: bit `i` is set when check `i`
/// fails (0 step product, 1 `a > b`, 2 `a > 1/2`, 3 `a + b < 1`,
/// 4 `a·r ≤ 1`, 5 `r < 1`). Zero means admissible.
///
/// # Safety
/// `s` must be a live handle and `mask` writable.
#[no_mangle]
pub unsafe extern "C" fn irig_schedule_validate(
    s: *const IrigSchedule,
    m: usize,
    mu_h: f64,
    mask: *mut u32,
) -> IrigStatus {
    guard(|| {
        let s = handle(s, "schedule")?;
        if mask.is_null() {
            return Err(null("mask"));
        }
        *mask = validate(&s.inner, m, mu_h)?.mask();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irig_schedule_free(s: *mut IrigSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs `n_iters` outer iterations. `x0` may be NULL (origin) or hold
/// `x0_len == dim` entries. Rows are recorded every `record_stride`
/// iterations and at the last one.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn irig_run(
    p: *const IrigProblem,
    s: *const IrigSchedule,
    n_iters: usize,
    x0: *const f64,
    x0_len: usize,
    record_stride: usize,
    allow_invalid_schedule: bool,
    out: *mut *mut IrigRun,
) -> IrigStatus {
    guard(|| {
        let p = &handle(p, "problem")?.inner;
        let s = &handle(s, "schedule")?.inner;
        let x0 = if x0.is_null() {
            DenseVector::zeros(p.dim())
        } else {
            DenseVector::from_slice(slice(x0, x0_len, "x0")?)?
        };
        let opts = RunOptions {
            record: RecordPlan::Stride(record_stride),
            allow_invalid_schedule,
            ..Default::default()
        };
        emit(out, IrigRun { inner: run_irig(p, s, n_iters, &x0, &opts)? })
    })
}

/// Copies the averaged iterate; `len` must equal the dimension.
///
/// # Safety
/// `run` must be live and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irig_run_x_bar(run: *const IrigRun, buf: *mut f64, len: usize) -> IrigStatus {
    guard(|| copy_out(&handle(run, "run")?.inner.x_bar, buf, len))
}

/// # Safety
/// `run` must be live and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn irig_run_trace_len(run: *const IrigRun, len: *mut usize) -> IrigStatus {
    guard(|| {
        let run = handle(run, "run")?;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = run.inner.trace.rows.len();
        Ok(())
    })
}

/// # Safety
/// `run` must be live and `row` writable.
#[no_mangle]
pub unsafe extern "C" fn irig_run_trace_row(run: *const IrigRun, index: usize, row: *mut IrigTraceRow) -> IrigStatus {
    guard(|| {
        let rows = &handle(run, "run")?.inner.trace.rows;
        if row.is_null() {
            return Err(null("row"));
        }
        let r = rows.get(index).ok_or_else(|| {
            Failure(
                IrigStatus::InvalidArgument,
                format!("row {index} out of range ({} rows)", rows.len()),
            )
        })?;
        *row = IrigTraceRow {
            k: r.k as u64,
            f_bar: r.f_bar,
            f_gap: r.f_gap.unwrap_or(f64::NAN),
            h_bar: r.h_bar,
            dist_xstar: r.dist_xstar.unwrap_or(f64::NAN),
            gamma_k: r.gamma_k,
            lambda_k: r.lambda_k,
        };
        Ok(())
    })
}

/// Writes the trace as a metrics CSV.
///
/// # Safety
/// `run` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn irig_run_write_csv(run: *const IrigRun, path: *const c_char) -> IrigStatus {
    guard(|| Ok(emit_metrics_csv(&handle(run, "run")?.inner.trace, path_arg(path)?)?))
}

/// Log-log slope of `f_gap` against `k` after dropping a leading fraction
/// of rows.
///
/// # Safety
/// `run` must be live; `slope` and `intercept` writable.
#[no_mangle]
pub unsafe extern "C" fn irig_run_fit_rate(
    run: *const IrigRun,
    burn_in_fraction: f64,
    slope: *mut f64,
    intercept: *mut f64,
) -> IrigStatus {
    guard(|| {
        let run = handle(run, "run")?;
        if slope.is_null() || intercept.is_null() {
            return Err(null("output"));
        }
        let fit = fit_rate(&run.inner.trace, burn_in_fraction)?;
        *slope = fit.slope;
        *intercept = fit.intercept;
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn irig_run_free(run: *mut IrigRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Approximate minimizer of `f + lambda·h` over the feasible set, written
/// to `buf` (`len` must equal the dimension).
///
/// # Safety
/// `p` must be live and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn irig_reference(
    p: *const IrigProblem,
    lambda: f64,
    iters: usize,
    buf: *mut f64,
    len: usize,
) -> IrigStatus {
    guard(|| {
        let p = &handle(p, "problem")?.inner;
        copy_out(&solve_regularized_reference(p, lambda, iters)?, buf, len)
    })
}

//! C ABI for `ibstokes`.
//!
//! Every function returns an [`IbsStatus`]; on failure the message is available from
//! [`ibs_last_error_message`] on the same thread. Handles are opaque and must be released with
//! their matching `*_free` function. Enumerations are passed as `uint32_t` holding one of the
//! `Ibs*` enum values; anything else yields `IBS_STATUS_INVALID_ARGUMENT`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ibstokes::analysis::convergence::{run_convergence_study, ConvergenceReport, Method, StudyOptions};
use ibstokes::analysis::exact::{exact_eval, example_problem};
use ibstokes::analysis::norms::{error_norms, error_norms_mac, ErrorTriple};
use ibstokes::error::Error;
use ibstokes::green::{verify_decay, DecayOptions, DiscreteGreen, GreenBoundary, GreenSolver};
use ibstokes::grid::{Circle, GridSpec, ScalarField};
use ibstokes::kernels::DeltaKernel;
use ibstokes::mac::solve_mac;
use ibstokes::poisson::LinearSolveOptions;
use ibstokes::three_poisson::solve_three_poisson;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbsStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidGrid = 2,
    ShapeMismatch = 3,
    Singular = 4,
    NotConverged = 5,
    EmptyFarField = 6,
    Io = 7,
    Csv = 8,
    NullPointer = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbsMethod {
    ThreePoisson = 0,
    Mac = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbsKernel {
    Hat = 0,
    Cosine = 1,
    Delta1 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbsBoundary {
    Dirichlet = 0,
    Neumann = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbsComponent {
    U = 0,
    V = 1,
    P = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IbsErrors {
    pub err_u_inf: f64,
    pub err_p_l2: f64,
    pub err_p_far: f64,
}

/// One report row; rates are NaN where undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IbsRow {
    pub n: usize,
    pub errors: IbsErrors,
    pub rate_u: f64,
    pub rate_p: f64,
    pub rate_p_far: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IbsDecay {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub envelope_margin: f64,
}

/// Solved example: velocity and pressure fields with their errors.
pub struct IbsSolution {
    fields: [ScalarField; 3],
    pin: (usize, usize),
    errors: ErrorTriple,
}

pub struct IbsReport {
    report: ConvergenceReport,
}

pub struct IbsGreen {
    green: DiscreteGreen,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> IbsStatus {
    match e {
        Error::InvalidGrid(_) => IbsStatus::InvalidGrid,
        Error::InvalidArgument(_) => IbsStatus::InvalidArgument,
        Error::ShapeMismatch { .. } => IbsStatus::ShapeMismatch,
        Error::Singular(_) => IbsStatus::Singular,
        Error::NotConverged { .. } => IbsStatus::NotConverged,
        Error::EmptyFarField { .. } => IbsStatus::EmptyFarField,
        Error::Csv(_) => IbsStatus::Csv,
        Error::Io(_) => IbsStatus::Io,
    }
}

enum Fail {
    Status(IbsStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IbsStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            IbsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(IbsStatus::NullPointer, format!("{what} is null"))
}

fn bad_enum(what: &str, v: u32) -> Fail {
    Fail::Status(IbsStatus::InvalidArgument, format!("invalid {what} value {v}"))
}

fn kernel(k: u32) -> Result<DeltaKernel, Fail> {
    match k {
        x if x == IbsKernel::Hat as u32 => Ok(DeltaKernel::Hat),
        x if x == IbsKernel::Cosine as u32 => Ok(DeltaKernel::Cosine),
        x if x == IbsKernel::Delta1 as u32 => Ok(DeltaKernel::Delta1),
        _ => Err(bad_enum("IbsKernel", k)),
    }
}

fn method(m: u32) -> Result<Method, Fail> {
    match m {
        x if x == IbsMethod::ThreePoisson as u32 => Ok(Method::ThreePoisson),
        x if x == IbsMethod::Mac as u32 => Ok(Method::Mac),
        _ => Err(bad_enum("IbsMethod", m)),
    }
}

fn component(c: u32) -> Result<usize, Fail> {
    if c <= IbsComponent::P as u32 {
        Ok(c as usize)
    } else {
        Err(bad_enum("IbsComponent", c))
    }
}

fn boundary(b: u32) -> Result<GreenBoundary, Fail> {
    match b {
        x if x == IbsBoundary::Dirichlet as u32 => Ok(GreenBoundary::Dirichlet),
        x if x == IbsBoundary::Neumann as u32 => Ok(GreenBoundary::Neumann),
        _ => Err(bad_enum("IbsBoundary", b)),
    }
}

fn errors(e: ErrorTriple) -> IbsErrors {
    IbsErrors { err_u_inf: e.err_u_inf, err_p_l2: e.err_p_l2, err_p_far: e.err_p_far }
}

fn options(tol: f64) -> Result<LinearSolveOptions, Fail> {
    let opts = LinearSolveOptions::with_tol(tol);
    opts.validate()?;
    Ok(opts)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ibs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ibs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// `δ_h(r)` for the given kernel.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_kernel_eval(k: u32, r: f64, h: f64, out: *mut f64) -> IbsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(h > 0.0 && h.is_finite() && r.is_finite()) {
            return Err(Fail::Status(IbsStatus::InvalidArgument, format!("need finite r and h > 0, got r = {r}, h = {h}")));
        }
        *out = kernel(k)?.eval(r, h);
        Ok(())
    })
}

/// Solves the circular-interface example on an `n × n` grid with relative tolerance `tol`.
///
/// # Safety
/// `out` must be null or valid for a write. On success `*out` owns a handle for
/// [`ibs_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn ibs_solve_example(
    m: u32,
    k: u32,
    n: usize,
    tol: f64,
    out: *mut *mut IbsSolution,
) -> IbsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let opts = options(tol)?;
        let problem = example_problem(n, kernel(k)?, 1.0)?;
        let circle = Circle::unit();
        let sol = match method(m)? {
            Method::ThreePoisson => {
                let s = solve_three_poisson(&problem, opts)?;
                let e = error_norms(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)?;
                IbsSolution { fields: [s.u, s.v, s.p], pin: s.pin, errors: e }
            }
            Method::Mac => {
                let s = solve_mac(&problem, opts)?;
                let e = error_norms_mac(&s.u, &s.v, &s.p, s.pin, &exact_eval, &circle)?;
                IbsSolution { fields: [s.u, s.v, s.p], pin: s.pin, errors: e }
            }
        };
        *out = Box::into_raw(Box::new(sol));
        Ok(())
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_solution_errors(sol: *const IbsSolution, out: *mut IbsErrors) -> IbsStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = errors(s.errors);
        Ok(())
    })
}

/// Pressure pin index (node for three-Poisson, cell for MAC).
///
/// # Safety
/// `sol` must be a live handle; `i` and `j` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ibs_solution_pin(sol: *const IbsSolution, i: *mut usize, j: *mut usize) -> IbsStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if i.is_null() || j.is_null() {
            return Err(null("output index"));
        }
        *i = s.pin.0;
        *j = s.pin.1;
        Ok(())
    })
}

/// Array shape of one component.
///
/// # Safety
/// `sol` must be a live handle; `nx` and `ny` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ibs_solution_dims(
    sol: *const IbsSolution,
    c: u32,
    nx: *mut usize,
    ny: *mut usize,
) -> IbsStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if nx.is_null() || ny.is_null() {
            return Err(null("output size"));
        }
        let f = &s.fields[component(c)?];
        *nx = f.nx();
        *ny = f.ny();
        Ok(())
    })
}

/// Copies one component, row-major with `i` fastest, into `buf` of `len` doubles.
///
/// # Safety
/// `sol` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ibs_solution_copy(sol: *const IbsSolution, c: u32, buf: *mut f64, len: usize) -> IbsStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let values = s.fields[component(c)?].values();
        if len < values.len() {
            return Err(Fail::Status(IbsStatus::BufferTooSmall, format!("need {} doubles, got {len}", values.len())));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from [`ibs_solve_example`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibs_solution_free(sol: *mut IbsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Grid-refinement study over `grids[0..count]`.
///
/// # Safety
/// `grids` must point to `count` values; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_convergence_study(
    m: u32,
    k: u32,
    grids: *const usize,
    count: usize,
    tol: f64,
    out: *mut *mut IbsReport,
) -> IbsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if grids.is_null() {
            return Err(null("grids"));
        }
        let grids = std::slice::from_raw_parts(grids, count);
        let opts = StudyOptions { solve: options(tol)?, ..StudyOptions::default() };
        let report = run_convergence_study(method(m)?, kernel(k)?, grids, &opts)?;
        *out = Box::into_raw(Box::new(IbsReport { report }));
        Ok(())
    })
}

/// # Safety
/// `rep` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_report_len(rep: *const IbsReport, out: *mut usize) -> IbsStatus {
    guard(|| {
        let r = rep.as_ref().ok_or_else(|| null("report"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = r.report.rows.len();
        Ok(())
    })
}

/// # Safety
/// `rep` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_report_row(rep: *const IbsReport, index: usize, out: *mut IbsRow) -> IbsStatus {
    guard(|| {
        let r = rep.as_ref().ok_or_else(|| null("report"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let row = r.report.rows.get(index).ok_or_else(|| {
            Fail::Status(IbsStatus::InvalidArgument, format!("row {index} out of range ({} rows)", r.report.rows.len()))
        })?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *o = IbsRow {
            n: row.n,
            errors: errors(row.errors),
            rate_u: nan(row.rate_u),
            rate_p: nan(row.rate_p),
            rate_p_far: nan(row.rate_p_far),
        };
        Ok(())
    })
}

/// Writes the report CSV to `path`.
///
/// # Safety
/// `rep` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn ibs_report_write_csv(rep: *const IbsReport, path: *const c_char) -> IbsStatus {
    guard(|| {
        let r = rep.as_ref().ok_or_else(|| null("report"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|e| Fail::Status(IbsStatus::InvalidArgument, format!("path is not UTF-8: {e}")))?;
        let file = std::fs::File::create(path).map_err(Error::from)?;
        r.report.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    })
}

/// # Safety
/// `rep` must be null or a handle from [`ibs_convergence_study`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibs_report_free(rep: *mut IbsReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Discrete Green function on `[−1, 1]²` centred at the node nearest `(x, y)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_green(bc: u32, n: usize, x: f64, y: f64, tol: f64, out: *mut *mut IbsGreen) -> IbsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, n)?;
        if !(x > grid.a && x < grid.b && y > grid.c && y < grid.d) {
            return Err(Fail::Status(IbsStatus::InvalidArgument, format!("center ({x}, {y}) outside (-1, 1)^2")));
        }
        let (l, m) = grid.nearest_node(x, y);
        let bc = boundary(bc)?;
        let green = GreenSolver::new(&grid, bc, options(tol)?)?.green(l, m)?;
        *out = Box::into_raw(Box::new(IbsGreen { green }));
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_green_identity_residual(g: *const IbsGreen, out: *mut f64) -> IbsStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("green"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = g.green.identity_residual();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_green_decay(g: *const IbsGreen, out: *mut IbsDecay) -> IbsStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("green"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let r = verify_decay(&g.green, DecayOptions::default());
        *o = IbsDecay { c0: r.c0, c1: r.c1, c2: r.c2, envelope_margin: r.envelope_margin };
        Ok(())
    })
}

/// Value at node `(i, j)`.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ibs_green_value(g: *const IbsGreen, i: usize, j: usize, out: *mut f64) -> IbsStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("green"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let f = &g.green.field;
        if i >= f.nx() || j >= f.ny() {
            return Err(Fail::Status(IbsStatus::InvalidArgument, format!("node ({i}, {j}) out of range")));
        }
        *o = f.get(i, j);
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from [`ibs_green`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibs_green_free(g: *mut IbsGreen) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

//! C interface to the `smmc` estimators.
//!
//! Problems and results are opaque heap handles owned by the caller and
//! released with [`smmc_problem_free`] and [`smmc_result_free`]. Every
//! fallible call returns an [`SmmcStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`smmc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smmc::benchmarks;
use smmc::mmc::run_mmc;
use smmc::monte_carlo::run_mc;
use smmc::rng::seeded;
use smmc::smmc::run_smmc;
use smmc::subset::run_ss;
use smmc::{
    BinGrid, DistributionEstimate, Error, EvalCounter, MmcConfig, ModifiedMetropolis, ProblemDefinition,
    ProposalSpec, SmmcConfig, SsConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmmcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MisalignedThreshold = 3,
    Initialization = 4,
    DegenerateLevel = 5,
    NonConvergence = 6,
    Numeric = 7,
    Resolution = 8,
    BufferTooSmall = 9,
    NoDistribution = 10,
    Panic = 11,
    Internal = 12,
}

/// Performance function callback: `x` points to `dim` inputs.
pub type SmmcPerformFn = Option<unsafe extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

/// Opaque problem handle.
pub struct SmmcProblem {
    problem: ProblemDefinition,
    grid: Option<BinGrid>,
}

/// Opaque result handle.
pub struct SmmcResult {
    p_f: f64,
    evals: u64,
    estimate: Option<DistributionEstimate>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmmcSamplerOptions {
    /// Half-width of the uniform proposal window in every dimension.
    pub proposal_half_width: f64,
    pub burn_in: usize,
    /// Run chains on several threads. The performance callback must then be
    /// safe to call concurrently.
    pub parallel: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmmcSmmcOptions {
    pub alpha: f64,
    pub n_per_iter: usize,
    pub k_iters: usize,
    pub max_subsets: usize,
    pub sampler: SmmcSamplerOptions,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmmcMmcOptions {
    pub k_iters: usize,
    pub n_per_iter: usize,
    pub sampler: SmmcSamplerOptions,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SmmcSsOptions {
    pub gamma: f64,
    pub n_per_level: usize,
    pub max_levels: usize,
    pub sampler: SmmcSamplerOptions,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SmmcStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::InvalidArgument(_) | Error::EmptyInput(_) | Error::Config(_) => {
            SmmcStatus::InvalidArgument
        }
        Error::MisalignedThreshold { .. } => SmmcStatus::MisalignedThreshold,
        Error::Initialization { .. } | Error::OutOfDomain(_) => SmmcStatus::Initialization,
        Error::DegenerateLevel { .. } | Error::NoCounts => SmmcStatus::DegenerateLevel,
        Error::NonConvergence { .. } => SmmcStatus::NonConvergence,
        Error::Numeric(_) => SmmcStatus::Numeric,
        Error::Resolution { .. } => SmmcStatus::Resolution,
        Error::Io(_) | Error::Json(_) => SmmcStatus::Internal,
    }
}

struct Failure(SmmcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SmmcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmmcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SmmcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SmmcStatus::InvalidArgument, format!("`{what}` is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn smmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn smmc_sampler_options_default() -> SmmcSamplerOptions {
    SmmcSamplerOptions { proposal_half_width: 1.0, burn_in: 0, parallel: false }
}

#[no_mangle]
pub extern "C" fn smmc_smmc_options_default() -> SmmcSmmcOptions {
    SmmcSmmcOptions { alpha: 0.2, n_per_iter: 10_000, k_iters: 5, max_subsets: 50, sampler: smmc_sampler_options_default() }
}

#[no_mangle]
pub extern "C" fn smmc_mmc_options_default() -> SmmcMmcOptions {
    SmmcMmcOptions { k_iters: 10, n_per_iter: 10_000, sampler: smmc_sampler_options_default() }
}

#[no_mangle]
pub extern "C" fn smmc_ss_options_default() -> SmmcSsOptions {
    SmmcSsOptions { gamma: 0.1, n_per_level: 10_000, max_levels: 50, sampler: smmc_sampler_options_default() }
}

/// Built-in problem: `two-circle`, `norm10`, `quarter-car` or `gauss1d`,
/// with its default grid.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_builtin(name: *const c_char, out: *mut *mut SmmcProblem) -> SmmcStatus {
    guard(|| {
        let bench = benchmarks::builtin(str_arg(name, "name")?)?;
        write_out(out, SmmcProblem { problem: bench.problem, grid: Some(bench.grid) })
    })
}

struct Callback {
    f: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// The caller guarantees `user_data` may be shared; see `smmc_problem_custom`.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, x: &[f64]) -> f64 {
        unsafe { (self.f)(x.as_ptr(), x.len(), self.user_data) }
    }
}

/// Problem with `dim` independent standard normal inputs and performance
/// function `perform`. Failure is `perform(x) > threshold`. The problem has
/// no grid until [`smmc_problem_set_grid`] is called, which MMC and SMMC
/// require.
///
/// # Safety
/// `perform` must be callable with `user_data` for as long as the problem
/// lives, and from several threads if any run sets `parallel`. It should
/// return finite values.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_custom(
    name: *const c_char,
    dim: usize,
    perform: SmmcPerformFn,
    user_data: *mut c_void,
    threshold: f64,
    out: *mut *mut SmmcProblem,
) -> SmmcStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let f = perform.ok_or_else(|| null("perform"))?;
        let cb = Callback { f, user_data };
        let problem = ProblemDefinition::standard_normal(
            name,
            dim,
            move |x: &[f64]| cb.call(x),
            threshold,
        )?;
        write_out(out, SmmcProblem { problem, grid: None })
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_set_threshold(problem: *mut SmmcProblem, threshold: f64) -> SmmcStatus {
    guard(|| {
        let p = problem.as_mut().ok_or_else(|| null("problem"))?;
        if !threshold.is_finite() {
            return Err(Failure(SmmcStatus::InvalidArgument, format!("threshold must be finite, got {threshold}")));
        }
        p.problem = p.problem.with_threshold(threshold);
        Ok(())
    })
}

/// Output grid of `m` equal bins on `[a, b]`.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_set_grid(problem: *mut SmmcProblem, a: f64, b: f64, m: usize) -> SmmcStatus {
    guard(|| {
        let p = problem.as_mut().ok_or_else(|| null("problem"))?;
        p.grid = Some(BinGrid::new(a, b, m)?);
        Ok(())
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_dim(problem: *const SmmcProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.dim())
}

/// # Safety
/// `problem` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smmc_problem_free(problem: *mut SmmcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

fn sampler(problem: &ProblemDefinition, o: &SmmcSamplerOptions) -> Result<ModifiedMetropolis, Failure> {
    let mut mm = ModifiedMetropolis::new(ProposalSpec::uniform(problem.dim(), o.proposal_half_width)?);
    mm.burn_in = o.burn_in;
    mm.parallel = o.parallel;
    Ok(mm)
}

fn grid_of(p: &SmmcProblem) -> Result<(BinGrid, usize), Failure> {
    let grid = p
        .grid
        .ok_or_else(|| Failure(SmmcStatus::InvalidArgument, "problem has no output grid; call smmc_problem_set_grid".into()))?;
    let m_star = grid.align_threshold(p.problem.threshold())?;
    Ok((grid, m_star))
}

/// Subset multicanonical Monte Carlo.
///
/// # Safety
/// `problem` must be a live handle, `options` NULL (defaults) or valid, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smmc_run_smmc(
    problem: *const SmmcProblem,
    options: *const SmmcSmmcOptions,
    seed: u64,
    out: *mut *mut SmmcResult,
) -> SmmcStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| smmc_smmc_options_default());
        let (grid, m_star) = grid_of(p)?;
        let mut cfg = SmmcConfig::new(o.alpha, o.n_per_iter, o.k_iters);
        cfg.max_subsets = o.max_subsets;
        let counter = EvalCounter::new();
        let r = run_smmc(&p.problem, &grid, m_star, &cfg, &sampler(&p.problem, &o.sampler)?, &mut seeded(seed), &counter)?;
        write_out(out, SmmcResult { p_f: r.p_f, evals: counter.get(), estimate: Some(r.estimate) })
    })
}

/// Multicanonical Monte Carlo over the problem's whole grid.
///
/// # Safety
/// As [`smmc_run_smmc`].
#[no_mangle]
pub unsafe extern "C" fn smmc_run_mmc(
    problem: *const SmmcProblem,
    options: *const SmmcMmcOptions,
    seed: u64,
    out: *mut *mut SmmcResult,
) -> SmmcStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| smmc_mmc_options_default());
        let (grid, m_star) = grid_of(p)?;
        let cfg = MmcConfig::new(o.k_iters, o.n_per_iter);
        let counter = EvalCounter::new();
        let r = run_mmc(&p.problem, &grid, m_star, &cfg, &sampler(&p.problem, &o.sampler)?, &mut seeded(seed), &counter)?;
        write_out(out, SmmcResult { p_f: r.p_f, evals: counter.get(), estimate: Some(r.estimate) })
    })
}

/// Subset simulation. The result carries no distribution.
///
/// # Safety
/// As [`smmc_run_smmc`].
#[no_mangle]
pub unsafe extern "C" fn smmc_run_ss(
    problem: *const SmmcProblem,
    options: *const SmmcSsOptions,
    seed: u64,
    out: *mut *mut SmmcResult,
) -> SmmcStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let o = options.as_ref().copied().unwrap_or_else(|| smmc_ss_options_default());
        let mut cfg = SsConfig::new(o.gamma, o.n_per_level);
        cfg.max_levels = o.max_levels;
        let counter = EvalCounter::new();
        let r = run_ss(&p.problem, &cfg, &sampler(&p.problem, &o.sampler)?, &mut seeded(seed), &counter)?;
        write_out(out, SmmcResult { p_f: r.p_f, evals: counter.get(), estimate: None })
    })
}

/// Plain Monte Carlo with `n` prior draws. Histograms onto the grid when the
/// problem has one.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smmc_run_mc(
    problem: *const SmmcProblem,
    n: usize,
    seed: u64,
    out: *mut *mut SmmcResult,
) -> SmmcStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let counter = EvalCounter::new();
        let r = run_mc(&p.problem, n, p.grid.as_ref(), false, &mut seeded(seed), &counter)?;
        write_out(out, SmmcResult { p_f: r.p_f, evals: counter.get(), estimate: r.estimate })
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_result_pf(result: *const SmmcResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.p_f)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_result_evals(result: *const SmmcResult) -> u64 {
    result.as_ref().map_or(0, |r| r.evals)
}

/// Number of grid bins in the estimated distribution, 0 if there is none.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn smmc_result_bin_count(result: *const SmmcResult) -> usize {
    result.as_ref().and_then(|r| r.estimate.as_ref()).map_or(0, |e| e.probs().len())
}

/// Copies the complementary CDF: `edges[i]` is the left edge of bin `i` and
/// `tail[i]` the estimated probability of exceeding it. Both buffers must
/// hold `len` values; `len` must be at least [`smmc_result_bin_count`].
///
/// # Safety
/// `edges` and `tail` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn smmc_result_ccdf(
    result: *const SmmcResult,
    edges: *mut f64,
    tail: *mut f64,
    len: usize,
) -> SmmcStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let est = r
            .estimate
            .as_ref()
            .ok_or_else(|| Failure(SmmcStatus::NoDistribution, "result has no distribution estimate".into()))?;
        if edges.is_null() || tail.is_null() {
            return Err(null("edges/tail"));
        }
        let ccdf = est.ccdf();
        if len < ccdf.len() {
            return Err(Failure(SmmcStatus::BufferTooSmall, format!("need {} values, got {len}", ccdf.len())));
        }
        let edges = std::slice::from_raw_parts_mut(edges, ccdf.len());
        let tail = std::slice::from_raw_parts_mut(tail, ccdf.len());
        for (i, (e, t)) in ccdf.into_iter().enumerate() {
            edges[i] = e;
            tail[i] = t;
        }
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn smmc_result_free(result: *mut SmmcResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Exact failure probability of a built-in problem at `threshold`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn smmc_reference_pf(name: *const c_char, threshold: f64, out: *mut f64) -> SmmcStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = benchmarks::reference_pf(name, threshold)?
            .ok_or_else(|| Failure(SmmcStatus::InvalidArgument, format!("no analytic reference for `{name}`")))?;
        *out = p;
        Ok(())
    })
}

/// `P(chi^2_d > t)`; NaN for `d == 0`.
#[no_mangle]
pub extern "C" fn smmc_chi2_tail(d: u32, t: f64) -> f64 {
    if d == 0 {
        return f64::NAN;
    }
    benchmarks::chi2_tail(d, t)
}

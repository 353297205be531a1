//! C ABI over `gbs-core`.
//!
//! Every function returns a [`GbsStatus`]; results come back through out
//! pointers. On failure, [`gbs_last_error_message`] describes the most recent
//! error on the calling thread. Handles come from the `gbs_space_*` and
//! `gbs_posterior_*` constructors and are released with the matching
//! `*_free`.
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the documented number of
//! elements, and handles must come from this library and not be used after
//! they are freed. A handle may be read from several threads at once but
//! mutated by only one.
#![allow(clippy::missing_safety_doc, clippy::too_many_arguments)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gbs_core::geometry::{self, GeometryError, NeighborGraph};
use gbs_core::oracle::{NoiseSpec, OracleError, SimulatedOracle, Truth};
use gbs_core::rng::{stream, Purpose};
use gbs_core::search::{self, Posterior, QueryRule, SearchError, TiePolicy};
use gbs_core::space::{self, HalfspaceParams, SpaceError};
use gbs_core::{HypothesisSpace, Label};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GbsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input: bad matrix, index out of range, invalid label.
    InvalidArgument = 2,
    /// A parameter outside the domain of the requested quantity.
    Domain = 3,
    /// The coherence solve could not be certified.
    SolverFailure = 4,
    /// Noisy repetition-coded search eliminated every hypothesis.
    EmptyVersionSpace = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// A finite hypothesis space with its response matrix.
pub struct GbsSpace {
    inner: HypothesisSpace,
}

/// A posterior over the hypotheses of one space.
pub struct GbsPosterior {
    inner: Posterior,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GbsStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(GbsStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure(GbsStatus::InvalidArgument, msg.into())
    }
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        Failure(GbsStatus::InvalidArgument, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure(GbsStatus::InvalidArgument, e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        let status = match e {
            GeometryError::Domain(_) => GbsStatus::Domain,
            GeometryError::Lp(_) | GeometryError::SolverFailure { .. } => GbsStatus::SolverFailure,
        };
        Failure(status, e.to_string())
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let status = match e {
            SearchError::EmptyVersionSpace { .. } => GbsStatus::EmptyVersionSpace,
            SearchError::Oracle(_) => GbsStatus::InvalidArgument,
            SearchError::Domain(_) => GbsStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GbsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GbsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_space(out: *mut *mut GbsSpace, space: Result<HypothesisSpace, SpaceError>) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    let boxed = Box::new(GbsSpace { inner: space? });
    out.write(Box::into_raw(boxed));
    Ok(())
}

fn label(value: i8) -> Result<Label, Failure> {
    Label::from_i8(value).ok_or_else(|| Failure::invalid(format!("label must be +1 or -1, got {value}")))
}

fn check_truth(space: &HypothesisSpace, truth: usize) -> Result<(), Failure> {
    if truth >= space.n_hypotheses() {
        return Err(Failure::invalid(format!("truth {truth} out of range for {} hypotheses", space.n_hypotheses())));
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length, or 0
/// when there is none. Pass a null `buf` to query the length.
#[no_mangle]
pub unsafe extern "C" fn gbs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a space from a row-major `rows x cols` matrix of +1/-1 entries.
/// Duplicate columns are merged into one cell.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_from_matrix(data: *const i8, rows: usize, cols: usize, out: *mut *mut GbsSpace) -> GbsStatus {
    guard(|| {
        let total = rows.checked_mul(cols).ok_or_else(|| Failure::invalid("matrix size overflows"))?;
        let flat = slice(data, total, "data")?;
        let matrix: Vec<Vec<i8>> = if cols == 0 { vec![Vec::new(); rows] } else { flat.chunks(cols).map(<[i8]>::to_vec).collect() };
        emit_space(out, HypothesisSpace::from_matrix(&matrix))
    })
}

/// `n` thresholds on the unit interval.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_thresholds(n: usize, out: *mut *mut GbsSpace) -> GbsStatus {
    guard(|| emit_space(out, space::build_thresholds(n)))
}

/// `n` intervals of length `1/n` tiling the unit interval.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_disjoint_intervals(n: usize, out: *mut *mut GbsSpace) -> GbsStatus {
    guard(|| emit_space(out, space::disjoint_intervals(n)))
}

/// Halfspaces `sign(a_i . x + b_i)` in `d` dimensions. `normals` holds `n`
/// unit vectors row-major, `offsets` the `n` offsets. A positive `cube`
/// restricts the query space to `(-cube, cube)^d`.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_halfspaces(
    normals: *const f64,
    offsets: *const f64,
    n: usize,
    d: usize,
    cube: f64,
    out: *mut *mut GbsSpace,
) -> GbsStatus {
    guard(|| {
        if d == 0 {
            return Err(Failure::invalid("dimension must be positive"));
        }
        let total = n.checked_mul(d).ok_or_else(|| Failure::invalid("normal array size overflows"))?;
        let flat = slice(normals, total, "normals")?;
        let offsets = slice(offsets, n, "offsets")?.to_vec();
        let mut params = HalfspaceParams::new(flat.chunks(d).map(<[f64]>::to_vec).collect(), offsets)?;
        if cube > 0.0 {
            params = params.with_cube(cube);
        }
        emit_space(out, space::build_halfspaces(&params))
    })
}

/// Releases a space. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_free(space: *mut GbsSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gbs_space_dims(space: *const GbsSpace, n_hypotheses: *mut usize, n_cells: *mut usize) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        write(n_hypotheses, s.n_hypotheses(), "n_hypotheses")?;
        write(n_cells, s.n_cells(), "n_cells")
    })
}

/// Response (+1 or -1) of hypothesis `h` on cell `cell`.
#[no_mangle]
pub unsafe extern "C" fn gbs_space_response(space: *const GbsSpace, h: usize, cell: usize, out: *mut i8) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        if h >= s.n_hypotheses() || cell >= s.n_cells() {
            return Err(Failure::invalid(format!("({h}, {cell}) out of range for {}x{}", s.n_hypotheses(), s.n_cells())));
        }
        write(out, s.value(h, cell), "out")
    })
}

/// Coherence `c*` with its certifying distribution. `p`, when not null,
/// must hold `n_cells` doubles; `worst` may be null.
#[no_mangle]
pub unsafe extern "C" fn gbs_coherence(
    space: *const GbsSpace,
    tolerance: f64,
    c_star: *mut f64,
    p: *mut f64,
    worst: *mut usize,
) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        let cert = geometry::coherence(s, tolerance)?;
        write(c_star, cert.c_star, "c_star")?;
        if !p.is_null() {
            ptr::copy_nonoverlapping(cert.p.as_ptr(), p, cert.p.len());
        }
        if !worst.is_null() {
            worst.write(cert.worst_hypothesis);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gbs_minimal_k(space: *const GbsSpace, out: *mut usize) -> GbsStatus {
    guard(|| write(out, geometry::minimal_k(&deref(space, "space")?.inner), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn gbs_is_k_neighborly(space: *const GbsSpace, k: usize, out: *mut bool) -> GbsStatus {
    guard(|| write(out, geometry::is_k_neighborly(&deref(space, "space")?.inner, k), "out"))
}

/// Per-query reduction factor of the splitting search.
#[no_mangle]
pub unsafe extern "C" fn gbs_rate(c_star: f64, k: usize, out: *mut f64) -> GbsStatus {
    guard(|| write(out, geometry::gbs_rate(c_star, k)?, "out"))
}

/// Query ceiling of the noiseless splitting search on `n` hypotheses.
#[no_mangle]
pub unsafe extern "C" fn gbs_query_bound(n: usize, lambda: f64, out: *mut usize) -> GbsStatus {
    guard(|| write(out, geometry::gbs_query_bound(n, lambda)?, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn gbs_epsilon0(alpha: f64, beta: f64, out: *mut f64) -> GbsStatus {
    guard(|| write(out, geometry::epsilon0(alpha, beta)?, "out"))
}

/// Error decay constant of the modified soft-decision search.
#[no_mangle]
pub unsafe extern "C" fn gbs_sgbs_rate(c_star: f64, alpha: f64, beta: f64, out: *mut f64) -> GbsStatus {
    guard(|| write(out, geometry::sgbs_rate(c_star, alpha, beta)?, "out"))
}

/// Odd vote count per query so that `n0` majority votes all succeed with
/// probability at least `1 - delta`.
#[no_mangle]
pub unsafe extern "C" fn gbs_ngbs_repetitions(n0: usize, delta: f64, alpha: f64, out: *mut usize) -> GbsStatus {
    guard(|| write(out, geometry::ngbs_repetitions(n0, delta, alpha)?, "out"))
}

fn simulated(s: &HypothesisSpace, truth: usize, alpha: f64, seed: u64, trial: u64) -> Result<SimulatedOracle, Failure> {
    check_truth(s, truth)?;
    let noise = if alpha == 0.0 { NoiseSpec::noiseless() } else { NoiseSpec::constant(alpha) };
    Ok(SimulatedOracle::new(s, &Truth::Hypothesis(truth), noise, stream(seed, trial, Purpose::Oracle))?)
}

/// Noiseless splitting search against a simulated `truth`. Ties are broken
/// at random from `(seed, trial)`.
#[no_mangle]
pub unsafe extern "C" fn gbs_run_gbs(
    space: *const GbsSpace,
    truth: usize,
    seed: u64,
    trial: u64,
    queries: *mut usize,
    outcome: *mut usize,
) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        let mut oracle = simulated(s, truth, 0.0, seed, trial)?;
        let (transcript, h) = search::run_gbs(s, &mut oracle, TiePolicy::Random, &mut stream(seed, trial, Purpose::Algorithm))?;
        write(queries, transcript.queries_used, "queries")?;
        write(outcome, h, "outcome")
    })
}

/// Splitting search with `repetitions` majority votes per query against a
/// simulated `truth` whose responses flip with probability `alpha`.
#[no_mangle]
pub unsafe extern "C" fn gbs_run_ngbs(
    space: *const GbsSpace,
    truth: usize,
    alpha: f64,
    repetitions: usize,
    seed: u64,
    trial: u64,
    queries: *mut usize,
    outcome: *mut usize,
) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        let mut oracle = simulated(s, truth, alpha, seed, trial)?;
        let mut rng = stream(seed, trial, Purpose::Algorithm);
        let (transcript, h) = search::run_ngbs(s, &mut oracle, repetitions, TiePolicy::Random, &mut rng)?;
        write(queries, transcript.queries_used, "queries")?;
        write(outcome, h, "outcome")
    })
}

/// Soft-decision search for `budget` queries with update parameter `beta`
/// against a simulated `truth` flipping with probability `alpha`. `modified`
/// selects the randomized 1-neighbor query rule. Writes the posterior mode.
#[no_mangle]
pub unsafe extern "C" fn gbs_run_sgbs(
    space: *const GbsSpace,
    truth: usize,
    alpha: f64,
    beta: f64,
    budget: usize,
    modified: bool,
    seed: u64,
    trial: u64,
    outcome: *mut usize,
) -> GbsStatus {
    guard(|| {
        let s = &deref(space, "space")?.inner;
        let mut oracle = simulated(s, truth, alpha, seed, trial)?;
        let pairs;
        let rule = if modified {
            pairs = NeighborGraph::new(s).one_neighbor_pairs();
            QueryRule::Modified { one_neighbors: &pairs }
        } else {
            QueryRule::Plain
        };
        let mut rng = stream(seed, trial, Purpose::Algorithm);
        let (_, h) = search::run_sgbs(s, &mut oracle, beta, budget, rule, &mut rng)?;
        write(outcome, h, "outcome")
    })
}

/// Uniform posterior over `n` hypotheses.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_uniform(n: usize, out: *mut *mut GbsPosterior) -> GbsStatus {
    guard(|| {
        if n == 0 {
            return Err(Failure::invalid("posterior needs at least one hypothesis"));
        }
        write(out, Box::into_raw(Box::new(GbsPosterior { inner: Posterior::uniform(n) })), "out")
    })
}

/// Posterior proportional to `n` nonnegative weights.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_from_weights(weights: *const f64, n: usize, out: *mut *mut GbsPosterior) -> GbsStatus {
    guard(|| {
        let inner = Posterior::from_weights(slice(weights, n, "weights")?)?;
        write(out, Box::into_raw(Box::new(GbsPosterior { inner })), "out")
    })
}

/// Releases a posterior. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_free(posterior: *mut GbsPosterior) {
    if !posterior.is_null() {
        drop(Box::from_raw(posterior));
    }
}

/// Multiplicative update after observing `label` (+1 or -1) on `cell`.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_update(
    posterior: *mut GbsPosterior,
    space: *const GbsSpace,
    cell: usize,
    label: i8,
    beta: f64,
) -> GbsStatus {
    guard(|| {
        let p = &mut deref_mut(posterior, "posterior")?.inner;
        let s = &deref(space, "space")?.inner;
        if p.len() != s.n_hypotheses() || cell >= s.n_cells() {
            return Err(Failure::invalid("posterior size or cell does not match the space"));
        }
        Ok(p.update(s, cell, self::label(label)?, beta)?)
    })
}

/// Copies the probabilities into `out`, which must hold `len` doubles with
/// `len` equal to the number of hypotheses.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_probs(posterior: *const GbsPosterior, out: *mut f64, len: usize) -> GbsStatus {
    guard(|| {
        let p = &deref(posterior, "posterior")?.inner;
        if len != p.len() {
            return Err(Failure::invalid(format!("buffer holds {len} values, posterior has {}", p.len())));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        ptr::copy_nonoverlapping(p.probs().as_ptr(), out, len);
        Ok(())
    })
}

/// `(1 - p(truth)) / p(truth)`.
#[no_mangle]
pub unsafe extern "C" fn gbs_posterior_cn(posterior: *const GbsPosterior, truth: usize, out: *mut f64) -> GbsStatus {
    guard(|| {
        let p = &deref(posterior, "posterior")?.inner;
        if truth >= p.len() {
            return Err(Failure::invalid(format!("truth {truth} out of range for {} hypotheses", p.len())));
        }
        write(out, p.cn(truth), "out")
    })
}

//! C ABI over `empower-core`.
//!
//! Objects are opaque handles created by `empower_*_new`-style functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`EmpowerStatus`]; on failure [`empower_last_error`] describes the cause
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use empower_core::capacity::{channel_capacity, Channel, InnerSettings};
use empower_core::gridworld::GridWorld;
use empower_core::{iteration_bound, solve, Error, Mdp, SolveResult, SolveSettings, SolverMode, TradeoffConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpowerStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMdp = 3,
    Layout = 4,
    Io = 5,
    Parse = 6,
    NotConverged = 7,
    Shape = 8,
    Domain = 9,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpowerMode {
    EmpoweredFull = 0,
    Classical = 1,
    SoftFixedPrior = 2,
    EntropyUniform = 3,
}

/// Maps a raw [`EmpowerMode`] value; C callers may pass anything.
fn mode_of(raw: u32) -> Result<SolverMode, EmpowerStatus> {
    Ok(match raw {
        0 => SolverMode::EmpoweredFull,
        1 => SolverMode::Classical,
        2 => SolverMode::SoftFixedPrior,
        3 => SolverMode::EntropyUniform,
        other => return Err(fail(EmpowerStatus::InvalidArgument, format!("unknown mode {other}"))),
    })
}

/// Opaque MDP handle.
pub struct EmpowerMdp {
    inner: Mdp,
}

/// Opaque solve result handle.
pub struct EmpowerResult {
    inner: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EmpowerStatus {
    match err {
        Error::InvalidMdp(_) | Error::InconsistentPair { .. } => EmpowerStatus::InvalidMdp,
        Error::Layout { .. } => EmpowerStatus::Layout,
        Error::Io { .. } => EmpowerStatus::Io,
        Error::Parse { .. } => EmpowerStatus::Parse,
        Error::InnerNotConverged { .. } => EmpowerStatus::NotConverged,
        Error::Shape { .. } => EmpowerStatus::Shape,
        Error::Domain { .. } => EmpowerStatus::Domain,
        _ => EmpowerStatus::InvalidArgument,
    }
}

fn fail(status: EmpowerStatus, message: impl Into<String>) -> EmpowerStatus {
    set_error(message.into());
    status
}

/// Runs `body`, mapping errors and panics onto status codes.
fn guard<F>(body: F) -> EmpowerStatus
where
    F: FnOnce() -> Result<(), EmpowerStatus>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EmpowerStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(EmpowerStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, EmpowerStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), EmpowerStatus> {
    if p.is_null() {
        Err(fail(EmpowerStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], EmpowerStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, EmpowerStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EmpowerStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), EmpowerStatus> {
    non_null(out, "out")?;
    if len < src.len() {
        return Err(fail(
            EmpowerStatus::Shape,
            format!("output buffer holds {len} values, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn emit<T>(value: T, out: *mut *mut T) -> Result<(), EmpowerStatus> {
    non_null(out, "out")?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message describing why the most recent call on this thread failed, or
/// null after a successful call. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn empower_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn empower_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds an MDP from dense row-major tensors: `transition` in `(s, a, s')`
/// order, `reward` in `(s, a)` order, `terminal` as 0/1 bytes.
///
/// # Safety
/// Each pointer must reference at least the stated number of elements and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_new(
    n_states: usize,
    n_actions: usize,
    transition: *const f64,
    reward: *const f64,
    terminal: *const u8,
    discount: f64,
    out: *mut *mut EmpowerMdp,
) -> EmpowerStatus {
    guard(|| {
        let len = n_states
            .checked_mul(n_actions)
            .and_then(|n| n.checked_mul(n_states))
            .ok_or_else(|| fail(EmpowerStatus::InvalidArgument, "dimensions overflow"))?;
        let t = slice(transition, len, "transition")?;
        let r = slice(reward, n_states * n_actions, "reward")?;
        let term = slice(terminal, n_states, "terminal")?;
        let mdp = lift(Mdp::new(
            n_states,
            n_actions,
            t.to_vec(),
            r.to_vec(),
            term.iter().map(|&b| b != 0).collect(),
            discount,
        ))?;
        emit(EmpowerMdp { inner: mdp }, out)
    })
}

/// Loads an MDP JSON document.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_load(path: *const c_char, out: *mut *mut EmpowerMdp) -> EmpowerStatus {
    guard(|| {
        let path = string(path, "path")?;
        let mdp = lift(Mdp::load(Path::new(path)))?;
        emit(EmpowerMdp { inner: mdp }, out)
    })
}

/// Builds a built-in grid world (`"grid-a"` or `"grid-b"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_builtin(name: *const c_char, out: *mut *mut EmpowerMdp) -> EmpowerStatus {
    guard(|| {
        let name = string(name, "name")?;
        let world = lift(GridWorld::builtin(name))?;
        emit(EmpowerMdp { inner: world.mdp }, out)
    })
}

/// # Safety
/// `mdp` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_n_states(mdp: *const EmpowerMdp) -> usize {
    mdp.as_ref().map_or(0, |m| m.inner.n_states())
}

/// # Safety
/// `mdp` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_n_actions(mdp: *const EmpowerMdp) -> usize {
    mdp.as_ref().map_or(0, |m| m.inner.n_actions())
}

/// # Safety
/// `mdp` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn empower_mdp_free(mdp: *mut EmpowerMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Solves `mdp` for the given tradeoff; `mode` is an [`EmpowerMode`] value.
/// `β = 0` selects classical value
/// iteration whatever `mode` says. A solve that stops at the iteration cap
/// still produces a result; check [`empower_result_converged`].
///
/// # Safety
/// `mdp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn empower_solve(
    mdp: *const EmpowerMdp,
    alpha: f64,
    beta: f64,
    mode: u32,
    outer_tolerance: f64,
    inner_tolerance: f64,
    out: *mut *mut EmpowerResult,
) -> EmpowerStatus {
    guard(|| {
        non_null(mdp, "mdp")?;
        let mdp = &(*mdp).inner;
        let mode = mode_of(mode)?;
        let config = if beta == 0.0 || mode == SolverMode::Classical {
            TradeoffConfig::classical(alpha)
        } else {
            TradeoffConfig::new(alpha, beta, mode)
        };
        let config = lift(config)?;
        let settings = SolveSettings::with_tolerances(outer_tolerance, inner_tolerance);
        let result = lift(solve(mdp, &config, &settings))?;
        emit(EmpowerResult { inner: result }, out)
    })
}

/// Copies `V*` into `out`, which must hold `n_states` values.
///
/// # Safety
/// `result` must be a live handle and `out` must reference `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn empower_result_values(result: *const EmpowerResult, out: *mut f64, len: usize) -> EmpowerStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out(&(*result).inner.values, out, len)
    })
}

/// Copies `π*(a|s)` row-major into `out` (`n_states · n_actions` values).
///
/// # Safety
/// `result` must be a live handle and `out` must reference `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn empower_result_policy(result: *const EmpowerResult, out: *mut f64, len: usize) -> EmpowerStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out((*result).inner.policy.probs(), out, len)
    })
}

/// Copies the per-sweep residuals into `out`, which must hold
/// [`empower_result_outer_iterations`] values.
///
/// # Safety
/// `result` must be a live handle and `out` must reference `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn empower_result_residuals(result: *const EmpowerResult, out: *mut f64, len: usize) -> EmpowerStatus {
    guard(|| {
        non_null(result, "result")?;
        copy_out(&(*result).inner.report.residual_per_iteration, out, len)
    })
}

/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn empower_result_outer_iterations(result: *const EmpowerResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.report.outer_iterations)
}

/// 1 if the outer loop met its tolerance, 0 otherwise (or for null).
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn empower_result_converged(result: *const EmpowerResult) -> i32 {
    result.as_ref().map_or(0, |r| r.inner.report.converged as i32)
}

/// # Safety
/// `result` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn empower_result_free(result: *mut EmpowerResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Capacity in nats of the channel `probs` (row-major `(input, output)`).
/// When `input_dist` is non-null it receives the optimal input distribution
/// (`n_inputs` values).
///
/// # Safety
/// `probs` must reference `n_inputs · n_outputs` doubles, `capacity` must be
/// writable, and `input_dist` must be null or reference `n_inputs` doubles.
#[no_mangle]
pub unsafe extern "C" fn empower_channel_capacity(
    probs: *const f64,
    n_inputs: usize,
    n_outputs: usize,
    tolerance: f64,
    capacity: *mut f64,
    input_dist: *mut f64,
) -> EmpowerStatus {
    guard(|| {
        let len = n_inputs
            .checked_mul(n_outputs)
            .ok_or_else(|| fail(EmpowerStatus::InvalidArgument, "dimensions overflow"))?;
        let p = slice(probs, len, "probs")?;
        non_null(capacity, "capacity")?;
        let channel = lift(Channel::new(n_inputs, n_outputs, p.to_vec()))?;
        let settings = lift(InnerSettings::new(tolerance, InnerSettings::default().max_iterations))?;
        let res = lift(channel_capacity(&channel, &settings))?;
        *capacity = res.capacity;
        if !input_dist.is_null() {
            copy_out(&res.input_dist, input_dist, n_inputs)?;
        }
        if res.converged() {
            Ok(())
        } else {
            Err(fail(EmpowerStatus::NotConverged, "capacity iteration hit its cap"))
        }
    })
}

/// Outer sweeps guaranteed to bring values within `epsilon` of the optimum.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn empower_iteration_bound(epsilon: f64, gamma: f64, eta: f64, out: *mut u64) -> EmpowerStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(iteration_bound(epsilon, gamma, eta))?;
        Ok(())
    })
}

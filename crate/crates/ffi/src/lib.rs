//! C ABI for the MADD metric, the fairness post-processing map and the lambda
//! sweep.
//!
//! Every fallible function returns a [`MaddStatus`]. On failure a message is
//! available from [`madd_last_error`] on the same thread. Handles are opaque
//! and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use madd::objective::even_grid;
use madd::{
    DensityVector, FipBasis, Group, MaddError, ObjectiveConfig, ScoredRecord, SimulationSpec, Simulator, SweepResult,
};

/// Status values. Error codes from 10 upward match the `madd` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaddStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    Panic = 3,
    EmptyPopulation = 10,
    InvalidProbability = 11,
    InvalidBinCount = 12,
    BinCountMismatch = 13,
    InvalidBandwidth = 14,
    InvalidDensity = 15,
    InvalidQuantile = 16,
    EmptyGroup = 17,
    InvalidLambda = 18,
    LengthMismatch = 19,
    MissingLabels = 20,
    InvalidConfig = 21,
    EncodingError = 22,
    InvalidRatios = 23,
    TrainingDiverged = 24,
    NotTrained = 25,
    Parse = 26,
    Io = 27,
    Csv = 28,
    Json = 29,
}

impl MaddStatus {
    fn from_code(code: i32) -> Self {
        use MaddStatus::*;
        [
            EmptyPopulation,
            InvalidProbability,
            InvalidBinCount,
            BinCountMismatch,
            InvalidBandwidth,
            InvalidDensity,
            InvalidQuantile,
            EmptyGroup,
            InvalidLambda,
            LengthMismatch,
            MissingLabels,
            InvalidConfig,
            EncodingError,
            InvalidRatios,
            TrainingDiverged,
            NotTrained,
            Parse,
            Io,
            Csv,
            Json,
        ]
        .into_iter()
        .find(|s| *s as i32 == code)
        .unwrap_or(Panic)
    }
}

/// One row of a sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaddSweepRow {
    pub lambda: f64,
    pub accuracy_loss: f64,
    pub fairness_loss: f64,
    pub total_loss: f64,
}

/// Precomputed remapping for a batch of scored records.
pub struct MaddFip {
    basis: FipBasis,
}

/// Result of a lambda sweep.
pub struct MaddSweep {
    result: SweepResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Core(MaddError),
    Status(MaddStatus, &'static str),
}

impl From<MaddError> for Failure {
    fn from(e: MaddError) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MaddStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MaddStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(&format!("{}: {e}", e.kind()));
            MaddStatus::from_code(e.code())
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            MaddStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Failure> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Failure::Status(MaddStatus::NullPointer, "null input buffer"))
    } else {
        Ok(slice::from_raw_parts(p, n))
    }
}

unsafe fn output<'a, T>(p: *mut T, n: usize) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        Ok(&mut [])
    } else if p.is_null() {
        Err(Failure::Status(MaddStatus::NullPointer, "null output buffer"))
    } else {
        Ok(slice::from_raw_parts_mut(p, n))
    }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Status(MaddStatus::NullPointer, "null handle"))
}

fn out_ptr<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Status(MaddStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

fn group(g: u8) -> Result<Group, Failure> {
    Ok(Group::from_u8(g)?)
}

fn records(probas: &[f64], groups: &[u8], labels: Option<&[u8]>) -> Result<Vec<ScoredRecord>, Failure> {
    probas
        .iter()
        .zip(groups)
        .enumerate()
        .map(|(i, (&p, &g))| {
            let y = labels.map(|l| l[i] != 0);
            Ok(ScoredRecord::new(p, group(g)?, y)?)
        })
        .collect()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn madd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn madd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// MADD between the histograms of two probability samples with `m` bins.
///
/// # Safety
/// `p0`/`p1` must point to `n0`/`n1` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn madd_metric(
    p0: *const f64,
    n0: usize,
    p1: *const f64,
    n1: usize,
    m: usize,
    out: *mut f64,
) -> MaddStatus {
    guard(|| {
        out_ptr(out)?;
        let d0 = DensityVector::build(input(p0, n0)?, m)?;
        let d1 = DensityVector::build(input(p1, n1)?, m)?;
        *out = madd::madd(&d0, &d1)?;
        Ok(())
    })
}

/// Builds a remapping handle from `n` probabilities and group ids (0 or 1).
///
/// # Safety
/// `probas` and `groups` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn madd_fip_new(
    probas: *const f64,
    groups: *const u8,
    n: usize,
    m: usize,
    out: *mut *mut MaddFip,
) -> MaddStatus {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let recs = records(input(probas, n)?, input(groups, n)?, None)?;
        let basis = FipBasis::new(&recs, m)?;
        *out = Box::into_raw(Box::new(MaddFip { basis }));
        Ok(())
    })
}

/// Number of records held by the handle; 0 for a null handle.
///
/// # Safety
/// `fip` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn madd_fip_len(fip: *const MaddFip) -> usize {
    fip.as_ref().map_or(0, |f| f.basis.len())
}

/// Writes the remapped probabilities of the handle's records, in input order.
///
/// # Safety
/// `fip` must be a live handle and `out` must hold `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn madd_fip_apply(fip: *const MaddFip, lambda: f64, out: *mut f64, out_len: usize) -> MaddStatus {
    guard(|| {
        let f = handle(fip)?;
        if out_len < f.basis.len() {
            return Err(Failure::Status(MaddStatus::BufferTooSmall, "output buffer shorter than record count"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MaddError::InvalidLambda(lambda).into());
        }
        let values = f.basis.at(lambda)?.apply();
        output(out, values.len())?.copy_from_slice(&values);
        Ok(())
    })
}

/// Remaps a single probability as a member of `group`.
///
/// # Safety
/// `fip` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn madd_fip_map_value(
    fip: *const MaddFip,
    lambda: f64,
    proba: f64,
    group_id: u8,
    out: *mut f64,
) -> MaddStatus {
    guard(|| {
        let f = handle(fip)?;
        out_ptr(out)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MaddError::InvalidLambda(lambda).into());
        }
        *out = f.basis.at(lambda)?.map_value(proba, group(group_id)?)?;
        Ok(())
    })
}

/// # Safety
/// `fip` must be null or a handle from [`madd_fip_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn madd_fip_free(fip: *mut MaddFip) {
    if !fip.is_null() {
        drop(Box::from_raw(fip));
    }
}

/// Sweeps `grid_size` evenly spaced lambdas over `[0, 1]`. Labels are 0 or
/// nonzero.
///
/// # Safety
/// `probas`, `groups` and `labels` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_new(
    probas: *const f64,
    groups: *const u8,
    labels: *const u8,
    n: usize,
    theta: f64,
    threshold: f64,
    m: usize,
    grid_size: usize,
    out: *mut *mut MaddSweep,
) -> MaddStatus {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let recs = records(input(probas, n)?, input(groups, n)?, Some(input(labels, n)?))?;
        let config = ObjectiveConfig { theta, threshold, m, lambda_grid: even_grid(grid_size) };
        let result = madd::sweep(&recs, &config)?;
        *out = Box::into_raw(Box::new(MaddSweep { result }));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_len(sweep: *const MaddSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.result.rows.len())
}

/// # Safety
/// `sweep` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_row(sweep: *const MaddSweep, index: usize, out: *mut MaddSweepRow) -> MaddStatus {
    guard(|| {
        let s = handle(sweep)?;
        out_ptr(out)?;
        let r =
            s.result.rows.get(index).ok_or(Failure::Status(MaddStatus::BufferTooSmall, "row index out of range"))?;
        *out = MaddSweepRow {
            lambda: r.lambda,
            accuracy_loss: r.accuracy_loss,
            fairness_loss: r.fairness_loss,
            total_loss: r.total_loss,
        };
        Ok(())
    })
}

/// Minimizing lambda (largest on ties); NaN for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_lambda_star(sweep: *const MaddSweep) -> f64 {
    sweep.as_ref().map_or(f64::NAN, |s| s.result.lambda_star)
}

/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_min_total_loss(sweep: *const MaddSweep) -> f64 {
    sweep.as_ref().map_or(f64::NAN, |s| s.result.min_total_loss)
}

/// # Safety
/// `sweep` must be null or a handle from [`madd_sweep_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn madd_sweep_free(sweep: *mut MaddSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Draws the default two-group simulation with the given sizes and seed.
/// Buffers must hold `n_g0 + n_g1` elements; group 0 records come first.
///
/// # Safety
/// All output pointers must hold `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn madd_simulate(
    n_g0: usize,
    n_g1: usize,
    seed: u64,
    probas: *mut f64,
    groups: *mut u8,
    labels: *mut u8,
    len: usize,
) -> MaddStatus {
    guard(|| {
        let total = n_g0.checked_add(n_g1).ok_or(Failure::Status(MaddStatus::BufferTooSmall, "size overflow"))?;
        if len < total {
            return Err(Failure::Status(MaddStatus::BufferTooSmall, "output buffers shorter than n_g0 + n_g1"));
        }
        let sim = Simulator::new(SimulationSpec { n_g0, n_g1, seed, ..Default::default() })?;
        let (p, g, y) = (output(probas, total)?, output(groups, total)?, output(labels, total)?);
        for (i, r) in sim.sample().iter().enumerate() {
            p[i] = r.proba();
            g[i] = r.group.as_u8();
            y[i] = u8::from(r.label.unwrap_or(false));
        }
        Ok(())
    })
}

/// Human-readable name of a status value as a static string.
#[no_mangle]
pub extern "C" fn madd_status_name(status: MaddStatus) -> *const c_char {
    let name: &'static CStr = match status {
        MaddStatus::Ok => c"Ok",
        MaddStatus::NullPointer => c"NullPointer",
        MaddStatus::BufferTooSmall => c"BufferTooSmall",
        MaddStatus::Panic => c"Panic",
        MaddStatus::EmptyPopulation => c"EmptyPopulation",
        MaddStatus::InvalidProbability => c"InvalidProbability",
        MaddStatus::InvalidBinCount => c"InvalidBinCount",
        MaddStatus::BinCountMismatch => c"BinCountMismatch",
        MaddStatus::InvalidBandwidth => c"InvalidBandwidth",
        MaddStatus::InvalidDensity => c"InvalidDensity",
        MaddStatus::InvalidQuantile => c"InvalidQuantile",
        MaddStatus::EmptyGroup => c"EmptyGroup",
        MaddStatus::InvalidLambda => c"InvalidLambda",
        MaddStatus::LengthMismatch => c"LengthMismatch",
        MaddStatus::MissingLabels => c"MissingLabels",
        MaddStatus::InvalidConfig => c"InvalidConfig",
        MaddStatus::EncodingError => c"EncodingError",
        MaddStatus::InvalidRatios => c"InvalidRatios",
        MaddStatus::TrainingDiverged => c"TrainingDiverged",
        MaddStatus::NotTrained => c"NotTrained",
        MaddStatus::Parse => c"Parse",
        MaddStatus::Io => c"Io",
        MaddStatus::Csv => c"Csv",
        MaddStatus::Json => c"Json",
    };
    name.as_ptr()
}

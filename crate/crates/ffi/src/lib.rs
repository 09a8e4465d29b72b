//! C ABI over the `qliang` crate.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `qliang_*_new` style constructor and released with the matching
//! `qliang_*_free`. Fallible calls return a [`QliangStatus`]; on failure
//! [`qliang_last_error_message`] describes the error. Strings are UTF-8 and
//! NUL-terminated. Handles are not synchronized: use one handle from one
//! thread at a time.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use qliang::flow::{FlowEngine, FlowRequest, FlowSeries, TimeGrid};
use qliang::hamiltonians::{FrozenSet, HamiltonianSpec};
use qliang::output::write_outputs;
use qliang::qdm::{partial_trace, von_neumann_entropy, CMatrix, DensityMatrix, SiteRegistry};
use qliang::scenario::{bundled, evaluate, ScenarioConfig, ScenarioResult};
use qliang::Error;

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QliangStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The total Hilbert-space dimension exceeds the cap (`QLIANG_DIM_CAP`).
    DimensionCap = 3,
    InvalidState = 4,
    Config = 5,
    Numerical = 6,
    Io = 7,
    InvalidUtf8 = 8,
    OutOfRange = 9,
    BufferTooSmall = 10,
    Panic = 255,
}

/// Column selector for [`qliang_series_copy`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QliangColumn {
    Time = 0,
    /// Target entropy under the full dynamics, bits.
    STarget = 1,
    /// Target entropy with the sources frozen, bits.
    STargetFrozen = 2,
    /// Cumulative flow, bits.
    Cumulative = 3,
    /// Flow rate, bits per unit time.
    Rate = 4,
}

impl QliangColumn {
    fn from_raw(v: c_int) -> Option<Self> {
        Some(match v {
            0 => Self::Time,
            1 => Self::STarget,
            2 => Self::STargetFrozen,
            3 => Self::Cumulative,
            4 => Self::Rate,
            _ => return None,
        })
    }
}

/// Network Hamiltonian: XY couplings and z fields over labelled sites.
pub struct QliangHamiltonian {
    spec: HamiltonianSpec,
}

/// Density matrix on the sites of a Hamiltonian.
pub struct QliangState {
    rho: DensityMatrix,
}

/// One flow evaluated on a time grid.
pub struct QliangSeries {
    series: FlowSeries,
    label: CString,
    variant: CString,
}

/// Parsed and validated scenario file.
pub struct QliangScenario {
    cfg: ScenarioConfig,
}

/// Every flow of an evaluated scenario, across variants.
pub struct QliangResult {
    result: ScenarioResult,
    series: Vec<QliangSeries>,
}

struct Failure {
    status: QliangStatus,
    message: String,
}

impl Failure {
    fn new(status: QliangStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionCap { .. } => QliangStatus::DimensionCap,
            Error::NonHermitian(_) | Error::NonUnitary(_) | Error::InvalidState(_) => QliangStatus::InvalidState,
            Error::Config(_) | Error::Csv(_) => QliangStatus::Config,
            Error::Convergence(_) | Error::Stability(_) => QliangStatus::Numerical,
            Error::Io(_) => QliangStatus::Io,
            _ => QliangStatus::InvalidArgument,
        };
        Self::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QliangStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            QliangStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("internal panic");
            QliangStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::new(QliangStatus::NullPointer, format!("`{what}` is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(QliangStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn strings(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<String>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts(p, n).iter().map(|&s| string(s, what).map(str::to_owned)).collect()
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

fn wrap_series(series: FlowSeries, variant: Option<&str>) -> QliangSeries {
    QliangSeries { label: c_string(&series.label), variant: c_string(variant.unwrap_or("")), series }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn qliang_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next `qliang_*` call on this thread.
#[no_mangle]
pub extern "C" fn qliang_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a Hamiltonian with no terms over `n` qubit sites; the first label
/// is the most significant tensor factor.
///
/// # Safety
/// `labels` points to `n` valid C strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_hamiltonian_new(
    labels: *const *const c_char,
    n: usize,
    out: *mut *mut QliangHamiltonian,
) -> QliangStatus {
    guard(|| {
        let labels = strings(labels, n, "labels")?;
        let registry = SiteRegistry::qubits(labels)?;
        emit(out, QliangHamiltonian { spec: HamiltonianSpec::new(registry) })
    })
}

/// Adds the XY exchange `eta (s+_i s-_j + s-_i s+_j)`.
///
/// # Safety
/// `h` is a live Hamiltonian handle; `i` and `j` are valid C strings.
#[no_mangle]
pub unsafe extern "C" fn qliang_hamiltonian_add_coupling(
    h: *mut QliangHamiltonian,
    i: *const c_char,
    j: *const c_char,
    eta: f64,
) -> QliangStatus {
    guard(|| {
        let h = deref_mut(h, "h")?;
        h.spec = h.spec.add_coupling(string(i, "i")?, string(j, "j")?, eta)?;
        Ok(())
    })
}

/// Adds the local field `b sz_site`.
///
/// # Safety
/// `h` is a live Hamiltonian handle; `site` is a valid C string.
#[no_mangle]
pub unsafe extern "C" fn qliang_hamiltonian_add_field_z(
    h: *mut QliangHamiltonian,
    site: *const c_char,
    b: f64,
) -> QliangStatus {
    guard(|| {
        let h = deref_mut(h, "h")?;
        h.spec = h.spec.add_field_z(string(site, "site")?, b)?;
        Ok(())
    })
}

/// Hilbert-space dimension, or 0 for NULL.
///
/// # Safety
/// `h` is NULL or a live Hamiltonian handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_hamiltonian_dim(h: *const QliangHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.spec.registry().dim())
}

/// # Safety
/// `h` is NULL or a handle from [`qliang_hamiltonian_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qliang_hamiltonian_free(h: *mut QliangHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Density matrix from row-major real and imaginary parts, `dim * dim`
/// entries each; `im` may be NULL for a real matrix.
///
/// # Safety
/// `h` is a live Hamiltonian handle; `re` (and `im` unless NULL) point to
/// `dim * dim` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_state_new(
    h: *const QliangHamiltonian,
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut QliangState,
) -> QliangStatus {
    guard(|| {
        let h = deref(h, "h")?;
        let registry = h.spec.registry().clone();
        if dim != registry.dim() {
            return Err(Failure::new(
                QliangStatus::InvalidArgument,
                format!("dim {dim} does not match the Hamiltonian dimension {}", registry.dim()),
            ));
        }
        let re = slice(re, dim * dim, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, dim * dim, "im")?) };
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            let k = r * dim + c;
            Complex64::new(re[k], im.map_or(0.0, |im| im[k]))
        });
        emit(out, QliangState { rho: DensityMatrix::new(registry, m)? })
    })
}

/// Product of diagonal qubit states, `diag(1 - p, p)` per site in
/// registry order, where `p` is the excited-state population.
///
/// # Safety
/// `h` is a live Hamiltonian handle; `excited` points to `n` doubles;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_state_product(
    h: *const QliangHamiltonian,
    excited: *const f64,
    n: usize,
    out: *mut *mut QliangState,
) -> QliangStatus {
    guard(|| {
        let h = deref(h, "h")?;
        let p = slice(excited, n, "excited")?;
        let factors: Vec<CMatrix> = p
            .iter()
            .map(|&p| {
                CMatrix::from_fn(2, 2, |r, c| match (r, c) {
                    (0, 0) => Complex64::new(1.0 - p, 0.0),
                    (1, 1) => Complex64::new(p, 0.0),
                    _ => Complex64::new(0.0, 0.0),
                })
            })
            .collect();
        emit(out, QliangState { rho: DensityMatrix::product(h.spec.registry().clone(), &factors)? })
    })
}

/// Von Neumann entropy in bits of the marginal on `keep`; `n = 0` means
/// the whole state.
///
/// # Safety
/// `state` is a live state handle; `keep` points to `n` valid C strings;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_state_entropy(
    state: *const QliangState,
    keep: *const *const c_char,
    n: usize,
    out: *mut f64,
) -> QliangStatus {
    guard(|| {
        let state = deref(state, "state")?;
        let keep = strings(keep, n, "keep")?;
        let s = if keep.is_empty() {
            von_neumann_entropy(&state.rho)?
        } else {
            von_neumann_entropy(&partial_trace(&state.rho, &keep)?)?
        };
        let out = deref_mut(out, "out")?;
        *out = s;
        Ok(())
    })
}

/// # Safety
/// `state` is NULL or a live state handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qliang_state_free(state: *mut QliangState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Cumulative flow from `sources` to `target` on the grid
/// `t_k = k t_max / steps`, `k = 0..=steps`.
///
/// # Safety
/// `h` and `state` are live handles over the same sites; `sources` and
/// `target` point to `n_sources` and `n_target` valid C strings; `out` is
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_cumulative_flow(
    h: *const QliangHamiltonian,
    state: *const QliangState,
    sources: *const *const c_char,
    n_sources: usize,
    target: *const *const c_char,
    n_target: usize,
    t_max: f64,
    steps: usize,
    out: *mut *mut QliangSeries,
) -> QliangStatus {
    guard(|| {
        let (h, state) = (deref(h, "h")?, deref(state, "state")?);
        let sources = FrozenSet::new(strings(sources, n_sources, "sources")?);
        let target = strings(target, n_target, "target")?;
        let grid = TimeGrid::new(t_max, steps)?;
        let req = FlowRequest::new(h.spec.clone(), state.rho.clone(), target, sources, grid)?;
        let series = FlowEngine::new().cumulative_flow(&req)?;
        emit(out, wrap_series(series, None))
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `series` is NULL or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_series_len(series: *const QliangSeries) -> usize {
    series.as_ref().map_or(0, |s| s.series.len())
}

/// Flow label such as `"AB->C"`; owned by the series.
///
/// # Safety
/// `series` is NULL or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_series_label(series: *const QliangSeries) -> *const c_char {
    series.as_ref().map_or(ptr::null(), |s| s.label.as_ptr())
}

/// Scenario variant name, empty for the base configuration; owned by the
/// series.
///
/// # Safety
/// `series` is NULL or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_series_variant(series: *const QliangSeries) -> *const c_char {
    series.as_ref().map_or(ptr::null(), |s| s.variant.as_ptr())
}

/// Copies one column (a [`QliangColumn`] value) into `buf`, which must hold
/// at least [`qliang_series_len`] doubles.
///
/// # Safety
/// `series` is a live series handle; `buf` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qliang_series_copy(
    series: *const QliangSeries,
    column: c_int,
    buf: *mut f64,
    len: usize,
) -> QliangStatus {
    guard(|| {
        let s = &deref(series, "series")?.series;
        let col = QliangColumn::from_raw(column)
            .ok_or_else(|| Failure::new(QliangStatus::OutOfRange, format!("unknown column {column}")))?;
        let values = match col {
            QliangColumn::Time => &s.times,
            QliangColumn::STarget => &s.s_target,
            QliangColumn::STargetFrozen => &s.s_target_frozen,
            QliangColumn::Cumulative => &s.cumulative,
            QliangColumn::Rate => &s.rate,
        };
        if len < values.len() {
            return Err(Failure::new(
                QliangStatus::BufferTooSmall,
                format!("buffer holds {len} values, series has {}", values.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// # Safety
/// `series` is NULL or a handle from [`qliang_cumulative_flow`], not yet
/// freed. Series borrowed from a result must not be passed here.
#[no_mangle]
pub unsafe extern "C" fn qliang_series_free(series: *mut QliangSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Parses and validates a scenario from JSON text.
///
/// # Safety
/// `json` is a valid C string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_from_json(json: *const c_char, out: *mut *mut QliangScenario) -> QliangStatus {
    guard(|| emit(out, QliangScenario { cfg: ScenarioConfig::from_json(string(json, "json")?)? }))
}

/// Loads and validates a scenario file.
///
/// # Safety
/// `path` is a valid C string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_load(path: *const c_char, out: *mut *mut QliangScenario) -> QliangStatus {
    guard(|| emit(out, QliangScenario { cfg: ScenarioConfig::load(string(path, "path")?)? }))
}

/// One of the scenarios shipped with the library, by name (e.g. `"fig1a"`).
///
/// # Safety
/// `name` is a valid C string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_bundled(name: *const c_char, out: *mut *mut QliangScenario) -> QliangStatus {
    guard(|| emit(out, QliangScenario { cfg: bundled(string(name, "name")?)? }))
}

/// Evaluates every flow of every variant.
///
/// # Safety
/// `scenario` is a live scenario handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_evaluate(
    scenario: *const QliangScenario,
    out: *mut *mut QliangResult,
) -> QliangStatus {
    guard(|| {
        let result = evaluate(&deref(scenario, "scenario")?.cfg)?;
        let series = result
            .variants
            .iter()
            .flat_map(|v| v.series.iter().map(|s| wrap_series(s.clone(), v.variant.as_deref())))
            .collect();
        emit(out, QliangResult { result, series })
    })
}

/// Writes the CSV (and, if the scenario asks for it, SVG) files into `dir`.
///
/// # Safety
/// `scenario` and `result` are live handles, `result` evaluated from
/// `scenario`; `dir` is a valid C string.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_write_outputs(
    scenario: *const QliangScenario,
    result: *const QliangResult,
    dir: *const c_char,
) -> QliangStatus {
    guard(|| {
        let (scenario, result) = (deref(scenario, "scenario")?, deref(result, "result")?);
        write_outputs(&scenario.cfg, &result.result, Path::new(string(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `scenario` is NULL or a live scenario handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qliang_scenario_free(scenario: *mut QliangScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of series across all variants, or 0 for NULL.
///
/// # Safety
/// `result` is NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_result_series_count(result: *const QliangResult) -> usize {
    result.as_ref().map_or(0, |r| r.series.len())
}

/// Borrowed series `index`, or NULL when out of range. Valid until the
/// result is freed; do not free it separately.
///
/// # Safety
/// `result` is NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qliang_result_series(result: *const QliangResult, index: usize) -> *const QliangSeries {
    result.as_ref().and_then(|r| r.series.get(index)).map_or(ptr::null(), |s| s as *const QliangSeries)
}

/// # Safety
/// `result` is NULL or a live result handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qliang_result_free(result: *mut QliangResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

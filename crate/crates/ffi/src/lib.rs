//! C ABI over `gsdist`.
//!
//! Every fallible call returns a [`GsdStatus`]; on failure the message is
//! available from [`gsd_last_error`] until the next call on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Strings returned through `char **` are owned by the caller and released
//! with [`gsd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gsdist::cli::{build_schedule, exit_code, BuildConfig, Protocol, EXIT_USAGE, EXIT_VERIFY};
use gsdist::graph_state::{load_graph, GraphFamily, LabeledGraph};
use gsdist::noise_mc::{estimate_fidelity, NoiseModel};
use gsdist::protocol::{ResourceReport, Schedule};
use gsdist::sc_solver::{solve, Method, ScSystem};
use gsdist::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsdStatus {
    GsdOk = 0,
    GsdErrNull = 1,
    GsdErrUtf8 = 2,
    GsdErrInvalid = 3,
    GsdErrVerify = 4,
    GsdErrIo = 5,
    GsdErrInternal = 6,
    GsdErrPanic = 7,
}

pub struct GsdGraph {
    graph: LabeledGraph,
    family: Option<GraphFamily>,
}

pub struct GsdSystem {
    system: ScSystem,
}

pub struct GsdSchedule {
    schedule: Schedule,
    report: ResourceReport,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GsdResources {
    pub bell_pairs: usize,
    pub central_qubit_highwater: usize,
    pub cz_count: usize,
    pub lc_count: usize,
    pub meas_count: usize,
    pub rounds: usize,
    pub cc_bits: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsdFidelity {
    pub mean: f64,
    pub ci95_halfwidth: f64,
    pub trials: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(f: Failure) -> GsdStatus {
    match f {
        Failure::Null(what) => {
            set_error(format!("null pointer: {what}"));
            GsdStatus::GsdErrNull
        }
        Failure::Utf8 => {
            set_error("string argument is not valid UTF-8".into());
            GsdStatus::GsdErrUtf8
        }
        Failure::Lib(e) => {
            let status = match &e {
                Error::Io(_) => GsdStatus::GsdErrIo,
                _ => match exit_code(&e) {
                    EXIT_USAGE => GsdStatus::GsdErrInvalid,
                    EXIT_VERIFY => GsdStatus::GsdErrVerify,
                    _ => GsdStatus::GsdErrInternal,
                },
            };
            set_error(e.to_string());
            status
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GsdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsdStatus::GsdOk,
        Ok(Err(failure)) => status_of(failure),
        Err(_) => {
            set_error("panic inside gsdist".into());
            GsdStatus::GsdErrPanic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = CString::new(s).map_err(|_| Failure::Utf8)?.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library.
#[no_mangle]
pub extern "C" fn gsd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn gsd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load a graph from a generator string (`complete:6`, `gnp:10,0.5,3`) or
/// an edge-list file path.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsd_graph_load(spec: *const c_char, out: *mut *mut GsdGraph) -> GsdStatus {
    guard(|| {
        let (graph, family) = load_graph(str_arg(spec, "spec")?)?;
        write_out(out, GsdGraph { graph, family })
    })
}

/// Graph on `0..n` with `m` edges given as `2m` endpoints.
///
/// # Safety
/// `edges` must point to `2 * m` values (or be NULL when `m == 0`).
#[no_mangle]
pub unsafe extern "C" fn gsd_graph_from_edges(
    n: usize,
    edges: *const usize,
    m: usize,
    out: *mut *mut GsdGraph,
) -> GsdStatus {
    guard(|| {
        let flat: &[usize] = if m == 0 {
            &[]
        } else if edges.is_null() {
            return Err(Failure::Null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * m)
        };
        let pairs: Vec<(usize, usize)> = flat.chunks(2).map(|e| (e[0], e[1])).collect();
        let graph = LabeledGraph::from_edges(n, &pairs)?;
        write_out(out, GsdGraph { graph, family: None })
    })
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gsd_graph_vertex_count(g: *const GsdGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.vertex_count())
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gsd_graph_edge_count(g: *const GsdGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// # Safety
/// `g` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn gsd_graph_free(g: *mut GsdGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// SC system for `g` using `method` (`auto`, `exact`, `closed-form`,
/// `greedy`, `elimination`).
///
/// # Safety
/// `g` must be a live graph handle and `method` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gsd_solve(g: *const GsdGraph, method: *const c_char, out: *mut *mut GsdSystem) -> GsdStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let method: Method = str_arg(method, "method")?.parse()?;
        let system = solve(&g.graph, method, g.family.as_ref())?;
        write_out(out, GsdSystem { system })
    })
}

/// # Safety
/// `s` must be a live system handle.
#[no_mangle]
pub unsafe extern "C" fn gsd_system_len(s: *const GsdSystem) -> usize {
    s.as_ref().map_or(0, |s| s.system.len())
}

/// The system in its text format.
///
/// # Safety
/// `s` must be a live system handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsd_system_to_text(s: *const GsdSystem, out: *mut *mut c_char) -> GsdStatus {
    guard(|| write_string(out, ref_arg(s, "system")?.system.to_text()))
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn gsd_system_free(s: *mut GsdSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Compile a distribution schedule. `protocol` is `sc`, `sc-parallel`,
/// `factory` or `factory-parallel`; `aux == 0` selects the default
/// auxiliary count.
///
/// # Safety
/// `g` must be a live graph handle and `protocol` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gsd_schedule_build(
    g: *const GsdGraph,
    protocol: *const c_char,
    aux: usize,
    out: *mut *mut GsdSchedule,
) -> GsdStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        let protocol: Protocol = str_arg(protocol, "protocol")?.parse()?;
        let cfg = BuildConfig {
            protocol,
            aux: (aux > 0).then_some(aux),
            ..Default::default()
        };
        let (schedule, report) = build_schedule(&g.graph, g.family.as_ref(), &cfg, &mut std::io::sink())?;
        write_out(out, GsdSchedule { schedule, report })
    })
}

/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsd_schedule_resources(s: *const GsdSchedule, out: *mut GsdResources) -> GsdStatus {
    guard(|| {
        let r = ref_arg(s, "schedule")?.report;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = GsdResources {
            bell_pairs: r.bell_pairs,
            central_qubit_highwater: r.central_qubit_highwater,
            cz_count: r.cz_count,
            lc_count: r.lc_count,
            meas_count: r.meas_count,
            rounds: r.rounds,
            cc_bits: r.cc_bits,
        };
        Ok(())
    })
}

/// The schedule as CSV (`round,op_kind,qubit1,qubit2,phase_annotation`).
///
/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsd_schedule_to_csv(s: *const GsdSchedule, out: *mut *mut c_char) -> GsdStatus {
    guard(|| {
        let mut buf = Vec::new();
        ref_arg(s, "schedule")?.schedule.write_csv(&mut buf)?;
        write_string(out, String::from_utf8(buf).map_err(|_| Failure::Utf8)?)
    })
}

/// Monte Carlo fidelity; deterministic for a fixed `seed`.
///
/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gsd_schedule_fidelity(
    s: *const GsdSchedule,
    p_gate: f64,
    p_mem: f64,
    noise_on_measure: bool,
    trials: usize,
    seed: u64,
    out: *mut GsdFidelity,
) -> GsdStatus {
    guard(|| {
        let s = ref_arg(s, "schedule")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let model = NoiseModel {
            p_gate,
            p_mem,
            noise_on_measure,
        };
        model.validate()?;
        let est = estimate_fidelity(&s.schedule, &model, trials, seed)?;
        *out = GsdFidelity {
            mean: est.mean,
            ci95_halfwidth: est.ci95_halfwidth,
            trials: est.trials,
        };
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn gsd_schedule_free(s: *mut GsdSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

//! C ABI over `epiobs`.
//!
//! Every fallible call returns an [`EpiStatus`] and writes its result through
//! an out-pointer. On failure, `epi_last_error` returns a message describing
//! the most recent error on the calling thread. Handles are opaque and owned
//! by the caller, who releases them with the matching `_free` function.
//! Strings returned by the library are released with `epi_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use epiobs::generators::{gen_is_protocol, gen_knowall_protocol, gen_sa_task, DiGraph};
use epiobs::io::{self, FormatError};
use epiobs::logic::{sexp, Checker, Formulas, LogicError};
use epiobs::model::{build_input_model, product_update, ModelError, Workspace};
use epiobs::obstruction::{decide_obstruction, ObstructionError};
use epiobs::simulation::{Simulation, SimulationError};
use epiobs::{ActionModel, Mode, Relation, SimplicialModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Model = 4,
    Logic = 5,
    Simulation = 6,
    /// A synthesized obstruction failed its own verification.
    Inconsistent = 7,
    InvalidArgument = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpiMode {
    K = 0,
    D = 1,
}

impl From<EpiMode> for Mode {
    fn from(m: EpiMode) -> Mode {
        match m {
            EpiMode::K => Mode::K,
            EpiMode::D => Mode::D,
        }
    }
}

pub struct EpiModel(SimplicialModel);
pub struct EpiAction(ActionModel);
pub struct EpiRelation(Relation);

struct Error(EpiStatus, String);

impl From<FormatError> for Error {
    fn from(e: FormatError) -> Error {
        Error(EpiStatus::Parse, e.to_string())
    }
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Error {
        Error(EpiStatus::Model, e.to_string())
    }
}

impl From<LogicError> for Error {
    fn from(e: LogicError) -> Error {
        Error(EpiStatus::Logic, e.to_string())
    }
}

impl From<SimulationError> for Error {
    fn from(e: SimulationError) -> Error {
        Error(EpiStatus::Simulation, e.to_string())
    }
}

impl From<ObstructionError> for Error {
    fn from(e: ObstructionError) -> Error {
        let status = match e {
            ObstructionError::Inconsistent { .. } => EpiStatus::Inconsistent,
            ObstructionError::Simulation(_) => EpiStatus::Simulation,
            _ => EpiStatus::Logic,
        };
        Error(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> EpiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EpiStatus::Ok,
        Ok(Err(Error(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            EpiStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error(
            EpiStatus::NullArgument,
            "null string argument".into(),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Error(EpiStatus::InvalidUtf8, e.to_string()))
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, Error> {
    p.as_ref()
        .ok_or_else(|| Error(EpiStatus::NullArgument, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(Error(EpiStatus::NullArgument, "null output pointer".into()));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, v: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(Error(EpiStatus::NullArgument, "null output pointer".into()));
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Error> {
    let c = CString::new(s).map_err(|e| Error(EpiStatus::InvalidArgument, e.to_string()))?;
    if out.is_null() {
        return Err(Error(EpiStatus::NullArgument, "null output pointer".into()));
    }
    out.write(c.into_raw());
    Ok(())
}

/// The message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn epi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_model_from_json(
    json: *const c_char,
    out: *mut *mut EpiModel,
) -> EpiStatus {
    guard(|| {
        let m = io::model_from_json(str_arg(json)?)?;
        put_box(out, EpiModel(m))
    })
}

/// # Safety
/// `m` must be a live model handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_model_to_json(m: *const EpiModel, out: *mut *mut c_char) -> EpiStatus {
    guard(|| put_string(out, io::model_to_json(&ref_arg(m)?.0)))
}

/// Number of facets, or 0 for a NULL handle.
///
/// # Safety
/// `m` must be NULL or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn epi_model_facet_count(m: *const EpiModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.facet_count())
}

/// # Safety
/// `m` must be NULL or a model handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epi_model_free(m: *mut EpiModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_action_from_json(
    json: *const c_char,
    out: *mut *mut EpiAction,
) -> EpiStatus {
    guard(|| {
        let a = io::action_from_json(str_arg(json)?)?;
        put_box(out, EpiAction(a))
    })
}

/// # Safety
/// `a` must be a live action handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_action_to_json(
    a: *const EpiAction,
    out: *mut *mut c_char,
) -> EpiStatus {
    guard(|| put_string(out, io::action_to_json(&ref_arg(a)?.0)))
}

/// # Safety
/// `a` must be NULL or an action handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epi_action_free(a: *mut EpiAction) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// The input model over agents and values named `0, 1, ...`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_input_model(
    agents: usize,
    values: usize,
    out: *mut *mut EpiModel,
) -> EpiStatus {
    guard(|| {
        let m = build_input_model(&Workspace::numbered(agents, values))?;
        put_box(out, EpiModel(m))
    })
}

/// # Safety
/// `input` must be a live model handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_gen_is(
    rounds: usize,
    input: *const EpiModel,
    out: *mut *mut EpiAction,
) -> EpiStatus {
    guard(|| {
        let p = gen_is_protocol(rounds, &ref_arg(input)?.0)?;
        put_box(out, EpiAction(p.action))
    })
}

/// k-set agreement over every value of the input's workspace.
///
/// # Safety
/// `input` must be a live model handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_gen_sa(
    k: usize,
    input: *const EpiModel,
    out: *mut *mut EpiAction,
) -> EpiStatus {
    guard(|| {
        let t = gen_sa_task(k, ref_arg(input)?.0.workspace(), None)?;
        put_box(out, EpiAction(t.action))
    })
}

/// The know-all protocol repeating one graph for `rounds` rounds. `edges`
/// holds `edge_count` pairs `(p, q)` laid out flat; missing self-loops are
/// added.
///
/// # Safety
/// `edges` must point to `2 * edge_count` values (or be NULL when
/// `edge_count` is 0), `input` must be a live model handle and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_gen_knowall(
    edges: *const usize,
    edge_count: usize,
    rounds: usize,
    input: *const EpiModel,
    out: *mut *mut EpiAction,
) -> EpiStatus {
    guard(|| {
        let input = &ref_arg(input)?.0;
        let flat = match edge_count {
            0 => &[][..],
            _ if edges.is_null() => {
                return Err(Error(EpiStatus::NullArgument, "null edge array".into()))
            }
            _ => std::slice::from_raw_parts(edges, 2 * edge_count),
        };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|e| (e[0], e[1])).collect();
        let (g, _) = DiGraph::with_self_loops(input.workspace().n_agents(), &pairs)
            .map_err(|e| Error(EpiStatus::InvalidArgument, e.to_string()))?;
        let p = gen_knowall_protocol(&vec![g; rounds.max(1)], rounds, input)?;
        put_box(out, EpiAction(p.action))
    })
}

/// # Safety
/// `input` and `action` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_product_update(
    input: *const EpiModel,
    action: *const EpiAction,
    out: *mut *mut EpiModel,
) -> EpiStatus {
    guard(|| {
        let up = product_update(&ref_arg(input)?.0, &ref_arg(action)?.0)?;
        put_box(out, EpiModel(up.model))
    })
}

/// The maximum simulation from `protocol` to `task` and the step at which
/// the chain stabilized.
///
/// # Safety
/// `protocol` and `task` must be live handles; `out` and `stabilized_at`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn epi_max_simulation(
    protocol: *const EpiModel,
    task: *const EpiModel,
    mode: EpiMode,
    out: *mut *mut EpiRelation,
    stabilized_at: *mut usize,
) -> EpiStatus {
    guard(|| {
        let sim = Simulation::new(&ref_arg(protocol)?.0, &ref_arg(task)?.0)?;
        let fix = sim.max_simulation(mode.into());
        put(stabilized_at, fix.stabilized_at())?;
        let r = fix.chain.into_iter().last().expect("chain holds S_0");
        put_box(out, EpiRelation(r))
    })
}

/// Number of pairs, or 0 for a NULL handle.
///
/// # Safety
/// `r` must be NULL or a live relation handle.
#[no_mangle]
pub unsafe extern "C" fn epi_relation_len(r: *const EpiRelation) -> usize {
    r.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `r` must be NULL or a live relation handle.
#[no_mangle]
pub unsafe extern "C" fn epi_relation_is_total(r: *const EpiRelation) -> bool {
    r.as_ref().is_some_and(|r| r.0.is_total())
}

/// # Safety
/// `r` must be NULL or a live relation handle.
#[no_mangle]
pub unsafe extern "C" fn epi_relation_contains(
    r: *const EpiRelation,
    x: usize,
    x_prime: usize,
) -> bool {
    r.as_ref().is_some_and(|r| {
        let (m, n) = r.0.dims();
        x < m && x_prime < n && r.0.contains(x, x_prime)
    })
}

/// # Safety
/// `r` must be a live relation handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_relation_to_json(
    r: *const EpiRelation,
    out: *mut *mut c_char,
) -> EpiStatus {
    guard(|| put_string(out, io::relation_to_json(&ref_arg(r)?.0)))
}

/// # Safety
/// `r` must be NULL or a relation handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epi_relation_free(r: *mut EpiRelation) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Decides whether an obstruction exists. The verdict, including the formula
/// in shared S-expression form when one exists, is written as JSON.
///
/// # Safety
/// `protocol` and `task` must be live handles; `exists` and `verdict_json`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn epi_decide_obstruction(
    protocol: *const EpiModel,
    task: *const EpiModel,
    mode: EpiMode,
    exists: *mut bool,
    verdict_json: *mut *mut c_char,
) -> EpiStatus {
    guard(|| {
        let protocol = &ref_arg(protocol)?.0;
        let v = decide_obstruction(protocol, &ref_arg(task)?.0, mode.into())?;
        put(exists, v.exists)?;
        put_string(
            verdict_json,
            io::verdict_to_json_inline(&v, protocol.workspace()),
        )
    })
}

/// Evaluates an S-expression formula at one facet.
///
/// # Safety
/// `m` must be a live model handle, `formula` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_eval_formula(
    m: *const EpiModel,
    formula: *const c_char,
    facet: usize,
    out: *mut bool,
) -> EpiStatus {
    guard(|| {
        let m = &ref_arg(m)?.0;
        let mut store = Formulas::new();
        let phi = sexp::parse_formula(str_arg(formula)?, m.workspace(), &mut store)?;
        let holds = Checker::new(m, &store).eval(facet, phi)?;
        put(out, holds)
    })
}

/// Whether an S-expression formula holds at every facet.
///
/// # Safety
/// `m` must be a live model handle, `formula` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_holds_everywhere(
    m: *const EpiModel,
    formula: *const c_char,
    out: *mut bool,
) -> EpiStatus {
    guard(|| {
        let m = &ref_arg(m)?.0;
        let mut store = Formulas::new();
        let phi = sexp::parse_formula(str_arg(formula)?, m.workspace(), &mut store)?;
        let holds = Checker::new(m, &store).holds_everywhere(phi)?;
        put(out, holds)
    })
}

//! C ABI over the `thresnet` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_generate` functions and released by the matching `*_free`. Every
//! fallible function returns a [`ThresnetStatus`]; on failure
//! [`thresnet_last_error_message`] describes the most recent error on the
//! calling thread. Strings returned through `char **` out-parameters are
//! owned by the caller and released with [`thresnet_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thresnet::census::{self, FamilySpec};
use thresnet::cli::{self, ExperimentConfig, Task};
use thresnet::clustering::{self, ClusteringConfig};
use thresnet::graph::Graph;
use thresnet::limits;
use thresnet::rules::ConnectionRule;
use thresnet::verify::replication_seed;
use thresnet::weights::WeightLaw;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresnetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    ComputationFailed = 4,
    /// The run completed but its statistical check failed; outputs are set.
    StatisticalFailure = 5,
    Panic = 6,
}

/// Weight law together with a connection rule.
pub struct ThresnetModel {
    law: WeightLaw,
    rule: ConnectionRule,
}

/// A simple undirected graph.
pub struct ThresnetGraph {
    graph: Graph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(ThresnetStatus, String);

impl From<thresnet::error::Error> for Failure {
    fn from(e: thresnet::error::Error) -> Self {
        use thresnet::error::Error as E;
        let status = match e {
            E::InvalidLaw(_)
            | E::InvalidSet(_)
            | E::InvalidRule(_)
            | E::InvalidFamily(_)
            | E::VertexOutOfRange { .. }
            | E::TooFewVertices { .. }
            | E::GraphTooLarge { .. }
            | E::InvalidArgument(_)
            | E::ZetaZero => ThresnetStatus::InvalidInput,
            _ => ThresnetStatus::ComputationFailed,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ThresnetStatus::InvalidInput, msg.into())
}

/// Run `body`, translating errors and panics into a status code.
fn guarded(body: impl FnOnce() -> FfiResult<ThresnetStatus>) -> ThresnetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => {
            if status == ThresnetStatus::Ok {
                clear_last_error();
            }
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            ThresnetStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(
            ThresnetStatus::NullPointer,
            format!("{name} is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            ThresnetStatus::InvalidUtf8,
            format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(ThresnetStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(ThresnetStatus::NullPointer, format!("{name} is null")))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> FfiResult<T> {
    serde_json::from_str(text).map_err(|e| invalid(format!("{what}: {e}")))
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(ThresnetStatus::ComputationFailed, "interior NUL".into()))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn thresnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn thresnet_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn thresnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a model from a JSON weight law (e.g. `{"kind":"exponential","lambda":1}`)
/// and a JSON connection rule.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_model_new(
    law_json: *const c_char,
    rule_json: *const c_char,
    out: *mut *mut ThresnetModel,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let law: WeightLaw = parse(str_arg(law_json, "law_json")?, "law")?;
        law.validate()?;
        let rule: ConnectionRule = parse(str_arg(rule_json, "rule_json")?, "rule")?;
        rule.validate()?;
        *out = Box::into_raw(Box::new(ThresnetModel { law, rule }));
        Ok(ThresnetStatus::Ok)
    })
}

/// # Safety
/// `model` must be null or a live handle from [`thresnet_model_new`].
#[no_mangle]
pub unsafe extern "C" fn thresnet_model_free(model: *mut ThresnetModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sample a graph on `n` vertices. The same `(model, n, seed)` yields the
/// graph printed by the command-line `generate`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_generate(
    model: *const ThresnetModel,
    n: usize,
    seed: u64,
    out: *mut *mut ThresnetGraph,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let model = ref_arg(model, "model")?;
        let weights = model.law.sample(n, replication_seed(seed, n, 0))?;
        let graph = Graph::build(&model.rule, &weights)?;
        *out = Box::into_raw(Box::new(ThresnetGraph { graph }));
        Ok(ThresnetStatus::Ok)
    })
}

/// Graph on `n` vertices from `edge_count` 0-indexed pairs stored flat in
/// `edges` (`2 * edge_count` entries).
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values (or be null when
/// `edge_count` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_from_edges(
    n: usize,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut ThresnetGraph,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let flat: &[u32] = if edge_count == 0 {
            &[]
        } else {
            if edges.is_null() {
                return Err(Failure(ThresnetStatus::NullPointer, "edges is null".into()));
            }
            let len = edge_count
                .checked_mul(2)
                .ok_or_else(|| invalid("edge_count overflows"))?;
            std::slice::from_raw_parts(edges, len)
        };
        let pairs: Vec<(usize, usize)> = flat
            .chunks_exact(2)
            .map(|p| (p[0] as usize, p[1] as usize))
            .collect();
        let graph = Graph::from_edges(n, &pairs)?;
        *out = Box::into_raw(Box::new(ThresnetGraph { graph }));
        Ok(ThresnetStatus::Ok)
    })
}

/// # Safety
/// `graph` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_free(graph: *mut ThresnetGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_vertex_count(graph: *const ThresnetGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.n())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_edge_count(graph: *const ThresnetGraph) -> u64 {
    graph.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// Degree of the 0-indexed `vertex`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_graph_degree(
    graph: *const ThresnetGraph,
    vertex: usize,
    out: *mut u64,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let g = ref_arg(graph, "graph")?;
        *out = census::degree(&g.graph, vertex)?;
        Ok(ThresnetStatus::Ok)
    })
}

/// Number of induced subgraphs in the family described by `family_json`
/// (e.g. `{"name":"triangle"}`).
///
/// # Safety
/// `graph` must be a live handle; `family_json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_census_total(
    graph: *const ThresnetGraph,
    family_json: *const c_char,
    out: *mut u64,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let g = ref_arg(graph, "graph")?;
        let spec: FamilySpec = parse(str_arg(family_json, "family_json")?, "family")?;
        *out = census::census_global(&g.graph, &spec.resolve()?)?.total;
        Ok(ThresnetStatus::Ok)
    })
}

/// Full census, including per-vertex counts, as a JSON string.
///
/// # Safety
/// As [`thresnet_census_total`]; the string goes to [`thresnet_string_free`].
#[no_mangle]
pub unsafe extern "C" fn thresnet_census_json(
    graph: *const ThresnetGraph,
    family_json: *const c_char,
    out: *mut *mut c_char,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let g = ref_arg(graph, "graph")?;
        let spec: FamilySpec = parse(str_arg(family_json, "family_json")?, "family")?;
        let res = census::census_global(&g.graph, &spec.resolve()?)?;
        let text = serde_json::to_string(&res)
            .map_err(|e| Failure(ThresnetStatus::ComputationFailed, e.to_string()))?;
        *out = into_c_string(text)?;
        Ok(ThresnetStatus::Ok)
    })
}

/// Local clustering coefficient of `vertex`; `w` is used for degree <= 1.
///
/// # Safety
/// `graph` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_local_cc(
    graph: *const ThresnetGraph,
    vertex: usize,
    w: f64,
    out: *mut f64,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let g = ref_arg(graph, "graph")?;
        *out = clustering::local_cc(&g.graph, vertex, ClusteringConfig::new(w)?)?;
        Ok(ThresnetStatus::Ok)
    })
}

/// Mean local clustering coefficient; `w` is used for degree <= 1.
///
/// # Safety
/// `graph` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_global_cc(
    graph: *const ThresnetGraph,
    w: f64,
    out: *mut f64,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let g = ref_arg(graph, "graph")?;
        *out = clustering::global_cc(&g.graph, ClusteringConfig::new(w)?);
        Ok(ThresnetStatus::Ok)
    })
}

/// Mean local clustering coefficient over vertices of degree >= 2. Fails
/// with `COMPUTATION_FAILED` when there are none.
///
/// # Safety
/// `graph` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn thresnet_filtered_cc(
    graph: *const ThresnetGraph,
    out: *mut f64,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let g = ref_arg(graph, "graph")?;
        *out = clustering::filtered_cc(&g.graph)?;
        Ok(ThresnetStatus::Ok)
    })
}

/// Limit law of the normalized degree as JSON (`atoms` and `pieces`).
///
/// # Safety
/// `model` must be a live handle; `out` writable; the string goes to
/// [`thresnet_string_free`].
#[no_mangle]
pub unsafe extern "C" fn thresnet_degree_law_json(
    model: *const ThresnetModel,
    out: *mut *mut c_char,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let model = ref_arg(model, "model")?;
        let law = limits::degree_law(&model.law, &model.rule)?;
        let text = serde_json::to_string(&law)
            .map_err(|e| Failure(ThresnetStatus::ComputationFailed, e.to_string()))?;
        *out = into_c_string(text)?;
        Ok(ThresnetStatus::Ok)
    })
}

/// Run a command-line subcommand (`"census"`, `"clt"`, ...) on a JSON
/// experiment configuration and return its primary artifact. A failed
/// statistical check still sets `out` and returns `STATISTICAL_FAILURE`.
/// Output paths in the configuration are ignored.
///
/// # Safety
/// String arguments NUL-terminated; `out` writable; the string goes to
/// [`thresnet_string_free`].
#[no_mangle]
pub unsafe extern "C" fn thresnet_run_json(
    subcommand: *const c_char,
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> ThresnetStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(subcommand, "subcommand")?;
        let task: Task = name
            .parse()
            .map_err(|d: cli::Diagnostic| invalid(d.message))?;
        let config: ExperimentConfig = cli::parse_config(str_arg(config_json, "config_json")?)
            .map_err(|d| invalid(d.to_string()))?;
        let outcome = cli::run(task, &config)?;
        *out = into_c_string(outcome.primary)?;
        Ok(if outcome.pass == Some(false) {
            ThresnetStatus::StatisticalFailure
        } else {
            ThresnetStatus::Ok
        })
    })
}

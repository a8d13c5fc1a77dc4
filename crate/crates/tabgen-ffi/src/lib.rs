//! C ABI over the core engine: opaque table handles, status codes, and
//! JSON-configured generation/evaluation so other languages can bind
//! without mirroring the Rust types.
//!
//! Conventions: every function returns a `TabgenStatus`; outputs are
//! written through out-pointers; strings returned through out-pointers are
//! owned by the caller and must be released with `tabgen_string_free`;
//! `tabgen_last_error_message` describes the most recent failure on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use tabgen_core::cli::{cmd_evaluate, EvaluateArgs};
use tabgen_core::distances::{table_distance, DistanceKind};
use tabgen_core::pipeline::{run_generation, RunConfig};
use tabgen_core::table::{load_csv, DatasetManifest, Table};

/// Result of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabgenStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments were present but invalid (bad JSON, bad column, ...).
    InvalidArgument = 2,
    /// File system failure.
    Io = 3,
    /// Input could not be parsed (CSV, manifest, reply).
    Parse = 4,
    /// Generation backend failure (credentials, retries exhausted).
    Backend = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Opaque table handle. Create with `tabgen_table_load_csv` or
/// `tabgen_generate`, release with `tabgen_table_free`.
pub struct TabgenTable {
    _private: [u8; 0],
}

struct TableHandle {
    table: Table,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: TabgenStatus, message: &str) -> TabgenStatus {
    set_last_error(message);
    status
}

/// Human-readable description of the last failure on this thread. The
/// pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn tabgen_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn tabgen_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Release a string returned through an out-pointer.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn tabgen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a table handle.
///
/// # Safety
/// `table` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_free(table: *mut TabgenTable) {
    if !table.is_null() {
        drop(Box::from_raw(table as *mut TableHandle));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, TabgenStatus> {
    if ptr.is_null() {
        return Err(TabgenStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8");
        TabgenStatus::InvalidArgument
    })
}

unsafe fn read_table<'a>(ptr: *const TabgenTable) -> Result<&'a Table, TabgenStatus> {
    if ptr.is_null() {
        return Err(TabgenStatus::NullArgument);
    }
    Ok(&(*(ptr as *const TableHandle)).table)
}

fn give_table(table: Table, out: *mut *mut TabgenTable) -> TabgenStatus {
    let handle = Box::new(TableHandle { table });
    unsafe {
        *out = Box::into_raw(handle) as *mut TabgenTable;
    }
    TabgenStatus::Ok
}

fn give_string(text: String, out: *mut *mut c_char) -> TabgenStatus {
    match CString::new(text) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            TabgenStatus::Ok
        }
        Err(_) => fail(TabgenStatus::Internal, "output contained a NUL byte"),
    }
}

fn guard(body: impl FnOnce() -> TabgenStatus) -> TabgenStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(TabgenStatus::Internal, "internal panic"),
    }
}

/// Load a CSV file with a header row into a new table handle.
/// `manifest_json` optionally carries a dataset manifest document
/// (see docs/schemas/dataset_manifest.schema.json); pass null to infer
/// column kinds from the data.
///
/// # Safety
/// `path` must be a valid NUL-terminated string, `manifest_json` null or
/// likewise, and `out_table` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_load_csv(
    path: *const c_char,
    manifest_json: *const c_char,
    out_table: *mut *mut TabgenTable,
) -> TabgenStatus {
    guard(|| {
        if out_table.is_null() {
            return fail(TabgenStatus::NullArgument, "out_table is null");
        }
        let path = match read_str(path) {
            Ok(s) => s,
            Err(status) => return fail(status, "path is null or not UTF-8"),
        };
        let manifest = if manifest_json.is_null() {
            None
        } else {
            let text = match read_str(manifest_json) {
                Ok(s) => s,
                Err(status) => return status,
            };
            match serde_json::from_str::<DatasetManifest>(text) {
                Ok(m) => Some(m),
                Err(e) => return fail(TabgenStatus::Parse, &format!("manifest: {e}")),
            }
        };
        match load_csv(Path::new(path), manifest.as_ref()) {
            Ok(table) => give_table(table, out_table),
            Err(e) => {
                let status = match &e {
                    tabgen_core::table::TableError::Io { .. } => TabgenStatus::Io,
                    _ => TabgenStatus::Parse,
                };
                fail(status, &e.to_string())
            }
        }
    })
}

/// Number of rows in the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_row_count(table: *const TabgenTable) -> usize {
    read_table(table).map(|t| t.len()).unwrap_or(0)
}

/// Number of columns in the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_column_count(table: *const TabgenTable) -> usize {
    read_table(table)
        .map(|t| t.schema().columns.len())
        .unwrap_or(0)
}

/// Write the table as CSV with its schema's header.
///
/// # Safety
/// `table` must be a live handle, `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_write_csv(
    table: *const TabgenTable,
    path: *const c_char,
) -> TabgenStatus {
    guard(|| {
        let table = match read_table(table) {
            Ok(t) => t,
            Err(status) => return fail(status, "table handle is null"),
        };
        let path = match read_str(path) {
            Ok(s) => s,
            Err(status) => return fail(status, "path is null or not UTF-8"),
        };
        match table.write_csv(Path::new(path)) {
            Ok(()) => TabgenStatus::Ok,
            Err(e) => fail(TabgenStatus::Io, &e.to_string()),
        }
    })
}

/// Produce the dataset manifest describing the table's schema, as a JSON
/// string owned by the caller.
///
/// # Safety
/// `table` must be a live handle, `out_json` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_manifest_json(
    table: *const TabgenTable,
    out_json: *mut *mut c_char,
) -> TabgenStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(TabgenStatus::NullArgument, "out_json is null");
        }
        let table = match read_table(table) {
            Ok(t) => t,
            Err(status) => return fail(status, "table handle is null"),
        };
        let manifest = DatasetManifest::from_schema(table.schema());
        match serde_json::to_string_pretty(&manifest) {
            Ok(json) => give_string(json, out_json),
            Err(e) => fail(TabgenStatus::Internal, &e.to_string()),
        }
    })
}

/// Table-level distribution distance between two tables with identical
/// schemas. `kind` is 0 for KSD, 1 for JSD; `bins` is the histogram bin
/// count for JSD scoring.
///
/// # Safety
/// `a` and `b` must be live handles, `out_distance` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn tabgen_table_distance(
    a: *const TabgenTable,
    b: *const TabgenTable,
    kind: c_int,
    bins: usize,
    out_distance: *mut c_double,
) -> TabgenStatus {
    guard(|| {
        if out_distance.is_null() {
            return fail(TabgenStatus::NullArgument, "out_distance is null");
        }
        let (a, b) = match (read_table(a), read_table(b)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return fail(TabgenStatus::NullArgument, "table handle is null"),
        };
        let kind = match kind {
            0 => DistanceKind::Ksd,
            1 => DistanceKind::Jsd,
            other => {
                return fail(
                    TabgenStatus::InvalidArgument,
                    &format!("kind must be 0 (KSD) or 1 (JSD), got {other}"),
                )
            }
        };
        match table_distance(a, b, kind, bins) {
            Ok(d) => {
                *out_distance = d;
                TabgenStatus::Ok
            }
            Err(e) => fail(TabgenStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Run the iterative generation loop against `real` with a run
/// configuration document (the `run` object of the run manifest schema)
/// and hand back the synthetic table. Remote backends read the API key
/// from the TABGEN_API_KEY environment variable.
///
/// # Safety
/// `real` must be a live handle, `run_config_json` a valid NUL-terminated
/// string, `out_table` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn tabgen_generate(
    real: *const TabgenTable,
    run_config_json: *const c_char,
    out_table: *mut *mut TabgenTable,
) -> TabgenStatus {
    guard(|| {
        if out_table.is_null() {
            return fail(TabgenStatus::NullArgument, "out_table is null");
        }
        let real = match read_table(real) {
            Ok(t) => t,
            Err(status) => return fail(status, "table handle is null"),
        };
        let config_text = match read_str(run_config_json) {
            Ok(s) => s,
            Err(status) => return fail(status, "run_config_json is null or not UTF-8"),
        };
        let config: RunConfig = match serde_json::from_str(config_text) {
            Ok(c) => c,
            Err(e) => return fail(TabgenStatus::Parse, &format!("run config: {e}")),
        };
        match run_generation(real, &config) {
            Ok(outcome) => give_table(outcome.synthetic, out_table),
            Err(e) => {
                let status = match &e {
                    tabgen_core::pipeline::PipelineError::Backend(_)
                    | tabgen_core::pipeline::PipelineError::ZeroAccepted(_) => {
                        TabgenStatus::Backend
                    }
                    _ => TabgenStatus::InvalidArgument,
                };
                fail(status, &e.to_string())
            }
        }
    })
}

#[derive(serde::Deserialize, Default)]
#[serde(default)]
struct EvaluateOptions {
    seed: u64,
    bins: Option<usize>,
    neighbors: Option<usize>,
    holdout_fraction: Option<f64>,
    target: Option<String>,
}

/// Evaluate a synthetic table against a real one and return the full
/// report as a JSON document (fidelity, utility when a target is given,
/// privacy; see docs/schemas/evaluation_report.schema.json). Both handles
/// must come from CSVs sharing a schema. `options_json` may be null or an
/// object with optional `seed`, `bins`, `neighbors`, `holdout_fraction`,
/// and `target` fields.
///
/// # Safety
/// `real_csv_path` and `synthetic_csv_path` must be valid NUL-terminated
/// strings, `options_json` null or likewise, `out_json` a valid
/// out-pointer.
#[no_mangle]
pub unsafe extern "C" fn tabgen_evaluate_json(
    real_csv_path: *const c_char,
    synthetic_csv_path: *const c_char,
    options_json: *const c_char,
    out_json: *mut *mut c_char,
) -> TabgenStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(TabgenStatus::NullArgument, "out_json is null");
        }
        let real = match read_str(real_csv_path) {
            Ok(s) => s,
            Err(status) => return fail(status, "real_csv_path is null or not UTF-8"),
        };
        let synthetic = match read_str(synthetic_csv_path) {
            Ok(s) => s,
            Err(status) => return fail(status, "synthetic_csv_path is null or not UTF-8"),
        };
        let options: EvaluateOptions = if options_json.is_null() {
            EvaluateOptions::default()
        } else {
            let text = match read_str(options_json) {
                Ok(s) => s,
                Err(status) => return status,
            };
            match serde_json::from_str(text) {
                Ok(o) => o,
                Err(e) => return fail(TabgenStatus::Parse, &format!("options: {e}")),
            }
        };
        let args = EvaluateArgs {
            real_csv: real.into(),
            synthetic_csv: synthetic.into(),
            manifest: None,
            holdout_fraction: options.holdout_fraction.unwrap_or(0.5),
            seed: options.seed,
            bins: options.bins.unwrap_or(50),
            neighbors: options.neighbors.unwrap_or(5),
            require_utility: false,
            target: options.target,
        };
        match cmd_evaluate(&args) {
            Ok(report) => match serde_json::to_string_pretty(&report) {
                Ok(json) => give_string(json, out_json),
                Err(e) => fail(TabgenStatus::Internal, &e.to_string()),
            },
            Err(e) => fail(TabgenStatus::InvalidArgument, &e.to_string()),
        }
    })
}

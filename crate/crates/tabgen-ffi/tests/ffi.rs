//! Exercises the C ABI from Rust: handle lifecycle, error reporting,
//! generation from a JSON run config, and evaluation output.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use tabgen_ffi::{
    tabgen_evaluate_json, tabgen_generate, tabgen_last_error_message, tabgen_string_free,
    tabgen_table_column_count, tabgen_table_distance, tabgen_table_free, tabgen_table_load_csv,
    tabgen_table_manifest_json, tabgen_table_row_count, tabgen_table_write_csv, tabgen_version,
    TabgenStatus, TabgenTable,
};

fn write_csv(dir: &std::path::Path, name: &str, rows: usize) -> CString {
    let path = dir.join(name);
    let mut content = String::from("x,y,label\n");
    for i in 0..rows {
        let label = if i % 2 == 0 { "pos" } else { "neg" };
        let x = (i as f64 * 0.61).sin() * 2.0;
        let y = i as f64 % 7.0;
        content.push_str(&format!("{x:.4},{y},{label}\n"));
    }
    std::fs::write(&path, content).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn load(path: &CString) -> *mut TabgenTable {
    let mut table: *mut TabgenTable = ptr::null_mut();
    let status = unsafe { tabgen_table_load_csv(path.as_ptr(), ptr::null(), &mut table) };
    assert_eq!(status, TabgenStatus::Ok);
    assert!(!table.is_null());
    table
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(tabgen_last_error_message())
            .to_string_lossy()
            .to_string()
    }
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let text = unsafe { CStr::from_ptr(ptr).to_string_lossy().to_string() };
    unsafe { tabgen_string_free(ptr) };
    text
}

#[test]
fn version_is_exposed() {
    let version = unsafe { CStr::from_ptr(tabgen_version()) };
    assert!(!version.to_string_lossy().is_empty());
}

#[test]
fn load_inspect_write_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_csv(dir.path(), "data.csv", 12);
    let table = load(&path);
    unsafe {
        assert_eq!(tabgen_table_row_count(table), 12);
        assert_eq!(tabgen_table_column_count(table), 3);

        let out_path = CString::new(dir.path().join("copy.csv").to_str().unwrap()).unwrap();
        assert_eq!(tabgen_table_write_csv(table, out_path.as_ptr()), TabgenStatus::Ok);
        let copy = load(&out_path);
        assert_eq!(tabgen_table_row_count(copy), 12);
        tabgen_table_free(copy);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            tabgen_table_manifest_json(table, &mut json),
            TabgenStatus::Ok
        );
        let manifest: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(manifest["columns"].as_array().unwrap().len(), 3);

        tabgen_table_free(table);
    }
}

#[test]
fn missing_file_reports_io_error() {
    let path = CString::new("/nonexistent/file.csv").unwrap();
    let mut table: *mut TabgenTable = ptr::null_mut();
    let status = unsafe { tabgen_table_load_csv(path.as_ptr(), ptr::null(), &mut table) };
    assert_eq!(status, TabgenStatus::Io);
    assert!(table.is_null());
    assert!(last_error().contains("file.csv"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut table: *mut TabgenTable = ptr::null_mut();
    let status = unsafe { tabgen_table_load_csv(ptr::null(), ptr::null(), &mut table) };
    assert_eq!(status, TabgenStatus::NullArgument);

    let mut distance = 0.0f64;
    let status = unsafe {
        tabgen_table_distance(ptr::null(), ptr::null(), 0, 50, &mut distance)
    };
    assert_eq!(status, TabgenStatus::NullArgument);
}

#[test]
fn distance_of_identical_tables_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_csv(dir.path(), "data.csv", 20);
    let a = load(&path);
    let b = load(&path);
    let mut distance = -1.0f64;
    unsafe {
        assert_eq!(
            tabgen_table_distance(a, b, 0, 50, &mut distance),
            TabgenStatus::Ok
        );
        assert_eq!(distance, 0.0);
        assert_eq!(
            tabgen_table_distance(a, b, 7, 50, &mut distance),
            TabgenStatus::InvalidArgument
        );
        tabgen_table_free(a);
        tabgen_table_free(b);
    }
}

#[test]
fn generate_from_json_config_produces_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_csv(dir.path(), "data.csv", 40);
    let real = load(&path);

    let config = serde_json::json!({
        "total_rows": 60,
        "in_context_size": 10,
        "per_call_rows": 30,
        "backend": { "kind": "simulator" },
        "mixture": {
            "lambda": 0.5,
            "jitter_fraction": 0.02,
            "prior": {
                "x": { "gaussian": { "mean": 0.0, "std": 1.0 } },
                "y": { "gaussian": { "mean": 3.0, "std": 2.0 } },
                "label": { "weights": { "pos": 1.0, "neg": 1.0 } }
            }
        },
        "residual": { "group_bins": 5, "min_group_size": 2, "distance_bins": 10 },
        "alternation": "alternate",
        "seed": 3
    });
    let config_text = CString::new(config.to_string()).unwrap();

    let mut synthetic: *mut TabgenTable = ptr::null_mut();
    let status = unsafe { tabgen_generate(real, config_text.as_ptr(), &mut synthetic) };
    assert_eq!(status, TabgenStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(tabgen_table_row_count(synthetic), 60);
        assert_eq!(tabgen_table_column_count(synthetic), 3);
        tabgen_table_free(synthetic);
        tabgen_table_free(real);
    }

    // bad JSON is a parse error
    let bad = CString::new("{not json").unwrap();
    let real = load(&path);
    let mut out: *mut TabgenTable = ptr::null_mut();
    let status = unsafe { tabgen_generate(real, bad.as_ptr(), &mut out) };
    assert_eq!(status, TabgenStatus::Parse);
    unsafe { tabgen_table_free(real) };
}

#[test]
fn evaluate_returns_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let real = write_csv(dir.path(), "real.csv", 120);
    let synthetic = write_csv(dir.path(), "synthetic.csv", 120);
    let options = CString::new(r#"{"seed": 4, "target": "label"}"#).unwrap();

    let mut json: *mut c_char = ptr::null_mut();
    let status = unsafe {
        tabgen_evaluate_json(real.as_ptr(), synthetic.as_ptr(), options.as_ptr(), &mut json)
    };
    assert_eq!(status, TabgenStatus::Ok, "{}", last_error());
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert!(report["fidelity"]["marginal_error"].is_number());
    assert!(report["privacy"]["closer_to_train_share"].is_number());
    assert!(report["utility"].is_object());
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tabgen.h"),
    )
    .expect("committed header");
    for symbol in [
        "tabgen_table_load_csv",
        "tabgen_table_free",
        "tabgen_generate",
        "tabgen_evaluate_json",
        "tabgen_last_error_message",
        "tabgen_string_free",
        "TABGEN_STATUS_OK",
        "typedef struct TabgenTable",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}

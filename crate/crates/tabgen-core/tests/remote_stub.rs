//! Exercises the remote backend against a minimal scripted HTTP server:
//! happy path, retry on 429, malformed-row logging, auth failure, and
//! retry exhaustion.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::{Mutex, OnceLock};
use std::thread;

use tabgen_core::generator::{
    build_prompt, remote_generate, BackendConfig, BackendKind, GeneratorError, API_KEY_VAR,
};
use tabgen_core::table::{ColumnSpec, Schema};

/// Serializes env-var mutation across tests.
fn env_lock() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

struct Script {
    responses: Vec<(u16, String)>,
}

struct StubServer {
    url: String,
    handle: thread::JoinHandle<Vec<String>>,
}

impl StubServer {
    /// Serve the scripted responses in order, one connection each, and
    /// collect the raw request bodies.
    fn start(script: Script) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub server");
        let url = format!("http://{}", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in script.responses {
                let (mut stream, _) = listener.accept().expect("accept");
                bodies.push(read_request(&mut stream));
                let reason = match status {
                    200 => "OK",
                    401 => "Unauthorized",
                    429 => "Too Many Requests",
                    500 => "Internal Server Error",
                    _ => "Status",
                };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(response.as_bytes()).expect("write response");
            }
            bodies
        });
        StubServer { url, handle }
    }

    fn finish(self) -> Vec<String> {
        self.handle.join().expect("server thread")
    }
}

fn read_request(stream: &mut std::net::TcpStream) -> String {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end;
    loop {
        let n = stream.read(&mut chunk).expect("read request");
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_header_end(&buf) {
            header_end = pos;
            break;
        }
        if n == 0 {
            panic!("connection closed before headers completed");
        }
    }
    let headers = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let content_length: usize = headers
        .lines()
        .find_map(|l| {
            let (name, value) = l.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse().ok())?
        })
        .unwrap_or(0);
    let mut body = buf[header_end + 4..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut chunk).expect("read body");
        if n == 0 {
            break;
        }
        body.extend_from_slice(&chunk[..n]);
    }
    format!("{headers}\n\n{}", String::from_utf8_lossy(&body))
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

fn schema() -> Schema {
    Schema::new(
        vec![
            ColumnSpec::categorical("name", ["Alice", "Bob"]),
            ColumnSpec::numeric("age", 0.0, 100.0),
        ],
        None,
    )
    .unwrap()
}

fn completion_body(rows_json: &str) -> String {
    serde_json::json!({
        "choices": [{ "message": { "content": rows_json } }]
    })
    .to_string()
}

fn valid_rows(count: usize) -> String {
    let rows: Vec<serde_json::Value> = (0..count)
        .map(|i| serde_json::json!({ "name": "Alice", "age": 20 + i }))
        .collect();
    serde_json::Value::Array(rows).to_string()
}

fn config(url: &str, max_retries: u32) -> BackendConfig {
    BackendConfig {
        kind: BackendKind::Remote,
        endpoint_url: url.to_string(),
        model_name: "stub-model".into(),
        temperature: 1.0,
        max_retries,
        timeout_secs: 10,
    }
}

#[test]
fn happy_path_returns_all_rows_and_sends_schema() {
    let _guard = env_lock();
    std::env::set_var(API_KEY_VAR, "test-key");
    let server = StubServer::start(Script {
        responses: vec![(200, completion_body(&valid_rows(50)))],
    });
    let schema = schema();
    let bundle = build_prompt(r#"[{"name":"Alice","age":25}]"#, 50, &schema);
    let parsed = remote_generate(&bundle, &config(&server.url, 0), &schema).unwrap();
    assert_eq!(parsed.accepted.len(), 50);
    assert!(parsed.rejected.is_empty());

    let bodies = server.finish();
    assert_eq!(bodies.len(), 1);
    let request = &bodies[0];
    assert!(request.contains("Bearer test-key"));
    let body: serde_json::Value =
        serde_json::from_str(request.split_once("\n\n").unwrap().1).unwrap();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["response_format"]["type"], "json_schema");
    assert_eq!(
        body["response_format"]["json_schema"]["schema"]["properties"]["JSON"]["items"]
            ["properties"]["age"]["type"],
        "number"
    );
    assert_eq!(body["messages"][0]["role"], "user");
}

#[test]
fn rate_limited_then_success_retries() {
    let _guard = env_lock();
    std::env::set_var(API_KEY_VAR, "test-key");
    let server = StubServer::start(Script {
        responses: vec![
            (429, "{\"error\":\"slow down\"}".into()),
            (200, completion_body(&valid_rows(5))),
        ],
    });
    let schema = schema();
    let bundle = build_prompt("[{}]", 5, &schema);
    let parsed = remote_generate(&bundle, &config(&server.url, 2), &schema).unwrap();
    assert_eq!(parsed.accepted.len(), 5);
    assert_eq!(server.finish().len(), 2);
}

#[test]
fn malformed_objects_are_rejected_not_fatal() {
    let _guard = env_lock();
    std::env::set_var(API_KEY_VAR, "test-key");
    let mut rows: Vec<serde_json::Value> = (0..48)
        .map(|i| serde_json::json!({ "name": "Bob", "age": i }))
        .collect();
    rows.push(serde_json::json!({ "name": "Eve" })); // missing age
    rows.push(serde_json::json!({ "name": "Eve", "age": "not-a-number" }));
    let payload = serde_json::Value::Array(rows).to_string();

    let server = StubServer::start(Script {
        responses: vec![(200, completion_body(&payload))],
    });
    let schema = schema();
    let bundle = build_prompt("[{}]", 50, &schema);
    let parsed = remote_generate(&bundle, &config(&server.url, 0), &schema).unwrap();
    assert_eq!(parsed.accepted.len(), 48);
    assert_eq!(parsed.rejected.len(), 2);
    server.finish();
}

#[test]
fn auth_failure_is_immediate() {
    let _guard = env_lock();
    std::env::set_var(API_KEY_VAR, "bad-key");
    let server = StubServer::start(Script {
        responses: vec![(401, "{\"error\":\"bad key\"}".into())],
    });
    let schema = schema();
    let bundle = build_prompt("[{}]", 5, &schema);
    let err = remote_generate(&bundle, &config(&server.url, 5), &schema).unwrap_err();
    assert!(matches!(err, GeneratorError::AuthFailed(401)));
    // no retry happened: the server scripted exactly one response
    assert_eq!(server.finish().len(), 1);
}

#[test]
fn persistent_server_errors_exhaust_retries() {
    let _guard = env_lock();
    std::env::set_var(API_KEY_VAR, "test-key");
    let server = StubServer::start(Script {
        responses: vec![
            (500, "{}".into()),
            (500, "{}".into()),
            (500, "{}".into()),
        ],
    });
    let schema = schema();
    let bundle = build_prompt("[{}]", 5, &schema);
    let err = remote_generate(&bundle, &config(&server.url, 2), &schema).unwrap_err();
    match err {
        GeneratorError::RetriesExhausted { attempts, .. } => assert_eq!(attempts, 3),
        other => panic!("expected RetriesExhausted, got {other:?}"),
    }
    assert_eq!(server.finish().len(), 3);
}

#[test]
fn missing_api_key_is_an_environment_error() {
    let _guard = env_lock();
    std::env::remove_var(API_KEY_VAR);
    let schema = schema();
    let bundle = build_prompt("[{}]", 5, &schema);
    let err = remote_generate(&bundle, &config("http://127.0.0.1:1", 0), &schema).unwrap_err();
    assert!(matches!(err, GeneratorError::MissingApiKey));
    std::env::set_var(API_KEY_VAR, "restored");
}

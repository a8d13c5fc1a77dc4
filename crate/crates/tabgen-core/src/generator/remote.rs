//! OpenAI-compatible chat-completions client with structured JSON output
//! and capped exponential backoff with full jitter.

use std::time::Duration;

use rand::RngExt;
use serde::Deserialize;

use crate::generator::{BackendConfig, GeneratorError, PromptBundle, API_KEY_VAR};
use crate::table::{parse_rows_json, ParsedRows, Schema, TableError};

const BACKOFF_BASE_MS: u64 = 500;
const BACKOFF_CAP_MS: u64 = 10_000;

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

/// Issue one chat-completion request per attempt, parse the reply rows,
/// and retry on transport errors, HTTP 429/5xx, or zero accepted rows.
/// Authentication failures abort immediately.
pub fn remote_generate(
    bundle: &PromptBundle,
    config: &BackendConfig,
    schema: &Schema,
) -> Result<ParsedRows, GeneratorError> {
    let api_key = std::env::var(API_KEY_VAR).map_err(|_| GeneratorError::MissingApiKey)?;
    config.validate()?;

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout()))
        .http_status_as_error(false)
        .build()
        .into();

    let url = format!(
        "{}/chat/completions",
        config.endpoint_url.trim_end_matches('/')
    );
    let body = serde_json::json!({
        "model": config.model_name,
        "messages": [{ "role": "user", "content": bundle.text }],
        "temperature": config.temperature,
        "response_format": {
            "type": "json_schema",
            "json_schema": {
                "name": "synthetic_rows",
                "strict": true,
                "schema": bundle.response_schema,
            }
        }
    });

    let mut last_failure = String::from("no attempts made");
    let attempts = config.max_retries + 1;
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(backoff_delay(attempt - 1));
        }
        match attempt_request(&agent, &url, &api_key, &body, schema) {
            Ok(parsed) if !parsed.accepted.is_empty() => {
                if !parsed.rejected.is_empty() {
                    log::warn!(
                        "generator reply: {} rows accepted, {} rejected",
                        parsed.accepted.len(),
                        parsed.rejected.len()
                    );
                    for (_, reason) in &parsed.rejected {
                        log::debug!("rejected row: {reason}");
                    }
                }
                return Ok(parsed);
            }
            Ok(_) => {
                last_failure = "reply contained no accepted rows".into();
                log::warn!("attempt {}: {last_failure}", attempt + 1);
            }
            Err(RequestFailure::Fatal(e)) => return Err(e),
            Err(RequestFailure::Retryable(reason)) => {
                last_failure = reason;
                log::warn!("attempt {}: {last_failure}", attempt + 1);
            }
        }
    }
    Err(GeneratorError::RetriesExhausted {
        attempts,
        last: last_failure,
    })
}

enum RequestFailure {
    Retryable(String),
    Fatal(GeneratorError),
}

fn attempt_request(
    agent: &ureq::Agent,
    url: &str,
    api_key: &str,
    body: &serde_json::Value,
    schema: &Schema,
) -> Result<ParsedRows, RequestFailure> {
    let result = agent
        .post(url)
        .header("Authorization", &format!("Bearer {api_key}"))
        .send_json(body);

    let mut response = match result {
        Ok(response) => response,
        Err(e) => return Err(RequestFailure::Retryable(format!("transport error: {e}"))),
    };

    let status = response.status().as_u16();
    let text = response
        .body_mut()
        .read_to_string()
        .map_err(|e| RequestFailure::Retryable(format!("body read error: {e}")))?;

    match status {
        200..=299 => {}
        401 | 403 => return Err(RequestFailure::Fatal(GeneratorError::AuthFailed(status))),
        429 | 500..=599 => {
            return Err(RequestFailure::Retryable(format!("HTTP {status}: {text}")))
        }
        _ => {
            return Err(RequestFailure::Fatal(GeneratorError::HttpStatus {
                status,
                body: text,
            }))
        }
    }

    let completion: CompletionResponse = serde_json::from_str(&text)
        .map_err(|e| RequestFailure::Fatal(GeneratorError::BadResponse(e.to_string())))?;
    let content = completion
        .choices
        .first()
        .map(|c| c.message.content.as_str())
        .ok_or_else(|| {
            RequestFailure::Fatal(GeneratorError::BadResponse("no choices in reply".into()))
        })?;

    match parse_rows_json(content, schema, false) {
        Ok(parsed) => Ok(parsed),
        Err(TableError::NoJsonArray { raw }) => {
            log::debug!("unparseable reply: {raw}");
            Err(RequestFailure::Retryable("no JSON array in reply".into()))
        }
        Err(e) => Err(RequestFailure::Fatal(e.into())),
    }
}

fn backoff_delay(failed_attempts: u32) -> Duration {
    let ceiling = BACKOFF_CAP_MS.min(BACKOFF_BASE_MS.saturating_mul(1 << failed_attempts.min(20)));
    let jittered = rand::rng().random_range(0..=ceiling);
    Duration::from_millis(jittered)
}

//! Result payload assembly: the JSON envelope with an inputs echo, CSV
//! emission, and the stable colouring hash.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use hyperglauber::Colouring;
use serde_json::{json, Value};

use crate::Failure;

/// Wrap a result in the self-describing envelope. The timestamp is a unix
/// epoch in seconds and can be suppressed for byte-identical reruns.
pub fn envelope(command: &str, inputs: Value, result: Value, with_timestamp: bool) -> Value {
    let mut payload = json!({
        "command": command,
        "inputs": inputs,
    });
    if with_timestamp {
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        payload["timestamp"] = json!(ts);
    }
    payload["result"] = result;
    payload
}

/// Print a payload to stdout or write it to --out.
pub fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut f = fs::File::create(path).map_err(hyperglauber::Error::from)?;
            writeln!(f, "{text}").map_err(hyperglauber::Error::from)?;
            Ok(())
        }
    }
}

pub fn emit_json(value: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    emit(&text, out)
}

/// Join CSV rows; the separator is `,` and floats render with `.`
/// independent of locale.
pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut text = String::from(header);
    for row in rows {
        text.push('\n');
        text.push_str(&row);
    }
    text
}

/// FNV-1a over the little-endian colour words; stable across runs and
/// platforms.
pub fn colouring_hash(x: &Colouring) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in 0..x.len() {
        for byte in x.colour(v).to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x1_0000_01b3);
        }
    }
    format!("{h:016x}")
}

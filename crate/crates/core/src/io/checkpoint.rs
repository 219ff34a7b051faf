use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::IoError;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "ranloop-checkpoint";

/// Text checkpoint: a `ranloop-checkpoint v<N>` header line followed by
/// the JSON state. Floats round-trip exactly.
pub fn encode_checkpoint<T: Serialize>(state: &T) -> String {
    let body = serde_json::to_string(state).expect("checkpoint state serializes");
    format!("{MAGIC} v{CHECKPOINT_VERSION}\n{body}\n")
}

pub fn decode_checkpoint<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let corrupt = |offset: usize, message: String| IoError::CorruptCheckpoint { offset, message };
    let Some(newline) = text.find('\n') else {
        return Err(corrupt(text.len(), "missing header line".into()));
    };
    let header = &text[..newline];
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(" v"))
        .ok_or_else(|| corrupt(0, format!("bad header `{header}`")))?;
    if version != CHECKPOINT_VERSION.to_string() {
        return Err(IoError::VersionMismatch { found: format!("v{version}"), expected: format!("v{CHECKPOINT_VERSION}") });
    }
    let body = &text[newline + 1..];
    serde_json::from_str(body).map_err(|e| corrupt(newline + 1 + byte_offset(body, e.line(), e.column()), e.to_string()))
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Writes via a temporary file and rename so a crash never leaves a
/// half-written checkpoint under the final name.
pub fn save_checkpoint<T: Serialize>(state: &T, path: &Path) -> Result<(), IoError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode_checkpoint(state)).map_err(|e| IoError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| IoError::io(path, e))
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    decode_checkpoint(&text)
}

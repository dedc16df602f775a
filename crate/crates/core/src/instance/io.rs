use std::path::Path;

use serde::de::DeserializeOwned;

use super::Instance;
use crate::error::{Error, Result};

/// Deserializes JSON, reporting the field path of the first error.
pub(crate) fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Json {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

pub fn from_json_str(text: &str) -> Result<Instance> {
    parse_json(text)
}

/// Pretty JSON. Floats are written in shortest round-trip form, so
/// `from_json_str(to_json_string(x)) == x` bit for bit.
pub fn to_json_string(inst: &Instance) -> Result<String> {
    serde_json::to_string_pretty(inst).map_err(|e| Error::Parameter(e.to_string()))
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json_string(inst)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json_str(&text)
}

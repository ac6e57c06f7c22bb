use std::fs;
use std::path::Path;

use bfree::family::BFamily;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Reads a family spec; `.json` files are JSON, anything else TOML.
pub fn load_family(path: &Path) -> Result<BFamily, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse_family(&text, is_json)
}

pub fn parse_family(text: &str, json: bool) -> Result<BFamily, CliError> {
    let family: BFamily = if json {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed family spec: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("malformed family spec: {e}")))?
    };
    family
        .validated()
        .map_err(|e| CliError::Usage(format!("invalid family spec: {e}")))
}

/// SHA-256 of the canonical JSON form of the family.
pub fn family_hash(family: &BFamily) -> String {
    let canonical = serde_json::to_string(family).expect("families serialize");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

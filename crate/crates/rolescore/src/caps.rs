//! Caps override files: a JSON object such as `{"D18": 0.5}`.

use std::collections::BTreeMap;

use rolescore_core::{CapError, CapTable, DimensionId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CapsError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error(transparent)]
    Cap(#[from] CapError),
}

/// Checks override keys, which arrive as strings.
pub fn parse_overrides(raw: &BTreeMap<String, f64>) -> Result<BTreeMap<DimensionId, f64>, CapsError> {
    raw.iter()
        .map(|(k, v)| {
            k.parse::<DimensionId>()
                .map(|id| (id, *v))
                .map_err(|_| CapsError::UnknownDimension(k.clone()))
        })
        .collect()
}

/// Overlays `overrides` on `base`. Only capped dimensions may be overridden.
pub fn merge(base: &CapTable, overrides: &BTreeMap<DimensionId, f64>) -> Result<CapTable, CapsError> {
    // validates the keys and values the same way a fresh override would
    CapTable::with_overrides(overrides.clone())?;
    let mut all: BTreeMap<DimensionId, f64> = base.iter().collect();
    all.extend(overrides.iter().map(|(k, v)| (*k, *v)));
    Ok(CapTable::new(all)?)
}

/// Default caps with the file's overrides applied.
pub fn load_caps(text: &str) -> Result<CapTable, CapsError> {
    let raw: BTreeMap<String, f64> =
        serde_json::from_str(text).map_err(|e| CapsError::Parse(e.to_string()))?;
    merge(&CapTable::default(), &parse_overrides(&raw)?)
}

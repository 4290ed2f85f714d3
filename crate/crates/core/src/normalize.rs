//! Maps raw dimension values into `[0, 1]` against fixed reference caps.
//!
//! Normalization sees only one value and the cap table, never other runs, so
//! a run's normalized scores cannot shift when the cohort around it changes.

use alloc::collections::BTreeMap;

use serde::Serialize;

use crate::dimension::{DimensionId, Strategy};
use crate::engine::{DimensionStatus, DimensionValue, UnavailableReason};

/// Reference caps for the eight capped (cost, time, token, tool) dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CapTable(BTreeMap<DimensionId, f64>);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CapError {
    #[error("{0} is not a capped dimension")]
    NotCapped(DimensionId),
    #[error("cap for {0} must be a positive finite number, got {1}")]
    NonPositive(DimensionId, f64),
    #[error("missing cap for {0}")]
    Missing(DimensionId),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalizeError {
    #[error("no cap configured for {0}")]
    MissingCap(DimensionId),
}

impl Default for CapTable {
    fn default() -> Self {
        let caps = [
            (DimensionId::D18, 0.50),
            (DimensionId::D19, 2.00),
            (DimensionId::D20, 100.0),
            (DimensionId::D21, 120.0),
            (DimensionId::D22, 60.0),
            (DimensionId::D23, 50_000.0),
            (DimensionId::D24, 30.0),
            (DimensionId::D25, 20.0),
        ];
        CapTable(caps.into_iter().collect())
    }
}

impl CapTable {
    /// Builds a complete table: exactly the eight capped dimensions, each
    /// with a strictly positive cap.
    pub fn new(caps: BTreeMap<DimensionId, f64>) -> Result<Self, CapError> {
        check_entries(&caps)?;
        if let Some(missing) = DimensionId::all().find(|d| d.is_capped() && !caps.contains_key(d)) {
            return Err(CapError::Missing(missing));
        }
        Ok(CapTable(caps))
    }

    /// Replaces the default caps for the given dimensions.
    pub fn with_overrides(overrides: BTreeMap<DimensionId, f64>) -> Result<Self, CapError> {
        check_entries(&overrides)?;
        let mut table = CapTable::default();
        table.0.extend(overrides);
        Ok(table)
    }

    pub fn get(&self, id: DimensionId) -> Option<f64> {
        self.0.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DimensionId, f64)> + '_ {
        self.0.iter().map(|(d, c)| (*d, *c))
    }

    /// A table with an arbitrary subset of entries, for exercising the
    /// missing-cap path. Entries are not validated.
    #[doc(hidden)]
    pub fn from_raw_unchecked(caps: BTreeMap<DimensionId, f64>) -> Self {
        CapTable(caps)
    }
}

fn check_entries(caps: &BTreeMap<DimensionId, f64>) -> Result<(), CapError> {
    for (&id, &cap) in caps {
        if !id.is_capped() {
            return Err(CapError::NotCapped(id));
        }
        if !(cap.is_finite() && cap > 0.0) {
            return Err(CapError::NonPositive(id, cap));
        }
    }
    Ok(())
}

/// A dimension value paired with its normalized score.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalized {
    Available { raw: f64, score: f64 },
    Unavailable(UnavailableReason),
}

impl Normalized {
    pub fn score(&self) -> Option<f64> {
        match self {
            Normalized::Available { score, .. } => Some(*score),
            Normalized::Unavailable(_) => None,
        }
    }
}

/// Applies the dimension's strategy to an available raw value; unavailable
/// values pass through.
pub fn normalize(value: &DimensionValue, caps: &CapTable) -> Result<Normalized, NormalizeError> {
    let raw = match &value.status {
        DimensionStatus::Available { raw, .. } => *raw,
        DimensionStatus::Unavailable(reason) => return Ok(Normalized::Unavailable(reason.clone())),
    };
    let score = normalize_raw(value.id, raw, caps)?;
    Ok(Normalized::Available { raw, score })
}

/// Normalized score of a raw value for dimension `id`.
pub fn normalize_raw(id: DimensionId, raw: f64, caps: &CapTable) -> Result<f64, NormalizeError> {
    let cap = || caps.get(id).ok_or(NormalizeError::MissingCap(id));
    Ok(match id.strategy() {
        Strategy::Ratio => raw.clamp(0.0, 1.0),
        Strategy::Mcc => ((raw + 1.0) / 2.0).clamp(0.0, 1.0),
        Strategy::LowerIsBetter => (1.0 - (raw / cap()?).min(1.0)).clamp(0.0, 1.0),
        Strategy::HigherIsBetter => (raw / cap()?).min(1.0).clamp(0.0, 1.0),
    })
}

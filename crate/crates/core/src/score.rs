//! Decision Score with dynamic exclusion, letter grades, and per-role reports.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dimension::{Category, DimensionId};
use crate::engine::DimensionVector;
use crate::normalize::{normalize, CapTable, NormalizeError, Normalized};
use crate::profile::RoleProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    F,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::F => "F",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("score {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("no dimension selected by profile `{profile}` is available for run `{run_id}`")]
    NoAvailableDimensions { run_id: String, profile: String },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

/// Letter grade for a Decision Score; every threshold is inclusive.
pub fn grade(score: f64) -> Result<Grade, ScoreError> {
    if !(0.0..=100.0).contains(&score) {
        return Err(ScoreError::OutOfRange(score));
    }
    Ok(if score >= 75.0 {
        Grade::A
    } else if score >= 60.0 {
        Grade::B
    } else if score >= 50.0 {
        Grade::C
    } else if score >= 40.0 {
        Grade::D
    } else {
        Grade::F
    })
}

/// One available dimension's share of the score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub dimension: DimensionId,
    pub weight: u32,
    pub normalized: f64,
    /// `weight × normalized`.
    pub weighted: f64,
}

/// A selected dimension dropped from both numerator and denominator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub dimension: DimensionId,
    pub weight: u32,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    /// Available weight in this category.
    pub weight: u32,
    /// Weighted mean of the normalized scores, in `[0, 1]`.
    pub mean_score: f64,
}

/// Per (run, profile) scoring result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub run_id: String,
    pub profile_name: String,
    /// Full-precision score in `[0, 100]`.
    pub score: f64,
    pub grade: Grade,
    pub available_weight: u32,
    pub contributions: Vec<Contribution>,
    pub exclusions: Vec<Exclusion>,
    pub category_subtotals_scored: BTreeMap<Category, CategoryScore>,
}

impl DecisionReport {
    pub fn excluded_weight(&self) -> u32 {
        self.exclusions.iter().map(|e| e.weight).sum()
    }
}

/// Weighted mean of the available normalized scores of the profile's
/// dimensions, times 100. Unavailable dimensions leave both the numerator and
/// the denominator.
pub fn decision_score(
    dims: &DimensionVector,
    profile: &RoleProfile,
    caps: &CapTable,
) -> Result<DecisionReport, ScoreError> {
    let mut contributions = Vec::new();
    let mut exclusions = Vec::new();
    for (&id, &weight) in &profile.weights {
        match normalize(dims.get(id), caps)? {
            Normalized::Available { score, .. } => contributions.push(Contribution {
                dimension: id,
                weight,
                normalized: score,
                weighted: f64::from(weight) * score,
            }),
            Normalized::Unavailable(reason) => exclusions.push(Exclusion {
                dimension: id,
                weight,
                reason: reason.code().to_string(),
                detail: reason.detail().map(ToString::to_string),
            }),
        }
    }

    let available_weight: u32 = contributions.iter().map(|c| c.weight).sum();
    if available_weight == 0 {
        return Err(ScoreError::NoAvailableDimensions {
            run_id: dims.run_id.clone(),
            profile: profile.name.clone(),
        });
    }
    let weighted: f64 = contributions.iter().map(|c| c.weighted).sum();
    let score = (100.0 * weighted / f64::from(available_weight)).clamp(0.0, 100.0);

    let mut by_category: BTreeMap<Category, (u32, f64)> = BTreeMap::new();
    for c in &contributions {
        let entry = by_category.entry(c.dimension.category()).or_default();
        entry.0 += c.weight;
        entry.1 += c.weighted;
    }
    let category_subtotals_scored = by_category
        .into_iter()
        .map(|(cat, (weight, sum))| {
            (
                cat,
                CategoryScore {
                    weight,
                    mean_score: sum / f64::from(weight),
                },
            )
        })
        .collect();

    Ok(DecisionReport {
        run_id: dims.run_id.clone(),
        profile_name: profile.name.clone(),
        score,
        grade: grade(score)?,
        available_weight,
        contributions,
        exclusions,
        category_subtotals_scored,
    })
}

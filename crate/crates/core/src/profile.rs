//! Stakeholder weight profiles and the five built-in lenses.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dimension::{Category, DimensionId};

/// Every publishable profile distributes exactly this many weight points.
pub const WEIGHT_TOTAL: u32 = 80;

/// Allowed number of selected dimensions, inclusive.
pub const MIN_DIMENSIONS: usize = 12;
pub const MAX_DIMENSIONS: usize = 16;

/// A named stakeholder lens: a subset of dimensions with integer weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleProfile {
    pub name: String,
    pub description: String,
    pub weights: BTreeMap<DimensionId, u32>,
}

impl RoleProfile {
    pub fn total_weight(&self) -> u32 {
        self.weights.values().sum()
    }

    pub fn weight(&self, id: DimensionId) -> Option<u32> {
        self.weights.get(&id).copied()
    }

    /// Copy with every weight multiplied by `k`. The result no longer sums to
    /// 80 and only passes relaxed validation.
    pub fn scaled(&self, k: u32) -> RoleProfile {
        RoleProfile {
            name: self.name.clone(),
            description: self.description.clone(),
            weights: self.weights.iter().map(|(d, w)| (*d, w * k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ProfileViolation {
    /// Weights do not total 80.
    WeightSum { sum: u32 },
    /// Selected dimension count outside the allowed range.
    DimensionCount { count: usize, min: usize, max: usize },
    /// A selected dimension carries weight 0.
    ZeroWeight { dimension: DimensionId },
    EmptyName,
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileViolation::WeightSum { sum } => write!(f, "sum {sum} ≠ {WEIGHT_TOTAL}"),
            ProfileViolation::DimensionCount { count, min, max } => {
                write!(f, "{count} dims outside [{min},{max}]")
            }
            ProfileViolation::ZeroWeight { dimension } => {
                write!(f, "{dimension} has weight 0 (omit it instead)")
            }
            ProfileViolation::EmptyName => f.write_str("profile name is empty"),
        }
    }
}

/// Checks a profile against every publishing rule and returns all violations.
pub fn validate(profile: &RoleProfile) -> Vec<ProfileViolation> {
    let mut violations = common_violations(profile);
    let count = profile.weights.len();
    if !(MIN_DIMENSIONS..=MAX_DIMENSIONS).contains(&count) {
        violations.push(ProfileViolation::DimensionCount {
            count,
            min: MIN_DIMENSIONS,
            max: MAX_DIMENSIONS,
        });
    }
    let sum = profile.total_weight();
    if sum != WEIGHT_TOTAL {
        violations.push(ProfileViolation::WeightSum { sum });
    }
    violations
}

/// Validation for exploratory edits: any nonempty selection of positive
/// weights, no constraint on the total.
pub fn validate_relaxed(profile: &RoleProfile) -> Vec<ProfileViolation> {
    let mut violations = common_violations(profile);
    if profile.weights.is_empty() {
        violations.push(ProfileViolation::DimensionCount {
            count: 0,
            min: 1,
            max: DimensionId::COUNT,
        });
    }
    violations
}

fn common_violations(profile: &RoleProfile) -> Vec<ProfileViolation> {
    let mut violations = Vec::new();
    if profile.name.trim().is_empty() {
        violations.push(ProfileViolation::EmptyName);
    }
    for (&dimension, &w) in &profile.weights {
        if w == 0 {
            violations.push(ProfileViolation::ZeroWeight { dimension });
        }
    }
    violations
}

/// Weight per category under the standard dimension-to-category mapping.
/// All seven categories are present, zero where the profile selects nothing.
pub fn category_subtotals(profile: &RoleProfile) -> BTreeMap<Category, u32> {
    category_subtotals_with(profile, DimensionId::category)
}

/// Weight per category under a caller-supplied mapping.
pub fn category_subtotals_with(
    profile: &RoleProfile,
    category_of: impl Fn(DimensionId) -> Category,
) -> BTreeMap<Category, u32> {
    let mut totals: BTreeMap<Category, u32> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    for (&d, &w) in &profile.weights {
        *totals.entry(category_of(d)).or_default() += w;
    }
    totals
}

struct Builtin {
    name: &'static str,
    description: &'static str,
    weights: &'static [(u8, u32)],
}

const BUILTINS: [Builtin; 5] = [
    Builtin {
        name: "ciso",
        description: "Chief Information Security Officer: trustworthy, severity-aware detection across the security program.",
        weights: &[
            (1, 10), (2, 8), (3, 6), (5, 2), (6, 5), (8, 5), (9, 4), (10, 6),
            (11, 3), (14, 4), (18, 2), (28, 10), (29, 8), (33, 3), (34, 3), (35, 1),
        ],
    },
    Builtin {
        name: "caio",
        description: "Chief AI Officer: capability balanced against cost, efficiency, and deployment readiness.",
        weights: &[
            (1, 9), (4, 7), (9, 4), (15, 1), (18, 5), (20, 8), (22, 6), (25, 5),
            (26, 3), (27, 7), (30, 5), (31, 4), (32, 6), (34, 10),
        ],
    },
    Builtin {
        name: "researcher",
        description: "Security researcher: precise vulnerability classification, localization, and evidence.",
        weights: &[
            (1, 8), (2, 6), (6, 12), (7, 10), (8, 3), (9, 7), (10, 5), (11, 4),
            (14, 10), (15, 2), (16, 7), (17, 2), (35, 4),
        ],
    },
    Builtin {
        name: "head_of_engineering",
        description: "Head of Engineering: precise, actionable findings that are fast and cheap enough for CI.",
        weights: &[
            (2, 5), (3, 12), (5, 4), (7, 8), (8, 10), (12, 3), (18, 7), (21, 7),
            (22, 5), (23, 3), (31, 7), (32, 3), (33, 6),
        ],
    },
    Builtin {
        name: "ai_actor",
        description: "AI as actor: fitness for autonomous operation without crashes or format failures.",
        weights: &[
            (1, 10), (4, 7), (9, 3), (11, 4), (14, 2), (25, 5), (26, 5), (27, 8),
            (31, 3), (32, 6), (33, 6), (34, 12), (35, 9),
        ],
    },
];

fn materialize(b: &Builtin) -> RoleProfile {
    RoleProfile {
        name: b.name.into(),
        description: b.description.into(),
        weights: b
            .weights
            .iter()
            .map(|&(n, w)| (DimensionId::new(n).expect("built-in ids are valid"), w))
            .collect(),
    }
}

/// The five built-in profiles in canonical order.
pub fn builtin_profiles() -> Vec<RoleProfile> {
    BUILTINS.iter().map(materialize).collect()
}

/// Looks up a built-in profile by name, case-insensitively.
pub fn builtin(name: &str) -> Option<RoleProfile> {
    BUILTINS
        .iter()
        .find(|b| b.name.eq_ignore_ascii_case(name))
        .map(materialize)
}

//! Role-weighted decision scoring for vulnerability-detection benchmark runs.
//!
//! The crate turns per-task benchmark records into 35 evaluation dimensions,
//! normalizes them against fixed reference caps, and aggregates them under
//! stakeholder weight profiles into a 0-100 Decision Score with a letter
//! grade. Cohort analytics (leaderboards, role divergence, dimension impact)
//! sit on top of the per-run reports.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std`; file formats, the CLI, and the HTTP service live in the
//! `rolescore` crate.

#![no_std]

extern crate alloc;

pub mod cohort;
pub mod dimension;
pub mod engine;
pub mod normalize;
pub mod profile;
pub mod record;
pub mod score;
pub mod synth;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

mod binary;

pub use cohort::{
    benchmark_pct, category_leaders, impact, leaderboard, rdi, rdi_for_reports, CategoryLeader,
    Cohort, CohortError, CohortRun, ImpactEntry, ImpactOmission, ImpactResult, LeaderboardMetric,
    LeaderboardRow, RdiResult, RoleScore, VarianceKind,
};
pub use dimension::{Category, DimensionId, Strategy};
pub use engine::{
    compute_all, per_group_f1, DimensionStatus, DimensionValue, DimensionVector, GroupBy,
    UnavailableReason,
};
pub use normalize::{normalize, CapTable, CapError, NormalizeError, Normalized};
pub use profile::{
    builtin, builtin_profiles, category_subtotals, category_subtotals_with, validate,
    validate_relaxed, ProfileViolation, RoleProfile, WEIGHT_TOTAL,
};
pub use record::{
    confusion, interval_iou, ConfusionMatrix, Layer, LineRange, ParseStatus, RecordError,
    RunMeta, RunRecord, Severity, TaskResult, TaskType, Verdict,
};
pub use score::{decision_score, grade, CategoryScore, Contribution, DecisionReport, Exclusion, Grade, ScoreError};
pub use synth::{generate, CategorySpec, IntRange, Range, SeverityMix, SynthError, SynthSpec};

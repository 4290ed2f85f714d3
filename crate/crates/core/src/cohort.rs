//! Multi-run analytics: leaderboards, role divergence, dimension impact, and
//! per-category leaders.
//!
//! Per-run artifacts (dimension vectors, decision reports) are computed
//! exactly as they would be outside a cohort; only rankings and variances
//! depend on cohort membership.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionId;
use crate::engine::{compute_all, per_group_f1, DimensionVector, GroupBy};
use crate::normalize::{normalize, CapTable};
use crate::profile::RoleProfile;
use crate::record::{Layer, RunRecord, TaskType};
use crate::score::{decision_score, DecisionReport, ScoreError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CohortError {
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("cohort mixes CIP and TU runs")]
    MixedLayers,
    #[error("duplicate run_id `{0}` in cohort")]
    DuplicateRunId(String),
    #[error("role divergence needs at least two scored profiles, got {0}")]
    TooFewProfiles(usize),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// A run together with its precomputed dimension vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortRun {
    pub run: RunRecord,
    pub dims: DimensionVector,
}

impl CohortRun {
    pub fn new(run: RunRecord) -> Self {
        let dims = compute_all(&run);
        CohortRun { run, dims }
    }

    pub fn run_id(&self) -> &str {
        self.run.run_id()
    }
}

/// A set of runs with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cohort {
    runs: Vec<CohortRun>,
}

impl Cohort {
    pub fn new(runs: impl IntoIterator<Item = RunRecord>) -> Result<Self, CohortError> {
        Self::from_runs(runs.into_iter().map(CohortRun::new))
    }

    pub fn from_runs(runs: impl IntoIterator<Item = CohortRun>) -> Result<Self, CohortError> {
        let runs: Vec<CohortRun> = runs.into_iter().collect();
        let mut seen = BTreeSet::new();
        for r in &runs {
            if !seen.insert(r.run_id()) {
                return Err(CohortError::DuplicateRunId(r.run_id().to_string()));
            }
        }
        Ok(Cohort { runs })
    }

    pub fn runs(&self) -> &[CohortRun] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn get(&self, run_id: &str) -> Option<&CohortRun> {
        self.runs.iter().find(|r| r.run_id() == run_id)
    }

    /// The shared layer, or `MixedLayers`/`EmptyCohort`.
    pub fn layer(&self) -> Result<Layer, CohortError> {
        let first = self.runs.first().ok_or(CohortError::EmptyCohort)?.run.layer();
        if self.runs.iter().all(|r| r.run.layer() == first) {
            Ok(first)
        } else {
            Err(CohortError::MixedLayers)
        }
    }

    /// Sub-cohort of the given runs, in the requested order. Unknown ids are
    /// returned as the error value.
    pub fn select(&self, run_ids: &[String]) -> Result<Cohort, String> {
        let runs = run_ids
            .iter()
            .map(|id| self.get(id).cloned().ok_or_else(|| id.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Cohort::from_runs(runs).map_err(|e| e.to_string())
    }
}

/// Share of available benchmark points earned, in percent. A true-positive
/// task is worth 3 (verdict, CWE, location) and a post-patch task 1.
pub fn benchmark_pct(run: &RunRecord) -> f64 {
    let (mut earned, mut max) = (0u64, 0u64);
    for t in run.tasks() {
        match t.task_type {
            TaskType::TruePositive => {
                max += 3;
                if t.is_detected() {
                    earned += 1;
                    earned += u64::from(t.cwe_match == Some(true));
                    earned += u64::from(t.location_match == Some(true));
                }
            }
            TaskType::PostPatch => {
                max += 1;
                earned += u64::from(!t.is_detected());
            }
            TaskType::SastFp => {}
        }
    }
    if max == 0 {
        0.0
    } else {
        100.0 * earned as f64 / max as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeaderboardMetric {
    BenchmarkPct,
    DecisionScore(RoleProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub run_id: String,
    pub model_name: String,
    pub value: f64,
}

/// Runs ordered by descending metric; ties go to the lexicographically
/// smaller run id.
pub fn leaderboard(
    cohort: &Cohort,
    metric: &LeaderboardMetric,
    caps: &CapTable,
) -> Result<Vec<LeaderboardRow>, CohortError> {
    cohort.layer()?;
    let mut rows = cohort
        .runs()
        .iter()
        .map(|r| {
            let value = match metric {
                LeaderboardMetric::BenchmarkPct => benchmark_pct(&r.run),
                LeaderboardMetric::DecisionScore(profile) => {
                    decision_score(&r.dims, profile, caps)?.score
                }
            };
            Ok(LeaderboardRow {
                rank: 0,
                run_id: r.run_id().to_string(),
                model_name: r.run.model_name().to_string(),
                value,
            })
        })
        .collect::<Result<Vec<_>, CohortError>>()?;
    rows.sort_by(|a, b| descending(a.value, b.value).then_with(|| a.run_id.cmp(&b.run_id)));
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(rows)
}

fn descending(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleScore {
    pub profile_name: String,
    pub score: f64,
}

impl RoleScore {
    pub fn new(profile_name: impl Into<String>, score: f64) -> Self {
        RoleScore {
            profile_name: profile_name.into(),
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdiResult {
    pub run_id: String,
    pub rdi: f64,
    pub best_role: RoleScore,
    pub worst_role: RoleScore,
}

/// Role Divergence Index: best minus worst Decision Score across roles.
/// Ties resolve to the earliest role in input order.
pub fn rdi(run_id: &str, scores: &[RoleScore]) -> Result<RdiResult, CohortError> {
    if scores.len() < 2 {
        return Err(CohortError::TooFewProfiles(scores.len()));
    }
    let mut best = &scores[0];
    let mut worst = &scores[0];
    for s in &scores[1..] {
        if s.score > best.score {
            best = s;
        }
        if s.score < worst.score {
            worst = s;
        }
    }
    Ok(RdiResult {
        run_id: run_id.to_string(),
        rdi: best.score - worst.score,
        best_role: best.clone(),
        worst_role: worst.clone(),
    })
}

/// RDI over one run's decision reports.
pub fn rdi_for_reports(reports: &[DecisionReport]) -> Result<RdiResult, CohortError> {
    let run_id = reports.first().map(|r| r.run_id.clone()).unwrap_or_default();
    let scores: Vec<RoleScore> = reports
        .iter()
        .map(|r| RoleScore::new(r.profile_name.clone(), r.score))
        .collect();
    rdi(&run_id, &scores)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactEntry {
    pub dimension: DimensionId,
    pub weight: u32,
    pub variance: f64,
    pub impact: f64,
    /// Runs the variance was taken over.
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactOmission {
    pub dimension: DimensionId,
    pub weight: u32,
    pub available_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactResult {
    pub profile_name: String,
    pub variance: VarianceKind,
    /// Sorted by impact, highest first.
    pub entries: Vec<ImpactEntry>,
    /// Selected dimensions available in fewer than two runs.
    pub omitted: Vec<ImpactOmission>,
}

/// Weight times cross-run variance of each selected dimension's normalized
/// score. Variance covers only the runs where the dimension is available.
pub fn impact(
    cohort: &Cohort,
    profile: &RoleProfile,
    caps: &CapTable,
    variance: VarianceKind,
) -> Result<ImpactResult, CohortError> {
    if cohort.is_empty() {
        return Err(CohortError::EmptyCohort);
    }
    let mut entries = Vec::new();
    let mut omitted = Vec::new();
    for (&id, &weight) in &profile.weights {
        let mut scores = Vec::with_capacity(cohort.len());
        for r in cohort.runs() {
            let normalized = normalize(r.dims.get(id), caps).map_err(ScoreError::from)?;
            if let Some(s) = normalized.score() {
                scores.push(s);
            }
        }
        if scores.len() < 2 {
            omitted.push(ImpactOmission {
                dimension: id,
                weight,
                available_runs: scores.len(),
            });
            continue;
        }
        let var = variance_of(&scores, variance);
        entries.push(ImpactEntry {
            dimension: id,
            weight,
            variance: var,
            impact: f64::from(weight) * var,
            runs: scores.len(),
        });
    }
    entries.sort_by(|a, b| descending(a.impact, b.impact).then(a.dimension.cmp(&b.dimension)));
    Ok(ImpactResult {
        profile_name: profile.name.clone(),
        variance,
        entries,
        omitted,
    })
}

fn variance_of(values: &[f64], kind: VarianceKind) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    match kind {
        VarianceKind::Population => ss / n,
        VarianceKind::Sample => ss / (n - 1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryLeader {
    pub run_id: String,
    pub model_name: String,
    pub f1: f64,
}

/// For every category present in any run, the runs that cover it ranked by
/// per-category F1 (ties by run id).
pub fn category_leaders(cohort: &Cohort) -> BTreeMap<String, Vec<CategoryLeader>> {
    let mut table: BTreeMap<String, Vec<CategoryLeader>> = BTreeMap::new();
    for r in cohort.runs() {
        for (category, f1) in per_group_f1(&r.run, GroupBy::Category) {
            table.entry(category).or_default().push(CategoryLeader {
                run_id: r.run_id().to_string(),
                model_name: r.run.model_name().to_string(),
                f1,
            });
        }
    }
    for leaders in table.values_mut() {
        leaders.sort_by(|a, b| descending(a.f1, b.f1).then_with(|| a.run_id.cmp(&b.run_id)));
    }
    table
}

//! Serializable views shared by the CLI and the HTTP service, so both emit
//! identical JSON for the same inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use rolescore_core::{
    benchmark_pct, category_subtotals, decision_score, leaderboard, rdi_for_reports, validate,
    CapTable, Category, Cohort, CohortError, CohortRun, DecisionReport, DimensionId, Grade,
    ImpactResult, Layer, LeaderboardMetric, LeaderboardRow, Normalized, NormalizeError,
    ProfileViolation, RdiResult, RoleProfile, ScoreError, Strategy,
};

use crate::profiles::ProfileSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub model_name: String,
    pub layer: Layer,
    pub task_count: usize,
    pub benchmark_pct: f64,
    pub cost_tracked: bool,
    pub severity_present: bool,
    pub has_sast_fp: bool,
}

impl RunSummary {
    pub fn of(run: &CohortRun) -> Self {
        let r = &run.run;
        RunSummary {
            run_id: r.run_id().to_string(),
            model_name: r.model_name().to_string(),
            layer: r.layer(),
            task_count: r.tasks().len(),
            benchmark_pct: benchmark_pct(r),
            cost_tracked: r.cost_tracked(),
            severity_present: r.severity_present(),
            has_sast_fp: r.has_sast_fp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub id: DimensionId,
    pub name: String,
    pub category: Category,
    pub strategy: Strategy,
    /// `available` or `unavailable`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionsView {
    pub run_id: String,
    pub model_name: String,
    pub layer: Layer,
    pub dimensions: Vec<DimensionRow>,
}

pub fn dimensions_view(run: &CohortRun, caps: &CapTable) -> Result<DimensionsView, NormalizeError> {
    let dimensions = run
        .dims
        .values
        .iter()
        .map(|v| {
            let normalized = rolescore_core::normalize(v, caps)?;
            let (status, normalized, reason, detail) = match &normalized {
                Normalized::Available { score, .. } => ("available", Some(*score), None, None),
                Normalized::Unavailable(r) => (
                    "unavailable",
                    None,
                    Some(r.code().to_string()),
                    r.detail().map(str::to_string),
                ),
            };
            Ok(DimensionRow {
                id: v.id,
                name: v.id.name().to_string(),
                category: v.id.category(),
                strategy: v.id.strategy(),
                status: status.to_string(),
                raw: v.raw(),
                normalized,
                note: v.note().map(str::to_string),
                reason,
                detail,
            })
        })
        .collect::<Result<_, NormalizeError>>()?;
    Ok(DimensionsView {
        run_id: run.run_id().to_string(),
        model_name: run.run.model_name().to_string(),
        layer: run.run.layer(),
        dimensions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileView {
    pub name: String,
    pub description: String,
    pub source: ProfileSource,
    pub weights: BTreeMap<DimensionId, u32>,
    pub total_weight: u32,
    pub dimension_count: usize,
    pub category_subtotals: BTreeMap<Category, u32>,
    pub violations: Vec<ProfileViolation>,
}

impl ProfileView {
    pub fn of(profile: &RoleProfile, source: ProfileSource) -> Self {
        ProfileView {
            name: profile.name.clone(),
            description: profile.description.clone(),
            source,
            weights: profile.weights.clone(),
            total_weight: profile.total_weight(),
            dimension_count: profile.weights.len(),
            category_subtotals: category_subtotals(profile),
            violations: validate(profile),
        }
    }
}

/// Output of `score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub reports: Vec<DecisionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub run_id: String,
    pub model_name: String,
    pub score: f64,
    pub grade: Grade,
}

/// Output of the what-if endpoint: the reports plus their rank order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub reports: Vec<DecisionReport>,
    pub ranking: Vec<RankEntry>,
}

/// One report per (run, profile), runs outermost.
pub fn score_runs<'a>(
    runs: impl IntoIterator<Item = &'a CohortRun>,
    profiles: &[RoleProfile],
    caps: &CapTable,
) -> Result<Vec<DecisionReport>, ScoreError> {
    let mut reports = Vec::new();
    for run in runs {
        for p in profiles {
            reports.push(decision_score(&run.dims, p, caps)?);
        }
    }
    Ok(reports)
}

/// Rank order of `cohort` under one profile, paired with each run's grade.
pub fn ranking(
    cohort: &Cohort,
    profile: &RoleProfile,
    caps: &CapTable,
) -> Result<Vec<RankEntry>, CohortError> {
    let rows = leaderboard(cohort, &LeaderboardMetric::DecisionScore(profile.clone()), caps)?;
    rows.into_iter()
        .map(|row| {
            let grade = rolescore_core::grade(row.value).map_err(CohortError::from)?;
            Ok(RankEntry {
                rank: row.rank,
                run_id: row.run_id,
                model_name: row.model_name,
                score: row.value,
                grade,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileLeaderboard {
    pub profile_name: String,
    pub rows: Vec<RankEntry>,
}

/// Output of `leaderboard`: benchmark-percentage order plus one order per
/// profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardOutput {
    pub layer: Layer,
    pub benchmark: Vec<LeaderboardRow>,
    pub profiles: Vec<ProfileLeaderboard>,
}

pub fn leaderboards(
    cohort: &Cohort,
    profiles: &[RoleProfile],
    caps: &CapTable,
) -> Result<LeaderboardOutput, CohortError> {
    let layer = cohort.layer()?;
    let benchmark = leaderboard(cohort, &LeaderboardMetric::BenchmarkPct, caps)?;
    let profiles = profiles
        .iter()
        .map(|p| {
            Ok(ProfileLeaderboard {
                profile_name: p.name.clone(),
                rows: ranking(cohort, p, caps)?,
            })
        })
        .collect::<Result<_, CohortError>>()?;
    Ok(LeaderboardOutput {
        layer,
        benchmark,
        profiles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdiRow {
    pub model_name: String,
    #[serde(flatten)]
    pub result: RdiResult,
}

/// RDI per run over `profiles`, in cohort order.
pub fn rdi_rows(
    cohort: &Cohort,
    profiles: &[RoleProfile],
    caps: &CapTable,
) -> Result<Vec<RdiRow>, CohortError> {
    cohort
        .runs()
        .iter()
        .map(|run| {
            let reports = score_runs([run], profiles, caps)?;
            Ok(RdiRow {
                model_name: run.run.model_name().to_string(),
                result: rdi_for_reports(&reports)?,
            })
        })
        .collect()
}

/// Output of `impact`: one analysis per profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactOutput {
    pub analyses: Vec<ImpactResult>,
}

/// Pretty JSON with a trailing newline; every JSON output goes through here.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("views serialize");
    s.push('\n');
    s
}

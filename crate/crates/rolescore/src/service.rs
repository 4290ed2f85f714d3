//! What-if scoring API over runs loaded once at startup.
//!
//! Dimension vectors are computed when the store is built and never change;
//! requests only re-weight them, so any request sequence is replayable.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use rolescore_core::{
    impact, validate, validate_relaxed, CapTable, Cohort, CohortError, CohortRun, DimensionId,
    ImpactResult, ProfileViolation, RoleProfile, RunRecord, ScoreError, VarianceKind,
};

use crate::caps::{merge, parse_overrides, CapsError};
use crate::profiles::ProfileRegistry;
use crate::views::{
    dimensions_view, ranking, rdi_rows, score_runs, DimensionsView, ProfileView, RdiRow,
    RunSummary, ScoreResponse,
};

pub const DEFAULT_PORT: u16 = 8080;

/// Immutable state shared by every request.
#[derive(Debug, Clone)]
pub struct Store {
    cohort: Cohort,
    profiles: ProfileRegistry,
    caps: CapTable,
}

impl Store {
    /// Runs may mix layers; comparisons check layers per request.
    pub fn new(
        runs: Vec<RunRecord>,
        profiles: ProfileRegistry,
        caps: CapTable,
    ) -> Result<Self, CohortError> {
        let cohort = if runs.is_empty() {
            Cohort::default()
        } else {
            Cohort::new(runs)?
        };
        Ok(Store {
            cohort,
            profiles,
            caps,
        })
    }

    pub fn runs(&self) -> &[CohortRun] {
        self.cohort.runs()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<ProfileViolation>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error,
                message: message.into(),
                violations: Vec::new(),
            },
        }
    }

    fn bad_request(error: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, error, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::bad_request("invalid_body", r.body_text())
    }
}

impl From<CapsError> for ApiError {
    fn from(e: CapsError) -> Self {
        ApiError::bad_request("invalid_caps", e.to_string())
    }
}

impl From<ScoreError> for ApiError {
    fn from(e: ScoreError) -> Self {
        match e {
            ScoreError::NoAvailableDimensions { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_available_dimensions", e.to_string())
            }
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

impl From<CohortError> for ApiError {
    fn from(e: CohortError) -> Self {
        match e {
            CohortError::Score(s) => s.into(),
            CohortError::MixedLayers => ApiError::bad_request("mixed_layers", e.to_string()),
            CohortError::TooFewProfiles(_) => ApiError::bad_request("too_few_profiles", e.to_string()),
            CohortError::EmptyCohort => ApiError::bad_request("empty_cohort", e.to_string()),
            CohortError::DuplicateRunId(_) => ApiError::bad_request("duplicate_run_id", e.to_string()),
        }
    }
}

/// A registry name, or a full inline profile.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Inline(InlineProfile),
    Named(NamedProfile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedProfile {
    pub name: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProfile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub weights: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub run_ids: Vec<String>,
    pub profile: ProfileRef,
    #[serde(default)]
    pub caps: Option<BTreeMap<String, f64>>,
    /// Skip the weight-total and dimension-count rules for mid-edit profiles.
    #[serde(default)]
    pub relax_sum: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdiRequest {
    pub run_ids: Vec<String>,
    /// Defaults to the built-in profiles.
    #[serde(default)]
    pub profiles: Option<Vec<ProfileRef>>,
    #[serde(default)]
    pub caps: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub relax_sum: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactRequest {
    pub run_ids: Vec<String>,
    pub profile: ProfileRef,
    #[serde(default)]
    pub caps: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub relax_sum: bool,
    #[serde(default)]
    pub variance: VarianceKind,
}

type Shared = Arc<Store>;

pub fn router(store: Store) -> Router {
    Router::new()
        .route("/api/v1/runs", get(list_runs))
        .route("/api/v1/runs/{id}/dimensions", get(run_dimensions))
        .route("/api/v1/profiles", get(list_profiles))
        .route("/api/v1/score", post(score))
        .route("/api/v1/rdi", post(rdi))
        .route("/api/v1/impact", post(impact_handler))
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(store))
}

pub async fn serve(store: Store, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}

async fn list_runs(State(store): State<Shared>) -> Json<Vec<RunSummary>> {
    Json(store.runs().iter().map(RunSummary::of).collect())
}

async fn run_dimensions(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<DimensionsView>, ApiError> {
    let run = store
        .cohort
        .get(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_run", format!("unknown run `{id}`")))?;
    let view = dimensions_view(run, &store.caps).map_err(ScoreError::from)?;
    Ok(Json(view))
}

async fn list_profiles(State(store): State<Shared>) -> Json<Vec<ProfileView>> {
    Json(
        store
            .profiles
            .iter()
            .map(|(p, s)| ProfileView::of(p, s.clone()))
            .collect(),
    )
}

impl Store {
    fn select(&self, run_ids: &[String]) -> Result<Cohort, ApiError> {
        if run_ids.is_empty() {
            return Err(ApiError::bad_request("empty_run_ids", "run_ids must be nonempty"));
        }
        for (i, id) in run_ids.iter().enumerate() {
            if self.cohort.get(id).is_none() {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "unknown_run",
                    format!("unknown run `{id}`"),
                ));
            }
            if run_ids[..i].contains(id) {
                return Err(ApiError::bad_request(
                    "duplicate_run_id",
                    format!("run `{id}` requested twice"),
                ));
            }
        }
        self.cohort
            .select(run_ids)
            .map_err(|e| ApiError::bad_request("invalid_run_ids", e))
    }

    fn caps_for(&self, overrides: Option<&BTreeMap<String, f64>>) -> Result<CapTable, ApiError> {
        match overrides {
            None => Ok(self.caps.clone()),
            Some(raw) => Ok(merge(&self.caps, &parse_overrides(raw)?)?),
        }
    }

    fn resolve(&self, r: &ProfileRef, relax_sum: bool) -> Result<RoleProfile, ApiError> {
        match r {
            ProfileRef::Named(NamedProfile { name }) => self.profiles.get(name).cloned().ok_or_else(|| {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_profile", format!("unknown profile `{name}`"))
            }),
            ProfileRef::Inline(inline) => {
                let mut weights = BTreeMap::new();
                for (k, w) in &inline.weights {
                    let id: DimensionId = k.parse().map_err(|_| {
                        ApiError::bad_request("unknown_dimension", format!("unknown dimension `{k}`"))
                    })?;
                    let w = u32::try_from(*w).map_err(|_| {
                        ApiError::bad_request("invalid_weight", format!("weight {w} for {k} is not a nonnegative integer"))
                    })?;
                    weights.insert(id, w);
                }
                let profile = RoleProfile {
                    name: inline.name.clone(),
                    description: inline.description.clone(),
                    weights,
                };
                let violations = if relax_sum {
                    validate_relaxed(&profile)
                } else {
                    validate(&profile)
                };
                if violations.is_empty() {
                    Ok(profile)
                } else {
                    let mut e = ApiError::bad_request(
                        "invalid_profile",
                        violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
                    );
                    e.body.violations = violations;
                    Err(e)
                }
            }
        }
    }
}

async fn score(
    State(store): State<Shared>,
    body: Result<Json<WhatIfRequest>, JsonRejection>,
) -> Result<Json<ScoreResponse>, ApiError> {
    let Json(req) = body?;
    let cohort = store.select(&req.run_ids)?;
    let profile = store.resolve(&req.profile, req.relax_sum)?;
    let caps = store.caps_for(req.caps.as_ref())?;
    let reports = score_runs(cohort.runs(), std::slice::from_ref(&profile), &caps)?;
    let ranking = ranking(&cohort, &profile, &caps)?;
    Ok(Json(ScoreResponse { reports, ranking }))
}

async fn rdi(
    State(store): State<Shared>,
    body: Result<Json<RdiRequest>, JsonRejection>,
) -> Result<Json<Vec<RdiRow>>, ApiError> {
    let Json(req) = body?;
    let cohort = store.select(&req.run_ids)?;
    let profiles = match &req.profiles {
        None => store.profiles.builtins(),
        Some(refs) => refs
            .iter()
            .map(|r| store.resolve(r, req.relax_sum))
            .collect::<Result<_, _>>()?,
    };
    let caps = store.caps_for(req.caps.as_ref())?;
    Ok(Json(rdi_rows(&cohort, &profiles, &caps)?))
}

async fn impact_handler(
    State(store): State<Shared>,
    body: Result<Json<ImpactRequest>, JsonRejection>,
) -> Result<Json<ImpactResult>, ApiError> {
    let Json(req) = body?;
    let cohort = store.select(&req.run_ids)?;
    cohort.layer()?;
    let profile = store.resolve(&req.profile, req.relax_sum)?;
    let caps = store.caps_for(req.caps.as_ref())?;
    Ok(Json(impact(&cohort, &profile, &caps, req.variance)?))
}

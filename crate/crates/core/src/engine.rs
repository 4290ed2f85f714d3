//! Raw values and availability of all 35 dimensions for one run.
//!
//! Availability rules run first (layer, cost tracking, severity annotations,
//! SAST false-positive tasks). A dimension that survives them but has an
//! empty population is either reported as `0` with a degenerate note (when a
//! silent model should be penalized) or marked unavailable (when the
//! population carries no signal either way).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionId;
use crate::record::{
    ConfusionMatrix, Layer, ParseStatus, RunRecord, Severity, TaskResult, TaskType, Verdict,
};

/// Why a dimension has no value for a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnavailableReason {
    /// Tool-use or location dimension on a code-in-prompt run.
    LayerCip,
    /// Cost-derived dimension on a run without cost tracking.
    NoCost,
    /// Severity dimension on a run without severity annotations.
    NoSeverity,
    /// SAST false-positive filtering without any such tasks.
    NoSastFpTasks,
    /// The dimension's population is empty.
    Degenerate(String),
}

impl UnavailableReason {
    pub fn code(&self) -> &'static str {
        match self {
            UnavailableReason::LayerCip => "layer_cip",
            UnavailableReason::NoCost => "no_cost",
            UnavailableReason::NoSeverity => "no_severity",
            UnavailableReason::NoSastFpTasks => "no_sast_fp_tasks",
            UnavailableReason::Degenerate(_) => "degenerate",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            UnavailableReason::Degenerate(detail) => Some(detail),
            _ => None,
        }
    }

    pub fn from_code(code: &str, detail: Option<String>) -> Option<Self> {
        Some(match code {
            "layer_cip" => UnavailableReason::LayerCip,
            "no_cost" => UnavailableReason::NoCost,
            "no_severity" => UnavailableReason::NoSeverity,
            "no_sast_fp_tasks" => UnavailableReason::NoSastFpTasks,
            "degenerate" => UnavailableReason::Degenerate(detail.unwrap_or_default()),
            _ => return None,
        })
    }
}

impl fmt::Display for UnavailableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnavailableReason::Degenerate(detail) => write!(f, "degenerate: {detail}"),
            other => f.write_str(other.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DimensionStatus {
    /// Computed raw value. `note` is set when the value was forced to 0 by an
    /// empty denominator.
    Available { raw: f64, note: Option<String> },
    Unavailable(UnavailableReason),
}

/// Raw result of one dimension for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ValueRepr", try_from = "ValueRepr")]
pub struct DimensionValue {
    pub id: DimensionId,
    pub status: DimensionStatus,
}

impl DimensionValue {
    pub fn available(id: DimensionId, raw: f64) -> Self {
        DimensionValue {
            id,
            status: DimensionStatus::Available { raw, note: None },
        }
    }

    pub fn degenerate_zero(id: DimensionId, note: impl Into<String>) -> Self {
        DimensionValue {
            id,
            status: DimensionStatus::Available {
                raw: 0.0,
                note: Some(note.into()),
            },
        }
    }

    pub fn unavailable(id: DimensionId, reason: UnavailableReason) -> Self {
        DimensionValue {
            id,
            status: DimensionStatus::Unavailable(reason),
        }
    }

    pub fn raw(&self) -> Option<f64> {
        match self.status {
            DimensionStatus::Available { raw, .. } => Some(raw),
            DimensionStatus::Unavailable(_) => None,
        }
    }

    pub fn note(&self) -> Option<&str> {
        match &self.status {
            DimensionStatus::Available { note, .. } => note.as_deref(),
            DimensionStatus::Unavailable(_) => None,
        }
    }

    pub fn reason(&self) -> Option<&UnavailableReason> {
        match &self.status {
            DimensionStatus::Available { .. } => None,
            DimensionStatus::Unavailable(reason) => Some(reason),
        }
    }

    pub fn is_available(&self) -> bool {
        matches!(self.status, DimensionStatus::Available { .. })
    }
}

#[derive(Serialize, Deserialize)]
struct ValueRepr {
    id: DimensionId,
    status: StatusTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum StatusTag {
    Available,
    Unavailable,
}

impl From<DimensionValue> for ValueRepr {
    fn from(value: DimensionValue) -> Self {
        match value.status {
            DimensionStatus::Available { raw, note } => ValueRepr {
                id: value.id,
                status: StatusTag::Available,
                raw: Some(raw),
                note,
                reason: None,
                detail: None,
            },
            DimensionStatus::Unavailable(reason) => ValueRepr {
                id: value.id,
                status: StatusTag::Unavailable,
                raw: None,
                note: None,
                reason: Some(reason.code().to_string()),
                detail: reason.detail().map(ToString::to_string),
            },
        }
    }
}

impl TryFrom<ValueRepr> for DimensionValue {
    type Error = String;

    fn try_from(repr: ValueRepr) -> Result<Self, Self::Error> {
        let status = match repr.status {
            StatusTag::Available => DimensionStatus::Available {
                raw: repr.raw.ok_or("available dimension without `raw`")?,
                note: repr.note,
            },
            StatusTag::Unavailable => {
                let code = repr.reason.ok_or("unavailable dimension without `reason`")?;
                DimensionStatus::Unavailable(
                    UnavailableReason::from_code(&code, repr.detail)
                        .ok_or_else(|| alloc::format!("unknown reason `{code}`"))?,
                )
            }
        };
        Ok(DimensionValue {
            id: repr.id,
            status,
        })
    }
}

/// All 35 dimension results for a run, in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionVector {
    pub run_id: String,
    pub values: Vec<DimensionValue>,
}

impl DimensionVector {
    pub fn get(&self, id: DimensionId) -> &DimensionValue {
        self.values
            .iter()
            .find(|v| v.id == id)
            .expect("dimension vector holds every dimension")
    }

    pub fn get_mut(&mut self, id: DimensionId) -> &mut DimensionValue {
        self.values
            .iter_mut()
            .find(|v| v.id == id)
            .expect("dimension vector holds every dimension")
    }

    /// True when the vector holds each of the 35 dimensions exactly once.
    pub fn is_complete(&self) -> bool {
        self.values.len() == DimensionId::COUNT
            && DimensionId::all().all(|d| self.values.iter().filter(|v| v.id == d).count() == 1)
    }
}

/// Grouping key for per-group F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Category,
    Language,
}

impl GroupBy {
    fn key(self, task: &TaskResult) -> &str {
        match self {
            GroupBy::Category => &task.task_category,
            GroupBy::Language => &task.task_language,
        }
    }
}

/// F1 per category or language over the run's true-positive and post-patch
/// tasks. Groups that appear only on SAST false-positive tasks are absent.
pub fn per_group_f1(run: &RunRecord, group_by: GroupBy) -> BTreeMap<String, f64> {
    let mut groups: BTreeMap<&str, ConfusionMatrix> = BTreeMap::new();
    for task in run.tasks().iter().filter(|t| is_binary(t)) {
        let cm = groups.entry(group_by.key(task)).or_default();
        *cm = add(*cm, ConfusionMatrix::from_tasks([task]));
    }
    groups
        .into_iter()
        .map(|(k, cm)| (k.to_string(), cm.f1()))
        .collect()
}

fn add(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix {
    ConfusionMatrix {
        tp: a.tp + b.tp,
        fp: a.fp + b.fp,
        fn_: a.fn_ + b.fn_,
        tn: a.tn + b.tn,
    }
}

fn is_binary(task: &TaskResult) -> bool {
    matches!(task.task_type, TaskType::TruePositive | TaskType::PostPatch)
}

fn frac(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Computes every dimension for `run`.
pub fn compute_all(run: &RunRecord) -> DimensionVector {
    let ctx = Context::new(run);
    let values = DimensionId::all().map(|id| ctx.dimension(id)).collect();
    DimensionVector {
        run_id: run.run_id().to_string(),
        values,
    }
}

struct Context<'a> {
    run: &'a RunRecord,
    tasks: &'a [TaskResult],
    cm: ConfusionMatrix,
    positives: Vec<&'a TaskResult>,
    negatives: Vec<&'a TaskResult>,
}

impl<'a> Context<'a> {
    fn new(run: &'a RunRecord) -> Self {
        let tasks = run.tasks();
        Context {
            run,
            tasks,
            cm: ConfusionMatrix::from_tasks(tasks),
            positives: tasks
                .iter()
                .filter(|t| t.task_type == TaskType::TruePositive)
                .collect(),
            negatives: tasks
                .iter()
                .filter(|t| t.task_type == TaskType::PostPatch)
                .collect(),
        }
    }

    fn gate(&self, id: DimensionId) -> Option<UnavailableReason> {
        let n = id.number();
        if self.run.layer() == Layer::Cip && matches!(n, 7 | 8 | 24..=27) {
            return Some(UnavailableReason::LayerCip);
        }
        if !self.run.cost_tracked() && matches!(n, 18..=20) {
            return Some(UnavailableReason::NoCost);
        }
        if !self.run.severity_present() && matches!(n, 28..=30) {
            return Some(UnavailableReason::NoSeverity);
        }
        if !self.run.has_sast_fp() && n == 13 {
            return Some(UnavailableReason::NoSastFpTasks);
        }
        None
    }

    fn dimension(&self, id: DimensionId) -> DimensionValue {
        if let Some(reason) = self.gate(id) {
            return DimensionValue::unavailable(id, reason);
        }
        match self.raw(id) {
            Raw::Value(v) => DimensionValue::available(id, v),
            Raw::Zero(note) => DimensionValue::degenerate_zero(id, note),
            Raw::Missing(detail) => {
                DimensionValue::unavailable(id, UnavailableReason::Degenerate(detail.into()))
            }
        }
    }

    fn detected_positives(&self) -> impl Iterator<Item = &&'a TaskResult> {
        self.positives.iter().filter(|t| t.is_detected())
    }

    /// Count of detected true positives satisfying `pred`, over `tp`.
    fn per_tp(&self, pred: impl Fn(&TaskResult) -> bool, what: &'static str) -> Raw {
        if self.cm.tp == 0 {
            return Raw::Zero(what);
        }
        let hits = self.detected_positives().filter(|t| pred(t)).count();
        Raw::Value(hits as f64 / self.cm.tp as f64)
    }

    fn total_cost(&self) -> f64 {
        self.tasks.iter().filter_map(|t| t.cost_usd).sum()
    }

    fn mcc(&self) -> Raw {
        match self.cm.mcc() {
            Some(v) => Raw::Value(v),
            None => Raw::Zero("zero marginal in confusion matrix"),
        }
    }

    fn raw(&self, id: DimensionId) -> Raw {
        let n_tasks = self.tasks.len();
        let cm = &self.cm;
        match id.number() {
            1 => self.mcc(),
            2 => {
                if self.positives.is_empty() {
                    Raw::Missing("no true_positive tasks")
                } else {
                    Raw::Value(cm.recall())
                }
            }
            3 => {
                if cm.tp + cm.fp == 0 {
                    Raw::Zero("no vulnerable verdicts")
                } else {
                    Raw::Value(cm.precision())
                }
            }
            4 => Raw::Value(cm.f1()),
            5 => {
                if self.negatives.is_empty() {
                    Raw::Missing("no post_patch tasks")
                } else {
                    Raw::Value(frac(cm.tn as usize, self.negatives.len()))
                }
            }
            6 => self.per_tp(|t| t.cwe_match == Some(true), "no true positives"),
            7 => {
                if cm.tp == 0 {
                    Raw::Zero("no true positives")
                } else {
                    let m = mean(self.detected_positives().map(|t| t.location_iou.unwrap_or(0.0)));
                    Raw::Value(m.unwrap_or(0.0))
                }
            }
            8 => self.per_tp(
                |t| t.cwe_match == Some(true) && t.location_match == Some(true),
                "no true positives",
            ),
            9 => {
                let present: BTreeSet<&str> =
                    self.positives.iter().map(|t| t.task_category.as_str()).collect();
                if present.is_empty() {
                    return Raw::Missing("no true_positive tasks");
                }
                let hit: BTreeSet<&str> = self
                    .detected_positives()
                    .map(|t| t.task_category.as_str())
                    .collect();
                Raw::Value(frac(hit.len(), present.len()))
            }
            10 => min_group_f1(self.run, GroupBy::Category),
            11 => {
                let f1s = per_group_f1(self.run, GroupBy::Language);
                if f1s.is_empty() {
                    return Raw::Missing("no languages among scored tasks");
                }
                let mu = mean(f1s.values().copied()).unwrap_or(0.0);
                let var = mean(f1s.values().map(|f| (f - mu) * (f - mu))).unwrap_or(0.0);
                Raw::Value(1.0 - libm::sqrt(var))
            }
            12 => min_group_f1(self.run, GroupBy::Language),
            13 => {
                let sast: Vec<&TaskResult> = self
                    .tasks
                    .iter()
                    .filter(|t| t.task_type == TaskType::SastFp)
                    .collect();
                let cleared = sast
                    .iter()
                    .filter(|t| t.predicted_verdict == Some(Verdict::NotVulnerable))
                    .count();
                Raw::Value(frac(cleared, sast.len()))
            }
            14 => self.per_tp(
                |t| t.evidence_source && t.evidence_sink && t.evidence_flow,
                "no true positives",
            ),
            15 => Raw::Value(frac(
                self.tasks.iter().filter(|t| t.reasoning_present).count(),
                n_tasks,
            )),
            16 => Raw::Value(frac(
                self.tasks
                    .iter()
                    .filter(|t| t.reasoning_present && t.verdict_correct())
                    .count(),
                n_tasks,
            )),
            17 => {
                if cm.fp == 0 {
                    return Raw::Missing("no false positives");
                }
                let explained = self
                    .negatives
                    .iter()
                    .filter(|t| t.is_detected() && t.reasoning_present)
                    .count();
                Raw::Value(explained as f64 / cm.fp as f64)
            }
            18 => Raw::Value(self.total_cost() / n_tasks as f64),
            19 => {
                if cm.tp == 0 {
                    Raw::Missing("no true positives")
                } else {
                    Raw::Value(self.total_cost() / cm.tp as f64)
                }
            }
            20 => {
                let cost = self.total_cost();
                if cost == 0.0 {
                    return Raw::Missing("zero total cost");
                }
                Raw::Value(self.cm.mcc().unwrap_or(0.0) / cost)
            }
            21 => Raw::Value(self.tasks.iter().map(|t| t.wall_time_s).sum::<f64>() / n_tasks as f64),
            22 => {
                let secs: f64 = self.tasks.iter().map(|t| t.wall_time_s).sum();
                if secs == 0.0 {
                    Raw::Missing("zero total wall time")
                } else {
                    Raw::Value(60.0 * n_tasks as f64 / secs)
                }
            }
            23 => Raw::Value(
                self.tasks.iter().map(|t| t.total_tokens as f64).sum::<f64>() / n_tasks as f64,
            ),
            24 => mean(self.tasks.iter().filter_map(|t| t.tool_calls).map(f64::from))
                .map_or(Raw::Missing("no tool-call telemetry"), Raw::Value),
            25 => mean(self.tasks.iter().filter_map(|t| t.turns).map(f64::from))
                .map_or(Raw::Missing("no turn telemetry"), Raw::Value),
            26 => {
                let calls: u64 = self.tasks.iter().filter_map(|t| t.tool_calls).map(u64::from).sum();
                if calls == 0 {
                    return Raw::Missing("no tool calls");
                }
                let relevant: u64 = self
                    .tasks
                    .iter()
                    .filter_map(|t| t.tool_calls_relevant)
                    .map(u64::from)
                    .sum();
                Raw::Value(relevant as f64 / calls as f64)
            }
            27 => {
                let using: Vec<&TaskResult> = self
                    .tasks
                    .iter()
                    .filter(|t| t.tool_calls.is_some_and(|c| c >= 1))
                    .collect();
                if using.is_empty() {
                    return Raw::Missing("no tool-using tasks");
                }
                let earning = using.iter().filter(|t| earned_any(t)).count();
                Raw::Value(frac(earning, using.len()))
            }
            28 => {
                let (mut hit, mut total) = (0u32, 0u32);
                for t in &self.positives {
                    if let Some(sev) = t.task_severity {
                        total += sev.weight();
                        if t.is_detected() {
                            hit += sev.weight();
                        }
                    }
                }
                Raw::Value(f64::from(hit) / f64::from(total))
            }
            29 => {
                let severe: Vec<&&TaskResult> = self
                    .positives
                    .iter()
                    .filter(|t| matches!(t.task_severity, Some(Severity::Critical | Severity::High)))
                    .collect();
                if severe.is_empty() {
                    return Raw::Missing("no critical or high severity tasks");
                }
                let missed = severe.iter().filter(|t| !t.is_detected()).count();
                Raw::Value(1.0 - frac(missed, severe.len()))
            }
            30 => {
                let present: BTreeSet<Severity> =
                    self.positives.iter().filter_map(|t| t.task_severity).collect();
                let hit: BTreeSet<Severity> = self
                    .detected_positives()
                    .filter_map(|t| t.task_severity)
                    .collect();
                Raw::Value(frac(hit.len(), present.len()))
            }
            31 => Raw::Value(frac(
                self.tasks
                    .iter()
                    .filter(|t| t.parse_status != ParseStatus::Failed)
                    .count(),
                n_tasks,
            )),
            32 => Raw::Value(frac(
                self.tasks
                    .iter()
                    .filter(|t| t.parse_status == ParseStatus::Full)
                    .count(),
                n_tasks,
            )),
            33 => Raw::Value(1.0 - frac(self.tasks.iter().filter(|t| t.errored).count(), n_tasks)),
            34 => Raw::Value(frac(
                self.tasks
                    .iter()
                    .filter(|t| !t.errored && t.parse_status != ParseStatus::Failed)
                    .count(),
                n_tasks,
            )),
            35 => self.graceful_degradation(),
            _ => unreachable!("dimension ids are 1..=35"),
        }
    }

    /// Recall gap between common and rare categories, split at the median
    /// true-positive count per category.
    fn graceful_degradation(&self) -> Raw {
        let mut per_cat: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for t in &self.positives {
            let entry = per_cat.entry(&t.task_category).or_default();
            entry.0 += 1;
            if t.is_detected() {
                entry.1 += 1;
            }
        }
        if per_cat.is_empty() {
            return Raw::Missing("no true_positive tasks");
        }
        let mut counts: Vec<usize> = per_cat.values().map(|(n, _)| *n).collect();
        counts.sort_unstable();
        let mid = counts.len() / 2;
        let median = if counts.len() % 2 == 1 {
            counts[mid] as f64
        } else {
            (counts[mid - 1] + counts[mid]) as f64 / 2.0
        };
        let (mut common, mut rare) = ((0, 0), (0, 0));
        for &(n, hit) in per_cat.values() {
            let bucket = if n as f64 >= median { &mut common } else { &mut rare };
            bucket.0 += n;
            bucket.1 += hit;
        }
        if common.0 == 0 || rare.0 == 0 {
            return Raw::Missing("common/rare category split has an empty side");
        }
        let gap = frac(common.1, common.0) - frac(rare.1, rare.0);
        Raw::Value(1.0 - gap.abs())
    }
}

fn earned_any(task: &TaskResult) -> bool {
    task.verdict_correct() || task.cwe_match == Some(true) || task.location_match == Some(true)
}

fn min_group_f1(run: &RunRecord, group_by: GroupBy) -> Raw {
    per_group_f1(run, group_by)
        .into_values()
        .reduce(f64::min)
        .map_or(Raw::Missing("no groups among scored tasks"), Raw::Value)
}

enum Raw {
    Value(f64),
    Zero(&'static str),
    Missing(&'static str),
}

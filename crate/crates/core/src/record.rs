//! Per-task benchmark records, validated runs, and the confusion-matrix view.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    /// Pre-fix code containing the vulnerability.
    TruePositive,
    /// The same code after the official fix.
    PostPatch,
    /// A static-analysis false positive.
    SastFp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Critical,
    High,
    Medium,
    Low,
}

impl Severity {
    pub const ALL: [Severity; 4] = [
        Severity::Critical,
        Severity::High,
        Severity::Medium,
        Severity::Low,
    ];

    /// Multiplier used by severity-weighted recall.
    pub fn weight(self) -> u32 {
        match self {
            Severity::Critical => 4,
            Severity::High => 3,
            Severity::Medium => 2,
            Severity::Low => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vulnerable,
    NotVulnerable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParseStatus {
    #[serde(rename = "FULL")]
    Full,
    #[serde(rename = "PARTIAL")]
    Partial,
    #[serde(rename = "FAILED")]
    Failed,
}

/// Evaluation layer: code-in-prompt or tool-use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    #[serde(rename = "CIP")]
    Cip,
    #[serde(rename = "TU")]
    Tu,
}

impl core::fmt::Display for Layer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Layer::Cip => "CIP",
            Layer::Tu => "TU",
        })
    }
}

/// Inclusive 1-based line range, serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct LineRange {
    pub start: u32,
    pub end: u32,
}

impl From<[u32; 2]> for LineRange {
    fn from([start, end]: [u32; 2]) -> Self {
        LineRange { start, end }
    }
}

impl From<LineRange> for [u32; 2] {
    fn from(r: LineRange) -> Self {
        [r.start, r.end]
    }
}

impl LineRange {
    pub fn new(start: u32, end: u32) -> Result<Self, RecordError> {
        let range = LineRange { start, end };
        range.check()?;
        Ok(range)
    }

    pub fn is_valid(&self) -> bool {
        self.start >= 1 && self.start <= self.end
    }

    /// Number of lines covered, endpoints inclusive.
    pub fn line_count(&self) -> u32 {
        self.end - self.start + 1
    }

    fn check(&self) -> Result<(), RecordError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(RecordError::InvalidRange {
                start: self.start,
                end: self.end,
            })
        }
    }
}

/// Intersection-over-union of two inclusive line ranges.
pub fn interval_iou(predicted: LineRange, truth: LineRange) -> Result<f64, RecordError> {
    predicted.check()?;
    truth.check()?;
    let lo = predicted.start.max(truth.start);
    let hi = predicted.end.min(truth.end);
    let intersection = if hi >= lo { u64::from(hi - lo + 1) } else { 0 };
    let union = u64::from(predicted.line_count()) + u64::from(truth.line_count()) - intersection;
    Ok(intersection as f64 / union as f64)
}

/// One per-task record emitted by an upstream benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_id: String,
    pub task_type: TaskType,
    pub task_category: String,
    pub task_language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_severity: Option<Severity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::binary")]
    pub cwe_match: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::binary")]
    pub location_match: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location_iou: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_line_range: Option<LineRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_line_range: Option<LineRange>,
    #[serde(default)]
    pub reasoning_present: bool,
    #[serde(default)]
    pub evidence_source: bool,
    #[serde(default)]
    pub evidence_sink: bool,
    #[serde(default)]
    pub evidence_flow: bool,
    pub parse_status: ParseStatus,
    #[serde(default)]
    pub errored: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_usd: Option<f64>,
    #[serde(default)]
    pub total_tokens: u64,
    #[serde(default)]
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_calls: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_calls_relevant: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<u32>,
}

impl TaskResult {
    /// A minimal record: full parse, no telemetry beyond zeros.
    pub fn new(
        task_id: impl Into<String>,
        task_type: TaskType,
        category: impl Into<String>,
        language: impl Into<String>,
    ) -> Self {
        TaskResult {
            task_id: task_id.into(),
            task_type,
            task_category: category.into(),
            task_language: language.into(),
            task_severity: None,
            predicted_verdict: None,
            cwe_match: None,
            location_match: None,
            location_iou: None,
            predicted_line_range: None,
            truth_line_range: None,
            reasoning_present: false,
            evidence_source: false,
            evidence_sink: false,
            evidence_flow: false,
            parse_status: ParseStatus::Full,
            errored: false,
            cost_usd: None,
            total_tokens: 0,
            wall_time_s: 0.0,
            tool_calls: None,
            tool_calls_relevant: None,
            turns: None,
        }
    }

    pub fn is_detected(&self) -> bool {
        self.predicted_verdict == Some(Verdict::Vulnerable)
    }

    /// Verdict matches ground truth: flagged for vulnerable code, not flagged otherwise.
    pub fn verdict_correct(&self) -> bool {
        match self.task_type {
            TaskType::TruePositive => self.is_detected(),
            TaskType::PostPatch | TaskType::SastFp => !self.is_detected(),
        }
    }

    /// Checks the record-level invariants. On failure returns the offending
    /// field name and a description.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.task_id.is_empty() {
            return Err(("task_id", "must be nonempty".into()));
        }
        if self.task_severity.is_some() && self.task_type != TaskType::TruePositive {
            return Err((
                "task_severity",
                "only true_positive tasks carry a severity".into(),
            ));
        }
        if let Some(relevant) = self.tool_calls_relevant {
            match self.tool_calls {
                None => {
                    return Err((
                        "tool_calls_relevant",
                        "present without tool_calls".into(),
                    ))
                }
                Some(calls) if relevant > calls => {
                    return Err((
                        "tool_calls_relevant",
                        format!("{relevant} exceeds tool_calls {calls}"),
                    ))
                }
                _ => {}
            }
        }
        if let Some(iou) = self.location_iou {
            if !(0.0..=1.0).contains(&iou) {
                return Err(("location_iou", format!("{iou} outside [0, 1]")));
            }
        }
        if self.parse_status == ParseStatus::Failed && self.predicted_verdict.is_some() {
            return Err((
                "predicted_verdict",
                "must be absent when parse_status is FAILED".into(),
            ));
        }
        for (field, range) in [
            ("predicted_line_range", self.predicted_line_range),
            ("truth_line_range", self.truth_line_range),
        ] {
            if let Some(r) = range {
                if !r.is_valid() {
                    return Err((field, format!("invalid range [{}, {}]", r.start, r.end)));
                }
            }
        }
        if let Some(cost) = self.cost_usd {
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(("cost_usd", format!("{cost} is not a nonnegative number")));
            }
        }
        if !(self.wall_time_s.is_finite() && self.wall_time_s >= 0.0) {
            return Err((
                "wall_time_s",
                format!("{} is not a nonnegative number", self.wall_time_s),
            ));
        }
        Ok(())
    }
}

/// Run-level metadata carried in the header of a result file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub model_name: String,
    pub layer: Layer,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("run contains no tasks")]
    EmptyRun,
    #[error("duplicate task_id `{0}`")]
    DuplicateTaskId(String),
    #[error("task #{index}: field `{field}`: {message}")]
    SchemaViolation {
        index: usize,
        field: &'static str,
        message: String,
    },
    #[error("invalid line range [{start}, {end}]")]
    InvalidRange { start: u32, end: u32 },
}

/// A validated set of task results for one (model, layer) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    meta: RunMeta,
    tasks: Vec<TaskResult>,
    cost_tracked: bool,
    severity_present: bool,
    has_sast_fp: bool,
}

impl RunRecord {
    pub fn new(meta: RunMeta, tasks: Vec<TaskResult>) -> Result<Self, RecordError> {
        if tasks.is_empty() {
            return Err(RecordError::EmptyRun);
        }
        let mut seen = BTreeSet::new();
        for (index, task) in tasks.iter().enumerate() {
            task.validate()
                .map_err(|(field, message)| RecordError::SchemaViolation {
                    index,
                    field,
                    message,
                })?;
            if meta.layer == Layer::Cip && task.tool_calls.is_some() {
                return Err(RecordError::SchemaViolation {
                    index,
                    field: "tool_calls",
                    message: "CIP runs carry no tool calls".into(),
                });
            }
            if !seen.insert(task.task_id.as_str()) {
                return Err(RecordError::DuplicateTaskId(task.task_id.clone()));
            }
        }
        let cost_tracked = tasks.iter().all(|t| t.cost_usd.is_some());
        let severity_present = tasks
            .iter()
            .any(|t| t.task_type == TaskType::TruePositive && t.task_severity.is_some());
        let has_sast_fp = tasks.iter().any(|t| t.task_type == TaskType::SastFp);
        Ok(RunRecord {
            meta,
            tasks,
            cost_tracked,
            severity_present,
            has_sast_fp,
        })
    }

    pub fn meta(&self) -> &RunMeta {
        &self.meta
    }

    pub fn run_id(&self) -> &str {
        &self.meta.run_id
    }

    pub fn model_name(&self) -> &str {
        &self.meta.model_name
    }

    pub fn layer(&self) -> Layer {
        self.meta.layer
    }

    pub fn tasks(&self) -> &[TaskResult] {
        &self.tasks
    }

    /// True iff every task reports `cost_usd`.
    pub fn cost_tracked(&self) -> bool {
        self.cost_tracked
    }

    /// True iff at least one true-positive task carries a severity.
    pub fn severity_present(&self) -> bool {
        self.severity_present
    }

    pub fn has_sast_fp(&self) -> bool {
        self.has_sast_fp
    }

    pub fn into_parts(self) -> (RunMeta, Vec<TaskResult>) {
        (self.meta, self.tasks)
    }
}

/// Binary confusion counts with "vulnerable" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    /// Tallies true-positive and post-patch tasks; other task types are ignored.
    pub fn from_tasks<'a>(tasks: impl IntoIterator<Item = &'a TaskResult>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for task in tasks {
            match (task.task_type, task.is_detected()) {
                (TaskType::TruePositive, true) => cm.tp += 1,
                (TaskType::TruePositive, false) => cm.fn_ += 1,
                (TaskType::PostPatch, true) => cm.fp += 1,
                (TaskType::PostPatch, false) => cm.tn += 1,
                (TaskType::SastFp, _) => {}
            }
        }
        cm
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }

    /// `tp / (tp + fn)`, 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio_or_zero(self.tp, self.positives())
    }

    /// `tp / (tp + fp)`, 0 when nothing was flagged.
    pub fn precision(&self) -> f64 {
        ratio_or_zero(self.tp, self.tp + self.fp)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Matthews correlation; `None` when any marginal is zero.
    pub fn mcc(&self) -> Option<f64> {
        let [tp, fp, fn_, tn] = [self.tp, self.fp, self.fn_, self.tn].map(|c| c as f64);
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            None
        } else {
            Some((tp * tn - fp * fn_) / libm::sqrt(denom))
        }
    }
}

fn ratio_or_zero(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Confusion matrix of a run over its true-positive and post-patch tasks.
pub fn confusion(run: &RunRecord) -> ConfusionMatrix {
    ConfusionMatrix::from_tasks(run.tasks())
}

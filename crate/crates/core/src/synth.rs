//! Deterministic synthetic runs with controlled per-category statistics.
//!
//! Task counts always match the spec exactly; only per-task outcomes are
//! random. The random stream is ChaCha8 seeded with `seed_from_u64(seed)` and
//! consumed in a fixed order, so a (spec, seed) pair reproduces the same run
//! everywhere:
//!
//! 1. Tasks are laid out category by category (true positives, then
//!    post-patch), followed by SAST false-positive tasks. Languages are
//!    assigned round-robin over the global task index.
//! 2. Severity tiers are apportioned over all true-positive tasks by largest
//!    remainder, then shuffled.
//! 3. Per category: detection outcomes for true positives, then for
//!    post-patch tasks; then CWE and location outcomes for the detected true
//!    positives. With `exact`, each outcome set is `round(rate * n)` hits
//!    placed by a shuffle; otherwise every task is an independent draw.
//! 4. SAST verdicts.
//! 5. Per task, in layout order: parse status, error flag, reasoning,
//!    evidence, cost, wall time, tokens, then (tool-use layer) line ranges,
//!    tool calls and turns.
//!
//! Conversions: a unit float is `(next_u64 >> 11) * 2^-53`; an integer below
//! `n` is `(next_u64 * n) >> 64` over 128-bit integers; shuffles are
//! Fisher-Yates from the last element down.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::record::{
    interval_iou, Layer, LineRange, ParseStatus, RunMeta, RunRecord, Severity, TaskResult,
    TaskType, Verdict,
};

/// IoU at or above which a predicted location counts as a match.
pub const DEFAULT_LOCATION_THRESHOLD: f64 = 0.5;

/// Closed interval for uniformly drawn real telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

/// Closed interval for uniformly drawn integer telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

/// Relative frequencies of severity tiers among true-positive tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeverityMix {
    #[serde(default)]
    pub critical: u32,
    #[serde(default)]
    pub high: u32,
    #[serde(default)]
    pub medium: u32,
    #[serde(default)]
    pub low: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub true_positive: u32,
    pub post_patch: u32,
    /// Share of true positives flagged vulnerable.
    pub detection_rate: f64,
    /// Share of post-patch tasks flagged vulnerable.
    #[serde(default)]
    pub false_positive_rate: f64,
    /// Share of detected true positives with a CWE match.
    #[serde(default)]
    pub cwe_rate: f64,
    /// Share of detected true positives with a location match (tool-use only).
    #[serde(default)]
    pub location_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    #[serde(default = "default_run_id")]
    pub run_id: String,
    #[serde(default = "default_model")]
    pub model_name: String,
    pub layer: Layer,
    #[serde(default = "yes")]
    pub cost_tracked: bool,
    /// Pin outcome counts to `round(rate * n)` instead of independent draws.
    #[serde(default)]
    pub exact: bool,
    pub categories: Vec<CategorySpec>,
    #[serde(default = "default_languages")]
    pub languages: Vec<String>,
    /// Omit to generate a run without severity annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_mix: Option<SeverityMix>,
    #[serde(default)]
    pub sast_fp_tasks: u32,
    /// Share of SAST false-positive tasks correctly cleared.
    #[serde(default)]
    pub sast_fp_clear_rate: f64,
    #[serde(default)]
    pub parse_failure_rate: f64,
    #[serde(default)]
    pub partial_parse_rate: f64,
    #[serde(default)]
    pub error_rate: f64,
    #[serde(default = "one")]
    pub reasoning_rate: f64,
    /// Share of detected true positives with a complete source/sink/flow chain.
    #[serde(default)]
    pub evidence_rate: f64,
    #[serde(default = "default_cost")]
    pub cost_usd: Range,
    #[serde(default = "default_wall")]
    pub wall_time_s: Range,
    #[serde(default = "default_tokens")]
    pub tokens: IntRange,
    #[serde(default = "default_tool_calls")]
    pub tool_calls: IntRange,
    #[serde(default = "default_turns")]
    pub turns: IntRange,
    /// Share of tool calls touching relevant files.
    #[serde(default = "half")]
    pub relevant_rate: f64,
    #[serde(default = "default_threshold")]
    pub location_threshold: f64,
}

fn default_run_id() -> String {
    "synthetic".into()
}
fn default_model() -> String {
    "synthetic-model".into()
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_threshold() -> f64 {
    DEFAULT_LOCATION_THRESHOLD
}
fn default_languages() -> Vec<String> {
    ["python", "javascript", "java", "go", "c"]
        .iter()
        .map(|s| String::from(*s))
        .collect()
}
fn default_cost() -> Range {
    Range { min: 0.005, max: 0.05 }
}
fn default_wall() -> Range {
    Range { min: 2.0, max: 20.0 }
}
fn default_tokens() -> IntRange {
    IntRange { min: 1_000, max: 8_000 }
}
fn default_tool_calls() -> IntRange {
    IntRange { min: 1, max: 15 }
}
fn default_turns() -> IntRange {
    IntRange { min: 1, max: 10 }
}

impl SynthSpec {
    /// A spec with defaults for everything except layer and categories.
    pub fn new(seed: u64, layer: Layer, categories: Vec<CategorySpec>) -> Self {
        SynthSpec {
            seed,
            run_id: default_run_id(),
            model_name: default_model(),
            layer,
            cost_tracked: true,
            exact: false,
            categories,
            languages: default_languages(),
            severity_mix: None,
            sast_fp_tasks: 0,
            sast_fp_clear_rate: 0.0,
            parse_failure_rate: 0.0,
            partial_parse_rate: 0.0,
            error_rate: 0.0,
            reasoning_rate: 1.0,
            evidence_rate: 0.0,
            cost_usd: default_cost(),
            wall_time_s: default_wall(),
            tokens: default_tokens(),
            tool_calls: default_tool_calls(),
            turns: default_turns(),
            relevant_rate: 0.5,
            location_threshold: DEFAULT_LOCATION_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let rate = |name: String, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SynthError::InvalidSpec(format!("{name} = {v} outside [0, 1]")))
            }
        };
        if self.run_id.is_empty() {
            return Err(SynthError::InvalidSpec("run_id is empty".into()));
        }
        if self.categories.is_empty() {
            return Err(SynthError::InvalidSpec("no categories".into()));
        }
        if self.languages.is_empty() {
            return Err(SynthError::InvalidSpec("no languages".into()));
        }
        let mut names = alloc::collections::BTreeSet::new();
        for c in &self.categories {
            if !names.insert(c.name.as_str()) {
                return Err(SynthError::InvalidSpec(format!("duplicate category `{}`", c.name)));
            }
            rate(format!("{}.detection_rate", c.name), c.detection_rate)?;
            rate(format!("{}.false_positive_rate", c.name), c.false_positive_rate)?;
            rate(format!("{}.cwe_rate", c.name), c.cwe_rate)?;
            rate(format!("{}.location_rate", c.name), c.location_rate)?;
        }
        let total: u64 = self
            .categories
            .iter()
            .map(|c| u64::from(c.true_positive) + u64::from(c.post_patch))
            .sum::<u64>()
            + u64::from(self.sast_fp_tasks);
        if total == 0 {
            return Err(SynthError::InvalidSpec("spec produces no tasks".into()));
        }
        for (name, v) in [
            ("sast_fp_clear_rate", self.sast_fp_clear_rate),
            ("parse_failure_rate", self.parse_failure_rate),
            ("partial_parse_rate", self.partial_parse_rate),
            ("error_rate", self.error_rate),
            ("reasoning_rate", self.reasoning_rate),
            ("evidence_rate", self.evidence_rate),
            ("relevant_rate", self.relevant_rate),
            ("location_threshold", self.location_threshold),
        ] {
            rate(name.into(), v)?;
        }
        if self.parse_failure_rate + self.partial_parse_rate > 1.0 {
            return Err(SynthError::InvalidSpec(
                "parse_failure_rate + partial_parse_rate exceeds 1".into(),
            ));
        }
        for (name, r) in [("cost_usd", self.cost_usd), ("wall_time_s", self.wall_time_s)] {
            if !(r.min.is_finite() && r.max.is_finite() && 0.0 <= r.min && r.min <= r.max) {
                return Err(SynthError::InvalidSpec(format!(
                    "{name} range [{}, {}] invalid",
                    r.min, r.max
                )));
            }
        }
        for (name, r) in [
            ("tokens", self.tokens),
            ("tool_calls", self.tool_calls),
            ("turns", self.turns),
        ] {
            if r.min > r.max {
                return Err(SynthError::InvalidSpec(format!(
                    "{name} range [{}, {}] invalid",
                    r.min, r.max
                )));
            }
        }
        if let Some(mix) = self.severity_mix {
            if mix.critical + mix.high + mix.medium + mix.low == 0 {
                return Err(SynthError::InvalidSpec("severity_mix is all zero".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.0.next_u64()) * u128::from(n)) >> 64) as u64
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    fn uniform(&mut self, r: Range) -> f64 {
        r.min + (r.max - r.min) * self.unit()
    }

    fn uniform_int(&mut self, r: IntRange) -> u32 {
        r.min + self.below(u64::from(r.max - r.min) + 1) as u32
    }

    /// `n` outcomes at rate `p`: pinned count when `exact`, else independent.
    fn outcomes(&mut self, n: usize, p: f64, exact: bool) -> Vec<bool> {
        if exact {
            let hits = libm::round(p * n as f64) as usize;
            let mut v: Vec<bool> = (0..n).map(|i| i < hits).collect();
            self.shuffle(&mut v);
            v
        } else {
            (0..n).map(|_| self.chance(p)).collect()
        }
    }
}

/// Largest-remainder apportionment of `n` slots to weighted tiers.
fn apportion(n: usize, weights: [u32; 4]) -> [usize; 4] {
    let total: u64 = weights.iter().map(|w| u64::from(*w)).sum();
    let mut counts = [0usize; 4];
    let mut remainders = [(0u64, 0usize); 4];
    let mut assigned = 0;
    for (i, w) in weights.iter().enumerate() {
        let exact = n as u64 * u64::from(*w);
        counts[i] = (exact / total) as usize;
        remainders[i] = (exact % total, i);
        assigned += counts[i];
    }
    // larger remainder first, lower tier index on ties
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in remainders.iter().take(n - assigned) {
        counts[*i] += 1;
    }
    counts
}

/// Generates the run described by `spec`.
pub fn generate(spec: &SynthSpec) -> Result<RunRecord, SynthError> {
    spec.validate()?;
    let mut rng = Stream(ChaCha8Rng::seed_from_u64(spec.seed));
    let tu = spec.layer == Layer::Tu;

    let mut tasks: Vec<TaskResult> = Vec::new();
    let language = |i: usize| spec.languages[i % spec.languages.len()].clone();
    for c in &spec.categories {
        for (ty, n, tag) in [
            (TaskType::TruePositive, c.true_positive, "tp"),
            (TaskType::PostPatch, c.post_patch, "pp"),
        ] {
            for i in 0..n {
                let idx = tasks.len();
                tasks.push(TaskResult::new(
                    format!("{}-{tag}-{i:04}", c.name),
                    ty,
                    c.name.clone(),
                    language(idx),
                ));
            }
        }
    }
    for i in 0..spec.sast_fp_tasks {
        let idx = tasks.len();
        tasks.push(TaskResult::new(
            format!("sast-fp-{i:04}"),
            TaskType::SastFp,
            "sast_fp",
            language(idx),
        ));
    }

    if let Some(mix) = spec.severity_mix {
        let tp_idx: Vec<usize> = (0..tasks.len())
            .filter(|&i| tasks[i].task_type == TaskType::TruePositive)
            .collect();
        let counts = apportion(tp_idx.len(), [mix.critical, mix.high, mix.medium, mix.low]);
        let mut tiers: Vec<Severity> = Severity::ALL
            .iter()
            .zip(counts)
            .flat_map(|(s, n)| core::iter::repeat_n(*s, n))
            .collect();
        rng.shuffle(&mut tiers);
        for (i, sev) in tp_idx.into_iter().zip(tiers) {
            tasks[i].task_severity = Some(sev);
        }
    }

    // Outcome draws, category by category.
    let mut detected = alloc::vec![false; tasks.len()];
    let mut cwe = alloc::vec![false; tasks.len()];
    let mut located = alloc::vec![false; tasks.len()];
    for c in &spec.categories {
        let idx = |ty: TaskType| -> Vec<usize> {
            (0..tasks.len())
                .filter(|&i| tasks[i].task_category == c.name && tasks[i].task_type == ty)
                .collect()
        };
        let tps = idx(TaskType::TruePositive);
        let pps = idx(TaskType::PostPatch);
        for (i, hit) in tps.iter().zip(rng.outcomes(tps.len(), c.detection_rate, spec.exact)) {
            detected[*i] = hit;
        }
        for (i, hit) in pps.iter().zip(rng.outcomes(pps.len(), c.false_positive_rate, spec.exact)) {
            detected[*i] = hit;
        }
        let hits: Vec<usize> = tps.into_iter().filter(|&i| detected[i]).collect();
        for (i, m) in hits.iter().zip(rng.outcomes(hits.len(), c.cwe_rate, spec.exact)) {
            cwe[*i] = m;
        }
        for (i, m) in hits.iter().zip(rng.outcomes(hits.len(), c.location_rate, spec.exact)) {
            located[*i] = m;
        }
    }
    let sast: Vec<usize> = (0..tasks.len())
        .filter(|&i| tasks[i].task_type == TaskType::SastFp)
        .collect();
    for (i, cleared) in sast
        .iter()
        .zip(rng.outcomes(sast.len(), spec.sast_fp_clear_rate, spec.exact))
    {
        detected[*i] = !cleared;
    }

    for (i, t) in tasks.iter_mut().enumerate() {
        let u = rng.unit();
        t.parse_status = if u < spec.parse_failure_rate {
            ParseStatus::Failed
        } else if u < spec.parse_failure_rate + spec.partial_parse_rate {
            ParseStatus::Partial
        } else {
            ParseStatus::Full
        };
        t.errored = rng.chance(spec.error_rate);
        let parsed = t.parse_status != ParseStatus::Failed;
        let reasoning = rng.chance(spec.reasoning_rate);
        let evidence = rng.chance(spec.evidence_rate);
        if parsed {
            t.predicted_verdict = Some(if detected[i] {
                Verdict::Vulnerable
            } else {
                Verdict::NotVulnerable
            });
            t.reasoning_present = reasoning;
        }
        let tp_hit = t.task_type == TaskType::TruePositive && t.is_detected();
        if tp_hit {
            t.cwe_match = Some(cwe[i]);
            t.evidence_source = true;
            t.evidence_sink = evidence;
            t.evidence_flow = evidence;
        }
        let cost = rng.uniform(spec.cost_usd);
        if spec.cost_tracked {
            t.cost_usd = Some(cost);
        }
        t.wall_time_s = rng.uniform(spec.wall_time_s);
        t.total_tokens = u64::from(rng.uniform_int(spec.tokens));

        if tu {
            if t.task_type == TaskType::TruePositive {
                let start = 1 + rng.below(500) as u32;
                let len = 3 + rng.below(28) as u32;
                let truth = LineRange {
                    start,
                    end: start + len - 1,
                };
                t.truth_line_range = Some(truth);
                t.location_match = Some(false);
                if tp_hit {
                    let offset = if located[i] {
                        rng.below(u64::from(len / 3) + 1) as u32
                    } else {
                        len / 2 + 1 + rng.below(2 * u64::from(len)) as u32
                    };
                    let predicted = LineRange {
                        start: start + offset,
                        end: start + offset + len - 1,
                    };
                    let iou = interval_iou(predicted, truth).expect("generated ranges are valid");
                    t.predicted_line_range = Some(predicted);
                    t.location_iou = Some(iou);
                    t.location_match = Some(iou >= spec.location_threshold);
                }
            }
            let calls = rng.uniform_int(spec.tool_calls);
            t.tool_calls = Some(calls);
            t.tool_calls_relevant = Some(libm::round(spec.relevant_rate * f64::from(calls)) as u32);
            t.turns = Some(rng.uniform_int(spec.turns));
        }
    }

    RunRecord::new(
        RunMeta {
            run_id: spec.run_id.clone(),
            model_name: spec.model_name.clone(),
            layer: spec.layer,
        },
        tasks,
    )
    .map_err(|e| SynthError::InvalidSpec(format!("generated run failed validation: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::confusion;
    use alloc::vec;

    fn cat(name: &str, tp: u32, pp: u32, det: f64, fp: f64) -> CategorySpec {
        CategorySpec {
            name: name.into(),
            true_positive: tp,
            post_patch: pp,
            detection_rate: det,
            false_positive_rate: fp,
            cwe_rate: 0.5,
            location_rate: 0.5,
        }
    }

    #[test]
    fn deterministic_extremes() {
        let spec = SynthSpec::new(7, Layer::Tu, vec![cat("a", 10, 12, 1.0, 0.0), cat("b", 3, 0, 1.0, 0.0)]);
        let run = generate(&spec).unwrap();
        let cm = confusion(&run);
        assert_eq!((cm.tp, cm.fn_, cm.fp, cm.tn), (13, 0, 0, 12));
    }

    #[test]
    fn same_seed_same_run() {
        let spec = SynthSpec::new(42, Layer::Tu, vec![cat("a", 20, 20, 0.6, 0.2)]);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn exact_mode_pins_counts() {
        let mut spec = SynthSpec::new(1, Layer::Cip, vec![cat("a", 10, 10, 0.7, 0.3)]);
        spec.exact = true;
        for seed in 0..20 {
            spec.seed = seed;
            let cm = confusion(&generate(&spec).unwrap());
            assert_eq!((cm.tp, cm.fp), (7, 3));
        }
    }

    #[test]
    fn severity_apportionment() {
        assert_eq!(apportion(203, [25, 74, 83, 21]), [25, 74, 83, 21]);
        assert_eq!(apportion(10, [1, 1, 1, 1]), [3, 3, 2, 2]);
        assert_eq!(apportion(0, [1, 0, 0, 0]), [0, 0, 0, 0]);
    }

    #[test]
    fn location_matches_follow_threshold() {
        let mut spec = SynthSpec::new(9, Layer::Tu, vec![cat("a", 40, 0, 1.0, 0.0)]);
        spec.exact = true;
        let run = generate(&spec).unwrap();
        let matched = run.tasks().iter().filter(|t| t.location_match == Some(true)).count();
        assert_eq!(matched, 20);
        for t in run.tasks() {
            let iou = t.location_iou.unwrap();
            assert_eq!(t.location_match, Some(iou >= 0.5));
        }
    }

    #[test]
    fn invalid_specs() {
        let mut spec = SynthSpec::new(1, Layer::Cip, vec![cat("a", 1, 1, 1.5, 0.0)]);
        assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
        spec.categories = vec![cat("a", 0, 0, 0.5, 0.0)];
        assert!(generate(&spec).is_err());
        spec.categories = vec![cat("a", 1, 0, 0.5, 0.0), cat("a", 1, 0, 0.5, 0.0)];
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn cip_runs_have_no_tool_telemetry() {
        let mut spec = SynthSpec::new(3, Layer::Cip, vec![cat("a", 5, 5, 0.5, 0.5)]);
        spec.cost_tracked = false;
        let run = generate(&spec).unwrap();
        assert!(run.tasks().iter().all(|t| t.tool_calls.is_none() && t.cost_usd.is_none()));
        assert!(!run.cost_tracked());
    }
}

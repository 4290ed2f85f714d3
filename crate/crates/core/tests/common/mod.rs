//! Proptest strategies for arbitrary valid runs.

use proptest::prelude::*;
use rolescore_core::{
    Layer, LineRange, ParseStatus, RunMeta, RunRecord, Severity, TaskResult, TaskType, Verdict,
};

const CATEGORIES: [&str; 4] = ["injection", "memory", "crypto", "authz"];
const LANGUAGES: [&str; 3] = ["c", "python", "java"];

fn arb_task_type() -> impl Strategy<Value = TaskType> {
    prop_oneof![
        4 => Just(TaskType::TruePositive),
        3 => Just(TaskType::PostPatch),
        1 => Just(TaskType::SastFp),
    ]
}

fn arb_severity() -> impl Strategy<Value = Severity> {
    prop_oneof![
        Just(Severity::Critical),
        Just(Severity::High),
        Just(Severity::Medium),
        Just(Severity::Low),
    ]
}

/// Per-task knobs drawn independently; combined into a record in `arb_run`.
#[derive(Debug, Clone)]
struct Draw {
    ty: TaskType,
    cat: usize,
    lang: usize,
    severity: Option<Severity>,
    verdict: u8,
    parse: u8,
    cwe: Option<bool>,
    loc: Option<bool>,
    iou: Option<f64>,
    reasoning: bool,
    evidence: (bool, bool, bool),
    errored: bool,
    cost: f64,
    tokens: u64,
    wall: f64,
    calls: Option<(u32, u32)>,
    turns: Option<u32>,
    range: Option<(u32, u32)>,
}

fn arb_draw() -> impl Strategy<Value = Draw> {
    (
        (arb_task_type(), 0..CATEGORIES.len(), 0..LANGUAGES.len(), proptest::option::of(arb_severity())),
        (0u8..3, 0u8..6, proptest::option::of(any::<bool>()), proptest::option::of(any::<bool>())),
        (proptest::option::of(0.0f64..=1.0), any::<bool>(), any::<(bool, bool, bool)>(), proptest::bool::weighted(0.15)),
        (
            0.0f64..2.0,
            0u64..100_000,
            prop_oneof![1 => Just(0.0), 5 => 0.0f64..300.0],
            proptest::option::of((0u32..40).prop_flat_map(|c| (Just(c), 0..=c))),
            proptest::option::of(0u32..25),
            proptest::option::of((1u32..500, 0u32..40)),
        ),
    )
        .prop_map(|((ty, cat, lang, severity), (verdict, parse, cwe, loc), (iou, reasoning, evidence, errored), (cost, tokens, wall, calls, turns, range))| Draw {
            ty,
            cat,
            lang,
            severity,
            verdict,
            parse,
            cwe,
            loc,
            iou,
            reasoning,
            evidence,
            errored,
            cost,
            tokens,
            wall,
            calls,
            turns,
            range,
        })
}

fn build(i: usize, d: Draw, layer: Layer, cost_mode: u8) -> TaskResult {
    let mut t = TaskResult::new(format!("t{i:03}"), d.ty, CATEGORIES[d.cat], LANGUAGES[d.lang]);
    if d.ty == TaskType::TruePositive {
        t.task_severity = d.severity;
    }
    t.parse_status = match d.parse {
        0 => ParseStatus::Failed,
        1 => ParseStatus::Partial,
        _ => ParseStatus::Full,
    };
    if t.parse_status != ParseStatus::Failed {
        t.predicted_verdict = match d.verdict {
            0 => Some(Verdict::Vulnerable),
            1 => Some(Verdict::NotVulnerable),
            _ => None,
        };
    }
    t.cwe_match = d.cwe;
    t.location_match = d.loc;
    t.location_iou = d.iou;
    t.reasoning_present = d.reasoning;
    (t.evidence_source, t.evidence_sink, t.evidence_flow) = d.evidence;
    t.errored = d.errored;
    // 0: tracked, 1: untracked, 2: tracked except the first task
    t.cost_usd = match cost_mode {
        0 => Some(d.cost),
        2 if i > 0 => Some(d.cost),
        _ => None,
    };
    t.total_tokens = d.tokens;
    t.wall_time_s = d.wall;
    if layer == Layer::Tu {
        if let Some((calls, relevant)) = d.calls {
            t.tool_calls = Some(calls);
            t.tool_calls_relevant = Some(relevant);
        }
        t.turns = d.turns;
        if let Some((start, len)) = d.range {
            t.predicted_line_range = Some(LineRange { start, end: start + len });
        }
    }
    t
}

/// Valid runs of 1..=`max_tasks` tasks in either layer.
pub fn arb_run(max_tasks: usize) -> impl Strategy<Value = RunRecord> {
    (
        prop_oneof![Just(Layer::Cip), Just(Layer::Tu)],
        prop_oneof![3 => Just(0u8), 1 => Just(1u8), 1 => Just(2u8)],
        proptest::collection::vec(arb_draw(), 1..=max_tasks),
    )
        .prop_map(|(layer, cost_mode, draws)| {
            let tasks = draws
                .into_iter()
                .enumerate()
                .map(|(i, d)| build(i, d, layer, cost_mode))
                .collect();
            RunRecord::new(
                RunMeta {
                    run_id: "prop".into(),
                    model_name: "prop-model".into(),
                    layer,
                },
                tasks,
            )
            .expect("strategy builds valid runs")
        })
}

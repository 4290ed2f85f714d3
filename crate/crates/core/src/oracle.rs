//! Brute-force re-derivation of every dimension, for cross-checking the
//! engine in tests.
//!
//! Each dimension is recomputed by walking the task list directly. Nothing
//! here calls into `engine` or the confusion-matrix helpers; only the record
//! types are shared.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dimension::DimensionId;
use crate::engine::{DimensionValue, DimensionVector, UnavailableReason};
use crate::record::{Layer, ParseStatus, RunRecord, Severity, TaskResult, TaskType, Verdict};

fn flagged(t: &TaskResult) -> bool {
    matches!(t.predicted_verdict, Some(Verdict::Vulnerable))
}

fn is_tp_task(t: &TaskResult) -> bool {
    matches!(t.task_type, TaskType::TruePositive)
}

fn is_pp_task(t: &TaskResult) -> bool {
    matches!(t.task_type, TaskType::PostPatch)
}

fn count(tasks: &[TaskResult], pred: impl Fn(&TaskResult) -> bool) -> usize {
    let mut n = 0;
    for t in tasks {
        if pred(t) {
            n += 1;
        }
    }
    n
}

/// Distinct values in first-seen order.
fn distinct(items: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// F1 computed from tp/fp/fn via `2tp / (2tp + fp + fn)`.
fn f1_of(tasks: &[&TaskResult]) -> f64 {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fneg = 0.0;
    for t in tasks {
        if is_tp_task(t) && flagged(t) {
            tp += 1.0;
        } else if is_tp_task(t) {
            fneg += 1.0;
        } else if is_pp_task(t) && flagged(t) {
            fp += 1.0;
        }
    }
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fneg)
    }
}

fn group_f1s(tasks: &[TaskResult], key: impl Fn(&TaskResult) -> &str) -> Vec<f64> {
    let scored: Vec<&TaskResult> = tasks.iter().filter(|t| is_tp_task(t) || is_pp_task(t)).collect();
    let groups = distinct(scored.iter().map(|t| key(t).to_string()));
    groups
        .iter()
        .map(|g| {
            let members: Vec<&TaskResult> = scored.iter().copied().filter(|t| key(t) == g).collect();
            f1_of(&members)
        })
        .collect()
}

enum Out {
    Val(f64),
    Zero,
    Gone,
}

/// Recomputes the dimension vector of `run` by direct enumeration.
pub fn oracle_dimensions(run: &RunRecord) -> DimensionVector {
    let tasks = run.tasks();
    let total = tasks.len() as f64;

    let tp = count(tasks, |t| is_tp_task(t) && flagged(t)) as f64;
    let fneg = count(tasks, |t| is_tp_task(t) && !flagged(t)) as f64;
    let fp = count(tasks, |t| is_pp_task(t) && flagged(t)) as f64;
    let tn = count(tasks, |t| is_pp_task(t) && !flagged(t)) as f64;
    let n_pos = tp + fneg;
    let n_neg = fp + tn;

    let mcc = {
        let a = tp + fp;
        let b = tp + fneg;
        let c = tn + fp;
        let d = tn + fneg;
        if a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0 {
            None
        } else {
            Some((tp * tn - fp * fneg) / (libm::sqrt(a) * libm::sqrt(b) * libm::sqrt(c) * libm::sqrt(d)))
        }
    };
    let recall = if n_pos == 0.0 { 0.0 } else { tp / n_pos };
    let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };

    let cost_sum = {
        let mut s = 0.0;
        for t in tasks {
            s += t.cost_usd.unwrap_or(0.0);
        }
        s
    };
    let correct = |t: &TaskResult| if is_tp_task(t) { flagged(t) } else { !flagged(t) };

    let cip = run.layer() == Layer::Cip;
    let mut values = Vec::with_capacity(35);
    for number in 1..=35u8 {
        let id = DimensionId::new(number).unwrap();
        let gated = match number {
            7 | 8 | 24 | 25 | 26 | 27 if cip => Some(UnavailableReason::LayerCip),
            18..=20 if tasks.iter().any(|t| t.cost_usd.is_none()) => Some(UnavailableReason::NoCost),
            28..=30 if !tasks.iter().any(|t| is_tp_task(t) && t.task_severity.is_some()) => {
                Some(UnavailableReason::NoSeverity)
            }
            13 if !tasks.iter().any(|t| t.task_type == TaskType::SastFp) => {
                Some(UnavailableReason::NoSastFpTasks)
            }
            _ => None,
        };
        if let Some(reason) = gated {
            values.push(DimensionValue::unavailable(id, reason));
            continue;
        }
        let per_detected_tp = |pred: &dyn Fn(&TaskResult) -> bool| -> Out {
            if tp == 0.0 {
                Out::Zero
            } else {
                Out::Val(count(tasks, |t| is_tp_task(t) && flagged(t) && pred(t)) as f64 / tp)
            }
        };
        let out = match number {
            1 => mcc.map_or(Out::Zero, Out::Val),
            2 => {
                if n_pos == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(recall)
                }
            }
            3 => {
                if tp + fp == 0.0 {
                    Out::Zero
                } else {
                    Out::Val(precision)
                }
            }
            4 => {
                let all: Vec<&TaskResult> = tasks.iter().collect();
                Out::Val(f1_of(&all))
            }
            5 => {
                if n_neg == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(tn / n_neg)
                }
            }
            6 => per_detected_tp(&|t| t.cwe_match == Some(true)),
            7 => {
                if tp == 0.0 {
                    Out::Zero
                } else {
                    let mut s = 0.0;
                    for t in tasks {
                        if is_tp_task(t) && flagged(t) {
                            s += t.location_iou.unwrap_or(0.0);
                        }
                    }
                    Out::Val(s / tp)
                }
            }
            8 => per_detected_tp(&|t| t.cwe_match == Some(true) && t.location_match == Some(true)),
            9 => {
                let cats = distinct(tasks.iter().filter(|t| is_tp_task(t)).map(|t| t.task_category.clone()));
                if cats.is_empty() {
                    Out::Gone
                } else {
                    let covered = cats
                        .iter()
                        .filter(|c| tasks.iter().any(|t| is_tp_task(t) && flagged(t) && &t.task_category == *c))
                        .count();
                    Out::Val(covered as f64 / cats.len() as f64)
                }
            }
            10 | 12 => {
                let f1s = if number == 10 {
                    group_f1s(tasks, |t| &t.task_category)
                } else {
                    group_f1s(tasks, |t| &t.task_language)
                };
                if f1s.is_empty() {
                    Out::Gone
                } else {
                    let mut m = f64::INFINITY;
                    for f in f1s {
                        if f < m {
                            m = f;
                        }
                    }
                    Out::Val(m)
                }
            }
            11 => {
                let f1s = group_f1s(tasks, |t| &t.task_language);
                if f1s.is_empty() {
                    Out::Gone
                } else {
                    let k = f1s.len() as f64;
                    let mean = f1s.iter().sum::<f64>() / k;
                    let sq = f1s.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / k;
                    Out::Val(1.0 - libm::sqrt(sq))
                }
            }
            13 => {
                let n = count(tasks, |t| t.task_type == TaskType::SastFp) as f64;
                let ok = count(tasks, |t| {
                    t.task_type == TaskType::SastFp && t.predicted_verdict == Some(Verdict::NotVulnerable)
                }) as f64;
                Out::Val(ok / n)
            }
            14 => per_detected_tp(&|t| t.evidence_source && t.evidence_sink && t.evidence_flow),
            15 => Out::Val(count(tasks, |t| t.reasoning_present) as f64 / total),
            16 => Out::Val(count(tasks, |t| t.reasoning_present && correct(t)) as f64 / total),
            17 => {
                if fp == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(count(tasks, |t| is_pp_task(t) && flagged(t) && t.reasoning_present) as f64 / fp)
                }
            }
            18 => Out::Val(cost_sum / total),
            19 => {
                if tp == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(cost_sum / tp)
                }
            }
            20 => {
                if cost_sum == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(mcc.unwrap_or(0.0) / cost_sum)
                }
            }
            21 => Out::Val(tasks.iter().map(|t| t.wall_time_s).sum::<f64>() / total),
            22 => {
                let minutes = tasks.iter().map(|t| t.wall_time_s).sum::<f64>() / 60.0;
                if minutes == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(total / minutes)
                }
            }
            23 => Out::Val(tasks.iter().map(|t| t.total_tokens as f64).sum::<f64>() / total),
            24 | 25 => {
                let xs: Vec<f64> = tasks
                    .iter()
                    .filter_map(|t| if number == 24 { t.tool_calls } else { t.turns })
                    .map(f64::from)
                    .collect();
                if xs.is_empty() {
                    Out::Gone
                } else {
                    Out::Val(xs.iter().sum::<f64>() / xs.len() as f64)
                }
            }
            26 => {
                let calls: f64 = tasks.iter().map(|t| f64::from(t.tool_calls.unwrap_or(0))).sum();
                let rel: f64 = tasks.iter().map(|t| f64::from(t.tool_calls_relevant.unwrap_or(0))).sum();
                if calls == 0.0 {
                    Out::Gone
                } else {
                    Out::Val(rel / calls)
                }
            }
            27 => {
                let users = count(tasks, |t| t.tool_calls.unwrap_or(0) >= 1);
                if users == 0 {
                    Out::Gone
                } else {
                    let earners = count(tasks, |t| {
                        t.tool_calls.unwrap_or(0) >= 1
                            && (correct(t) || t.cwe_match == Some(true) || t.location_match == Some(true))
                    });
                    Out::Val(earners as f64 / users as f64)
                }
            }
            28 => {
                let w = |s: Severity| match s {
                    Severity::Critical => 4.0,
                    Severity::High => 3.0,
                    Severity::Medium => 2.0,
                    Severity::Low => 1.0,
                };
                let mut num = 0.0;
                let mut den = 0.0;
                for t in tasks.iter().filter(|t| is_tp_task(t)) {
                    if let Some(s) = t.task_severity {
                        den += w(s);
                        if flagged(t) {
                            num += w(s);
                        }
                    }
                }
                Out::Val(num / den)
            }
            29 => {
                let severe = |t: &TaskResult| {
                    is_tp_task(t) && matches!(t.task_severity, Some(Severity::Critical) | Some(Severity::High))
                };
                let n = count(tasks, severe);
                if n == 0 {
                    Out::Gone
                } else {
                    let missed = count(tasks, |t| severe(t) && !flagged(t));
                    Out::Val(1.0 - missed as f64 / n as f64)
                }
            }
            30 => {
                let mut present = 0;
                let mut hit = 0;
                for s in [Severity::Critical, Severity::High, Severity::Medium, Severity::Low] {
                    if tasks.iter().any(|t| is_tp_task(t) && t.task_severity == Some(s)) {
                        present += 1;
                        if tasks.iter().any(|t| is_tp_task(t) && flagged(t) && t.task_severity == Some(s)) {
                            hit += 1;
                        }
                    }
                }
                Out::Val(hit as f64 / present as f64)
            }
            31 => Out::Val(count(tasks, |t| t.parse_status != ParseStatus::Failed) as f64 / total),
            32 => Out::Val(count(tasks, |t| t.parse_status == ParseStatus::Full) as f64 / total),
            33 => Out::Val(1.0 - count(tasks, |t| t.errored) as f64 / total),
            34 => Out::Val(
                count(tasks, |t| !t.errored && t.parse_status != ParseStatus::Failed) as f64 / total,
            ),
            35 => {
                let cats = distinct(tasks.iter().filter(|t| is_tp_task(t)).map(|t| t.task_category.clone()));
                if cats.is_empty() {
                    Out::Gone
                } else {
                    let sizes: Vec<usize> = cats
                        .iter()
                        .map(|c| count(tasks, |t| is_tp_task(t) && &t.task_category == c))
                        .collect();
                    let mut sorted = sizes.clone();
                    // insertion sort: deliberately not the engine's path
                    for i in 1..sorted.len() {
                        let mut j = i;
                        while j > 0 && sorted[j - 1] > sorted[j] {
                            sorted.swap(j - 1, j);
                            j -= 1;
                        }
                    }
                    let k = sorted.len();
                    let median = if k % 2 == 1 {
                        sorted[k / 2] as f64
                    } else {
                        (sorted[k / 2 - 1] + sorted[k / 2]) as f64 / 2.0
                    };
                    let (mut cn, mut ch, mut rn, mut rh) = (0usize, 0usize, 0usize, 0usize);
                    for (c, &size) in cats.iter().zip(&sizes) {
                        let hits = count(tasks, |t| is_tp_task(t) && flagged(t) && &t.task_category == c);
                        if size as f64 >= median {
                            cn += size;
                            ch += hits;
                        } else {
                            rn += size;
                            rh += hits;
                        }
                    }
                    if cn == 0 || rn == 0 {
                        Out::Gone
                    } else {
                        let diff = ch as f64 / cn as f64 - rh as f64 / rn as f64;
                        Out::Val(1.0 - if diff < 0.0 { -diff } else { diff })
                    }
                }
            }
            _ => unreachable!(),
        };
        values.push(match out {
            Out::Val(v) => DimensionValue::available(id, v),
            Out::Zero => DimensionValue::degenerate_zero(id, "oracle: empty denominator"),
            Out::Gone => DimensionValue::unavailable(id, UnavailableReason::Degenerate("oracle".into())),
        });
    }
    DimensionVector {
        run_id: run.run_id().to_string(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::RunMeta;
    use alloc::vec;

    #[test]
    fn hand_written_confusion_example() {
        let mk = |id: &str, ty, v| {
            let mut t = TaskResult::new(id, ty, "c", "l");
            t.predicted_verdict = Some(v);
            t
        };
        use TaskType::*;
        use Verdict::*;
        let run = RunRecord::new(
            RunMeta {
                run_id: "r".into(),
                model_name: "m".into(),
                layer: Layer::Cip,
            },
            vec![
                mk("1", TruePositive, Vulnerable),
                mk("2", TruePositive, Vulnerable),
                mk("3", TruePositive, NotVulnerable),
                mk("4", PostPatch, Vulnerable),
                mk("5", PostPatch, NotVulnerable),
                mk("6", PostPatch, NotVulnerable),
            ],
        )
        .unwrap();
        let v = oracle_dimensions(&run);
        assert!((v.get(DimensionId::D1).raw().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for d in [7u8, 8, 24, 25, 26, 27] {
            assert_eq!(
                v.get(DimensionId::new(d).unwrap()).reason(),
                Some(&UnavailableReason::LayerCip)
            );
        }
    }
}

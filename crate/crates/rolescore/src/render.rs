//! Markdown tables. Numbers are shown to one decimal, rounding half to even;
//! JSON output keeps full precision.

use std::fmt::Write as _;

use rolescore_core::{DecisionReport, Grade, ImpactResult, ProfileViolation, RunRecord};

use crate::views::{DimensionsView, LeaderboardOutput, RdiRow, RankEntry};

/// `x` rounded to one decimal, ties to even.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round_ties_even() / 10.0
}

pub fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

fn graded(grade: Grade, score: f64) -> String {
    format!("{grade} ({})", fmt1(score))
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(
        out,
        "|{}",
        header.iter().map(|_| "---|").collect::<String>()
    );
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
}

pub fn reports(reports: &[DecisionReport]) -> String {
    let mut out = String::from("## Decision Scores\n\n");
    table(
        &mut out,
        &["Run", "Profile", "Score", "Grade", "Available weight", "Excluded"],
        reports.iter().map(|r| {
            let excluded = if r.exclusions.is_empty() {
                "none".to_string()
            } else {
                r.exclusions
                    .iter()
                    .map(|e| format!("{} (w={}, {})", e.dimension, e.weight, e.reason))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            vec![
                r.run_id.clone(),
                r.profile_name.clone(),
                fmt1(r.score),
                r.grade.to_string(),
                r.available_weight.to_string(),
                excluded,
            ]
        }),
    );
    out
}

pub fn dimensions(views: &[DimensionsView]) -> String {
    let mut out = String::new();
    for v in views {
        let _ = writeln!(out, "## {} ({}, {})\n", v.run_id, v.model_name, v.layer);
        table(
            &mut out,
            &["Dim", "Name", "Category", "Raw", "Normalized", "Status"],
            v.dimensions.iter().map(|d| {
                vec![
                    d.id.to_string(),
                    d.name.clone(),
                    d.category.label().to_string(),
                    d.raw.map_or("n/a".into(), |x| format!("{x:.4}")),
                    d.normalized.map_or("n/a".into(), |x| format!("{x:.4}")),
                    match &d.reason {
                        Some(r) => format!("unavailable ({r})"),
                        None => d.status.clone(),
                    },
                ]
            }),
        );
        out.push('\n');
    }
    out
}

pub fn leaderboard(board: &LeaderboardOutput) -> String {
    let mut out = format!("## Leaderboard ({})\n\n", board.layer);
    table(
        &mut out,
        &["Rank", "Model", "Run", "Benchmark %"],
        board.benchmark.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.model_name.clone(),
                r.run_id.clone(),
                fmt1(r.value),
            ]
        }),
    );
    if board.profiles.is_empty() {
        return out;
    }

    out.push_str("\n## Per-role Decision Scores\n\n");
    let mut header = vec!["Model"];
    header.extend(board.profiles.iter().map(|p| p.profile_name.as_str()));
    let find = |rows: &[RankEntry], run_id: &str| -> String {
        rows.iter()
            .find(|e| e.run_id == run_id)
            .map_or("n/a".into(), |e| format!("{} #{}", graded(e.grade, e.score), e.rank))
    };
    table(
        &mut out,
        &header,
        board.benchmark.iter().map(|r| {
            let mut row = vec![r.model_name.clone()];
            row.extend(board.profiles.iter().map(|p| find(&p.rows, &r.run_id)));
            row
        }),
    );
    out
}

pub fn rdi(rows: &[RdiRow]) -> String {
    let mut out = String::from("## Role Divergence Index\n\n");
    table(
        &mut out,
        &["Model", "RDI", "Best Role", "Worst Role"],
        rows.iter().map(|r| {
            let res = &r.result;
            vec![
                r.model_name.clone(),
                fmt1(res.rdi),
                format!("{} ({})", res.best_role.profile_name, fmt1(res.best_role.score)),
                format!("{} ({})", res.worst_role.profile_name, fmt1(res.worst_role.score)),
            ]
        }),
    );
    out
}

pub fn impact(analyses: &[ImpactResult]) -> String {
    let mut out = String::new();
    for a in analyses {
        let _ = writeln!(out, "## Impact: {}\n", a.profile_name);
        table(
            &mut out,
            &["Rank", "Dimension", "Weight", "Variance", "Impact"],
            a.entries.iter().enumerate().map(|(i, e)| {
                vec![
                    (i + 1).to_string(),
                    format!("{} {}", e.dimension, e.dimension.name()),
                    e.weight.to_string(),
                    format!("{:.4}", e.variance),
                    format!("{:.3}", e.impact),
                ]
            }),
        );
        for o in &a.omitted {
            let _ = writeln!(
                out,
                "\n{} omitted: available in {} run(s)",
                o.dimension, o.available_runs
            );
        }
        out.push('\n');
    }
    out
}

pub fn validation(path: &str, violations: &[ProfileViolation]) -> String {
    if violations.is_empty() {
        return format!("{path}: valid\n");
    }
    let mut out = format!("{path}: invalid\n\n");
    for v in violations {
        let _ = writeln!(out, "- {v}");
    }
    out
}

pub fn synth_summary(run: &RunRecord) -> String {
    let cm = rolescore_core::confusion(run);
    let mut out = format!("## Synthetic run {} ({})\n\n", run.run_id(), run.layer());
    table(
        &mut out,
        &["Tasks", "TP", "FP", "FN", "TN"],
        [vec![
            run.tasks().len().to_string(),
            cm.tp.to_string(),
            cm.fp.to_string(),
            cm.fn_.to_string(),
            cm.tn.to_string(),
        ]],
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_decimal_half_even() {
        assert_eq!(fmt1(76.25), "76.2");
        assert_eq!(fmt1(76.75), "76.8");
        assert_eq!(fmt1(0.25), "0.2");
        assert_eq!(fmt1(30.8), "30.8");
        assert_eq!(fmt1(100.0), "100.0");
        assert_eq!(round1(12.5 / 10.0), 1.2);
    }
}

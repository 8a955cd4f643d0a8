//! Report generation from a results table: per-stage success rates with
//! across-replication spread, the per-trial trajectory of the highest bandit
//! value, and self-contained SVG plots of both. Output bytes depend only on
//! the input rows.

use std::path::Path;

use crate::io::{Arm, IoError, ResultsTable};

/// Mean success per stage/arm (pooled over trials and replications) with
/// the standard deviation of the per-replication rates.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub stage_demos: usize,
    pub arm: Arm,
    pub mean_success: f64,
    pub std_success: f64,
}

/// Highest bandit value after each projection-arm trial of a replication,
/// in stage-then-trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct QHistoryPoint {
    pub replication: usize,
    pub trial: usize,
    pub max_q: f64,
    pub argmax_q: usize,
    pub selected_arm: usize,
}

pub fn success_by_stage(table: &ResultsTable) -> Vec<StageSummary> {
    let mut stages: Vec<usize> = table.rows.iter().map(|r| r.stage_demos).collect();
    stages.sort_unstable();
    stages.dedup();
    let mut replications: Vec<usize> = table.rows.iter().map(|r| r.replication).collect();
    replications.sort_unstable();
    replications.dedup();

    let mut out = Vec::new();
    for &stage in &stages {
        for arm in [Arm::Baseline, Arm::Gromp] {
            let rows: Vec<_> = table
                .rows
                .iter()
                .filter(|r| r.stage_demos == stage && r.arm == arm)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let mean_success = rows.iter().filter(|r| r.success).count() as f64 / rows.len() as f64;
            let rep_rates: Vec<f64> = replications
                .iter()
                .filter_map(|&rep| {
                    let rep_rows: Vec<_> = rows.iter().filter(|r| r.replication == rep).collect();
                    if rep_rows.is_empty() {
                        None
                    } else {
                        Some(
                            rep_rows.iter().filter(|r| r.success).count() as f64
                                / rep_rows.len() as f64,
                        )
                    }
                })
                .collect();
            let mean_rate = rep_rates.iter().sum::<f64>() / rep_rates.len() as f64;
            let var = rep_rates
                .iter()
                .map(|r| (r - mean_rate).powi(2))
                .sum::<f64>()
                / rep_rates.len() as f64;
            out.push(StageSummary {
                stage_demos: stage,
                arm,
                mean_success,
                std_success: var.sqrt(),
            });
        }
    }
    out
}

pub fn q_history(table: &ResultsTable) -> Vec<QHistoryPoint> {
    let mut replications: Vec<usize> = table.rows.iter().map(|r| r.replication).collect();
    replications.sort_unstable();
    replications.dedup();

    let mut out = Vec::new();
    for &rep in &replications {
        // Canonical row order is (replication, stage, arm, trial), so the
        // projection-arm rows are already in protocol order.
        let rows = table
            .rows
            .iter()
            .filter(|r| r.replication == rep && r.arm == Arm::Gromp);
        for (trial, row) in rows.enumerate() {
            let mut argmax = 0;
            for i in 1..7 {
                if row.q[i] > row.q[argmax] {
                    argmax = i;
                }
            }
            out.push(QHistoryPoint {
                replication: rep,
                trial,
                max_q: row.q[argmax],
                argmax_q: argmax,
                selected_arm: row.projection_dim.unwrap_or(0),
            });
        }
    }
    out
}

/// Writes `success_by_stage.csv`, `q_history.csv`, and one SVG per table
/// into `out_dir`.
pub fn write_report(table: &ResultsTable, out_dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(out_dir)?;

    let stages = success_by_stage(table);
    let mut csv = String::from("stage_demos,arm,mean_success,std_success\n");
    for s in &stages {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            s.stage_demos, s.arm, s.mean_success, s.std_success
        ));
    }
    std::fs::write(out_dir.join("success_by_stage.csv"), csv)?;

    let history = q_history(table);
    let mut csv = String::from("replication,trial,max_q,argmax_q,selected_arm\n");
    for p in &history {
        csv.push_str(&format!(
            "{},{},{:.6},{},{}\n",
            p.replication, p.trial, p.max_q, p.argmax_q, p.selected_arm
        ));
    }
    std::fs::write(out_dir.join("q_history.csv"), csv)?;

    std::fs::write(out_dir.join("success_by_stage.svg"), success_svg(&stages))?;
    std::fs::write(out_dir.join("q_history.svg"), q_history_svg(&history))?;
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn map_x(fraction: f64) -> f64 {
    MARGIN + fraction * (WIDTH - 2.0 * MARGIN)
}

fn map_y(fraction: f64) -> f64 {
    HEIGHT - MARGIN - fraction * (HEIGHT - 2.0 * MARGIN)
}

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" ",
            "font-size=\"15\">{title}</text>\n",
            "<line x1=\"{m}\" y1=\"{ybase}\" x2=\"{xmax}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybase}\" stroke=\"black\"/>\n",
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = title,
        m = MARGIN,
        ybase = HEIGHT - MARGIN,
        xmax = WIDTH - MARGIN,
    )
}

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn success_svg(stages: &[StageSummary]) -> String {
    let mut demo_counts: Vec<usize> = stages.iter().map(|s| s.stage_demos).collect();
    demo_counts.sort_unstable();
    demo_counts.dedup();
    let n = demo_counts.len().max(2);

    let mut svg = svg_header("success rate by demonstration count");
    for (arm, color) in [(Arm::Baseline, "#888888"), (Arm::Gromp, "#1f77b4")] {
        let points: Vec<(f64, f64)> = stages
            .iter()
            .filter(|s| s.arm == arm)
            .map(|s| {
                let idx = demo_counts
                    .iter()
                    .position(|&d| d == s.stage_demos)
                    .unwrap();
                (map_x(idx as f64 / (n - 1) as f64), map_y(s.mean_success))
            })
            .collect();
        if !points.is_empty() {
            svg.push_str(&polyline(&points, color));
        }
    }
    for (idx, demos) in demo_counts.iter().enumerate() {
        let x = map_x(idx as f64 / (n - 1) as f64);
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{demos}</text>\n",
            HEIGHT - MARGIN + 18.0
        ));
    }
    for tick in [0.0, 0.5, 1.0] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{tick:.1}</text>\n",
            MARGIN - 8.0,
            map_y(tick) + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#888888\" font-family=\"sans-serif\" font-size=\"12\">baseline</text>\n",
        WIDTH - MARGIN - 120.0,
        MARGIN + 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#1f77b4\" font-family=\"sans-serif\" font-size=\"12\">projection</text>\n",
        WIDTH - MARGIN - 120.0,
        MARGIN + 26.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn q_history_svg(history: &[QHistoryPoint]) -> String {
    let mut svg = svg_header("highest bandit value per trial");
    let max_trial = history.iter().map(|p| p.trial).max().unwrap_or(1).max(1);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for p in history {
        lo = lo.min(p.max_q);
        hi = hi.max(p.max_q);
    }
    let span = (hi - lo).max(1e-9);

    let mut replications: Vec<usize> = history.iter().map(|p| p.replication).collect();
    replications.sort_unstable();
    replications.dedup();
    let colors = [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    ];
    for (idx, &rep) in replications.iter().enumerate() {
        let points: Vec<(f64, f64)> = history
            .iter()
            .filter(|p| p.replication == rep)
            .map(|p| {
                (
                    map_x(p.trial as f64 / max_trial as f64),
                    map_y((p.max_q - lo) / span),
                )
            })
            .collect();
        svg.push_str(&polyline(&points, colors[idx % colors.len()]));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">trial</text>\n",
        WIDTH / 2.0,
        HEIGHT - MARGIN + 18.0
    ));
    svg.push_str("</svg>\n");
    svg
}

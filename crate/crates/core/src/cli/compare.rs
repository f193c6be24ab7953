//! Cross-run comparison of `summary.json` files.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runner::{RunStatus, ScenarioIdentity};
use crate::error::{Error, Result};
use crate::ocp::ProfileMetrics;

/// The parts of a run summary the comparison reads.
#[derive(Debug, Clone, Deserialize)]
struct SummaryView {
    scenario: ScenarioIdentity,
    runs: Vec<RunView>,
}

#[derive(Debug, Clone, Deserialize)]
struct RunView {
    label: String,
    status: RunStatus,
    metrics: Option<ProfileMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Index into [`Comparison::runs`].
    pub run: usize,
    pub label: String,
    pub status: RunStatus,
    pub integral_rate_sq: Option<f64>,
    pub max_rate: Option<f64>,
    pub terminal_error: Option<f64>,
    /// Differences to the same label in the first run.
    pub delta_integral_rate_sq: Option<f64>,
    pub delta_max_rate: Option<f64>,
    pub integral_winner: bool,
    pub max_rate_winner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricWinner {
    pub run: usize,
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub scenario: String,
    pub runs: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    pub integral_rate_sq_winner: Option<MetricWinner>,
    pub max_rate_winner: Option<MetricWinner>,
}

fn load(dir: &Path) -> Result<SummaryView> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

fn best(rows: &[ComparisonRow], metric: impl Fn(&ComparisonRow) -> Option<f64>) -> Option<MetricWinner> {
    let mut out: Option<MetricWinner> = None;
    for r in rows.iter().filter(|r| r.status == RunStatus::Converged) {
        if let Some(v) = metric(r) {
            if out.as_ref().is_none_or(|b| v < b.value) {
                out = Some(MetricWinner {
                    run: r.run,
                    label: r.label.clone(),
                    value: v,
                });
            }
        }
    }
    out
}

/// Compares runs of one scenario; refuses runs of different scenarios.
pub fn compare(dirs: &[PathBuf]) -> Result<Comparison> {
    if dirs.len() < 2 {
        return Err(Error::config("run_dirs", "compare needs at least two run directories"));
    }
    let views = dirs.iter().map(|d| load(d)).collect::<Result<Vec<_>>>()?;
    let reference = &views[0];
    for (dir, v) in dirs.iter().zip(&views).skip(1) {
        if v.scenario != reference.scenario {
            return Err(Error::config(
                dir.display().to_string(),
                format!(
                    "scenario `{}` does not match `{}` of {}",
                    v.scenario.name,
                    reference.scenario.name,
                    dirs[0].display()
                ),
            ));
        }
    }

    let mut rows = Vec::new();
    for (i, v) in views.iter().enumerate() {
        for r in &v.runs {
            let base = reference.runs.iter().find(|b| b.label == r.label).and_then(|b| b.metrics);
            let m = r.metrics;
            rows.push(ComparisonRow {
                run: i,
                label: r.label.clone(),
                status: r.status,
                integral_rate_sq: m.map(|m| m.integral_rate_sq),
                max_rate: m.map(|m| m.max_rate),
                terminal_error: m.map(|m| m.terminal_error),
                delta_integral_rate_sq: m.zip(base).map(|(m, b)| m.integral_rate_sq - b.integral_rate_sq),
                delta_max_rate: m.zip(base).map(|(m, b)| m.max_rate - b.max_rate),
                integral_winner: false,
                max_rate_winner: false,
            });
        }
    }
    let integral = best(&rows, |r| r.integral_rate_sq);
    let max_rate = best(&rows, |r| r.max_rate);
    for r in &mut rows {
        r.integral_winner = integral.as_ref().is_some_and(|w| w.run == r.run && w.label == r.label);
        r.max_rate_winner = max_rate.as_ref().is_some_and(|w| w.run == r.run && w.label == r.label);
    }
    Ok(Comparison {
        scenario: reference.scenario.name.clone(),
        runs: dirs.iter().map(|d| d.display().to_string()).collect(),
        rows,
        integral_rate_sq_winner: integral,
        max_rate_winner: max_rate,
    })
}

/// Plain-text table; `*` marks the lowest value of each metric.
pub fn render_table(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", c.scenario);
    for (i, r) in c.runs.iter().enumerate() {
        let _ = writeln!(out, "  [{i}] {r}");
    }
    let _ = writeln!(
        out,
        "{:<4} {:<26} {:>20} {:>16} {:>12} {:>14} {:>12}",
        "run", "label", "int |w|^2 (deg2/s)", "max |w| (deg/s)", "|s_f err|", "d int", "d max"
    );
    let num = |v: Option<f64>, w: bool, prec: usize| match v {
        Some(x) => format!("{x:.prec$}{}", if w { "*" } else { " " }),
        None => "-".to_string(),
    };
    let sci = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
    for r in &c.rows {
        let _ = writeln!(
            out,
            "{:<4} {:<26} {:>20} {:>16} {:>12} {:>14} {:>12}",
            r.run,
            r.label,
            num(r.integral_rate_sq, r.integral_winner, 9),
            num(r.max_rate, r.max_rate_winner, 9),
            sci(r.terminal_error),
            sci(r.delta_integral_rate_sq),
            sci(r.delta_max_rate),
        );
    }
    out
}

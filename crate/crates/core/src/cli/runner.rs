//! Scenario execution and artifact emission.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::svg;
use crate::config::{CameraConfig, EarthConfig, ObjectiveChoice, OrbitConfig, ScenarioConfig, StripConfig};
use crate::ddp::{IterationRecord, SolverParams};
use crate::error::{Error, Result};
use crate::ocp::{solve_method, Method, MethodResult, ProfileMetrics, StripScenario};

pub const DETERMINISM_NOTE: &str =
    "outputs depend only on this manifest: no wall-clock, randomness or thread-order effects";

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub objective: ObjectiveChoice,
    pub constrained: bool,
    pub sharpness: f64,
    pub duration: f64,
    pub dt: f64,
    pub solver: SolverParams,
    pub out_dir: String,
    pub determinism: String,
}

/// Geometry and camera that make two runs comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioIdentity {
    pub name: String,
    pub duration: f64,
    pub earth: EarthConfig,
    pub orbit: OrbitConfig,
    pub strip: StripConfig,
    pub camera: CameraConfig,
}

impl ScenarioIdentity {
    pub fn of(config: &ScenarioConfig) -> Self {
        Self {
            name: config.name.clone(),
            duration: config.time.duration,
            earth: config.earth,
            orbit: config.orbit,
            strip: config.strip,
            camera: config.camera,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    NotConverged,
    Failed,
}

/// One method's outcome as recorded in the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub label: String,
    pub method: Method,
    pub constrained: bool,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub iterations: usize,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ProfileMetrics>,
    /// Line-rate bounds met within `solver.eps_g`; `None` without bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds_satisfied: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations_file: Option<String>,
    pub history: Vec<IterationRecord>,
}

/// Label of the lowest value of each metric.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Winners {
    pub integral_rate_sq: Option<String>,
    pub max_rate: Option<String>,
    pub terminal_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub scenario: ScenarioIdentity,
    pub runs: Vec<RunEntry>,
    pub winners: Winners,
}

/// In-memory outcome of a run: the summary plus the full profiles.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub results: Vec<std::result::Result<MethodResult, Error>>,
}

impl RunOutcome {
    pub fn entry(&self, label: &str) -> Option<&RunEntry> {
        self.summary.runs.iter().find(|r| r.label == label)
    }

    pub fn result(&self, label: &str) -> Option<&MethodResult> {
        let i = self.summary.runs.iter().position(|r| r.label == label)?;
        self.results[i].as_ref().ok()
    }

    /// First kinematic failure, else first solver failure.
    pub fn first_error(&self) -> Option<&Error> {
        let errors = || self.results.iter().filter_map(|r| r.as_ref().err());
        errors().find(|e| e.is_kinematic()).or_else(|| errors().next())
    }

    pub fn all_converged(&self) -> bool {
        self.summary.runs.iter().all(|r| r.status == RunStatus::Converged)
    }
}

pub fn run_label(method: Method, constrained: bool) -> String {
    if constrained {
        format!("{}-constrained", method.label())
    } else {
        method.label().to_string()
    }
}

/// Jobs in output order: the selected methods, then the constrained
/// minimum-integral run when requested.
pub fn jobs(config: &ScenarioConfig) -> Vec<(Method, bool)> {
    let mut jobs: Vec<(Method, bool)> = config.run.objective.methods().into_iter().map(|m| (m, false)).collect();
    if config.run.constrained {
        jobs.push((Method::MinIntegral, true));
    }
    jobs
}

pub fn manifest(config: &ScenarioConfig, out_dir: &str) -> RunManifest {
    RunManifest {
        scenario: config.name.clone(),
        objective: config.run.objective,
        constrained: config.run.constrained,
        sharpness: config.run.sharpness,
        duration: config.time.duration,
        dt: config.time.dt,
        solver: config.solver,
        out_dir: out_dir.to_string(),
        determinism: DETERMINISM_NOTE.to_string(),
    }
}

fn winner(runs: &[RunEntry], metric: impl Fn(&ProfileMetrics) -> f64) -> Option<String> {
    let mut best: Option<(f64, &str)> = None;
    for r in runs.iter().filter(|r| r.status == RunStatus::Converged) {
        if let Some(v) = r.metrics.as_ref().map(&metric) {
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, &r.label));
            }
        }
    }
    best.map(|(_, l)| l.to_string())
}

pub fn winners(runs: &[RunEntry]) -> Winners {
    Winners {
        integral_rate_sq: winner(runs, |m| m.integral_rate_sq),
        max_rate: winner(runs, |m| m.max_rate),
        terminal_error: winner(runs, |m| m.terminal_error),
    }
}

/// Solves every job of `config`, one thread per method.
pub fn execute(config: &ScenarioConfig, scenario: &StripScenario, out_dir: &str) -> RunOutcome {
    let jobs = jobs(config);
    let results: Vec<Result<MethodResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(method, constrained)| {
                scope.spawn(move || {
                    solve_method(scenario, method, constrained, config.run.sharpness, &config.solver)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::validation("solver thread panicked"))))
            .collect()
    });

    let runs: Vec<RunEntry> = jobs
        .iter()
        .zip(&results)
        .map(|(&(method, constrained), result)| {
            let label = run_label(method, constrained);
            match result {
                Ok(r) => RunEntry {
                    profile_file: Some(format!("profile_{label}.csv")),
                    iterations_file: (method != Method::Linear).then(|| format!("iterations_{label}.csv")),
                    label,
                    method,
                    constrained,
                    status: if r.converged { RunStatus::Converged } else { RunStatus::NotConverged },
                    error: None,
                    iterations: r.iterations,
                    nu: r.nu,
                    metrics: Some(r.report.metrics),
                    bounds_satisfied: r
                        .report
                        .metrics
                        .bound_violation
                        .map(|v| v <= config.solver.eps_g),
                    history: r.history.clone(),
                },
                Err(e) => RunEntry {
                    label,
                    method,
                    constrained,
                    status: RunStatus::Failed,
                    error: Some(e.to_string()),
                    iterations: 0,
                    nu: 0.0,
                    metrics: None,
                    bounds_satisfied: None,
                    profile_file: None,
                    iterations_file: None,
                    history: Vec::new(),
                },
            }
        })
        .collect();
    let summary = RunSummary {
        manifest: manifest(config, out_dir),
        scenario: ScenarioIdentity::of(config),
        winners: winners(&runs),
        runs,
    };
    RunOutcome { summary, results }
}

/// Shortest round-trip float text, in exponent form for very small or large values.
fn num(v: &f64) -> String {
    format!("{v:?}")
}

pub const PROFILE_HEADER: [&str; 26] = [
    "t", "s", "u", "q_w", "q_x", "q_y", "q_z", "dcm_11", "dcm_12", "dcm_13", "dcm_21", "dcm_22", "dcm_23",
    "dcm_31", "dcm_32", "dcm_33", "omega_x", "omega_y", "omega_z", "omega_norm", "alpha_x", "alpha_y",
    "alpha_z", "f_ccd", "v_los", "drift",
];

/// Profile table, one row per grid node. `dcm` maps inertial to desired-frame
/// axes; rates are rad/s and rad/s^2 in inertial axes.
pub fn profile_csv(result: &MethodResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(PROFILE_HEADER).map_err(io)?;
    for node in &result.report.nodes {
        let mut row: Vec<String> = [node.t, node.s, node.u].iter().map(num).collect();
        row.extend(node.quaternion.iter().map(num));
        for i in 0..3 {
            for j in 0..3 {
                row.push(num(&node.dcm[(i, j)]));
            }
        }
        row.extend(node.omega.iter().map(num));
        row.push(num(&node.omega.norm()));
        row.extend(node.alpha.iter().map(num));
        row.push(num(&node.f_ccd));
        row.push(num(&node.v_los));
        row.push(num(&node.drift));
        w.write_record(&row).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

pub fn iterations_csv(history: &[IterationRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in history {
        w.serialize(rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    if history.is_empty() {
        return Ok(String::new());
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// Table-1 style summary: one row per run.
pub fn summary_csv(summary: &RunSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "label",
        "status",
        "iterations",
        "integral_rate_sq_deg2s",
        "max_rate_deg_s",
        "terminal_error_rad",
        "min_f_ccd",
        "max_f_ccd",
        "bound_violation",
        "bounds_satisfied",
        "integral_winner",
        "max_rate_winner",
    ])
    .map_err(io)?;
    let opt = |v: Option<f64>| v.as_ref().map(num).unwrap_or_default();
    for r in &summary.runs {
        let m = r.metrics.as_ref();
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        w.write_record([
            r.label.clone(),
            status,
            r.iterations.to_string(),
            opt(m.map(|m| m.integral_rate_sq)),
            opt(m.map(|m| m.max_rate)),
            opt(m.map(|m| m.terminal_error)),
            opt(m.map(|m| m.min_f_ccd)),
            opt(m.map(|m| m.max_f_ccd)),
            opt(m.and_then(|m| m.bound_violation)),
            r.bounds_satisfied.map(|b| b.to_string()).unwrap_or_default(),
            (summary.winners.integral_rate_sq.as_deref() == Some(r.label.as_str())).to_string(),
            (summary.winners.max_rate.as_deref() == Some(r.label.as_str())).to_string(),
        ])
        .map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// `s(t)`, `u(t)`, `f_CCD(t)` and `|omega|(t)` of every successful run.
pub fn profiles_svg(outcome: &RunOutcome) -> String {
    let ok: Vec<(&str, &MethodResult)> = outcome
        .summary
        .runs
        .iter()
        .zip(&outcome.results)
        .filter_map(|(e, r)| r.as_ref().ok().map(|r| (e.label.as_str(), r)))
        .collect();
    let panel = |title: &'static str, f: &dyn Fn(&MethodResult) -> Vec<f64>| svg::Panel {
        title,
        series: ok
            .iter()
            .map(|(label, r)| svg::Series {
                label,
                x: r.report.nodes.iter().map(|n| n.t).collect(),
                y: f(r),
            })
            .collect(),
    };
    svg::render(&[
        panel("s (rad)", &|r| r.s.clone()),
        panel("u (rad/s)", &|r| r.report.nodes.iter().map(|n| n.u).collect()),
        panel("f_CCD (Hz)", &|r| r.report.nodes.iter().map(|n| n.f_ccd).collect()),
        panel("|omega_D| (deg/s)", &|r| r.report.rate_norms_deg()),
    ])
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `manifest.json`, `summary.json`, `summary.csv`, per-run profile
/// and iteration tables and, optionally, `profiles.svg`.
pub fn write_artifacts(outcome: &RunOutcome, dir: &Path, with_svg: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write(dir, "manifest.json", &to_json(&outcome.summary.manifest)?)?;
    write(dir, "summary.json", &to_json(&outcome.summary)?)?;
    write(dir, "summary.csv", &summary_csv(&outcome.summary)?)?;
    for (entry, result) in outcome.summary.runs.iter().zip(&outcome.results) {
        if let Ok(r) = result {
            if let Some(name) = &entry.profile_file {
                write(dir, name, &profile_csv(r)?)?;
            }
            if let Some(name) = &entry.iterations_file {
                write(dir, name, &iterations_csv(&r.history)?)?;
            }
        }
    }
    if with_svg {
        write(dir, "profiles.svg", &profiles_svg(outcome))?;
    }
    Ok(())
}

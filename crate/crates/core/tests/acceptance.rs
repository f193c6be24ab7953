//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{bundled, kinematic_errors, scan_profiles, Integrator, Pendulum, BUNDLED};
use strip_guidance::astro::propagate;
use strip_guidance::config::ScenarioConfig;
use strip_guidance::ddp::{solve, DdpSolution, Horizon, InitialGuess, IterationRecord, Problem, SolverParams, Vector};
use strip_guidance::ocp::{
    brute_force_oracle, solve_method, zoh_rate_metrics, Method, MethodResult, StripScenario, DEFAULT_SHARPNESS,
};

const KINEMATIC_STEP: f64 = 1e-3;
const OMEGA_TOL: f64 = 1e-6;
const ALPHA_TOL: f64 = 1e-5;
const DRIFT_TOL: f64 = 1e-9;
const PARALLEL_SPREAD: f64 = 0.005;
const TERMINAL_TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-6;
const FLATNESS_TOL: f64 = 0.05;
const SOLVER_TOL: f64 = 1e-6;
const SYMMETRY_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;

struct Solves {
    scenarios: Vec<(String, ScenarioConfig, StripScenario)>,
    /// `(scenario, result)` for every method of every scenario.
    unconstrained: Vec<(String, MethodResult)>,
    constrained: Vec<(String, MethodResult)>,
    unconstrained_time: Duration,
}

impl Solves {
    fn all(&self) -> impl Iterator<Item = &(String, MethodResult)> {
        self.unconstrained.iter().chain(&self.constrained)
    }

    fn get(&self, name: &str, method: Method) -> &MethodResult {
        &self.unconstrained.iter().find(|(n, r)| n == name && r.method == method).unwrap().1
    }
}

fn run_solves() -> Solves {
    let scenarios: Vec<_> = BUNDLED
        .iter()
        .map(|n| {
            let (c, s) = bundled(n);
            (n.to_string(), c, s)
        })
        .collect();
    let start = Instant::now();
    let mut unconstrained = Vec::new();
    for (name, config, sc) in &scenarios {
        for method in Method::ALL {
            let r = solve_method(sc, method, false, config.run.sharpness, &config.solver).unwrap();
            unconstrained.push((name.clone(), r));
        }
    }
    let unconstrained_time = start.elapsed();
    let mut constrained = Vec::new();
    for (name, config, sc) in &scenarios {
        if config.run.constrained {
            let r = solve_method(sc, Method::MinIntegral, true, config.run.sharpness, &config.solver).unwrap();
            constrained.push((name.clone(), r));
        }
    }
    Solves {
        scenarios,
        unconstrained,
        constrained,
        unconstrained_time,
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn kinematics(solves: &Solves) -> Outcome {
    let start = Instant::now();
    let (mut w_max, mut a_max) = (0.0f64, 0.0f64);
    for (name, _, sc) in &solves.scenarios {
        for (label, scan) in scan_profiles(sc) {
            let (w, a) = kinematic_errors(sc, scan.as_ref(), KINEMATIC_STEP);
            check(w < OMEGA_TOL, format!("{name}/{label}: omega error {w:.3e} rad/s"))?;
            check(a < ALPHA_TOL, format!("{name}/{label}: alpha error {a:.3e} rad/s^2"))?;
            w_max = w_max.max(w);
            a_max = a_max.max(a);
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "max omega error {w_max:.2e} rad/s, max alpha error {a_max:.2e} rad/s^2, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn zero_drift(solves: &Solves) -> Outcome {
    let mut worst = 0.0f64;
    let mut nodes = 0;
    for (name, r) in solves.all() {
        for n in &r.report.nodes {
            check(
                n.drift.abs() < DRIFT_TOL,
                format!("{name}/{}: drift {:.3e} rad at t = {}", r.method.label(), n.drift, n.t),
            )?;
            worst = worst.max(n.drift.abs());
            nodes += 1;
        }
    }
    Ok(format!("max |drift| {worst:.2e} rad over {nodes} nodes"))
}

fn ordering(solves: &Solves) -> Outcome {
    for (name, _, _) in &solves.scenarios {
        let m = |method| solves.get(name, method).report.metrics;
        for method in Method::ALL {
            check(solves.get(name, method).converged, format!("{name}/{}: not converged", method.label()))?;
        }
        let (lin, mi, mm) = (m(Method::Linear), m(Method::MinIntegral), m(Method::MinMax));
        check(
            mi.integral_rate_sq <= lin.integral_rate_sq && mi.integral_rate_sq <= mm.integral_rate_sq,
            format!(
                "{name}: integral {:.9} / {:.9} / {:.9}",
                lin.integral_rate_sq, mi.integral_rate_sq, mm.integral_rate_sq
            ),
        )?;
        check(
            mm.max_rate <= lin.max_rate && mm.max_rate <= mi.max_rate,
            format!("{name}: max rate {:.9} / {:.9} / {:.9}", lin.max_rate, mi.max_rate, mm.max_rate),
        )?;
    }
    let spread = |f: &dyn Fn(Method) -> f64| {
        let v: Vec<f64> = Method::ALL.iter().map(|&m| f(m)).collect();
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        (hi - lo) / lo
    };
    let p = |m| solves.get("parallel", m).report.metrics;
    let si = spread(&|m| p(m).integral_rate_sq);
    let sm = spread(&|m| p(m).max_rate);
    check(si < PARALLEL_SPREAD && sm < PARALLEL_SPREAD, format!("parallel spread {si:.3e} / {sm:.3e}"))?;
    let t = solves.unconstrained_time;
    check(t < Duration::from_secs(120), format!("12 solves took {t:?}"))?;
    Ok(format!(
        "orderings hold on all scenarios, parallel spread {:.3}% / {:.3}%, 12 solves in {:.2} s",
        100.0 * si,
        100.0 * sm,
        t.as_secs_f64()
    ))
}

fn terminal(solves: &Solves) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (name, r) in solves.all().filter(|(_, r)| r.converged) {
        let e = r.report.metrics.terminal_error;
        check(e <= TERMINAL_TOL, format!("{name}/{}: |s(tf) - s_f| = {e:.3e}", r.method.label()))?;
        worst = worst.max(e);
        count += 1;
    }
    Ok(format!("max terminal error {worst:.2e} rad over {count} converged solves"))
}

fn constrained(solves: &Solves) -> Outcome {
    check(!solves.constrained.is_empty(), "no constrained scenario")?;
    let mut lines = Vec::new();
    for (name, r) in &solves.constrained {
        check(r.converged, format!("{name}: constrained run not converged"))?;
        let v = r.report.metrics.bound_violation.ok_or(format!("{name}: no bounds"))?;
        check(v <= BOUND_TOL, format!("{name}: constrained violation {v:.3e}"))?;
        let free = solves.get(name, Method::MinIntegral).report.metrics.bound_violation.unwrap();
        check(free > BOUND_TOL, format!("{name}: unconstrained run already meets the bounds ({free:.3e})"))?;
        lines.push(format!("{name} {v:.1e} vs unconstrained {free:.1e}"));
    }
    Ok(format!("bound violation {}", lines.join(", ")))
}

fn flatness(solves: &Solves) -> Outcome {
    let r = solves.get("offset", Method::MinMax);
    check(r.converged, "offset min-max not converged")?;
    let w = r.report.rate_norms_deg();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let (lo, hi) = w.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let f = (hi - lo) / mean;
    check(f < FLATNESS_TOL, format!("(max - min) / mean = {f:.4}"))?;
    Ok(format!("(max - min) / mean = {:.3}%", 100.0 * f))
}

fn constant_guess(p: &impl Problem, x0: f64, u: f64) -> InitialGuess {
    InitialGuess {
        x0: Vector::from_element(p.state_dim(), x0),
        us: vec![Vector::from_element(1, u); p.horizon().steps],
        nu: Vector::zeros(p.terminal_dim()),
    }
}

fn full_step() -> SolverParams {
    SolverParams {
        k_u: 1.0,
        k_nu: 1.0,
        ..SolverParams::default()
    }
}

fn solver_verification() -> Outcome {
    let start = Instant::now();

    let mut lqr = Integrator {
        qx: 1.0,
        ..Integrator::new(1.0, 1e-3)
    };
    let guess = constant_guess(&lqr, 1.0, 0.0);
    let sol = solve(&mut lqr, &guess, &full_step()).map_err(|e| e.to_string())?;
    let riccati = 0.5 * 1f64.tanh();
    let lqr_err = (sol.eval.cost() - riccati).abs();
    check(sol.converged, "LQR not converged")?;
    check(lqr_err < SOLVER_TOL, format!("LQR cost error {lqr_err:.3e}"))?;
    check(sol.iterations <= 3, format!("LQR took {} iterations", sol.iterations))?;

    let tf = 2.0;
    let mut transfer = Integrator {
        target: Some(1.0),
        ..Integrator::new(tf, 0.1)
    };
    let guess = constant_guess(&transfer, 0.0, 0.0);
    let params = SolverParams {
        eps_psi: 1e-10,
        ..SolverParams::default()
    };
    let sol = solve(&mut transfer, &guess, &params).map_err(|e| e.to_string())?;
    let energy_err = (sol.eval.cost() - 0.5 / tf).abs();
    let nu_err = (sol.nu[0] + 1.0 / tf).abs();
    check(sol.converged, "transfer not converged")?;
    check(energy_err < SOLVER_TOL, format!("min-energy cost error {energy_err:.3e}"))?;
    check(nu_err < SOLVER_TOL, format!("multiplier error {nu_err:.3e}"))?;

    let (config, base) = bundled("offset");
    let (r, v) = base.ephemeris.initial();
    let sc = StripScenario::new(
        "oracle",
        base.earth,
        r,
        v,
        base.curve.point(0.0),
        base.curve.point(base.arc_length()),
        30.0,
        10.0,
        base.camera,
    )
    .map_err(|e| e.to_string())?;
    let center = sc.arc_length() / sc.duration();
    let cost = |s: &[f64], u: &[f64]| Ok(zoh_rate_metrics(&sc, s, u)?.0);
    let oracle = brute_force_oracle(&sc, 3, 15, 0.01 * center, cost)
        .map_err(|e| e.to_string())?
        .ok_or("oracle found no feasible point")?;
    let ddp = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &config.solver)
        .map_err(|e| e.to_string())?;
    let j = ddp.report.metrics.integral_rate_sq;
    check(ddp.converged, "3-step DDP not converged")?;
    check(
        j <= oracle.cost + oracle.grid_bound,
        format!("3-step DDP {j:.9} vs oracle {:.9} + {:.3e}", oracle.cost, oracle.grid_bound),
    )?;

    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "LQR error {lqr_err:.1e}, min-energy error {energy_err:.1e}, 3-step DDP {j:.6} <= oracle {:.6} + {:.1e}, {:.2} s",
        oracle.cost,
        oracle.grid_bound,
        elapsed.as_secs_f64()
    ))
}

fn check_history(label: &str, history: &[IterationRecord]) -> Result<(f64, f64), String> {
    let mut sym = 0.0f64;
    let mut lambda = f64::INFINITY;
    for rec in history {
        check(
            rec.symmetry_error < SYMMETRY_TOL,
            format!("{label} iteration {}: asymmetry {:.3e}", rec.iteration, rec.symmetry_error),
        )?;
        check(rec.min_lambda >= 0.0, format!("{label} iteration {}: lambda {:.3e}", rec.iteration, rec.min_lambda))?;
        if rec.step > 0.0 {
            check(
                rec.merit_after <= rec.merit_before + rec.merit_tolerance,
                format!(
                    "{label} iteration {}: merit {:.17e} -> {:.17e}",
                    rec.iteration, rec.merit_before, rec.merit_after
                ),
            )?;
        }
        sym = sym.max(rec.symmetry_error);
        lambda = lambda.min(rec.min_lambda);
    }
    Ok((sym, lambda))
}

fn hygiene(solves: &Solves) -> Outcome {
    let mut histories: Vec<(String, Vec<IterationRecord>)> = solves
        .all()
        .map(|(n, r)| (format!("{n}/{}{}", r.method.label(), if r.constrained { "-constrained" } else { "" }), r.history.clone()))
        .collect();

    let mut pendulum = Pendulum {
        horizon: Horizon::new(0.0, 2.0, 0.05).map_err(|e| e.to_string())?,
    };
    let guess = constant_guess(&pendulum, 0.0, 0.4);
    let sol: DdpSolution = solve(&mut pendulum, &guess, &SolverParams::default()).map_err(|e| e.to_string())?;
    check(sol.converged, "2-state problem not converged")?;
    histories.push(("2-state".into(), sol.history));

    let mut bounded = Integrator {
        uref: 1.0,
        umax: Some(0.5),
        ..Integrator::new(2.0, 0.1)
    };
    let guess = constant_guess(&bounded, 0.0, 0.0);
    let sol = solve(&mut bounded, &guess, &SolverParams::default()).map_err(|e| e.to_string())?;
    check(sol.converged, "bounded integrator not converged")?;
    check(sol.al.lambda.max() > 0.0, "bound never became active")?;
    histories.push(("bounded".into(), sol.history));

    let (mut sym, mut lambda) = (0.0f64, f64::INFINITY);
    let mut sweeps = 0;
    for (label, h) in &histories {
        let (s, l) = check_history(label, h)?;
        sym = sym.max(s);
        lambda = lambda.min(l);
        sweeps += h.len();
    }

    let mut drift = 0.0f64;
    for (name, _, sc) in &solves.scenarios {
        let (r0, v0) = sc.ephemeris.initial();
        let e0 = propagate(&r0, &v0, 0.0, &sc.earth).map_err(|e| e.to_string())?.specific_energy(sc.earth.mu);
        let s1 = propagate(&r0, &v0, sc.duration(), &sc.earth).map_err(|e| e.to_string())?;
        let rel = ((s1.specific_energy(sc.earth.mu) - e0) / e0).abs();
        check(rel < ENERGY_TOL, format!("{name}: relative energy drift {rel:.3e}"))?;
        drift = drift.max(rel);
    }
    Ok(format!(
        "{sweeps} sweeps, max asymmetry {sym:.1e}, min lambda {lambda:.1e}, merit monotone, energy drift {drift:.1e}"
    ))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    })
}

fn main() {
    let Ok(solves) = catch_unwind(run_solves) else {
        println!("setup: FAIL bundled scenario solves panicked");
        std::process::exit(1);
    };
    let results = [
        (1, "kinematics oracle", guarded(|| kinematics(&solves))),
        (2, "zero drift", guarded(|| zero_drift(&solves))),
        (3, "method ordering", guarded(|| ordering(&solves))),
        (4, "terminal feasibility", guarded(|| terminal(&solves))),
        (5, "line-rate bounds", guarded(|| constrained(&solves))),
        (6, "min-max flatness", guarded(|| flatness(&solves))),
        (7, "solver verification", guarded(solver_verification)),
        (8, "numerical hygiene", guarded(|| hygiene(&solves))),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n}: PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

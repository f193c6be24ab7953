use std::path::PathBuf;

use approx::assert_relative_eq;
use proptest::prelude::*;
use strip_guidance::astro::{EarthModel, Vec3};
use strip_guidance::attitude::CameraParams;
use strip_guidance::config::ScenarioConfig;
use strip_guidance::ddp::{forward_rollout, solve, Problem, SolverParams, Vector};
use strip_guidance::ocp::{
    brute_force_oracle, build_min_integral, build_minmax, evaluate_profile, linear_guess, linear_states, rate_jet,
    solve_method, zoh_rate_metrics, Method, SoftmaxSchedule, StripScenario, DEFAULT_SHARPNESS, DEG2,
};
use strip_guidance::Error;

fn bundled(name: &str) -> StripScenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"));
    ScenarioConfig::load(path).unwrap().build().unwrap()
}

const BUNDLED: [&str; 4] = ["parallel", "offset", "perpendicular", "reverse"];

fn tight() -> SolverParams {
    SolverParams {
        eps_psi: 1e-10,
        ..SolverParams::default()
    }
}

/// Satellite at rest 500 km up, `shift_km` along the strip from its midpoint
/// and 50 km off its plane; Earth not rotating and gravity negligible, so the
/// frame rate is `u * g(s)` with no explicit time dependence.
fn stationary(half_width_km: f64, shift_km: f64, duration: f64, dt: f64) -> StripScenario {
    let earth = EarthModel {
        mu: 1e-20,
        ..EarthModel::default().non_rotating()
    };
    let re = earth.radius;
    let half = half_width_km * 1e3 / re;
    let start = re * Vec3::new(half.cos(), -half.sin(), 0.0);
    let end = re * Vec3::new(half.cos(), half.sin(), 0.0);
    let shift = shift_km * 1e3 / re;
    let sat = (re + 500e3) * Vec3::new(shift.cos(), shift.sin(), 0.0) + Vec3::new(0.0, 0.0, 50e3);
    StripScenario::new(
        "stationary",
        earth,
        sat,
        Vec3::zeros(),
        start,
        end,
        duration,
        dt,
        CameraParams::default(),
    )
    .unwrap()
}

/// Composite Simpson integral of `|g(s)|` over the strip, with `g = omega / u`.
fn rate_metric_length(scenario: &StripScenario, panels: usize) -> f64 {
    let sf = scenario.arc_length();
    let h = sf / panels as f64;
    let g = |s: f64| scenario.rate(s, 1.0, 0.0).unwrap().norm();
    let mut acc = g(0.0) + g(sf);
    for i in 1..panels {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn linear_guess_reaches_the_strip_end_exactly() {
    for name in BUNDLED {
        let sc = bundled(name);
        let guess = linear_guess(&sc);
        let rate = sc.arc_length() / sc.duration();
        assert!(guess.us.iter().all(|u| u[0] == rate));
        assert_eq!(guess.nu[0], 0.0);
        let states = linear_states(&sc);
        assert_eq!(*states.last().unwrap(), sc.arc_length());
        let p = build_min_integral(&sc, false).unwrap();
        let traj = forward_rollout(&p, &guess.us, &guess.x0).unwrap();
        assert_relative_eq!(traj.final_state()[0], sc.arc_length(), max_relative = 1e-14);
    }
}

#[test]
fn linear_rate_matches_strip_length_over_duration() {
    let sc = stationary(15.0, 0.0, 30.0, 1.0);
    let guess = linear_guess(&sc);
    assert_relative_eq!(guess.us[0][0] * 30.0, sc.arc_length(), max_relative = 1e-15);
}

#[test]
fn running_cost_is_squared_rate_in_degrees() {
    let sc = bundled("offset");
    let p = build_min_integral(&sc, false).unwrap();
    for &(s, u, t) in &[(0.0, 1.4e-3, 0.0), (0.02, 1.5e-3, 12.5), (0.04, 1.3e-3, 29.0)] {
        let w = sc.rate(s, u, t).unwrap();
        let expected = w.norm_squared() * (180.0 / std::f64::consts::PI).powi(2);
        let l = p.running_cost(&Vector::from_element(1, s), &Vector::from_element(1, u), t).unwrap();
        assert_relative_eq!(l, expected, max_relative = 1e-14);
        assert_relative_eq!(DEG2, 3282.806350011744, max_relative = 1e-15);
    }
}

#[test]
fn control_hessian_is_positive_at_every_node() {
    for name in BUNDLED {
        let sc = bundled(name);
        let guess = linear_guess(&sc);
        let states = linear_states(&sc);
        let mut minmax = build_minmax(&sc, SoftmaxSchedule::new(DEFAULT_SHARPNESS).unwrap(), false).unwrap();
        let xs: Vec<Vector> = states.iter().map(|&s| Vector::from_element(1, s)).collect();
        minmax.refresh(&xs, &guess.us).unwrap();
        let minint = build_min_integral(&sc, false).unwrap();
        for k in 0..sc.horizon.steps {
            let (x, t) = (&xs[k], sc.horizon.time(k));
            for p in [&minint, &minmax] {
                let e = p.running_cost_expansion(x, &guess.us[k], t).unwrap();
                assert!(e.l_uu[(0, 0)] > 0.0, "{name} node {k}: L_uu = {}", e.l_uu[(0, 0)]);
            }
        }
    }
}

#[test]
fn rate_jet_matches_richardson_differences() {
    let sc = bundled("perpendicular");
    for &(s, u, t) in &[(0.005, 1.0e-3, 3.0), (0.017, 1.1e-3, 15.0), (0.03, 0.9e-3, 27.0)] {
        let jet = rate_jet(&sc, s, u, t).unwrap();
        let w = |ds: f64, du: f64| sc.rate(s + ds, u + du, t).unwrap();
        // Richardson extrapolation of central differences at h and h/2.
        let rich = |f: &dyn Fn(f64) -> Vec3, h: f64| {
            let d1 = (f(h) - f(-h)) / (2.0 * h);
            let d2 = (f(h / 2.0) - f(-h / 2.0)) / h;
            (4.0 * d2 - d1) / 3.0
        };
        let ws = rich(&|h| w(h, 0.0), 1e-5);
        let wu = rich(&|h| w(0.0, h), 1e-7);
        assert!((jet.w_s - ws).norm() <= 1e-6 * ws.norm().max(1e-9), "w_s {:?} vs {:?}", jet.w_s, ws);
        assert!((jet.w_u - wu).norm() <= 1e-6 * wu.norm().max(1e-9), "w_u {:?} vs {:?}", jet.w_u, wu);
    }
}

#[test]
fn cost_gradient_matches_finite_differences() {
    let sc = bundled("offset");
    let guess = linear_guess(&sc);
    let mut minmax = build_minmax(&sc, SoftmaxSchedule::new(DEFAULT_SHARPNESS).unwrap(), false).unwrap();
    let xs: Vec<Vector> = linear_states(&sc).iter().map(|&s| Vector::from_element(1, s)).collect();
    minmax.refresh(&xs, &guess.us).unwrap();
    let minint = build_min_integral(&sc, false).unwrap();
    let (s, u, t) = (0.02, 1.5e-3, 14.0);
    for p in [&minint, &minmax] {
        let l = |ds: f64, du: f64| {
            p.running_cost(&Vector::from_element(1, s + ds), &Vector::from_element(1, u + du), t)
                .unwrap()
        };
        let e = p
            .running_cost_expansion(&Vector::from_element(1, s), &Vector::from_element(1, u), t)
            .unwrap();
        let (hs, hu) = (1e-6, 1e-8);
        let ls = (l(hs, 0.0) - l(-hs, 0.0)) / (2.0 * hs);
        let lu = (l(0.0, hu) - l(0.0, -hu)) / (2.0 * hu);
        assert_relative_eq!(e.l_x[0], ls, max_relative = 1e-5);
        assert_relative_eq!(e.l_u[0], lu, max_relative = 1e-5);
        assert_relative_eq!(e.value, l(0.0, 0.0), max_relative = 1e-15);
    }
}

#[test]
fn surrogate_is_pinned_to_one_at_the_peak() {
    let mut sch = SoftmaxSchedule::new(DEFAULT_SHARPNESS).unwrap();
    sch.update(0.02).unwrap();
    assert_relative_eq!(sch.n * 0.02, DEFAULT_SHARPNESS, max_relative = 1e-15);
    assert_relative_eq!(sch.value(0.02), 1.0, max_relative = 1e-14);
    let (l, d1, d2) = sch.derivatives(0.015);
    let h = 1e-7;
    assert_relative_eq!(l, sch.value(0.015), max_relative = 1e-15);
    assert_relative_eq!(d1, (sch.value(0.015 + h) - sch.value(0.015 - h)) / (2.0 * h), max_relative = 1e-6);
    let d1p = sch.derivatives(0.015 + h).1;
    let d1m = sch.derivatives(0.015 - h).1;
    assert_relative_eq!(d2, (d1p - d1m) / (2.0 * h), max_relative = 1e-6);
}

#[test]
fn surrogate_rejects_bad_sharpness() {
    for bad in [0.0, -1.0, 31.0, f64::NAN, f64::INFINITY] {
        assert!(SoftmaxSchedule::new(bad).is_err());
    }
    let mut sch = SoftmaxSchedule::new(30.0).unwrap();
    assert!(sch.update(0.0).is_err());
}

proptest! {
    #[test]
    fn surrogate_is_increasing_and_convex(sharpness in 0.5f64..20.0, peak in 1e-4f64..0.1, a in 0.0f64..1.2, b in 0.0f64..1.2) {
        let mut sch = SoftmaxSchedule::new(sharpness).unwrap();
        sch.update(peak).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(sch.value(lo * peak) <= sch.value(hi * peak));
        let (_, d1, d2) = sch.derivatives(lo * peak);
        prop_assert!(d1 >= 0.0 && d2 >= d1 * sch.n);
    }

    #[test]
    fn constant_rate_gives_constant_surrogate(sharpness in 0.5f64..20.0, peak in 1e-4f64..0.1) {
        let mut sch = SoftmaxSchedule::new(sharpness).unwrap();
        sch.update(peak).unwrap();
        let values: Vec<f64> = (0..5).map(|_| sch.value(peak)).collect();
        // `exp(N w)` carries a relative rounding error, magnified by `exp(sharpness)`.
        let tol = 1e-14 * sharpness.exp();
        prop_assert!(values.iter().all(|&v| (v - 1.0).abs() < tol));
    }
}

#[test]
fn stationary_satellite_optimum_is_the_metric_geodesic() {
    // With omega = u g(s), int |omega|^2 dt >= (int |g| ds)^2 / T, with
    // equality for the constant rate |omega| = int |g| ds / T, which also
    // minimizes max |omega|.
    let params = tight();
    let mut peak_errors = Vec::new();
    for dt in [1.0, 0.5] {
        let sc = stationary(100.0, 60.0, 30.0, dt);
        let length = rate_metric_length(&sc, 2000);
        let optimum = DEG2 * length * length / sc.duration();
        let const_rate = (length / sc.duration()).to_degrees();
        let minint = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &params).unwrap();
        let minmax = solve_method(&sc, Method::MinMax, false, DEFAULT_SHARPNESS, &params).unwrap();
        let linear = solve_method(&sc, Method::Linear, false, DEFAULT_SHARPNESS, &params).unwrap();
        assert!(minint.converged && minmax.converged);
        assert!(linear.report.metrics.integral_rate_sq > optimum * (1.0 + 1e-3));
        assert_relative_eq!(minint.report.metrics.integral_rate_sq, optimum, max_relative = 1e-4);
        let peak = minmax.report.metrics.max_rate;
        assert!(peak >= const_rate && peak < linear.report.metrics.max_rate);
        peak_errors.push((peak - const_rate) / const_rate);
    }
    // The zero-order hold leaves an O(dt) ripple in the sampled peak.
    assert!(peak_errors[0] < 1e-2, "{peak_errors:?}");
    assert!(peak_errors[1] < 0.6 * peak_errors[0], "{peak_errors:?}");
}

#[test]
fn stationary_symmetric_strip_gives_symmetric_controls() {
    let sc = stationary(100.0, 0.0, 30.0, 1.0);
    let r = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &tight()).unwrap();
    let n = r.u.len();
    // The satellite sits off the strip plane, so the problem is symmetric
    // under s -> s_f - s, t -> T - t.
    for k in 0..n {
        assert_relative_eq!(r.u[k], r.u[n - 1 - k], max_relative = 1e-6);
    }
}

fn oracle_scenario(steps: usize) -> StripScenario {
    let sc = bundled("offset");
    let (r, v) = sc.ephemeris.initial();
    StripScenario::new(
        "oracle",
        sc.earth,
        r,
        v,
        sc.curve.point(0.0),
        sc.curve.point(sc.arc_length()),
        30.0,
        30.0 / steps as f64,
        sc.camera,
    )
    .unwrap()
}

#[test]
fn ddp_is_no_worse_than_the_three_step_grid_oracle() {
    let sc = oracle_scenario(3);
    let center = sc.arc_length() / sc.duration();
    let cost = |s: &[f64], u: &[f64]| Ok(zoh_rate_metrics(&sc, s, u)?.0);
    let oracle = brute_force_oracle(&sc, 3, 15, 0.01 * center, cost).unwrap().unwrap();
    let ddp = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &tight()).unwrap();
    assert!(ddp.converged);
    let j = ddp.report.metrics.integral_rate_sq;
    assert!(j <= oracle.cost + oracle.grid_bound, "ddp {j} oracle {} bound {}", oracle.cost, oracle.grid_bound);
    for (u, uo) in ddp.u.iter().zip(&oracle.controls) {
        assert!((u - uo).abs() <= oracle.spacing, "ddp {u} oracle {uo}");
    }
}

#[test]
fn two_step_oracle_is_a_one_dimensional_scan() {
    let sc = oracle_scenario(2);
    let center = sc.arc_length() / sc.duration();
    let cost = |s: &[f64], u: &[f64]| Ok(zoh_rate_metrics(&sc, s, u)?.0);
    let oracle = brute_force_oracle(&sc, 2, 15, 0.01 * center, cost).unwrap().unwrap();
    assert_relative_eq!(oracle.controls[0] + oracle.controls[1], 2.0 * center, max_relative = 1e-12);
    assert_relative_eq!(*oracle.states.last().unwrap(), sc.arc_length(), max_relative = 1e-12);
    let ddp = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &tight()).unwrap();
    assert!(ddp.report.metrics.integral_rate_sq <= oracle.cost + oracle.grid_bound);
    assert!((ddp.u[0] - oracle.controls[0]).abs() <= oracle.spacing);
}

#[test]
fn oracle_rejects_oversized_or_mismatched_grids() {
    let sc = oracle_scenario(3);
    let cost = |_: &[f64], _: &[f64]| Ok(0.0);
    assert!(brute_force_oracle(&sc, 2, 5, 1e-5, cost).is_err());
    assert!(brute_force_oracle(&sc, 3, 16, 1e-5, cost).is_err());
    assert!(brute_force_oracle(&sc, 3, 17, 1e-5, cost).is_err());
    assert!(brute_force_oracle(&sc, 3, 5, 0.0, cost).is_err());
    assert!(brute_force_oracle(&bundled("offset"), 30, 3, 1e-5, cost).is_err());
}

#[test]
fn zero_length_strip_is_degenerate() {
    let sc = bundled("parallel");
    let (r, v) = sc.ephemeris.initial();
    let p = sc.curve.point(0.0);
    let err = StripScenario::new("zero", sc.earth, r, v, p, p, 30.0, 1.0, sc.camera).unwrap_err();
    assert!(matches!(err, Error::DegenerateGeometry(_)), "{err:?}");
    assert!(err.is_kinematic());
}

#[test]
fn strip_behind_the_horizon_is_rejected() {
    let sc = bundled("parallel");
    let (r, v) = sc.ephemeris.initial();
    let far = -sc.curve.point(0.0);
    let err = StripScenario::new("far", sc.earth, r, v, far, sc.curve.point(0.0), 30.0, 1.0, sc.camera);
    assert!(err.is_err());
}

#[test]
fn profile_rejects_wrong_lengths_and_non_finite_values() {
    let sc = bundled("parallel");
    let s = linear_states(&sc);
    let u: Vec<f64> = linear_guess(&sc).us.iter().map(|v| v[0]).collect();
    assert!(evaluate_profile(&sc, &s[1..], &u).is_err());
    assert!(evaluate_profile(&sc, &s, &u[1..]).is_err());
    let mut bad = u.clone();
    bad[3] = f64::NAN;
    assert!(evaluate_profile(&sc, &s, &bad).is_err());
    let report = evaluate_profile(&sc, &s, &u).unwrap();
    assert_eq!(report.nodes.len(), sc.horizon.nodes());
    assert_eq!(report.metrics.terminal_error, 0.0);
    assert!(report.metrics.bound_violation.is_none());
}

#[test]
fn parallel_strip_line_rate_is_nearly_constant() {
    let sc = bundled("parallel");
    let s = linear_states(&sc);
    let u: Vec<f64> = linear_guess(&sc).us.iter().map(|v| v[0]).collect();
    let report = evaluate_profile(&sc, &s, &u).unwrap();
    let f: Vec<f64> = report.nodes.iter().map(|n| n.f_ccd).collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let (lo, hi) = f.iter().fold((f64::MAX, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) / mean < 0.02, "variation {}", (hi - lo) / mean);
}

#[test]
fn parallel_strip_guess_is_near_optimal() {
    let sc = bundled("parallel");
    let params = tight();
    let linear = solve_method(&sc, Method::Linear, false, DEFAULT_SHARPNESS, &params).unwrap();
    let opt = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &params).unwrap();
    let (a, b) = (linear.report.metrics.integral_rate_sq, opt.report.metrics.integral_rate_sq);
    assert!(b <= a);
    assert!((a - b) / a < 1e-3);
}

#[test]
fn min_integral_never_exceeds_linear_cost() {
    for name in BUNDLED {
        let sc = bundled(name);
        let params = tight();
        let linear = solve_method(&sc, Method::Linear, false, DEFAULT_SHARPNESS, &params).unwrap();
        let opt = solve_method(&sc, Method::MinIntegral, false, DEFAULT_SHARPNESS, &params).unwrap();
        assert!(opt.converged, "{name}");
        assert!(opt.report.metrics.integral_rate_sq <= linear.report.metrics.integral_rate_sq, "{name}");
    }
}

#[test]
fn offset_strip_min_max_rate_is_flat() {
    let sc = bundled("offset");
    let r = solve_method(&sc, Method::MinMax, false, DEFAULT_SHARPNESS, &tight()).unwrap();
    assert!(r.converged);
    let w = r.report.rate_norms_deg();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let (lo, hi) = w.iter().fold((f64::MAX, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!((hi - lo) / mean < 0.05);
}

#[test]
fn constrained_problem_needs_bounds() {
    let sc = bundled("offset");
    assert!(build_min_integral(&sc, true).is_err());
    let bounded = bundled("reverse");
    let p = build_min_integral(&bounded, true).unwrap();
    assert_eq!(p.inequality_dim(), 2);
}

#[test]
fn exact_and_gauss_newton_hessians_reach_the_same_optimum() {
    let sc = bundled("offset");
    let guess = linear_guess(&sc);
    let mut gn = build_min_integral(&sc, false).unwrap();
    let mut exact = build_min_integral(&sc, false).unwrap();
    exact.exact_hessian = true;
    let a = solve(&mut gn, &guess, &tight()).unwrap();
    let b = solve(&mut exact, &guess, &tight()).unwrap();
    assert!(a.converged && b.converged);
    assert_relative_eq!(a.eval.cost(), b.eval.cost(), max_relative = 1e-8);
}

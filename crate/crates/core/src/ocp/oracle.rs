use super::scenario::StripScenario;
use crate::error::{Error, Result};

pub const MAX_ORACLE_STEPS: usize = 4;
pub const MAX_ORACLE_GRID: usize = 15;

/// Best grid point of an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub controls: Vec<f64>,
    pub states: Vec<f64>,
    pub cost: f64,
    /// Largest cost change to a feasible grid neighbour of the optimum.
    pub grid_bound: f64,
    pub spacing: f64,
}

/// Exhaustive search over piecewise-constant controls
/// `u_k = s_f / T + j_k * spacing`, `|j_k| <= (grid - 1) / 2`.
///
/// Only combinations with `sum j_k = 0` reach `s_f` exactly on this lattice,
/// so those are the feasible set. `cost` receives `(s, u)` on the scenario
/// grid. Returns `None` when no feasible point has a finite cost.
pub fn brute_force_oracle<F>(
    scenario: &StripScenario,
    n_steps: usize,
    grid_per_step: usize,
    spacing: f64,
    cost: F,
) -> Result<Option<OracleResult>>
where
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let h = scenario.horizon;
    if n_steps == 0 || n_steps > MAX_ORACLE_STEPS || n_steps != h.steps {
        return Err(Error::validation(format!(
            "oracle needs 1..={MAX_ORACLE_STEPS} steps matching the scenario grid ({})",
            h.steps
        )));
    }
    if grid_per_step == 0 || grid_per_step > MAX_ORACLE_GRID || grid_per_step.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "oracle grid must be odd and at most {MAX_ORACLE_GRID}"
        )));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::validation("oracle spacing must be positive"));
    }
    let half = (grid_per_step / 2) as i64;
    let center = scenario.arc_length() / scenario.duration();
    let eval = |offsets: &[i64]| -> Result<Option<(Vec<f64>, Vec<f64>, f64)>> {
        let u: Vec<f64> = offsets.iter().map(|&j| center + j as f64 * spacing).collect();
        let mut s = vec![0.0];
        for &uk in &u {
            s.push(s.last().unwrap() + h.dt * uk);
        }
        match cost(&s, &u) {
            Ok(c) if c.is_finite() => Ok(Some((s, u, c))),
            Ok(_) => Ok(None),
            Err(e) if e.is_kinematic() => Ok(None),
            Err(e) => Err(e),
        }
    };

    let mut best: Option<(Vec<i64>, Vec<f64>, Vec<f64>, f64)> = None;
    let mut offsets = vec![-half; n_steps];
    loop {
        if offsets.iter().sum::<i64>() == 0 {
            if let Some((s, u, c)) = eval(&offsets)? {
                if best.as_ref().is_none_or(|b| c < b.3) {
                    best = Some((offsets.clone(), s, u, c));
                }
            }
        }
        // Odometer increment.
        let mut i = 0;
        while i < n_steps {
            offsets[i] += 1;
            if offsets[i] <= half {
                break;
            }
            offsets[i] = -half;
            i += 1;
        }
        if i == n_steps {
            break;
        }
    }

    let Some((j, states, controls, cost_best)) = best else {
        return Ok(None);
    };
    // Feasible neighbours move one unit up in one step and down in another.
    let mut grid_bound: f64 = 0.0;
    for a in 0..n_steps {
        for b in 0..n_steps {
            if a == b {
                continue;
            }
            let mut nb = j.clone();
            nb[a] += 1;
            nb[b] -= 1;
            if let Some((_, _, c)) = eval(&nb)? {
                grid_bound = grid_bound.max((c - cost_best).abs());
            }
        }
    }
    Ok(Some(OracleResult {
        controls,
        states,
        cost: cost_best,
        grid_bound,
        spacing,
    }))
}

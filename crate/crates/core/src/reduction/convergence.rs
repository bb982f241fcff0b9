use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{avg_gap_report, average_trajectory, InteriorWindow};
use crate::error::{GullyError, Result};
use crate::grid::ReducedGrid;
use crate::model::Scenario;
use crate::solver::{run_full, solver_config, ReducedSnapshot, ReducedSolver, SolverConfig};

/// Refinement factor of the reference run, in space and in time.
pub const REFERENCE_REFINEMENT: usize = 4;

/// Spread under which errors count as independent of the width.
const EPSILON_INDEPENDENT_TOL: f64 = 1e-8;

/// Per-time maximum over the window of
/// `|d_t U - d_sigma^2 U - f*(U)|`, with a centered time difference.
pub fn limit_residual(
    trajectory: &[ReducedSnapshot],
    solver: &ReducedSolver,
    window: &InteriorWindow,
) -> Result<Vec<(f64, f64)>> {
    if trajectory.len() < 3 {
        return Err(GullyError::config(
            "numerics.output_every",
            format!("residual needs at least 3 output times, got {}", trajectory.len()),
        ));
    }
    let idx = window.sigma_indices(solver.grid().sigmas())?;
    let mut out = Vec::new();
    for k in 1..trajectory.len() - 1 {
        let now = &trajectory[k];
        if !window.contains_time(now.time) {
            continue;
        }
        let (prev, next) = (&trajectory[k - 1], &trajectory[k + 1]);
        let span = next.time - prev.time;
        let lap = solver.diffusion(&now.values);
        let forcing = solver.forcing(&now.values);
        let worst = idx
            .iter()
            .map(|&i| ((next.values[i] - prev.values[i]) / span - lap[i] - forcing[i]).abs())
            .fold(0.0, f64::max);
        out.push((now.time, worst));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub n_sigma: usize,
    pub dt: f64,
    pub refinement: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub n_s: usize,
    /// `sup |U_eps - U|` over all axis nodes and output times.
    pub sup_error: f64,
    /// First arclength derivative error on the interior window.
    pub grad_error: f64,
    /// Second arclength derivative error on the interior window.
    pub hess_error: f64,
    /// Time derivative error on the interior window.
    pub dt_error: f64,
    /// Largest residual of the axis equation evaluated on `U_eps`, on the window.
    pub residual_max: f64,
    /// Largest ratio of transverse gap to its admissible value over output times.
    pub gap_max_ratio: f64,
    pub gap_pass: bool,
    pub gronwall_ratio: f64,
    pub picard_warnings: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilon_list: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    pub reference: ReferenceInfo,
    pub window: InteriorWindow,
    pub sup_monotone: bool,
    pub grad_monotone: bool,
    pub hess_monotone: bool,
    pub dt_monotone: bool,
    pub residual_monotone: bool,
    /// Sup errors agree across widths (symmetric configurations).
    pub epsilon_independent: bool,
    pub pass: bool,
}

fn strictly_decreasing(rows: &[ConvergenceRow], key: impl Fn(&ConvergenceRow) -> f64) -> bool {
    rows.iter().all(|r| r.error.is_none()) && rows.windows(2).all(|w| key(&w[1]) < key(&w[0]))
}

/// Reference values restricted to the coarse lattice, with their window derivatives.
struct Reference {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    d_sigma: Vec<Vec<f64>>,
    d_sigma2: Vec<Vec<f64>>,
}

fn second_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
    }
    out
}

fn central_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out
}

fn reference_run(scenario: &Scenario) -> Result<(Reference, ReferenceInfo)> {
    let r = REFERENCE_REFINEMENT;
    let n_coarse = scenario.numerics.n_sigma;
    let n_fine = r * (n_coarse - 1) + 1;
    let grid = Arc::new(ReducedGrid::new(scenario.total_length(), n_fine)?);
    let base = solver_config(scenario);
    let config = SolverConfig {
        dt: base.dt / r as f64,
        ..base
    };
    let solver = ReducedSolver::new(Arc::clone(&grid), scenario, config)?;
    let run = solver.run(r * scenario.step_count(), r * scenario.numerics.output_every)?;
    let h = grid.h_sigma();
    let restrict = |v: &[f64]| (0..n_coarse).map(|i| v[r * i]).collect::<Vec<f64>>();
    let mut reference = Reference {
        times: Vec::new(),
        values: Vec::new(),
        d_sigma: Vec::new(),
        d_sigma2: Vec::new(),
    };
    for snap in &run.snapshots {
        reference.times.push(snap.time);
        reference.values.push(restrict(&snap.values));
        reference.d_sigma.push(restrict(&central_difference(&snap.values, h)));
        reference.d_sigma2.push(restrict(&second_difference(&snap.values, h)));
    }
    Ok((
        reference,
        ReferenceInfo {
            n_sigma: n_fine,
            dt: config.dt,
            refinement: r,
        },
    ))
}

fn study_width(
    scenario: &Scenario,
    index: usize,
    reference: &Reference,
    window: &InteriorWindow,
) -> Result<ConvergenceRow> {
    let run = run_full(scenario, index)?;
    let averaged = average_trajectory(&run.snapshots);
    if averaged.len() != reference.times.len()
        || averaged.iter().zip(&reference.times).any(|(a, t)| a.time != *t)
    {
        return Err(GullyError::Numerical("band and reference output times differ".into()));
    }
    let axis = averaged[0].grid.clone();
    let h = axis.h_sigma();
    let idx = window.sigma_indices(axis.sigmas())?;

    let mut row = ConvergenceRow {
        epsilon: run.epsilon,
        n_s: scenario.n_s[index],
        gronwall_ratio: run.diagnostics.gronwall_max_ratio,
        picard_warnings: run.diagnostics.picard_warnings,
        gap_pass: true,
        ..ConvergenceRow::default()
    };
    for (k, snap) in averaged.iter().enumerate() {
        row.sup_error = snap
            .values
            .iter()
            .zip(&reference.values[k])
            .map(|(a, b)| (a - b).abs())
            .fold(row.sup_error, f64::max);
        if !window.contains_time(snap.time) {
            continue;
        }
        let d1 = central_difference(&snap.values, h);
        let d2 = second_difference(&snap.values, h);
        for &i in &idx {
            row.grad_error = row.grad_error.max((d1[i] - reference.d_sigma[k][i]).abs());
            row.hess_error = row.hess_error.max((d2[i] - reference.d_sigma2[k][i]).abs());
        }
        if k >= 1 && k + 1 < averaged.len() {
            let span = averaged[k + 1].time - averaged[k - 1].time;
            for &i in &idx {
                let ours = (averaged[k + 1].values[i] - averaged[k - 1].values[i]) / span;
                let theirs = (reference.values[k + 1][i] - reference.values[k - 1][i]) / span;
                row.dt_error = row.dt_error.max((ours - theirs).abs());
            }
        }
    }

    let exponent = 1.0 + scenario.analysis.lambda;
    for snap in &run.snapshots {
        let gap = avg_gap_report(&snap.grid, &snap.values, exponent)?;
        row.gap_pass &= gap.pass;
        row.gap_max_ratio = row.gap_max_ratio.max(gap.ratio);
    }

    if averaged.len() >= 3 {
        let solver = ReducedSolver::new(axis, scenario, solver_config(scenario))?;
        row.residual_max = limit_residual(&averaged, &solver, window)?
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max);
    }
    Ok(row)
}

/// Runs every width, averages, and compares with a refined axis reference.
pub fn convergence_study(scenario: &Scenario) -> Result<ConvergenceReport> {
    if scenario.epsilons.len() < 3 {
        return Err(GullyError::config(
            "domain.epsilon_list",
            format!("a convergence study needs at least 3 widths, got {}", scenario.epsilons.len()),
        ));
    }
    let normalized = scenario.normalized();
    let window = InteriorWindow::from_scenario(&normalized);
    let (reference, info) = reference_run(&normalized)?;
    let rows: Vec<ConvergenceRow> = (0..normalized.epsilons.len())
        .into_par_iter()
        .map(|k| {
            study_width(&normalized, k, &reference, &window).unwrap_or_else(|e| ConvergenceRow {
                epsilon: normalized.epsilons[k],
                n_s: normalized.n_s[k],
                error: Some(e.to_string()),
                ..ConvergenceRow::default()
            })
        })
        .collect();
    let sup_monotone = strictly_decreasing(&rows, |r| r.sup_error);
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.sup_error), hi.max(r.sup_error)));
    let epsilon_independent = rows.iter().all(|r| r.error.is_none()) && hi - lo <= EPSILON_INDEPENDENT_TOL;
    Ok(ConvergenceReport {
        epsilon_list: normalized.epsilons.clone(),
        grad_monotone: strictly_decreasing(&rows, |r| r.grad_error),
        hess_monotone: strictly_decreasing(&rows, |r| r.hess_error),
        dt_monotone: strictly_decreasing(&rows, |r| r.dt_error),
        residual_monotone: strictly_decreasing(&rows, |r| r.residual_max),
        sup_monotone,
        epsilon_independent,
        pass: sup_monotone || epsilon_independent,
        rows,
        reference: info,
        window,
    })
}

//! Multi-width verification drivers returning named checks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{verify_reflection, ReflectionReport};
use crate::check::{all_pass, Check};
use crate::error::Result;
use crate::geometry::{verify_geometry, GeometryReport};
use crate::model::{verify_kernel_assumptions, KernelReport, Scenario};
use crate::reduction::{
    avg_gap_report, average_trajectory, lb_gap_report, limit_residual, InteriorWindow, LbGapReport,
};
use crate::solver::{run_full, run_reduced, solver_config, ReducedSolver, GRONWALL_SLACK};

/// Points sampled per width by the kernel suite.
pub const KERNEL_SAMPLES: usize = 2048;

/// Spread under which residuals count as independent of the width.
const RESIDUAL_INDEPENDENT_TOL: f64 = 1e-8;

/// Round-off allowance on the cross-width mass ratio.
const MASS_RATIO_SLACK: f64 = 1e-12;

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySuite {
    pub per_epsilon: Vec<GeometryReport>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Geometry checks on the chart and lattice of every width.
pub fn geometry_suite(scenario: &Scenario) -> Result<GeometrySuite> {
    let per_epsilon = (0..scenario.epsilons.len())
        .into_par_iter()
        .map(|k| verify_geometry(&*scenario.chart(k)?, scenario.numerics.n_sigma, scenario.n_s[k]))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<Check> = per_epsilon
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| Check {
                name: format!("eps {}: {}", r.epsilon, c.name),
                ..c.clone()
            })
        })
        .collect();
    Ok(GeometrySuite {
        pass: all_pass(&checks),
        per_epsilon,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSuite {
    pub per_epsilon: Vec<KernelReport>,
    pub mass_ratio: f64,
    /// `(1 + eps_max/L0) / (1 - eps_max/L0)`.
    pub mass_ratio_bound: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Kernel mass and Hoelder modulus for every width, and the spread of the mass across widths.
pub fn kernel_suite(scenario: &Scenario) -> Result<KernelSuite> {
    let per_epsilon = (0..scenario.epsilons.len())
        .into_par_iter()
        .map(|k| {
            let chart = scenario.chart(k)?;
            verify_kernel_assumptions(
                &scenario.kernel,
                &chart,
                scenario.analysis.alpha,
                KERNEL_SAMPLES,
                scenario.analysis.seed.wrapping_add(k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = per_epsilon
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.sup_mass), hi.max(r.sup_mass)));
    let mass_ratio = if hi == 0.0 { 1.0 } else { hi / lo };
    let q = scenario.epsilons[0] / scenario.l0();
    let mass_ratio_bound = (1.0 + q) / (1.0 - q);
    let mut checks: Vec<Check> = per_epsilon
        .iter()
        .flat_map(|r| {
            [
                Check::at_most(format!("eps {}: sup mass", r.epsilon), r.sup_mass, r.bound),
                Check::at_most(format!("eps {}: hoelder quotient", r.epsilon), r.holder_quotient, r.bound),
            ]
        })
        .collect();
    checks.push(Check::at_most(
        "cross-width mass ratio",
        mass_ratio,
        mass_ratio_bound * (1.0 + MASS_RATIO_SLACK),
    ));
    Ok(KernelSuite {
        pass: all_pass(&checks),
        per_epsilon,
        mass_ratio,
        mass_ratio_bound,
        checks,
    })
}

/// Reflection identities on the lattice of one width, extended to the reference width.
pub fn reflection_suite(scenario: &Scenario, index: usize) -> Result<ReflectionReport> {
    verify_reflection(&scenario.grid(index)?, scenario.reference_width)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallRow {
    /// `None` for the axis problem.
    pub epsilon: Option<f64>,
    pub max_ratio: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallSuite {
    pub rows: Vec<GronwallRow>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Sup-norm growth bound at every step of every band run and of the axis run.
pub fn gronwall_suite(scenario: &Scenario) -> Result<GronwallSuite> {
    let mut rows = (0..scenario.epsilons.len())
        .into_par_iter()
        .map(|k| {
            let run = run_full(scenario, k)?;
            Ok(GronwallRow {
                epsilon: Some(run.epsilon),
                max_ratio: run.diagnostics.gronwall_max_ratio,
                steps: run.diagnostics.steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let axis = run_reduced(scenario)?;
    rows.push(GronwallRow {
        epsilon: None,
        max_ratio: axis.diagnostics.gronwall_max_ratio,
        steps: axis.diagnostics.steps,
    });
    let checks: Vec<Check> = rows
        .iter()
        .map(|r| {
            let name = match r.epsilon {
                Some(eps) => format!("eps {eps}: growth ratio"),
                None => "axis: growth ratio".to_string(),
            };
            Check::at_most(name, r.max_ratio, 1.0 + GRONWALL_SLACK)
        })
        .collect();
    Ok(GronwallSuite {
        pass: all_pass(&checks),
        rows,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub epsilon: f64,
    /// Largest transverse gap over its admissible value, over output times.
    pub gap_max_ratio: f64,
    pub gap_pass: bool,
    /// Tangential Laplacian gap at the final time.
    pub lb_gap: LbGapReport,
    /// Largest axis-equation residual of the averaged run on the interior window.
    pub residual_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsSuite {
    pub window: InteriorWindow,
    pub rows: Vec<AsymptoticsRow>,
    pub residual_monotone: bool,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn asymptotics_row(scenario: &Scenario, index: usize, window: &InteriorWindow) -> Result<AsymptoticsRow> {
    let run = run_full(scenario, index)?;
    let exponent = 1.0 + scenario.analysis.lambda;
    let mut gap_max_ratio = 0.0f64;
    let mut gap_pass = true;
    for snap in &run.snapshots {
        let gap = avg_gap_report(&snap.grid, &snap.values, exponent)?;
        gap_max_ratio = gap_max_ratio.max(gap.ratio);
        gap_pass &= gap.pass;
    }
    let last = run.snapshots.last().expect("a run keeps its initial state");
    let lb_gap = lb_gap_report(&last.grid, &last.values, window.sigma_min)?;
    let averaged = average_trajectory(&run.snapshots);
    let solver = ReducedSolver::new(Arc::clone(&averaged[0].grid), scenario, solver_config(scenario))?;
    let residual_max = limit_residual(&averaged, &solver, window)?
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max);
    Ok(AsymptoticsRow {
        epsilon: run.epsilon,
        gap_max_ratio,
        gap_pass,
        lb_gap,
        residual_max,
    })
}

/// Transverse gaps at every output time, the tangential Laplacian gap and the axis residual, per width.
pub fn asymptotics_suite(scenario: &Scenario) -> Result<AsymptoticsSuite> {
    let normalized = scenario.normalized();
    let window = InteriorWindow::from_scenario(&normalized);
    let rows = (0..normalized.epsilons.len())
        .into_par_iter()
        .map(|k| asymptotics_row(&normalized, k, &window))
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.residual_max).collect();
    let residual_monotone = strictly_decreasing(&residuals);
    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| Check::at_most(format!("eps {}: transverse gap ratio", r.epsilon), r.gap_max_ratio, 1.0))
        .collect();
    let spread = residuals.iter().fold(0.0f64, |m, r| m.max(*r)) - residuals.iter().fold(f64::INFINITY, |m, r| m.min(*r));
    checks.push(Check::holds(
        "axis residual decreasing or width-independent",
        residual_monotone || spread <= RESIDUAL_INDEPENDENT_TOL,
    ));
    Ok(AsymptoticsSuite {
        pass: all_pass(&checks),
        window,
        rows,
        residual_monotone,
        checks,
    })
}

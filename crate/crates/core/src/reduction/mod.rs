//! Transverse averaging and the comparison of band runs with the axis problem.

mod convergence;
mod gaps;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use convergence::{convergence_study, limit_residual, ConvergenceReport, ConvergenceRow, ReferenceInfo};
pub use gaps::{avg_gap_report, lb_gap_report, normal_derivative_seminorm, GapReport, LbGapReport};

use crate::error::{GullyError, Result};
use crate::grid::{GullyGrid, ReducedGrid};
use crate::model::Scenario;
use crate::solver::{FieldSnapshot, ReducedSnapshot};

/// Trapezoid mean over each cross-section, `(1/2eps) int u ds` (no Jacobian).
pub fn average_values(grid: &GullyGrid, values: &[f64]) -> Vec<f64> {
    let n_s = grid.n_s();
    let h = grid.h_s();
    let width = 2.0 * grid.epsilon();
    values
        .chunks_exact(n_s)
        .map(|col| {
            let inner: f64 = col[1..n_s - 1].iter().sum();
            h * (inner + 0.5 * (col[0] + col[n_s - 1])) / width
        })
        .collect()
}

pub fn transverse_average(field: &FieldSnapshot) -> ReducedSnapshot {
    average_onto(field, Arc::new(field.grid.reduced()))
}

/// Averages onto an existing axis lattice (which must share the sigma nodes).
pub fn average_onto(field: &FieldSnapshot, axis: Arc<ReducedGrid>) -> ReducedSnapshot {
    debug_assert_eq!(axis.n_sigma(), field.grid.n_sigma());
    ReducedSnapshot {
        grid: axis,
        time: field.time,
        values: average_values(&field.grid, &field.values),
        picard: field.picard.clone(),
    }
}

/// Averages a whole trajectory onto one shared axis lattice.
pub fn average_trajectory(snapshots: &[FieldSnapshot]) -> Vec<ReducedSnapshot> {
    let Some(first) = snapshots.first() else {
        return Vec::new();
    };
    let axis = Arc::new(first.grid.reduced());
    snapshots
        .iter()
        .map(|s| average_onto(s, Arc::clone(&axis)))
        .collect()
}

/// Compact space-time window `[sigma_min, sigma_max] x (t0, t1]` away from the terminals
/// and the initial time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorWindow {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t0: f64,
    pub t1: f64,
}

impl InteriorWindow {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let len = scenario.total_length();
        let margin = scenario.analysis.window_margin * len;
        Self {
            sigma_min: margin,
            sigma_max: len - margin,
            t0: scenario.analysis.t0_fraction * scenario.final_time,
            t1: scenario.final_time,
        }
    }

    pub fn contains_sigma(&self, sigma: f64) -> bool {
        sigma >= self.sigma_min && sigma <= self.sigma_max
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t > self.t0 && t <= self.t1
    }

    /// Axis node indices inside the window, excluding the two end nodes.
    pub fn sigma_indices(&self, sigmas: &[f64]) -> Result<Vec<usize>> {
        let idx: Vec<usize> = (1..sigmas.len().saturating_sub(1))
            .filter(|&i| self.contains_sigma(sigmas[i]))
            .collect();
        if idx.is_empty() {
            return Err(GullyError::config("analysis.window_margin", "interior window has no nodes"));
        }
        Ok(idx)
    }
}

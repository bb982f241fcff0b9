//! Time integration of the band problem and of the axis problem.

mod diffusion;
mod full;
mod linear;
mod reduced;
mod stepper;

use serde::{Deserialize, Serialize};

pub use diffusion::{
    assemble_diffusion, assemble_reduced_diffusion, euclidean_gradient, fermi_partials, gradient_norms,
    reduced_derivative,
};
pub use full::{run_full, solver_config, step_full, FieldSnapshot, FullRun, FullSolver, RunDiagnostics};
pub use linear::{BandedLu, SparseOperator};
pub use reduced::{run_reduced, step_reduced, ReducedRun, ReducedSnapshot, ReducedSolver};
pub use stepper::{PicardStats, SolverConfig};

use crate::model::BoundaryData;

/// Relative slack of the sup-norm growth check.
pub const GRONWALL_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub max_ratio: f64,
    pub pass: bool,
}

/// `max_t max|u(t)| / (exp(C_L t) max|g|_{P, t})` over `(time, max|u|)` samples.
pub fn gronwall_report(
    samples: impl IntoIterator<Item = (f64, f64)>,
    bound_rate: f64,
    data_bound: impl Fn(f64) -> f64,
) -> GronwallReport {
    let max_ratio = samples
        .into_iter()
        .map(|(t, m)| full::growth_ratio(m, bound_rate, t, data_bound(t)))
        .fold(0.0, f64::max);
    GronwallReport {
        max_ratio,
        pass: max_ratio <= 1.0 + GRONWALL_SLACK,
    }
}

pub fn gronwall_report_full(snapshots: &[FieldSnapshot], bound_rate: f64, boundary: &BoundaryData) -> GronwallReport {
    let Some(first) = snapshots.first() else {
        return GronwallReport {
            max_ratio: 0.0,
            pass: true,
        };
    };
    let grid = &first.grid;
    let len = grid.chart().total_length();
    gronwall_report(
        snapshots.iter().map(|s| (s.time, s.max_abs())),
        bound_rate,
        |t| boundary.max_abs_up_to(t, len, grid.sigmas()),
    )
}

pub fn gronwall_report_reduced(
    snapshots: &[ReducedSnapshot],
    bound_rate: f64,
    boundary: &BoundaryData,
) -> GronwallReport {
    let Some(first) = snapshots.first() else {
        return GronwallReport {
            max_ratio: 0.0,
            pass: true,
        };
    };
    let grid = &first.grid;
    gronwall_report(
        snapshots.iter().map(|s| (s.time, s.max_abs())),
        bound_rate,
        |t| boundary.max_abs_up_to(t, grid.total_length(), grid.sigmas()),
    )
}

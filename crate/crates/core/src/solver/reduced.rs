use std::sync::Arc;

use super::diffusion::{assemble_reduced_diffusion, reduced_derivative};
use super::full::{growth_ratio, solver_config, RunDiagnostics};
use super::stepper::{PicardStats, SolverConfig, ThetaStepper};
use crate::error::Result;
use crate::grid::ReducedGrid;
use crate::model::{nonlocal_reduced, BoundaryData, KernelMatrix, KernelSpec, ReactionSpec, Scenario};

/// Temperature on the axis at one time.
#[derive(Debug, Clone)]
pub struct ReducedSnapshot {
    pub grid: Arc<ReducedGrid>,
    pub time: f64,
    pub values: Vec<f64>,
    pub picard: Option<PicardStats>,
}

impl ReducedSnapshot {
    pub fn warning(&self) -> bool {
        self.picard.as_ref().is_some_and(|p| !p.converged)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub snapshots: Vec<ReducedSnapshot>,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone)]
pub struct ReducedSolver {
    grid: Arc<ReducedGrid>,
    stepper: ThetaStepper,
    kernel: KernelSpec,
    kernel_matrix: KernelMatrix,
    reaction: ReactionSpec,
    boundary: BoundaryData,
}

impl ReducedSolver {
    pub fn new(grid: Arc<ReducedGrid>, scenario: &Scenario, config: SolverConfig) -> Result<Self> {
        Self::with_data(grid, scenario.kernel, scenario.reaction, scenario.boundary, config)
    }

    pub fn with_data(
        grid: Arc<ReducedGrid>,
        kernel: KernelSpec,
        reaction: ReactionSpec,
        boundary: BoundaryData,
        config: SolverConfig,
    ) -> Result<Self> {
        let n = grid.n_sigma();
        let prescribed = (0..n).map(|i| i == 0 || i == n - 1).collect();
        let stepper = ThetaStepper::new(assemble_reduced_diffusion(&grid), prescribed, config)?;
        let kernel_matrix = KernelMatrix::new(&kernel, grid.sigmas(), grid.sigmas());
        Ok(Self {
            grid,
            stepper,
            kernel,
            kernel_matrix,
            reaction,
            boundary,
        })
    }

    pub fn grid(&self) -> &Arc<ReducedGrid> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        self.stepper.config()
    }

    pub fn initial(&self) -> ReducedSnapshot {
        let n = self.grid.n_sigma();
        let len = self.grid.total_length();
        let values = self
            .grid
            .sigmas()
            .iter()
            .enumerate()
            .map(|(i, &sg)| match i {
                0 => self.boundary.inlet_value(0.0),
                i if i == n - 1 => self.boundary.outlet_value(0.0),
                _ => self.boundary.initial_value(sg, len),
            })
            .collect();
        ReducedSnapshot {
            grid: Arc::clone(&self.grid),
            time: 0.0,
            values,
            picard: None,
        }
    }

    pub fn forcing(&self, values: &[f64]) -> Vec<f64> {
        let mut f = if self.kernel.is_zero() {
            vec![0.0; values.len()]
        } else {
            nonlocal_reduced(&self.grid, &self.kernel_matrix, values, self.boundary.threshold)
        };
        if !self.reaction.is_zero() {
            for (fk, d) in f.iter_mut().zip(reduced_derivative(&self.grid, values)) {
                *fk += self.reaction.eval_norm(d.abs());
            }
        }
        f
    }

    /// Applies the axis Laplacian (zero on the end nodes).
    pub fn diffusion(&self, values: &[f64]) -> Vec<f64> {
        self.stepper.operator().apply(values)
    }

    pub fn step(&self, state: &ReducedSnapshot, step_index: usize) -> Result<ReducedSnapshot> {
        let t_next = (step_index + 1) as f64 * self.config().dt;
        let last = self.grid.n_sigma() - 1;
        let (values, stats) = self.stepper.advance(
            &state.values,
            |i| {
                if i == 0 {
                    self.boundary.inlet_value(t_next)
                } else {
                    debug_assert_eq!(i, last);
                    self.boundary.outlet_value(t_next)
                }
            },
            |u| self.forcing(u),
        )?;
        Ok(ReducedSnapshot {
            grid: Arc::clone(&self.grid),
            time: t_next,
            values,
            picard: Some(stats),
        })
    }

    pub fn data_bound(&self, t: f64) -> f64 {
        self.boundary
            .max_abs_up_to(t, self.grid.total_length(), self.grid.sigmas())
    }

    pub fn run(&self, steps: usize, output_every: usize) -> Result<ReducedRun> {
        let mut state = self.initial();
        let mut snapshots = vec![state.clone()];
        let mut diagnostics = RunDiagnostics::start();
        let every = output_every.max(1);
        for k in 0..steps {
            state = self.step(&state, k)?;
            let ratio = growth_ratio(state.max_abs(), self.kernel.bound, state.time, self.data_bound(state.time));
            diagnostics.record(state.picard.as_ref().expect("stepped state"), ratio);
            if (k + 1) % every == 0 || k + 1 == steps {
                snapshots.push(state.clone());
            }
        }
        Ok(ReducedRun { snapshots, diagnostics })
    }
}

pub fn step_reduced(state: &ReducedSnapshot, scenario: &Scenario, config: SolverConfig) -> Result<ReducedSnapshot> {
    let solver = ReducedSolver::new(Arc::clone(&state.grid), scenario, config)?;
    let index = (state.time / config.dt).round() as usize;
    solver.step(state, index)
}

/// Axis trajectory after moving the threshold to zero.
pub fn run_reduced(scenario: &Scenario) -> Result<ReducedRun> {
    let normalized = scenario.normalized();
    let grid = Arc::new(normalized.reduced_grid()?);
    let solver = ReducedSolver::new(grid, &normalized, solver_config(&normalized))?;
    solver.run(normalized.step_count(), normalized.numerics.output_every)
}

use std::sync::Arc;

use serde::Serialize;

use super::diffusion::{assemble_diffusion, gradient_norms};
use super::stepper::{PicardStats, SolverConfig, ThetaStepper};
use crate::error::Result;
use crate::grid::{GullyGrid, NodeTag};
use crate::model::{nonlocal_term, BoundaryData, KernelMatrix, KernelSpec, ReactionSpec, Scenario};

/// Temperature on the band at one time.
#[derive(Debug, Clone)]
pub struct FieldSnapshot {
    pub grid: Arc<GullyGrid>,
    pub time: f64,
    pub values: Vec<f64>,
    /// Fixed-point record of the step that produced this state.
    pub picard: Option<PicardStats>,
}

impl FieldSnapshot {
    /// Picard iteration stalled on the step that produced this state.
    pub fn warning(&self) -> bool {
        self.picard.as_ref().is_some_and(|p| !p.converged)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Summary of a trajectory's step diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub picard_warnings: usize,
    pub max_picard_iterations: usize,
    /// Every step's fixed-point changes decreased after the first iterate.
    pub picard_contracting: bool,
    /// Largest `max|u(t)| / (exp(C_L t) max|g|)` over all steps.
    pub gronwall_max_ratio: f64,
}

impl RunDiagnostics {
    pub(crate) fn start() -> Self {
        Self {
            picard_contracting: true,
            ..Self::default()
        }
    }

    pub(crate) fn record(&mut self, stats: &PicardStats, ratio: f64) {
        self.steps += 1;
        if !stats.converged {
            self.picard_warnings += 1;
        }
        self.max_picard_iterations = self.max_picard_iterations.max(stats.iterations());
        self.picard_contracting &= stats.contracting();
        self.gronwall_max_ratio = self.gronwall_max_ratio.max(ratio);
    }
}

#[derive(Debug, Clone)]
pub struct FullRun {
    pub epsilon: f64,
    pub snapshots: Vec<FieldSnapshot>,
    pub diagnostics: RunDiagnostics,
}

/// Ratio used by the sup-norm growth check; zero when both sides vanish.
pub(crate) fn growth_ratio(max_u: f64, bound_rate: f64, t: f64, max_g: f64) -> f64 {
    let denom = (bound_rate * t).exp() * max_g;
    if denom > 0.0 {
        max_u / denom
    } else if max_u == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Stepper for the band problem with the scenario's data taken as given
/// (the threshold is not shifted).
#[derive(Debug, Clone)]
pub struct FullSolver {
    grid: Arc<GullyGrid>,
    stepper: ThetaStepper,
    kernel: KernelSpec,
    kernel_matrix: KernelMatrix,
    reaction: ReactionSpec,
    boundary: BoundaryData,
    length: f64,
}

impl FullSolver {
    pub fn new(grid: Arc<GullyGrid>, scenario: &Scenario, config: SolverConfig) -> Result<Self> {
        Self::with_data(grid, scenario.kernel, scenario.reaction, scenario.boundary, config)
    }

    pub fn with_data(
        grid: Arc<GullyGrid>,
        kernel: KernelSpec,
        reaction: ReactionSpec,
        boundary: BoundaryData,
        config: SolverConfig,
    ) -> Result<Self> {
        let op = assemble_diffusion(&grid);
        let prescribed = (0..grid.len()).map(|n| grid.is_prescribed(n)).collect();
        let stepper = ThetaStepper::new(op, prescribed, config)?;
        let kernel_matrix = KernelMatrix::new(&kernel, grid.sigmas(), grid.sigmas());
        let length = grid.chart().total_length();
        Ok(Self {
            grid,
            stepper,
            kernel,
            kernel_matrix,
            reaction,
            boundary,
            length,
        })
    }

    pub fn grid(&self) -> &Arc<GullyGrid> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        self.stepper.config()
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    /// Value of the data at a prescribed node and time.
    pub fn boundary_value(&self, node: usize, t: f64) -> f64 {
        match self.grid.tag(node) {
            NodeTag::DirichletInlet => self.boundary.inlet_value(t),
            NodeTag::DirichletOutlet => self.boundary.outlet_value(t),
            NodeTag::Corner if self.grid.split(node).0 == 0 => self.boundary.inlet_value(t),
            NodeTag::Corner => self.boundary.outlet_value(t),
            _ => {
                let (i, _) = self.grid.split(node);
                self.boundary.initial_value(self.grid.sigmas()[i], self.length)
            }
        }
    }

    pub fn initial(&self) -> FieldSnapshot {
        let values = (0..self.grid.len())
            .map(|n| {
                if self.grid.is_prescribed(n) {
                    self.boundary_value(n, 0.0)
                } else {
                    let (i, _) = self.grid.split(n);
                    self.boundary.initial_value(self.grid.sigmas()[i], self.length)
                }
            })
            .collect();
        FieldSnapshot {
            grid: Arc::clone(&self.grid),
            time: 0.0,
            values,
            picard: None,
        }
    }

    /// Nonlocal heating plus gradient reaction.
    pub fn forcing(&self, values: &[f64]) -> Vec<f64> {
        let mut f = if self.kernel.is_zero() {
            vec![0.0; values.len()]
        } else {
            nonlocal_term(&self.grid, &self.kernel_matrix, values, self.boundary.threshold)
        };
        if !self.reaction.is_zero() {
            for (fk, g) in f.iter_mut().zip(gradient_norms(&self.grid, values)) {
                *fk += self.reaction.eval_norm(g);
            }
        }
        f
    }

    /// Advances by one step; the new time is `(step_index + 1) * dt`.
    pub fn step(&self, state: &FieldSnapshot, step_index: usize) -> Result<FieldSnapshot> {
        let t_next = (step_index + 1) as f64 * self.config().dt;
        let (values, stats) = self.stepper.advance(
            &state.values,
            |n| self.boundary_value(n, t_next),
            |u| self.forcing(u),
        )?;
        Ok(FieldSnapshot {
            grid: Arc::clone(&self.grid),
            time: t_next,
            values,
            picard: Some(stats),
        })
    }

    /// `max|g|` over the parabolic boundary up to `t`.
    pub fn data_bound(&self, t: f64) -> f64 {
        self.boundary.max_abs_up_to(t, self.length, self.grid.sigmas())
    }

    /// Integrates `steps` steps, keeping every `output_every`-th state and the last one.
    pub fn run(&self, steps: usize, output_every: usize) -> Result<FullRun> {
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
        Ok(FullRun {
            epsilon: self.grid.epsilon(),
            snapshots,
            diagnostics,
        })
    }
}

pub fn solver_config(scenario: &Scenario) -> SolverConfig {
    SolverConfig {
        dt: scenario.numerics.dt,
        picard_tol: scenario.numerics.picard_tol,
        picard_max: scenario.numerics.picard_max,
        theta: scenario.numerics.theta_scheme,
    }
}

/// One step of the band problem from `state`, at the scenario's data as given.
pub fn step_full(state: &FieldSnapshot, scenario: &Scenario, config: SolverConfig) -> Result<FieldSnapshot> {
    let solver = FullSolver::new(Arc::clone(&state.grid), scenario, config)?;
    let index = (state.time / config.dt).round() as usize;
    solver.step(state, index)
}

/// Band trajectory for width `epsilons[index]`, after moving the threshold to zero.
pub fn run_full(scenario: &Scenario, index: usize) -> Result<FullRun> {
    let normalized = scenario.normalized();
    let grid = Arc::new(normalized.grid(index)?);
    let solver = FullSolver::new(grid, &normalized, solver_config(&normalized))?;
    solver.run(normalized.step_count(), normalized.numerics.output_every)
}

use serde::{Deserialize, Serialize};

use super::linear::{BandedLu, SparseOperator};
use crate::error::{GullyError, Result};

/// Time-step controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Implicitness weight in `[1/2, 1]`; 1 is backward Euler.
    pub theta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            picard_tol: 1e-10,
            picard_max: 50,
            theta: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(GullyError::config("numerics.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.picard_max < 1 {
            return Err(GullyError::config("numerics.picard_max", "must be at least 1"));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(GullyError::config(
                "numerics.theta_scheme",
                format!("must lie in [0.5, 1], got {}", self.theta),
            ));
        }
        Ok(())
    }
}

/// Fixed-point iteration record for one step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardStats {
    /// Successive max-norm changes, one per iterate.
    pub changes: Vec<f64>,
    pub converged: bool,
}

impl PicardStats {
    pub fn iterations(&self) -> usize {
        self.changes.len()
    }

    /// Changes strictly decrease after the first iterate (until they reach zero).
    pub fn contracting(&self) -> bool {
        self.changes
            .windows(2)
            .skip(1)
            .all(|w| w[1] < w[0] || (w[1] == 0.0 && w[0] == 0.0))
    }
}

/// θ-weighted implicit diffusion with the forcing resolved by Picard iteration:
/// `(I - θ dt L) u^{k+1} = u^n + dt (1-θ) (L u^n + f(u^n)) + dt θ f(u^k)`.
#[derive(Debug, Clone)]
pub(crate) struct ThetaStepper {
    op: SparseOperator,
    lu: BandedLu,
    prescribed: Vec<bool>,
    config: SolverConfig,
}

impl ThetaStepper {
    pub fn new(op: SparseOperator, prescribed: Vec<bool>, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let lu = BandedLu::shifted_identity(&op, config.theta * config.dt, &prescribed)?;
        Ok(Self {
            op,
            lu,
            prescribed,
            config,
        })
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// One step from `u`. `boundary(n)` gives the prescribed value at the new time.
    pub fn advance(
        &self,
        u: &[f64],
        boundary: impl Fn(usize) -> f64,
        forcing: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<(Vec<f64>, PicardStats)> {
        let SolverConfig {
            dt,
            picard_tol,
            picard_max,
            theta,
        } = self.config;
        let n = u.len();
        let mut f = forcing(u);
        let mut base = u.to_vec();
        if theta < 1.0 {
            let lu_n = self.op.apply(u);
            for k in 0..n {
                base[k] += dt * (1.0 - theta) * (lu_n[k] + f[k]);
            }
        }
        let mut current = u.to_vec();
        let mut stats = PicardStats::default();
        let mut next = vec![0.0; n];
        for iter in 0..picard_max {
            if iter > 0 {
                f = forcing(&current);
            }
            for k in 0..n {
                next[k] = if self.prescribed[k] {
                    boundary(k)
                } else {
                    base[k] + dt * theta * f[k]
                };
            }
            self.lu.solve_in_place(&mut next)?;
            let change = next
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            std::mem::swap(&mut current, &mut next);
            stats.changes.push(change);
            if change <= picard_tol {
                stats.converged = true;
                break;
            }
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(GullyError::Numerical("non-finite state after step".into()));
        }
        Ok((current, stats))
    }
}

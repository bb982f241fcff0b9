use serde::{Deserialize, Serialize};

use crate::error::{GullyError, Result};
use crate::grid::GullyGrid;

/// Slack on the averaging-gap bound for the sampled seminorm.
pub const GAP_SLACK: f64 = 0.05;
const ROUNDOFF_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub exponent: f64,
    pub max_gap: f64,
    pub seminorm: f64,
    pub bound: f64,
    /// `max_gap` over the admissible value `bound (1 + slack)` plus a rounding floor.
    pub ratio: f64,
    pub pass: bool,
}

/// Discrete normal derivative on each cross-section: central inside, zero on the insulated sides.
fn normal_derivatives(grid: &GullyGrid, values: &[f64]) -> Vec<f64> {
    let n_s = grid.n_s();
    let h = grid.h_s();
    let mut out = vec![0.0; values.len()];
    for (col, d) in values.chunks_exact(n_s).zip(out.chunks_exact_mut(n_s)) {
        for j in 1..n_s - 1 {
            d[j] = (col[j + 1] - col[j - 1]) / (2.0 * h);
        }
    }
    out
}

/// Largest Hoelder quotient of order `order` over all pairs of nodes on a common cross-section.
fn column_seminorm(grid: &GullyGrid, values: &[f64], order: f64) -> f64 {
    let n_s = grid.n_s();
    let s = grid.offsets();
    values
        .chunks_exact(n_s)
        .map(|col| {
            let mut worst = 0.0f64;
            for a in 0..n_s {
                for b in a + 1..n_s {
                    worst = worst.max((col[a] - col[b]).abs() / (s[b] - s[a]).powf(order));
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}

/// `[d_nu u]_lambda` restricted to pairs on the same normal segment.
pub fn normal_derivative_seminorm(grid: &GullyGrid, values: &[f64], lambda: f64) -> f64 {
    column_seminorm(grid, &normal_derivatives(grid, values), lambda)
}

/// Compares `max |u - U|` with `2 eps^a` times the matching seminorm:
/// `[u]_a` for `a < 1`, `[d_nu u]_{a-1}` for `1 < a < 2`.
pub fn avg_gap_report(grid: &GullyGrid, values: &[f64], exponent: f64) -> Result<GapReport> {
    if !(exponent > 0.0 && exponent < 2.0 && exponent != 1.0) {
        return Err(GullyError::config(
            "analysis.lambda",
            format!("gap exponent {exponent} must lie in (0, 1) or (1, 2)"),
        ));
    }
    let n_s = grid.n_s();
    let avg = super::average_values(grid, values);
    let max_gap = values
        .chunks_exact(n_s)
        .zip(&avg)
        .flat_map(|(col, a)| col.iter().map(move |v| (v - a).abs()))
        .fold(0.0, f64::max);
    let seminorm = if exponent < 1.0 {
        column_seminorm(grid, values, exponent)
    } else {
        normal_derivative_seminorm(grid, values, exponent - 1.0)
    };
    let eps = grid.epsilon();
    let bound = 2.0 * eps.powf(exponent) * seminorm;
    // Averaging a constant column is exact only up to rounding.
    let roundoff = ROUNDOFF_ULPS * f64::EPSILON * values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let admissible = bound * (1.0 + GAP_SLACK) + roundoff;
    let ratio = if admissible > 0.0 { max_gap / admissible } else { 0.0 };
    Ok(GapReport {
        epsilon: eps,
        exponent,
        max_gap,
        seminorm,
        bound,
        ratio,
        pass: max_gap <= admissible,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbGapReport {
    pub max_gap: f64,
    /// Least-squares fit of the per-level maximal gap against `|s|`.
    pub linear_fit_slope_in_s: f64,
    pub linear_fit_intercept: f64,
    /// Estimate of `sup (|grad u| + |D^2 u|)` on the window.
    pub derivative_scale: f64,
    /// Per transverse level: offset and maximal gap.
    pub levels: Vec<(f64, f64)>,
}

impl LbGapReport {
    pub fn normalized_slope(&self) -> f64 {
        if self.derivative_scale > 0.0 {
            self.linear_fit_slope_in_s / self.derivative_scale
        } else {
            0.0
        }
    }
}

/// Gap between the tangential Laplacian of the offset curve at level `s`,
/// `(1/J) d_sigma((1/J) d_sigma u)`, and the axis stencil `d_sigma^2 u`, on nodes
/// farther than `delta` from the terminals.
pub fn lb_gap_report(grid: &GullyGrid, values: &[f64], delta: f64) -> Result<LbGapReport> {
    let (n_sigma, n_s) = (grid.n_sigma(), grid.n_s());
    let h2 = grid.h_sigma() * grid.h_sigma();
    let hs = grid.h_s();
    let offsets = grid.offsets();
    let window: Vec<usize> = grid
        .interior_set(delta)
        .into_iter()
        .filter(|&n| {
            let i = grid.split(n).0;
            i >= 1 && i + 1 < n_sigma
        })
        .collect();
    if window.is_empty() {
        return Err(GullyError::config("delta", format!("no nodes farther than {delta} from the terminals")));
    }
    let mut per_level = vec![0.0f64; n_s];
    let mut present = vec![false; n_s];
    let mut scale = 0.0f64;
    for &n in &window {
        let (i, j) = grid.split(n);
        let u = |ii: usize, jj: usize| values[ii * n_s + jj];
        let jac = grid.jacobian(i, j);
        let a_plus = 1.0 / (1.0 - offsets[j] * grid.half_curvature(i));
        let a_minus = 1.0 / (1.0 - offsets[j] * grid.half_curvature(i - 1));
        let offset_lb = (a_plus * (u(i + 1, j) - u(i, j)) - a_minus * (u(i, j) - u(i - 1, j))) / (h2 * jac);
        let axis_lb = ((u(i + 1, j) - u(i, j)) - (u(i, j) - u(i - 1, j))) / h2;
        per_level[j] = per_level[j].max((offset_lb - axis_lb).abs());
        present[j] = true;

        let d_sigma = (u(i + 1, j) - u(i - 1, j)) / (2.0 * grid.h_sigma());
        let (d_s, d_ss, d_sigma_s) = if j == 0 || j == n_s - 1 {
            (0.0, 0.0, 0.0)
        } else {
            (
                (u(i, j + 1) - u(i, j - 1)) / (2.0 * hs),
                (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (hs * hs),
                (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1))
                    / (4.0 * hs * grid.h_sigma()),
            )
        };
        let grad = d_sigma.hypot(d_s);
        let hess = (axis_lb * axis_lb + d_ss * d_ss + 2.0 * d_sigma_s * d_sigma_s).sqrt();
        scale = scale.max(grad + hess);
    }
    let levels: Vec<(f64, f64)> = (0..n_s)
        .filter(|&j| present[j])
        .map(|j| (offsets[j], per_level[j]))
        .collect();
    let (slope, intercept) = least_squares(levels.iter().map(|&(s, g)| (s.abs(), g)));
    Ok(LbGapReport {
        max_gap: per_level.iter().copied().fold(0.0, f64::max),
        linear_fit_slope_in_s: slope,
        linear_fit_intercept: intercept,
        derivative_scale: scale,
        levels,
    })
}

fn least_squares(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

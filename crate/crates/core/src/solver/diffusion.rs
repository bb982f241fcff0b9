//! Discrete Laplacians and gradients.
//!
//! On the band the Laplacian is written in divergence form,
//! `(1/J) [d_sigma((1/J) d_sigma u) + d_s(J d_s u)]` with `J = 1 - s kappa`,
//! and discretized with metric coefficients at half nodes. Insulated sides use
//! a mirror ghost node with a mirrored coefficient, which keeps the
//! `J`-weighted trapezoid mass exactly conserved.

use crate::geometry::Vec2;
use crate::grid::{GullyGrid, ReducedGrid, TerminalCondition};

use super::linear::SparseOperator;

/// Laplacian on the band. Rows of prescribed (Dirichlet) nodes are empty.
pub fn assemble_diffusion(grid: &GullyGrid) -> SparseOperator {
    let (n_sigma, n_s) = (grid.n_sigma(), grid.n_s());
    let (hs2, hsg2) = (grid.h_s() * grid.h_s(), grid.h_sigma() * grid.h_sigma());
    let offsets = grid.offsets();
    let insulated_ends = grid.terminals() == TerminalCondition::Neumann;
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..n_sigma {
        let kappa = grid.curvature(i);
        for j in 0..n_s {
            let node = grid.index(i, j);
            if grid.is_prescribed(node) {
                rows.push(Vec::new());
                continue;
            }
            let mut row = Vec::with_capacity(5);
            let jac = 1.0 - offsets[j] * kappa;

            // Transverse part.
            let j_up = 1.0 - (offsets[j] + 0.5 * grid.h_s()) * kappa;
            let j_down = 1.0 - (offsets[j] - 0.5 * grid.h_s()) * kappa;
            if j == 0 {
                let c = 2.0 * j_up / (hs2 * jac);
                row.push((grid.index(i, 1), c));
                row.push((node, -c));
            } else if j == n_s - 1 {
                let c = 2.0 * j_down / (hs2 * jac);
                row.push((grid.index(i, n_s - 2), c));
                row.push((node, -c));
            } else {
                let cu = j_up / (hs2 * jac);
                let cd = j_down / (hs2 * jac);
                row.push((grid.index(i, j + 1), cu));
                row.push((grid.index(i, j - 1), cd));
                row.push((node, -(cu + cd)));
            }

            // Tangential part; only reached at the terminals when they are insulated.
            let a_plus = |i: usize| 1.0 / (1.0 - offsets[j] * grid.half_curvature(i));
            if i == 0 {
                debug_assert!(insulated_ends);
                let c = 2.0 * a_plus(0) / (hsg2 * jac);
                row.push((grid.index(1, j), c));
                row.push((node, -c));
            } else if i == n_sigma - 1 {
                debug_assert!(insulated_ends);
                let c = 2.0 * a_plus(n_sigma - 2) / (hsg2 * jac);
                row.push((grid.index(n_sigma - 2, j), c));
                row.push((node, -c));
            } else {
                let cp = a_plus(i) / (hsg2 * jac);
                let cm = a_plus(i - 1) / (hsg2 * jac);
                row.push((grid.index(i + 1, j), cp));
                row.push((grid.index(i - 1, j), cm));
                row.push((node, -(cp + cm)));
            }
            rows.push(row);
        }
    }
    SparseOperator::from_rows(rows)
}

/// Second arclength derivative on the axis; end rows are empty.
pub fn assemble_reduced_diffusion(grid: &ReducedGrid) -> SparseOperator {
    let n = grid.n_sigma();
    let c = 1.0 / (grid.h_sigma() * grid.h_sigma());
    let rows = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                Vec::new()
            } else {
                vec![(i - 1, c), (i, -2.0 * c), (i + 1, c)]
            }
        })
        .collect();
    SparseOperator::from_rows(rows)
}

/// Second-order first derivative along a uniformly spaced line, one-sided at both ends.
#[inline]
pub(crate) fn line_derivative(values: &[f64], k: usize, h: f64, stride: usize, count: usize) -> f64 {
    let at = |m: usize| values[m * stride];
    if k == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if k == count - 1 {
        (3.0 * at(k) - 4.0 * at(k - 1) + at(k - 2)) / (2.0 * h)
    } else {
        (at(k + 1) - at(k - 1)) / (2.0 * h)
    }
}

/// Fermi-coordinate partials `(d_sigma u, d_s u)` at every node.
///
/// Central in the interior, one-sided second order at the terminals, and zero
/// normal derivative on the insulated sides.
pub fn fermi_partials(grid: &GullyGrid, values: &[f64]) -> Vec<(f64, f64)> {
    let (n_sigma, n_s) = (grid.n_sigma(), grid.n_s());
    let (h_sigma, h_s) = (grid.h_sigma(), grid.h_s());
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..n_sigma {
        for j in 0..n_s {
            let d_sigma = line_derivative(&values[j..], i, h_sigma, n_s, n_sigma);
            let d_s = if j == 0 || j == n_s - 1 {
                0.0
            } else {
                let base = i * n_s;
                (values[base + j + 1] - values[base + j - 1]) / (2.0 * h_s)
            };
            out.push((d_sigma, d_s));
        }
    }
    out
}

/// `|grad u|` at every node, with `|grad u|^2 = (d_sigma u / J)^2 + (d_s u)^2`.
pub fn gradient_norms(grid: &GullyGrid, values: &[f64]) -> Vec<f64> {
    fermi_partials(grid, values)
        .into_iter()
        .enumerate()
        .map(|(node, (ds, dn))| {
            let (i, j) = grid.split(node);
            (ds / grid.jacobian(i, j)).hypot(dn)
        })
        .collect()
}

/// Cartesian gradient `(d_sigma u / J) T + (d_s u) nu` at every node.
pub fn euclidean_gradient(grid: &GullyGrid, values: &[f64]) -> Vec<Vec2> {
    fermi_partials(grid, values)
        .into_iter()
        .enumerate()
        .map(|(node, (ds, dn))| {
            let (i, j) = grid.split(node);
            let f = &grid.frames()[i];
            f.tangent * (ds / grid.jacobian(i, j)) + f.normal * dn
        })
        .collect()
}

/// `d_sigma U` on the axis.
pub fn reduced_derivative(grid: &ReducedGrid, values: &[f64]) -> Vec<f64> {
    let n = grid.n_sigma();
    (0..n)
        .map(|i| line_derivative(values, i, grid.h_sigma(), 1, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, CurveSpec, FermiChart};
    use std::sync::Arc;

    fn straight_grid(n_sigma: usize, n_s: usize) -> GullyGrid {
        let curve = Arc::new(Curve::new(CurveSpec::segment([0.0, 0.0], [1.0, 0.0])).unwrap());
        GullyGrid::build(Arc::new(FermiChart::new(curve, 0.1).unwrap()), n_sigma, n_s).unwrap()
    }

    fn annulus_grid(n_sigma: usize, n_s: usize, terminals: TerminalCondition) -> GullyGrid {
        let curve = Arc::new(Curve::new(CurveSpec::circular_arc([0.0, 0.0], 1.0, 0.0, 1.0)).unwrap());
        GullyGrid::build_with(Arc::new(FermiChart::new(curve, 0.3).unwrap()), n_sigma, n_s, terminals).unwrap()
    }

    fn interior_rows(grid: &GullyGrid) -> impl Iterator<Item = usize> + '_ {
        (0..grid.len()).filter(|&n| grid.tag(n) == crate::grid::NodeTag::Interior)
    }

    #[test]
    fn constants_are_annihilated() {
        let grid = annulus_grid(21, 7, TerminalCondition::Dirichlet);
        let l = assemble_diffusion(&grid);
        let out = l.apply(&vec![3.0; grid.len()]);
        assert!(out.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn straight_quadratic() {
        let grid = straight_grid(41, 9);
        let l = assemble_diffusion(&grid);
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let p = grid.point(n);
                p.x * p.x + p.y * p.y
            })
            .collect();
        let lf = l.apply(&f);
        for n in interior_rows(&grid) {
            assert!((lf[n] - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn annulus_radius_squared() {
        let grid = annulus_grid(41, 9, TerminalCondition::Dirichlet);
        let l = assemble_diffusion(&grid);
        let f: Vec<f64> = (0..grid.len()).map(|n| grid.point(n).norm_squared()).collect();
        let lf = l.apply(&f);
        for n in interior_rows(&grid) {
            assert!((lf[n] - 4.0).abs() < 1e-8, "{}", lf[n]);
        }
    }

    #[test]
    fn insulated_operator_conserves_weighted_mass() {
        let grid = annulus_grid(17, 7, TerminalCondition::Neumann);
        let l = assemble_diffusion(&grid);
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let p = grid.point(n);
                (3.0 * p.x).sin() + p.y * p.y * p.x
            })
            .collect();
        let lf = l.apply(&f);
        let mass = grid.integrate(&lf);
        let scale: f64 = grid.weights().iter().zip(&lf).map(|(w, v)| (w * v).abs()).sum();
        assert!(mass.abs() <= 1e-13 * scale.max(1.0), "{mass}");
    }

    #[test]
    fn reduced_operator_on_quadratic() {
        let grid = ReducedGrid::new(2.0, 21).unwrap();
        let l = assemble_reduced_diffusion(&grid);
        let f: Vec<f64> = grid.sigmas().iter().map(|s| s * s).collect();
        let lf = l.apply(&f);
        assert_eq!(lf[0], 0.0);
        for v in &lf[1..20] {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gradients_of_linear_fields_are_exact() {
        let grid = annulus_grid(21, 7, TerminalCondition::Dirichlet);
        let f: Vec<f64> = (0..grid.len())
            .map(|n| {
                let p = grid.point(n);
                2.0 * p.x - 0.5 * p.y
            })
            .collect();
        let g = euclidean_gradient(&grid, &f);
        for n in interior_rows(&grid) {
            assert!((g[n] - Vec2::new(2.0, -0.5)).norm() < 2e-3);
        }
        let u: Vec<f64> = grid.sigmas().iter().map(|s| 3.0 * s - 1.0).collect();
        let r = ReducedGrid::new(grid.sigmas()[20], 21).unwrap();
        for d in reduced_derivative(&r, &u) {
            assert!((d - 3.0).abs() < 1e-10);
        }
    }
}

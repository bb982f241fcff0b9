//! Tensor-product lattices on the band (Fermi coordinates) and on the axis.
//!
//! Nodes are stored sigma-major: `index = i * n_s + j` with `sigma_i = i h_sigma`
//! and `s_j = -epsilon + j h_s`. Corners carry Dirichlet semantics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GullyError, Result};
use crate::geometry::{FermiChart, Frame, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeTag {
    Interior,
    /// `s = +epsilon`
    NeumannTop,
    /// `s = -epsilon`
    NeumannBottom,
    /// `sigma = 0`
    DirichletInlet,
    /// `sigma = total length`
    DirichletOutlet,
    Corner,
}

impl NodeTag {
    pub fn is_dirichlet(self) -> bool {
        matches!(
            self,
            NodeTag::DirichletInlet | NodeTag::DirichletOutlet | NodeTag::Corner
        )
    }

    pub fn is_neumann(self) -> bool {
        matches!(self, NodeTag::NeumannTop | NodeTag::NeumannBottom)
    }
}

/// Condition imposed on the two terminal cross-sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerminalCondition {
    #[default]
    Dirichlet,
    /// Insulated terminals; only used to check discrete conservation.
    Neumann,
}

/// Lattice on the band of half-width `epsilon` around the axis.
#[derive(Debug, Clone)]
pub struct GullyGrid {
    chart: Arc<FermiChart>,
    n_sigma: usize,
    n_s: usize,
    h_sigma: f64,
    h_s: f64,
    sigmas: Vec<f64>,
    offsets: Vec<f64>,
    frames: Vec<Frame>,
    /// Axis curvature at the half nodes `sigma_{i+1/2}`.
    half_curvature: Vec<f64>,
    tags: Vec<NodeTag>,
    weights: Vec<f64>,
    terminals: TerminalCondition,
}

impl GullyGrid {
    pub fn build(chart: Arc<FermiChart>, n_sigma: usize, n_s: usize) -> Result<Self> {
        Self::build_with(chart, n_sigma, n_s, TerminalCondition::Dirichlet)
    }

    pub fn build_with(
        chart: Arc<FermiChart>,
        n_sigma: usize,
        n_s: usize,
        terminals: TerminalCondition,
    ) -> Result<Self> {
        if n_sigma < 3 {
            return Err(GullyError::config("numerics.n_sigma", format!("need at least 3 nodes, got {n_sigma}")));
        }
        if n_s < 3 || n_s % 2 == 0 {
            return Err(GullyError::config("numerics.n_s", format!("must be odd and at least 3, got {n_s}")));
        }
        let len = chart.total_length();
        let eps = chart.epsilon();
        let h_sigma = len / (n_sigma - 1) as f64;
        let h_s = 2.0 * eps / (n_s - 1) as f64;
        let sigmas: Vec<f64> = (0..n_sigma)
            .map(|i| if i == n_sigma - 1 { len } else { i as f64 * h_sigma })
            .collect();
        let mid = (n_s - 1) / 2;
        let offsets: Vec<f64> = (0..n_s)
            .map(|j| match j {
                0 => -eps,
                j if j == n_s - 1 => eps,
                j if j == mid => 0.0,
                j => -eps + j as f64 * h_s,
            })
            .collect();
        let curve = chart.curve();
        let frames: Vec<Frame> = sigmas.iter().map(|&sg| curve.frame_unchecked(sg)).collect();
        let half_curvature: Vec<f64> = (0..n_sigma - 1)
            .map(|i| curve.frame_unchecked((i as f64 + 0.5) * h_sigma).curvature)
            .collect();

        let mut tags = Vec::with_capacity(n_sigma * n_s);
        let mut weights = Vec::with_capacity(n_sigma * n_s);
        for i in 0..n_sigma {
            let terminal = i == 0 || i == n_sigma - 1;
            let c_sigma = if terminal { 0.5 } else { 1.0 };
            for j in 0..n_s {
                let side = j == 0 || j == n_s - 1;
                let tag = match (terminal, side) {
                    (true, true) => NodeTag::Corner,
                    (true, false) if i == 0 => NodeTag::DirichletInlet,
                    (true, false) => NodeTag::DirichletOutlet,
                    (false, true) if j == 0 => NodeTag::NeumannBottom,
                    (false, true) => NodeTag::NeumannTop,
                    (false, false) => NodeTag::Interior,
                };
                let c_s = if side { 0.5 } else { 1.0 };
                let jac = 1.0 - offsets[j] * frames[i].curvature;
                tags.push(tag);
                weights.push(c_sigma * c_s * h_sigma * h_s * jac);
            }
        }
        Ok(Self {
            chart,
            n_sigma,
            n_s,
            h_sigma,
            h_s,
            sigmas,
            offsets,
            frames,
            half_curvature,
            tags,
            weights,
            terminals,
        })
    }

    pub fn chart(&self) -> &FermiChart {
        &self.chart
    }

    pub fn shared_chart(&self) -> Arc<FermiChart> {
        Arc::clone(&self.chart)
    }

    pub fn n_sigma(&self) -> usize {
        self.n_sigma
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn len(&self) -> usize {
        self.n_sigma * self.n_s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_sigma(&self) -> f64 {
        self.h_sigma
    }

    pub fn h_s(&self) -> f64 {
        self.h_s
    }

    pub fn epsilon(&self) -> f64 {
        self.chart.epsilon()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn curvature(&self, i: usize) -> f64 {
        self.frames[i].curvature
    }

    pub fn half_curvature(&self, i: usize) -> f64 {
        self.half_curvature[i]
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn tag(&self, node: usize) -> NodeTag {
        self.tags[node]
    }

    /// Trapezoid weights including the area factor `1 - s kappa`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn terminals(&self) -> TerminalCondition {
        self.terminals
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_s + j
    }

    #[inline]
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node / self.n_s, node % self.n_s)
    }

    /// `1 - s_j kappa(sigma_i)`.
    #[inline]
    pub fn jacobian(&self, i: usize, j: usize) -> f64 {
        1.0 - self.offsets[j] * self.frames[i].curvature
    }

    /// Whether a node's value is prescribed (Dirichlet terminals and corners,
    /// unless the terminals are insulated).
    #[inline]
    pub fn is_prescribed(&self, node: usize) -> bool {
        self.terminals == TerminalCondition::Dirichlet && self.tags[node].is_dirichlet()
    }

    /// Cartesian image of a node.
    pub fn point(&self, node: usize) -> Vec2 {
        let (i, j) = self.split(node);
        self.frames[i].point + self.offsets[j] * self.frames[i].normal
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Quadrature `sum_n w_n f_n`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, f)| w * f).sum()
    }

    /// Distance from a node's image to the two terminal cross-sections.
    pub fn dirichlet_distance(&self, node: usize) -> f64 {
        if self.tags[node].is_dirichlet() {
            return 0.0;
        }
        let p = self.point(node);
        let eps = self.epsilon();
        [&self.frames[0], &self.frames[self.n_sigma - 1]]
            .iter()
            .map(|f| {
                let a = f.point - eps * f.normal;
                let b = f.point + eps * f.normal;
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dirichlet_distances(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.dirichlet_distance(n)).collect()
    }

    /// Nodes strictly farther than `delta` from the terminals.
    pub fn interior_set(&self, delta: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&n| !self.tags[n].is_dirichlet() && self.dirichlet_distance(n) > delta)
            .collect()
    }

    /// Axis lattice sharing this grid's sigma nodes.
    pub fn reduced(&self) -> ReducedGrid {
        ReducedGrid::from_sigmas(self.sigmas.clone())
    }
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

/// Uniform lattice on the axis in arclength; both ends are Dirichlet.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGrid {
    sigmas: Vec<f64>,
    h_sigma: f64,
    weights: Vec<f64>,
}

impl ReducedGrid {
    pub fn new(total_length: f64, n_sigma: usize) -> Result<Self> {
        if n_sigma < 3 {
            return Err(GullyError::config("numerics.n_sigma", format!("need at least 3 nodes, got {n_sigma}")));
        }
        let h = total_length / (n_sigma - 1) as f64;
        let sigmas = (0..n_sigma)
            .map(|i| if i == n_sigma - 1 { total_length } else { i as f64 * h })
            .collect();
        Ok(Self::from_sigmas(sigmas))
    }

    fn from_sigmas(sigmas: Vec<f64>) -> Self {
        let n = sigmas.len();
        let h_sigma = sigmas[n - 1] / (n - 1) as f64;
        let weights = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h_sigma } else { h_sigma })
            .collect();
        Self {
            sigmas,
            h_sigma,
            weights,
        }
    }

    pub fn n_sigma(&self) -> usize {
        self.sigmas.len()
    }

    pub fn h_sigma(&self) -> f64 {
        self.h_sigma
    }

    pub fn total_length(&self) -> f64 {
        *self.sigmas.last().unwrap()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Trapezoid weights in arclength.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, CurveSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn straight_chart(eps: f64) -> Arc<FermiChart> {
        let curve = Arc::new(Curve::new(CurveSpec::segment([0.0, 0.0], [1.0, 0.0])).unwrap());
        Arc::new(FermiChart::new(curve, eps).unwrap())
    }

    fn arc_chart(eps: f64) -> Arc<FermiChart> {
        let curve = Arc::new(Curve::new(CurveSpec::circular_arc([0.0, 0.0], 1.0, 0.3, PI / 2.0)).unwrap());
        Arc::new(FermiChart::new(curve, eps).unwrap())
    }

    #[test]
    fn straight_band_mass() {
        let grid = GullyGrid::build(straight_chart(0.1), 11, 5).unwrap();
        assert!((grid.total_mass() - 0.2).abs() <= 1e-12);
    }

    #[test]
    fn annulus_sector_mass() {
        let eps = 0.3;
        let grid = GullyGrid::build(arc_chart(eps), 41, 7).unwrap();
        let span = PI / 2.0;
        let area = 0.5 * span * ((1.0 + eps).powi(2) - (1.0 - eps).powi(2));
        assert_relative_eq!(grid.total_mass(), area, max_relative = 1e-8);
    }

    #[test]
    fn tag_counts() {
        let (n_sigma, n_s) = (13, 7);
        let grid = GullyGrid::build(straight_chart(0.1), n_sigma, n_s).unwrap();
        let count = |f: &dyn Fn(NodeTag) -> bool| grid.tags().iter().filter(|t| f(**t)).count();
        assert_eq!(count(&|t| t.is_dirichlet()), 2 * n_s);
        assert_eq!(count(&|t| t.is_neumann()), 2 * (n_sigma - 2));
        assert_eq!(count(&|t| t == NodeTag::Corner), 4);
        assert_eq!(count(&|t| t == NodeTag::Interior), (n_sigma - 2) * (n_s - 2));
    }

    #[test]
    fn bad_sizes_are_config_errors() {
        assert!(matches!(GullyGrid::build(straight_chart(0.1), 11, 4), Err(GullyError::Config { .. })));
        assert!(matches!(GullyGrid::build(straight_chart(0.1), 2, 5), Err(GullyError::Config { .. })));
        assert!(matches!(GullyGrid::build(straight_chart(0.1), 11, 1), Err(GullyError::Config { .. })));
    }

    #[test]
    fn tag_geometry_matches_chart() {
        let grid = GullyGrid::build(arc_chart(0.2), 9, 5).unwrap();
        let chart = grid.chart();
        for node in 0..grid.len() {
            let (i, j) = grid.split(node);
            let p = grid.point(node);
            let q = chart.forward(grid.sigmas()[i], grid.offsets()[j]).unwrap();
            assert!((p - q).norm() <= 1e-14);
            match grid.tag(node) {
                NodeTag::NeumannTop => assert_eq!(grid.offsets()[j], 0.2),
                NodeTag::NeumannBottom => assert_eq!(grid.offsets()[j], -0.2),
                NodeTag::DirichletInlet => assert_eq!(grid.sigmas()[i], 0.0),
                NodeTag::DirichletOutlet => assert_eq!(grid.sigmas()[i], chart.total_length()),
                _ => {}
            }
        }
    }

    #[test]
    fn distances_and_interior_sets() {
        let grid = GullyGrid::build(straight_chart(0.1), 11, 5).unwrap();
        let mid = grid.index(5, 2);
        assert!((grid.dirichlet_distance(mid) - 0.5).abs() < 1e-15);
        assert_eq!(grid.dirichlet_distance(grid.index(0, 2)), 0.0);
        assert!(grid.interior_set(10.0).is_empty());
        let all: Vec<usize> = (0..grid.len()).filter(|&n| !grid.tag(n).is_dirichlet()).collect();
        assert_eq!(grid.interior_set(0.0), all);
        let wide = grid.interior_set(0.15);
        let narrow = grid.interior_set(0.35);
        assert!(narrow.iter().all(|n| wide.contains(n)));
    }

    #[test]
    fn distance_matches_dense_terminal_sampling() {
        let grid = GullyGrid::build(arc_chart(0.25), 17, 7).unwrap();
        let chart = grid.chart();
        let len = chart.total_length();
        let samples: Vec<Vec2> = (0..5000)
            .flat_map(|k| {
                let s = -0.25 + 0.5 * k as f64 / 4999.0;
                [chart.forward(0.0, s).unwrap(), chart.forward(len, s).unwrap()]
            })
            .collect();
        for node in [grid.index(3, 1), grid.index(8, 3), grid.index(15, 6)] {
            let p = grid.point(node);
            let brute = samples.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert!((grid.dirichlet_distance(node) - brute).abs() <= 1e-6);
        }
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        // f = exp(x) cos(y) in Cartesian coordinates over the annular band.
        let errors: Vec<f64> = [21, 41, 81]
            .iter()
            .map(|&n| {
                let grid = GullyGrid::build(arc_chart(0.2), n, 2 * (n / 4) + 1).unwrap();
                let approx: f64 = (0..grid.len())
                    .map(|k| {
                        let p = grid.point(k);
                        grid.weights()[k] * p.x.exp() * p.y.cos()
                    })
                    .sum();
                let fine = GullyGrid::build(arc_chart(0.2), 1281, 321).unwrap();
                let reference: f64 = (0..fine.len())
                    .map(|k| {
                        let p = fine.point(k);
                        fine.weights()[k] * p.x.exp() * p.y.cos()
                    })
                    .sum();
                (approx - reference).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "observed order {order} from {errors:?}");
        }
    }
}

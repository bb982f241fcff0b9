use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CurveShape, FermiChart, Vec2};
use crate::check::{all_pass, Check};
use crate::error::Result;
use crate::grid::GullyGrid;

pub const AREA_REL_TOL: f64 = 1e-8;
pub const NORMAL_DEVIATION_TOL: f64 = 1e-6;
pub const L0_REL_TOL: f64 = 1e-6;
/// Radii beyond this multiple of the length count as a straight axis.
const STRAIGHT_RADIUS: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub epsilon: f64,
    pub length: f64,
    pub l0: f64,
    pub l0_oracle: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Closed-form band area, or `2 eps length` (Steiner) for other axes.
pub fn analytic_band_area(chart: &FermiChart) -> f64 {
    let eps = chart.epsilon();
    match &chart.curve().spec().shape {
        CurveShape::Segment { start, end } => 2.0 * eps * (Vec2::from(*end) - Vec2::from(*start)).norm(),
        CurveShape::CircularArc { radius, span, .. } => {
            0.5 * span.abs() * ((radius + eps).powi(2) - (radius - eps).powi(2))
        }
        _ => 2.0 * eps * chart.total_length(),
    }
}

/// `1 / max |kappa|` by dense arclength sampling, re-sampled densely around
/// the best samples three times so that corner maxima at spline knots are resolved.
pub fn sampled_l0(chart: &FermiChart, samples: usize) -> Result<f64> {
    let curve = chart.curve();
    let len = chart.total_length();
    let (mut lo, mut hi) = (0.0, len);
    let mut best = 0.0f64;
    for _ in 0..4 {
        let step = (hi - lo) / samples as f64;
        let mut arg = lo;
        for k in 0..=samples {
            let sigma = lo + step * k as f64;
            let kappa = curve.curvature(sigma)?.abs();
            if kappa > best {
                best = kappa;
                arg = sigma;
            }
        }
        (lo, hi) = ((arg - 2.0 * step).max(0.0), (arg + 2.0 * step).min(len));
    }
    Ok(if best * len < 1.0 / STRAIGHT_RADIUS {
        f64::INFINITY
    } else {
        1.0 / best
    })
}

fn relative(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Area, Gauss-lemma, curvature-radius and chart round-trip checks.
pub fn verify_geometry(chart: &FermiChart, n_sigma: usize, n_s: usize) -> Result<GeometryReport> {
    let chart = Arc::new(chart.clone());
    let grid = GullyGrid::build(Arc::clone(&chart), n_sigma, n_s)?;
    let mut checks = Vec::new();

    let area = analytic_band_area(&chart);
    checks.push(Check::at_most("band area", relative(grid.total_mass(), area), AREA_REL_TOL));

    let mut deviation = 0.0f64;
    let mut round_trip = 0.0f64;
    for n in 0..grid.len() {
        let (i, j) = grid.split(n);
        let (sigma, s) = (grid.sigmas()[i], grid.offsets()[j]);
        deviation = deviation.max(chart.offset_normal_deviation(sigma, s)?);
        let back = chart.inverse(chart.forward(sigma, s)?)?;
        round_trip = round_trip.max((back.sigma - sigma).abs().max((back.s - s).abs()));
    }
    checks.push(Check::at_most("offset normal deviation", deviation, NORMAL_DEVIATION_TOL));
    checks.push(Check::at_most("chart round trip", round_trip, 1e-9 * chart.total_length()));

    let l0 = chart.l0();
    let oracle = sampled_l0(&chart, 2_000)?;
    checks.push(Check::at_most("minimum curvature radius", relative(l0, oracle), L0_REL_TOL));
    checks.push(Check::holds("half-width below curvature radius", chart.epsilon() < l0));

    let unit = chart
        .curve()
        .frame(0.5 * chart.total_length())
        .map(|f| (f.tangent.norm() - 1.0).abs().max(f.normal.dot(&f.tangent).abs()))?;
    checks.push(Check::at_most("orthonormal frame", unit, 1e-12));

    Ok(GeometryReport {
        epsilon: chart.epsilon(),
        length: chart.total_length(),
        l0,
        l0_oracle: oracle,
        pass: all_pass(&checks),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{Curve, CurveSpec};

    fn chart(spec: CurveSpec, eps: f64) -> FermiChart {
        FermiChart::new(Arc::new(Curve::new(spec).unwrap()), eps).unwrap()
    }

    #[test]
    fn catalog_passes() {
        let specs = [
            CurveSpec::segment([0.0, 0.0], [1.0, 0.5]),
            CurveSpec::circular_arc([0.0, 0.0], 1.0, 0.0, 0.5 * PI),
            CurveSpec::sine_perturbed(0.0, 2.0, 0.05, PI),
            CurveSpec::cubic_spline(vec![[0.0, 0.0], [0.5, 0.1], [1.0, 0.0], [1.5, -0.1], [2.0, 0.0]]),
        ];
        for spec in specs {
            let report = verify_geometry(&chart(spec.clone(), 0.05), 101, 9).unwrap();
            assert!(report.pass, "{spec:?}: {:#?}", report.checks);
        }
    }

    #[test]
    fn sampled_radius_of_circle() {
        let c = chart(CurveSpec::circular_arc([1.0, 2.0], 0.7, 1.0, 2.0), 0.1);
        assert!((sampled_l0(&c, 500).unwrap() - 0.7).abs() < 1e-12);
        let s = chart(CurveSpec::segment([0.0, 0.0], [2.0, 0.0]), 0.1);
        assert!(sampled_l0(&s, 500).unwrap().is_infinite());
    }

    #[test]
    fn annulus_sector_area() {
        let c = chart(CurveSpec::circular_arc([0.0, 0.0], 2.0, 0.0, 1.0), 0.3);
        assert!((analytic_band_area(&c) - 1.2).abs() < 1e-14);
    }
}

//! Even periodic extension of band fields across the Neumann sides, and the
//! linear rescaling of the extended band onto a wider one.

use serde::{Deserialize, Serialize};

use crate::check::{all_pass, Check};
use crate::error::{GullyError, Result};
use crate::grid::GullyGrid;

/// `4 eps`-periodic even fold of the offset onto `[-eps, eps]`.
pub fn fold(s: f64, epsilon: f64) -> f64 {
    let m = (s + epsilon).rem_euclid(4.0 * epsilon) - epsilon;
    if m < epsilon {
        m
    } else {
        2.0 * epsilon - m
    }
}

/// Integer version of [`fold`] in units of the lattice spacing, `epsilon = half` steps.
fn fold_steps(k: i64, half: i64) -> i64 {
    let m = (k + half).rem_euclid(4 * half) - half;
    if m < half {
        m
    } else {
        2 * half - m
    }
}

/// One copy of the thin band inside the extended band, `[lower, upper]` in offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: i64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSetup {
    pub epsilon: f64,
    /// Half-width of the target band.
    pub width: f64,
    /// Copies on each side of the original band.
    pub reflections: usize,
    /// Half-width of the extended band, `(1 + 2 reflections) epsilon`.
    pub extended_width: f64,
    pub cells: Vec<Cell>,
}

/// Smallest `k` with `(1 + 2k) epsilon >= width / 3`.
pub fn reflection_params(epsilon: f64, width: f64) -> Result<ReflectionSetup> {
    if !(epsilon > 0.0 && epsilon < width && width.is_finite()) {
        return Err(GullyError::config(
            "domain.epsilon_list",
            format!("need 0 < epsilon < L, got epsilon = {epsilon}, L = {width}"),
        ));
    }
    let third = width / 3.0;
    let covers = |k: usize| (1 + 2 * k) as f64 * epsilon >= third;
    let mut k = (((third / epsilon) - 1.0) / 2.0).ceil().max(0.0) as usize;
    while !covers(k) {
        k += 1;
    }
    while k > 0 && covers(k - 1) {
        k -= 1;
    }
    let r = k as i64;
    let cells = (-r..=r)
        .map(|m| Cell {
            index: m,
            lower: (2 * m - 1) as f64 * epsilon,
            upper: (2 * m + 1) as f64 * epsilon,
        })
        .collect();
    Ok(ReflectionSetup {
        epsilon,
        width,
        reflections: k,
        extended_width: (1 + 2 * k) as f64 * epsilon,
        cells,
    })
}

fn check_same_axis(a: &GullyGrid, b: &GullyGrid) -> Result<()> {
    let same = a.n_sigma() == b.n_sigma()
        && a
            .sigmas()
            .iter()
            .zip(b.sigmas())
            .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    if same {
        Ok(())
    } else {
        Err(GullyError::config("numerics.n_sigma", "grids do not share the arclength lattice"))
    }
}

fn check_width(grid: &GullyGrid, width: f64, what: &str) -> Result<()> {
    if (grid.epsilon() - width).abs() > 1e-12 * width {
        return Err(GullyError::config(
            "domain.L",
            format!("{what} grid has half-width {}, expected {width}", grid.epsilon()),
        ));
    }
    Ok(())
}

/// Ratio as an integer, if it is one to round-off.
fn whole(ratio: f64) -> Option<i64> {
    let r = ratio.round();
    ((ratio - r).abs() <= 1e-9 * ratio.abs().max(1.0) && r >= 1.0).then_some(r as i64)
}

impl ReflectionSetup {
    /// Extended-band lattice with the source's arclength nodes and offset spacing.
    pub fn extended_grid(&self, source: &GullyGrid) -> Result<GullyGrid> {
        check_width(source, self.epsilon, "source")?;
        let chart = source.chart().with_epsilon(self.extended_width)?;
        let n_s = (1 + 2 * self.reflections) * (source.n_s() - 1) + 1;
        GullyGrid::build(std::sync::Arc::new(chart), source.n_sigma(), n_s)
    }

    /// Target-band lattice with the given number of offset nodes.
    pub fn target_grid(&self, source: &GullyGrid, n_s: usize) -> Result<GullyGrid> {
        let chart = source.chart().with_epsilon(self.width)?;
        GullyGrid::build(std::sync::Arc::new(chart), source.n_sigma(), n_s)
    }

    /// Offset of the scaled point `(extended_width / width) s`.
    pub fn squeeze(&self, s: f64) -> f64 {
        self.extended_width / self.width * s
    }
}

/// `(Ru)(sigma, s) = u(sigma, fold(s))` on the extended lattice.
pub fn reflect_extend(
    source: &GullyGrid,
    values: &[f64],
    setup: &ReflectionSetup,
    target: &GullyGrid,
) -> Result<Vec<f64>> {
    check_same_axis(source, target)?;
    check_width(source, setup.epsilon, "source")?;
    check_width(target, setup.extended_width, "extended")?;
    let lattice_error = || {
        GullyError::config(
            "numerics.n_s",
            "folded offsets do not land on source nodes; use an odd node count with matching spacing",
        )
    };
    let half = whole(setup.epsilon / target.h_s()).ok_or_else(lattice_error)?;
    let stride = whole(target.h_s() / source.h_s()).ok_or_else(lattice_error)?;
    let center = (target.n_s() as i64 - 1) / 2;
    if 2 * center + 1 != target.n_s() as i64 || half * stride * 2 != source.n_s() as i64 - 1 {
        return Err(lattice_error());
    }
    let source_index: Vec<usize> = (0..target.n_s() as i64)
        .map(|j| ((fold_steps(j - center, half) + half) * stride) as usize)
        .collect();
    let mut out = vec![0.0; target.len()];
    for i in 0..target.n_sigma() {
        for (j, &src) in source_index.iter().enumerate() {
            out[target.index(i, j)] = values[source.index(i, src)];
        }
    }
    Ok(out)
}

/// Cubic Lagrange weights at `x` for the four nodes starting at `start`, in index units.
fn cubic_weights(x: f64, start: usize) -> [f64; 4] {
    let nodes = [0.0, 1.0, 2.0, 3.0].map(|k| start as f64 + k);
    let mut w = [1.0; 4];
    for (a, wa) in w.iter_mut().enumerate() {
        for (b, &xb) in nodes.iter().enumerate() {
            if a != b {
                *wa *= (x - xb) / (nodes[a] - xb);
            }
        }
    }
    w
}

/// `(Tu)(sigma, s) = u(sigma, (extended_width / width) s)`, cubic in the offset.
pub fn rescale_extend(
    extended: &GullyGrid,
    values: &[f64],
    setup: &ReflectionSetup,
    target: &GullyGrid,
) -> Result<Vec<f64>> {
    check_same_axis(extended, target)?;
    check_width(extended, setup.extended_width, "extended")?;
    check_width(target, setup.width, "target")?;
    let n = extended.n_s();
    let h = extended.h_s();
    let tau = setup.extended_width;
    let stencils: Vec<(usize, [f64; 4])> = target
        .offsets()
        .iter()
        .map(|&s| {
            let x = ((setup.squeeze(s) + tau) / h).clamp(0.0, (n - 1) as f64);
            let nearest = x.round();
            if (x - nearest).abs() <= 1e-9 || n < 4 {
                let k = nearest as usize;
                let start = k.min(n.saturating_sub(4));
                let mut w = [0.0; 4];
                w[k - start] = 1.0;
                (start, w)
            } else {
                let start = (x.floor() as usize).saturating_sub(1).min(n - 4);
                (start, cubic_weights(x, start))
            }
        })
        .collect();
    let mut out = vec![0.0; target.len()];
    for i in 0..target.n_sigma() {
        for (j, (start, w)) in stencils.iter().enumerate() {
            out[target.index(i, j)] = (0..4)
                .filter(|&k| w[k] != 0.0)
                .map(|k| w[k] * values[extended.index(i, start + k)])
                .sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub setup: ReflectionSetup,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Round-off allowance of the floating fold, in units of `epsilon`.
const FOLD_ULPS: f64 = 8.0;

/// Fold identities, extension parameters, and exact evenness and sup/min
/// preservation of the lattice extension of a smooth asymmetric field.
pub fn verify_reflection(source: &GullyGrid, width: f64) -> Result<ReflectionReport> {
    let eps = source.epsilon();
    let setup = reflection_params(eps, width)?;
    let ulp = FOLD_ULPS * f64::EPSILON;
    let mut checks = Vec::new();

    let branch = [(0.5, 0.5), (1.5, 0.5), (4.5, 0.5), (-0.5, -0.5), (2.5, -0.5)]
        .iter()
        .map(|&(s, w)| (fold(s * eps, eps) - w * eps).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("fold branch values", branch, ulp * eps));

    let probes: Vec<f64> = (0..2001).map(|k| (k as f64 / 1000.0 - 1.0) * 7.0 * eps).collect();
    let period = probes
        .iter()
        .map(|&s| (fold(s + 4.0 * eps, eps) - fold(s, eps)).abs() / (s.abs() + 4.0 * eps))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("fold period 4 eps", period, ulp));
    let idempotent = probes
        .iter()
        .map(|&s| (fold(fold(s, eps), eps) - fold(s, eps)).abs() / eps)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("fold idempotent", idempotent, ulp));
    let range = probes
        .iter()
        .map(|&s| (fold(s, eps).abs() - eps).max(0.0) / eps)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("fold range", range, ulp));

    let k = setup.reflections;
    let minimal = setup.extended_width >= setup.width / 3.0
        && (k == 0 || ((2 * k - 1) as f64) * eps < setup.width / 3.0);
    checks.push(Check::holds("extension count minimal", minimal));
    let ratio = setup.extended_width / setup.width;
    let in_range = (1.0 / 3.0..=1.0).contains(&ratio);
    checks.push(Check::holds("extended width ratio", in_range));

    let values: Vec<f64> = (0..source.len())
        .map(|node| {
            let (i, j) = source.split(node);
            let (sg, s) = (source.sigmas()[i], source.offsets()[j] / eps);
            (3.0 * sg).sin() + 0.7 * s + 0.4 * s * s * sg.cos() + 0.1 * s * s * s
        })
        .collect();
    let extended = setup.extended_grid(source)?;
    let reflected = reflect_extend(source, &values, &setup, &extended)?;
    let h = extended.h_s();
    let offset_index = |s: f64| ((s + setup.extended_width) / h).round() as i64;
    let mut even = 0.0f64;
    for cell in &setup.cells {
        for face in [cell.lower, cell.upper] {
            let c = offset_index(face);
            for step in 1..=((source.n_s() as i64 - 1) / 2) {
                let (lo, hi) = (c - step, c + step);
                if lo < 0 || hi >= extended.n_s() as i64 {
                    continue;
                }
                for i in 0..extended.n_sigma() {
                    let a = reflected[extended.index(i, lo as usize)];
                    let b = reflected[extended.index(i, hi as usize)];
                    even = even.max((a - b).abs());
                }
            }
        }
    }
    checks.push(Check::at_most("even across every cell face", even, 0.0));
    let center = offset_index(0.0) as usize - (source.n_s() - 1) / 2;
    let mut identity = 0.0f64;
    for i in 0..source.n_sigma() {
        for j in 0..source.n_s() {
            identity = identity.max((reflected[extended.index(i, center + j)] - values[source.index(i, j)]).abs());
        }
    }
    checks.push(Check::at_most("identity on the original band", identity, 0.0));
    let extrema = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (lo_u, hi_u) = extrema(&values);
    let (lo_r, hi_r) = extrema(&reflected);
    checks.push(Check::at_most("max and min preserved", (hi_u - hi_r).abs().max((lo_u - lo_r).abs()), 0.0));

    let target = setup.target_grid(source, 4 * (extended.n_s() - 1) + 1)?;
    let constant = rescale_extend(&extended, &vec![1.25; extended.len()], &setup, &target)?;
    let drift = constant.iter().map(|v| (v - 1.25).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("rescale keeps constants", drift, 4.0 * f64::EPSILON));

    let pass = all_pass(&checks);
    Ok(ReflectionReport { setup, checks, pass })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::analysis::{weighted_norm_with, NormRequest, PairSet, SampleId, SpaceTimeField};
    use crate::geometry::{Curve, CurveSpec, FermiChart};

    fn straight(eps: f64, n_sigma: usize, n_s: usize) -> GullyGrid {
        let curve = Arc::new(Curve::new(CurveSpec::segment([0.0, 0.0], [1.0, 0.0])).unwrap());
        GullyGrid::build(Arc::new(FermiChart::new(curve, eps).unwrap()), n_sigma, n_s).unwrap()
    }

    fn close(a: f64, b: f64, scale: f64) -> bool {
        (a - b).abs() <= FOLD_ULPS * f64::EPSILON * scale
    }

    #[test]
    fn fold_hand_values() {
        assert!(close(fold(0.05, 0.1), 0.05, 0.1));
        assert!(close(fold(0.15, 0.1), 0.05, 0.1));
        assert!(close(fold(0.45, 0.1), 0.05, 0.1));
        assert_eq!(fold(-0.1, 0.1), -0.1);
        assert!(close(fold(0.1, 0.1), 0.1, 0.1));
    }

    #[test]
    fn fold_integer_matches_float() {
        for k in -200..200 {
            let s = k as f64 * 0.01;
            assert!(close(fold(s, 0.1), fold_steps(k, 10) as f64 * 0.01, 1.0), "{k}");
        }
    }

    #[test]
    fn params_hand_values() {
        let setup = reflection_params(0.1, 1.0).unwrap();
        assert_eq!(setup.reflections, 2);
        assert_eq!(setup.extended_width, 0.5);
        assert_eq!(setup.cells.len(), 5);
        assert_eq!(setup.cells[2].lower, -0.1);
        assert_eq!(setup.cells[2].upper, 0.1);
        assert!(close(setup.cells[4].upper, 0.5, 1.0));
        let wide = reflection_params(0.4, 1.0).unwrap();
        assert_eq!((wide.reflections, wide.extended_width), (0, 0.4));
        assert!(reflection_params(1.0, 1.0).is_err());
        assert!(reflection_params(0.0, 1.0).is_err());
    }

    #[test]
    fn extension_properties() {
        let src = straight(0.05, 21, 9);
        let setup = reflection_params(0.05, 0.3).unwrap();
        assert_eq!(setup.reflections, 1);
        let ext = setup.extended_grid(&src).unwrap();
        let values: Vec<f64> = (0..src.len()).map(|n| (n as f64 * 0.37).sin()).collect();
        let r = reflect_extend(&src, &values, &setup, &ext).unwrap();
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(max(&r), max(&values));
        assert_eq!(min(&r), min(&values));
        // Node 4 of the source (s = 0) sits at node 12 of the extension.
        for i in 0..src.n_sigma() {
            for j in 0..9 {
                assert_eq!(r[ext.index(i, 8 + j)], values[src.index(i, j)]);
            }
            // Faces at s = +-eps are nodes 8 and 16.
            for h in 1..=4 {
                assert_eq!(r[ext.index(i, 16 - h)], r[ext.index(i, 16 + h)]);
                assert_eq!(r[ext.index(i, 8 - h)], r[ext.index(i, 8 + h)]);
            }
        }
    }

    #[test]
    fn incompatible_lattices_are_rejected() {
        let src = straight(0.05, 21, 9);
        let setup = reflection_params(0.05, 0.3).unwrap();
        let ext = straight(0.15, 21, 23);
        assert!(reflect_extend(&src, &vec![0.0; src.len()], &setup, &ext).is_err());
        let wrong_width = straight(0.2, 21, 25);
        assert!(reflect_extend(&src, &vec![0.0; src.len()], &setup, &wrong_width).is_err());
        let other_axis = straight(0.15, 11, 25);
        assert!(reflect_extend(&src, &vec![0.0; src.len()], &setup, &other_axis).is_err());
    }

    #[test]
    fn rescale_identity_and_constants() {
        let src = straight(0.1, 11, 9);
        let mut setup = reflection_params(0.1, 0.5).unwrap();
        assert_eq!(setup.reflections, 1);
        assert!(close(setup.extended_width, 0.3, 1.0));
        let ext = setup.extended_grid(&src).unwrap();
        let wide = setup.target_grid(&src, 41).unwrap();
        let c = rescale_extend(&ext, &vec![3.0; ext.len()], &setup, &wide).unwrap();
        assert!(c.iter().all(|v| (v - 3.0).abs() <= 1e-14));
        // A setup whose target is the extended band itself.
        setup.width = setup.extended_width;
        let same = setup.target_grid(&src, ext.n_s()).unwrap();
        let values: Vec<f64> = (0..ext.len()).map(|n| (n as f64).cos()).collect();
        assert_eq!(rescale_extend(&ext, &values, &setup, &same).unwrap(), values);
    }

    #[test]
    fn rescale_is_fourth_order() {
        let setup = reflection_params(0.1, 1.0).unwrap();
        let mut errors = Vec::new();
        for n_s in [9, 17, 33] {
            let src = straight(0.1, 5, n_s);
            let ext = setup.extended_grid(&src).unwrap();
            let tgt = setup.target_grid(&src, 301).unwrap();
            let f = |s: f64| (3.0 * s).sin();
            let values: Vec<f64> = (0..ext.len()).map(|n| f(ext.offsets()[ext.split(n).1])).collect();
            let out = rescale_extend(&ext, &values, &setup, &tgt).unwrap();
            let err = (0..tgt.len())
                .map(|n| (out[n] - f(setup.squeeze(tgt.offsets()[tgt.split(n).1]))).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        for w in errors.windows(2) {
            assert!((w[0] / w[1]).log2() >= 3.5, "{errors:?}");
        }
    }

    #[test]
    fn composed_extension_is_periodic_and_even() {
        let eps = 0.1;
        let src = straight(eps, 5, 9);
        let setup = reflection_params(eps, 1.0).unwrap();
        let ext = setup.extended_grid(&src).unwrap();
        let u: Vec<f64> = (0..src.len())
            .map(|n| (std::f64::consts::PI * src.offsets()[src.split(n).1] / (2.0 * eps)).cos())
            .collect();
        let r = reflect_extend(&src, &u, &setup, &ext).unwrap();
        // Period 4 eps L / tau = 0.8 on the target band; spacing 0.0125 gives 64 nodes per period.
        let tgt = setup.target_grid(&src, 161).unwrap();
        let t = rescale_extend(&ext, &r, &setup, &tgt).unwrap();
        // Nodes 4..=156 use unclamped stencils; node 80 is s = 0.
        let inner = 4..=156;
        for i in 0..tgt.n_sigma() {
            for j in inner.clone() {
                let mirror = 160 - j;
                assert!((t[tgt.index(i, j)] - t[tgt.index(i, mirror)]).abs() <= 1e-12);
                if inner.contains(&(j + 64)) {
                    assert!((t[tgt.index(i, j)] - t[tgt.index(i, j + 64)]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn restriction_never_exceeds_extension() {
        let eps = 0.05;
        let src = straight(eps, 41, 9);
        let setup = reflection_params(eps, 0.5).unwrap();
        let ext = setup.extended_grid(&src).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| 0.02 * k as f64).collect();
        let series: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| {
                (0..src.len())
                    .map(|n| {
                        let (i, j) = src.split(n);
                        (4.0 * src.sigmas()[i] + t).sin() * (1.0 + src.offsets()[j] / eps)
                    })
                    .collect()
            })
            .collect();
        let extended: Vec<Vec<f64>> = series
            .iter()
            .map(|v| reflect_extend(&src, v, &setup, &ext).unwrap())
            .collect();
        let thin = SpaceTimeField::from_band_series(&src, &times, &series).unwrap();
        let wide = SpaceTimeField::from_band_series(&ext, &times, &extended).unwrap();
        let shift = (ext.n_s() - src.n_s()) / 2;
        for a in [0.0, 0.3, 0.7] {
            let request = NormRequest::geometric(a, 0.1, 1.0, 8, 2000, 5).unwrap();
            let pairs = PairSet::sample(&thin, &request);
            let embed = |id: SampleId| {
                let (i, j) = src.split(id.node as usize);
                SampleId::new(id.time as usize, ext.index(i, j + shift))
            };
            let matched = PairSet::sample(&wide, &request).union(&pairs.remap(embed));
            let inner = weighted_norm_with(&thin, &request, &pairs).unwrap();
            let outer = weighted_norm_with(&wide, &request, &matched).unwrap();
            assert!(inner.value <= outer.value, "a = {a}: {} > {}", inner.value, outer.value);
        }
    }

    #[test]
    fn suite_passes_on_circle() {
        let curve = Arc::new(Curve::new(CurveSpec::circular_arc([0.0, 0.0], 1.0, 0.0, 1.5)).unwrap());
        let chart = FermiChart::new(curve, 0.04).unwrap();
        let grid = GullyGrid::build(Arc::new(chart), 31, 9).unwrap();
        let report = verify_reflection(&grid, 0.2).unwrap();
        assert!(report.pass, "{:#?}", report.checks);
        assert_eq!(report.setup.reflections, 1);
    }

    proptest! {
        #[test]
        fn fold_is_periodic_idempotent_and_bounded(s in -5.0f64..5.0, eps in 0.01f64..1.0) {
            let w = fold(s, eps);
            prop_assert!(w >= -eps && w <= eps * (1.0 + 1e-15));
            prop_assert!((fold(w, eps) - w).abs() <= FOLD_ULPS * f64::EPSILON * eps);
            prop_assert!((fold(s + 4.0 * eps, eps) - w).abs() <= FOLD_ULPS * f64::EPSILON * (s.abs() + 4.0 * eps));
        }

        #[test]
        fn params_cover_a_third(eps in 0.001f64..0.99, width in 1.0f64..2.0) {
            let setup = reflection_params(eps * width, width).unwrap();
            let ratio = setup.extended_width / width;
            prop_assert!(ratio >= 1.0 / 3.0 && ratio <= 1.0 + 1e-12);
            prop_assert!(setup.reflections == 0 || ((2 * setup.reflections - 1) as f64) * eps * width < width / 3.0);
        }
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{weighted_norm_estimate, DeltaRow, NormRequest, SpaceTimeField};
use crate::error::Result;
use crate::model::Scenario;
use crate::solver::run_full;

/// Empirical bound on the spread of the probe across widths. Not derived.
pub const PROBE_RATIO_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub epsilon: f64,
    pub value: f64,
    pub argmax_delta: f64,
    pub per_delta: Vec<DeltaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub a: f64,
    pub b: f64,
    pub per_epsilon: Vec<ProbeRow>,
    pub max_min_ratio: f64,
    pub ratio_limit: f64,
    pub ratio_limit_note: String,
    pub pass: bool,
}

/// Weighted norms of order `2 + alpha` and weight `-lambda` for each width.
/// All-zero values give a ratio of 1.
pub fn regularity_probe(
    fields: &[(f64, SpaceTimeField)],
    lambda: f64,
    alpha: f64,
    delta_grid: &[f64],
    pair_budget: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let request = NormRequest::new(2.0 + alpha, -lambda, delta_grid.to_vec(), pair_budget, seed)?;
    let per_epsilon = fields
        .iter()
        .map(|(epsilon, field)| {
            let report = weighted_norm_estimate(field, &request)?;
            Ok(ProbeRow {
                epsilon: *epsilon,
                value: report.value,
                argmax_delta: report.argmax_delta,
                per_delta: report.per_delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = per_epsilon
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.value), hi.max(r.value)));
    let max_min_ratio = if hi == 0.0 { 1.0 } else { hi / lo };
    Ok(ProbeReport {
        a: request.a,
        b: request.b,
        per_epsilon,
        max_min_ratio,
        ratio_limit: PROBE_RATIO_LIMIT,
        ratio_limit_note: "empirical threshold, not a derived constant".into(),
        pass: max_min_ratio <= PROBE_RATIO_LIMIT,
    })
}

/// Runs every width of a scenario and probes the trajectories in physical units.
pub fn probe_scenario(scenario: &Scenario) -> Result<ProbeReport> {
    let shift = scenario.boundary.threshold;
    let fields = (0..scenario.epsilons.len())
        .into_par_iter()
        .map(|k| {
            let run = run_full(scenario, k)?;
            let mut snapshots = run.snapshots;
            for snap in &mut snapshots {
                snap.values.iter_mut().for_each(|v| *v += shift);
            }
            Ok((run.epsilon, SpaceTimeField::from_band(&snapshots)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let diameter = fields.iter().map(|(_, f)| f.diameter()).fold(0.0, f64::max);
    let params = &scenario.analysis;
    let delta_grid: Vec<f64> = (0..params.delta_levels).map(|j| diameter * 0.5f64.powi(j as i32)).collect();
    regularity_probe(&fields, params.lambda, params.alpha, &delta_grid, params.pair_budget, params.seed)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{Curve, CurveSpec, FermiChart};
    use crate::grid::GullyGrid;

    fn field(eps: f64, f: impl Fn(f64, f64, f64) -> f64) -> SpaceTimeField {
        let curve = Arc::new(Curve::new(CurveSpec::segment([0.0, 0.0], [1.0, 0.0])).unwrap());
        let grid = GullyGrid::build(Arc::new(FermiChart::new(curve, eps).unwrap()), 51, 5).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| 0.005 * k as f64).collect();
        let series: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| {
                (0..grid.len())
                    .map(|n| {
                        let (i, j) = grid.split(n);
                        f(grid.sigmas()[i], grid.offsets()[j], t)
                    })
                    .collect()
            })
            .collect();
        SpaceTimeField::from_band_series(&grid, &times, &series).unwrap()
    }

    fn deltas() -> Vec<f64> {
        (0..10).map(|j| 0.5f64.powi(j)).collect()
    }

    #[test]
    fn zero_fields_give_unit_ratio() {
        let fields: Vec<_> = [0.08, 0.04, 0.02].iter().map(|&e| (e, field(e, |_, _, _| 0.0))).collect();
        let report = regularity_probe(&fields, 0.2, 0.3, &deltas(), 2000, 1).unwrap();
        assert!(report.per_epsilon.iter().all(|r| r.value == 0.0));
        assert_eq!(report.max_min_ratio, 1.0);
        assert!(report.pass);
    }

    #[test]
    fn width_independent_fields_agree() {
        let u = |sg: f64, _: f64, t: f64| (std::f64::consts::PI * sg).sin() * (-t).exp();
        let fields: Vec<_> = [0.08, 0.04, 0.02].iter().map(|&e| (e, field(e, u))).collect();
        let report = regularity_probe(&fields, 0.2, 0.3, &deltas(), 4000, 1).unwrap();
        assert!(report.max_min_ratio <= 1.1, "{report:#?}");
    }
}

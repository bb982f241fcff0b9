//! Projected interaction kernels.
//!
//! The band kernel is `K_eps(X, Y) = k0(sigma_X, sigma_Y) / (2 eps)` where `k0`
//! depends only on arclength distance along the axis. Averaging it over both
//! cross-sections gives back `k0`, which is therefore the axis kernel.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{FermiChart, Vec2};
use crate::grid::{GullyGrid, ReducedGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    Gaussian,
    Tophat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Peak value of `k0`.
    pub amplitude: f64,
    /// Arclength decay scale.
    pub range: f64,
    pub shape: KernelShape,
    /// Declared bound on the kernel mass and on its Hoelder modulus.
    pub bound: f64,
}

impl KernelSpec {
    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            range: 1.0,
            shape: KernelShape::Gaussian,
            bound: 1.0,
        }
    }

    /// `k0` as a function of the arclength distance.
    #[inline]
    pub fn profile(&self, distance: f64) -> f64 {
        match self.shape {
            KernelShape::Gaussian => {
                let z = distance / self.range;
                self.amplitude * (-0.5 * z * z).exp()
            }
            KernelShape::Tophat => {
                if distance.abs() <= self.range {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Axis kernel `K*(sigma, sigma')`.
    #[inline]
    pub fn reduced(&self, sigma: f64, sigma2: f64) -> f64 {
        self.profile(sigma - sigma2)
    }

    /// Band kernel between two Cartesian points of the tube.
    pub fn full(&self, chart: &FermiChart, x: Vec2, y: Vec2) -> Result<f64> {
        let px = chart.inverse(x)?;
        let py = chart.inverse(y)?;
        Ok(self.profile(px.sigma - py.sigma) / (2.0 * chart.epsilon()))
    }

    /// Upper bound of `int k0(sigma, .)` over the whole line.
    pub fn line_mass(&self) -> f64 {
        match self.shape {
            KernelShape::Gaussian => self.amplitude * self.range * (2.0 * std::f64::consts::PI).sqrt(),
            KernelShape::Tophat => 2.0 * self.amplitude * self.range,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// Dense `k0(sigma_i, sigma_k)` table for a pair of arclength lattices.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(spec: &KernelSpec, row_sigmas: &[f64], col_sigmas: &[f64]) -> Self {
        let values = row_sigmas
            .iter()
            .flat_map(|&a| col_sigmas.iter().map(move |&b| spec.reduced(a, b)))
            .collect();
        Self {
            rows: row_sigmas.len(),
            cols: col_sigmas.len(),
            values,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// `out_i = sum_k k0(i, k) * column_mass_k`.
    pub fn apply(&self, column_mass: &[f64]) -> Vec<f64> {
        debug_assert_eq!(column_mass.len(), self.cols);
        (0..self.rows)
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(column_mass)
                    .map(|(k, m)| k * m)
                    .sum()
            })
            .collect()
    }
}

/// Nonlocal heating on the band, `sum_y w_y K_eps(x, y) (u(y) - threshold)^+`.
///
/// The kernel only depends on the arclength of both points, so the sum is
/// factored through per-column masses.
pub fn nonlocal_term(grid: &GullyGrid, kernel: &KernelMatrix, values: &[f64], threshold: f64) -> Vec<f64> {
    let n_s = grid.n_s();
    let inv_width = 1.0 / (2.0 * grid.epsilon());
    let w = grid.weights();
    let column_mass: Vec<f64> = (0..grid.n_sigma())
        .map(|i| {
            let base = i * n_s;
            (0..n_s)
                .map(|j| w[base + j] * (values[base + j] - threshold).max(0.0))
                .sum::<f64>()
                * inv_width
        })
        .collect();
    let per_sigma = kernel.apply(&column_mass);
    let mut out = vec![0.0; grid.len()];
    for (i, v) in per_sigma.iter().enumerate() {
        out[i * n_s..(i + 1) * n_s].fill(*v);
    }
    out
}

/// Nonlocal heating on the axis, `sum_k w_k K*(sigma, sigma_k) (U_k - threshold)^+`.
pub fn nonlocal_reduced(grid: &ReducedGrid, kernel: &KernelMatrix, values: &[f64], threshold: f64) -> Vec<f64> {
    let mass: Vec<f64> = grid
        .weights()
        .iter()
        .zip(values)
        .map(|(w, u)| w * (u - threshold).max(0.0))
        .collect();
    kernel.apply(&mass)
}

/// Outcome of sampling the kernel mass and Hoelder-modulus assumptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub epsilon: f64,
    pub sup_mass: f64,
    pub holder_quotient: f64,
    pub alpha: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Quadrature lattice used by the verifier.
const VERIFY_N_SIGMA: usize = 801;
const VERIFY_N_S: usize = 5;

/// Samples `sup_x int K(x, .)` and `sup int |K(x, .) - K(x', .)| / |x - x'|^alpha`.
pub fn verify_kernel_assumptions(
    spec: &KernelSpec,
    chart: &FermiChart,
    alpha: f64,
    sample_count: usize,
    seed: u64,
) -> Result<KernelReport> {
    let grid = GullyGrid::build(std::sync::Arc::new(chart.clone()), VERIFY_N_SIGMA, VERIFY_N_S)?;
    let len = chart.total_length();
    let eps = chart.epsilon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<(f64, f64)> = (0..sample_count.max(2))
        .map(|_| (rng.random_range(0.0..=len), rng.random_range(-eps..=eps)))
        .collect();
    // Terminal and mid cross-sections are always probed.
    samples.extend([(0.0, 0.0), (0.5 * len, 0.0), (len, 0.0)]);
    // Each sample is paired with its successor and with a nearby point at a random scale.
    let mut pairs: Vec<(usize, (f64, f64))> = Vec::with_capacity(2 * samples.len());
    for k in 0..samples.len() {
        pairs.push((k, samples[(k + 1) % samples.len()]));
        let scale = 10f64.powf(rng.random_range(-4.0..0.0)) * len;
        let sg = samples[k].0;
        let near = ((sg + rng.random_range(-1.0..=1.0) * scale).clamp(0.0, len), rng.random_range(-eps..=eps));
        pairs.push((k, near));
    }
    let weights = grid.weights();
    let n_s = grid.n_s();
    let column_weight: Vec<f64> = (0..grid.n_sigma())
        .map(|i| weights[i * n_s..(i + 1) * n_s].iter().sum::<f64>() / (2.0 * eps))
        .collect();
    let sigmas = grid.sigmas();
    let mass_at = |sigma: f64| -> f64 {
        sigmas
            .iter()
            .zip(&column_weight)
            .map(|(&sy, w)| w * spec.reduced(sigma, sy))
            .sum()
    };
    let sup_mass = samples
        .par_iter()
        .map(|&(sg, _)| mass_at(sg))
        .reduce(|| 0.0, f64::max);
    let holder_quotient = pairs
        .par_iter()
        .map(|&(k, (sg2, s2))| {
            let (sg1, s1) = samples[k];
            let x = chart.forward(sg1, s1).expect("sample inside the tube");
            let y = chart.forward(sg2, s2).expect("sample inside the tube");
            let dist = (x - y).norm();
            if dist == 0.0 {
                return 0.0;
            }
            let l1: f64 = sigmas
                .iter()
                .zip(&column_weight)
                .map(|(&sy, w)| w * (spec.reduced(sg1, sy) - spec.reduced(sg2, sy)).abs())
                .sum();
            l1 / dist.powf(alpha)
        })
        .reduce(|| 0.0, f64::max);
    Ok(KernelReport {
        epsilon: eps,
        sup_mass,
        holder_quotient,
        alpha,
        bound: spec.bound,
        pass: sup_mass <= spec.bound && holder_quotient <= spec.bound,
    })
}

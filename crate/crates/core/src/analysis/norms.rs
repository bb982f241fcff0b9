//! Sampled weighted Hoelder norms.
//!
//! Every estimator maximizes a difference quotient over a finite pair set, so
//! each value is a lower bound for the supremum it stands for. The pair set is
//! the union of seeded random draws, all lattice-adjacent pairs and the pairs
//! between extremal samples. Pair sets for a smaller interior are drawn and
//! then kept for every larger interior, so the estimate at a level never sees
//! fewer pairs than the level before it.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GullyError, Result};
use crate::geometry::Vec2;
use crate::grid::{GullyGrid, ReducedGrid};
use crate::solver::{euclidean_gradient, reduced_derivative, FieldSnapshot, ReducedSnapshot};

/// Smallest accepted number of random pairs per level.
pub const MIN_PAIR_BUDGET: usize = 1000;

/// `(|dx|^2 + |dt|)^(1/2)`.
pub fn parabolic_distance(dx: Vec2, dt: f64) -> f64 {
    (dx.norm_squared() + dt.abs()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    /// Regularity order, in `[0, 3)`.
    pub a: f64,
    /// Boundary weight exponent, at least `-a`.
    pub b: f64,
    /// Strictly decreasing interior distances.
    pub delta_grid: Vec<f64>,
    pub pair_budget: usize,
    pub seed: u64,
}

impl NormRequest {
    pub fn new(a: f64, b: f64, delta_grid: Vec<f64>, pair_budget: usize, seed: u64) -> Result<Self> {
        let request = Self {
            a,
            b,
            delta_grid,
            pair_budget,
            seed,
        };
        request.validate()?;
        Ok(request)
    }

    /// `delta_j = diameter * 2^-j` for `j = 0..levels`.
    pub fn geometric(a: f64, b: f64, diameter: f64, levels: usize, pair_budget: usize, seed: u64) -> Result<Self> {
        let grid = (0..levels).map(|j| diameter * 0.5f64.powi(j as i32)).collect();
        Self::new(a, b, grid, pair_budget, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..3.0).contains(&self.a) {
            return Err(GullyError::config("analysis.alpha", format!("order {} outside [0, 3)", self.a)));
        }
        if !self.b.is_finite() || self.b < -self.a {
            return Err(GullyError::config(
                "analysis.lambda",
                format!("weight {} below -{}", self.b, self.a),
            ));
        }
        if self.delta_grid.is_empty()
            || self.delta_grid.iter().any(|d| !d.is_finite() || *d <= 0.0)
            || self.delta_grid.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(GullyError::config(
                "analysis.delta_levels",
                "interior distances must be positive and strictly decreasing",
            ));
        }
        if self.pair_budget < MIN_PAIR_BUDGET {
            return Err(GullyError::config(
                "analysis.pair_budget",
                format!("{} is below {MIN_PAIR_BUDGET}", self.pair_budget),
            ));
        }
        Ok(())
    }

    /// Levels evaluated: the grid, plus `delta = 0` when the weight is trivial.
    fn levels(&self) -> Vec<f64> {
        let mut out = self.delta_grid.clone();
        if self.a + self.b == 0.0 {
            out.push(0.0);
        }
        out
    }
}

/// A scattered sample for the plain seminorm estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: Vec2,
    pub t: f64,
    pub value: f64,
}

/// Sampled `sup |u(X) - u(Y)| / |X - Y|_P^a` over consecutive pairs, seeded
/// random pairs, and all pairs among the coordinate-extremal samples.
pub fn holder_seminorm_estimate(samples: &[Sample], exponent: f64, request: &NormRequest) -> Result<f64> {
    if !(exponent > 0.0 && exponent < 1.0) {
        return Err(GullyError::config("analysis.alpha", format!("exponent {exponent} outside (0, 1)")));
    }
    if samples.len() < 2 {
        return Err(GullyError::config("samples", "at least two samples are needed"));
    }
    let n = samples.len();
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    pairs.extend((0..request.pair_budget).map(|_| (rng.random_range(0..n), rng.random_range(0..n))));
    let keys: [fn(&Sample) -> f64; 3] = [|p| p.x.x, |p| p.x.y, |p| p.t];
    let mut extremes = Vec::new();
    for key in keys {
        let order = |i: &usize, j: &usize| key(&samples[*i]).total_cmp(&key(&samples[*j]));
        extremes.extend((0..n).min_by(order));
        extremes.extend((0..n).max_by(order));
    }
    for (k, &i) in extremes.iter().enumerate() {
        pairs.extend(extremes[k + 1..].iter().map(|&j| (i, j)));
    }
    Ok(pairs
        .par_iter()
        .map(|&(i, j)| {
            let (p, q) = (&samples[i], &samples[j]);
            let d = parabolic_distance(p.x - q.x, p.t - q.t);
            if d > 0.0 {
                (p.value - q.value).abs() / d.powf(exponent)
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max))
}

/// Index of one space-time sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleId {
    pub time: u32,
    pub node: u32,
}

impl SampleId {
    pub fn new(time: usize, node: usize) -> Self {
        Self {
            time: time as u32,
            node: node as u32,
        }
    }
}

/// A field on a fixed spatial lattice at a sequence of times, with its
/// discrete time derivative, Euclidean gradient and Hessian.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    positions: Vec<Vec2>,
    distances: Vec<f64>,
    links: Vec<(u32, u32)>,
    times: Vec<f64>,
    stationary: bool,
    value: Vec<f64>,
    rate: Vec<f64>,
    gradient: Vec<[f64; 2]>,
    hessian: Vec<[f64; 4]>,
}

fn band_links(grid: &GullyGrid) -> Vec<(u32, u32)> {
    let mut links = Vec::with_capacity(2 * grid.len());
    for i in 0..grid.n_sigma() {
        for j in 0..grid.n_s() {
            let here = grid.index(i, j) as u32;
            if i + 1 < grid.n_sigma() {
                links.push((here, grid.index(i + 1, j) as u32));
            }
            if j + 1 < grid.n_s() {
                links.push((here, grid.index(i, j + 1) as u32));
            }
        }
    }
    links
}

fn band_derivatives(grid: &GullyGrid, values: &[f64]) -> (Vec<[f64; 2]>, Vec<[f64; 4]>) {
    let g = euclidean_gradient(grid, values);
    let gx: Vec<f64> = g.iter().map(|v| v.x).collect();
    let gy: Vec<f64> = g.iter().map(|v| v.y).collect();
    let hx = euclidean_gradient(grid, &gx);
    let hy = euclidean_gradient(grid, &gy);
    let gradient = g.iter().map(|v| [v.x, v.y]).collect();
    let hessian = hx.iter().zip(&hy).map(|(a, b)| [a.x, a.y, b.x, b.y]).collect();
    (gradient, hessian)
}

/// Three-point derivative in time on a possibly uneven sequence.
fn time_rates(times: &[f64], series: &[Vec<f64>]) -> Vec<f64> {
    let k_count = times.len();
    let n = series.first().map_or(0, Vec::len);
    let mut out = vec![0.0; k_count * n];
    if k_count < 2 {
        return out;
    }
    for k in 0..k_count {
        let row = &mut out[k * n..(k + 1) * n];
        if k == 0 || k == k_count - 1 {
            let (a, b) = if k == 0 { (0, 1) } else { (k - 1, k) };
            let h = times[b] - times[a];
            for (r, (p, q)) in row.iter_mut().zip(series[a].iter().zip(&series[b])) {
                *r = (q - p) / h;
            }
        } else {
            let h1 = times[k] - times[k - 1];
            let h2 = times[k + 1] - times[k];
            let (c0, c1, c2) = (-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)));
            for (m, r) in row.iter_mut().enumerate() {
                *r = c0 * series[k - 1][m] + c1 * series[k][m] + c2 * series[k + 1][m];
            }
        }
    }
    out
}

impl SpaceTimeField {
    /// Band trajectory with time-dependent interior sets.
    pub fn from_band_series(grid: &GullyGrid, times: &[f64], series: &[Vec<f64>]) -> Result<Self> {
        Self::band(grid, times, series, false)
    }

    /// One band state; interiors are cut by distance only.
    pub fn stationary_band(grid: &GullyGrid, values: &[f64]) -> Result<Self> {
        Self::band(grid, &[0.0], &[values.to_vec()], true)
    }

    pub fn from_band(snapshots: &[FieldSnapshot]) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| GullyError::Numerical("empty trajectory".into()))?;
        if snapshots.iter().any(|s| s.grid.len() != first.grid.len()) {
            return Err(GullyError::Numerical("snapshots live on different grids".into()));
        }
        let times: Vec<f64> = snapshots.iter().map(|s| s.time).collect();
        let series: Vec<Vec<f64>> = snapshots.iter().map(|s| s.values.clone()).collect();
        Self::from_band_series(&first.grid, &times, &series)
    }

    fn band(grid: &GullyGrid, times: &[f64], series: &[Vec<f64>], stationary: bool) -> Result<Self> {
        if times.is_empty() || times.len() != series.len() || series.iter().any(|v| v.len() != grid.len()) {
            return Err(GullyError::Numerical("trajectory does not match its grid".into()));
        }
        let derivatives: Vec<_> = series.par_iter().map(|v| band_derivatives(grid, v)).collect();
        let (mut gradient, mut hessian) = (Vec::new(), Vec::new());
        for (g, h) in derivatives {
            gradient.extend(g);
            hessian.extend(h);
        }
        Ok(Self {
            positions: (0..grid.len()).map(|n| grid.point(n)).collect(),
            distances: grid.dirichlet_distances(),
            links: band_links(grid),
            times: times.to_vec(),
            stationary,
            value: series.concat(),
            rate: if stationary { vec![0.0; grid.len()] } else { time_rates(times, series) },
            gradient,
            hessian,
        })
    }

    /// Axis trajectory, embedded on the first coordinate axis.
    pub fn from_axis_series(grid: &ReducedGrid, times: &[f64], series: &[Vec<f64>]) -> Result<Self> {
        Self::axis(grid, times, series, false)
    }

    pub fn stationary_axis(grid: &ReducedGrid, values: &[f64]) -> Result<Self> {
        Self::axis(grid, &[0.0], &[values.to_vec()], true)
    }

    pub fn from_axis(snapshots: &[ReducedSnapshot]) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| GullyError::Numerical("empty trajectory".into()))?;
        let times: Vec<f64> = snapshots.iter().map(|s| s.time).collect();
        let series: Vec<Vec<f64>> = snapshots.iter().map(|s| s.values.clone()).collect();
        Self::from_axis_series(&first.grid, &times, &series)
    }

    fn axis(grid: &ReducedGrid, times: &[f64], series: &[Vec<f64>], stationary: bool) -> Result<Self> {
        let n = grid.n_sigma();
        if times.is_empty() || times.len() != series.len() || series.iter().any(|v| v.len() != n) {
            return Err(GullyError::Numerical("trajectory does not match its grid".into()));
        }
        let len = grid.total_length();
        let (mut gradient, mut hessian) = (Vec::new(), Vec::new());
        for v in series {
            let d1 = reduced_derivative(grid, v);
            let d2 = reduced_derivative(grid, &d1);
            gradient.extend(d1.iter().map(|&d| [d, 0.0]));
            hessian.extend(d2.iter().map(|&d| [d, 0.0, 0.0, 0.0]));
        }
        Ok(Self {
            positions: grid.sigmas().iter().map(|&s| Vec2::new(s, 0.0)).collect(),
            distances: grid.sigmas().iter().map(|&s| s.min(len - s).max(0.0)).collect(),
            links: (1..n as u32).map(|i| (i - 1, i)).collect(),
            times: times.to_vec(),
            stationary,
            value: series.concat(),
            rate: if stationary { vec![0.0; n] } else { time_rates(times, series) },
            gradient,
            hessian,
        })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    pub fn value(&self, id: SampleId) -> f64 {
        self.value[self.flat(id)]
    }

    /// Largest distance between two lattice points.
    pub fn diameter(&self) -> f64 {
        self.positions
            .par_iter()
            .enumerate()
            .map(|(i, p)| self.positions[i + 1..].iter().map(|q| (p - q).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    fn flat(&self, id: SampleId) -> usize {
        id.time as usize * self.positions.len() + id.node as usize
    }

    fn node_in(&self, node: usize, delta: f64) -> bool {
        self.distances[node] > delta
    }

    fn time_in(&self, k: usize, delta: f64) -> bool {
        self.stationary || self.times[k] > delta.sqrt()
    }
}

const CHANNELS: usize = 4;

/// Channel magnitudes and differences: value, time derivative, gradient, Hessian.
fn magnitudes(f: &SpaceTimeField, m: usize) -> [f64; CHANNELS] {
    let g = f.gradient[m];
    let h = f.hessian[m];
    [
        f.value[m].abs(),
        f.rate[m].abs(),
        g[0].hypot(g[1]),
        h.iter().map(|x| x * x).sum::<f64>().sqrt(),
    ]
}

fn differences(f: &SpaceTimeField, m: usize, n: usize) -> [f64; CHANNELS] {
    let (g, g2) = (f.gradient[m], f.gradient[n]);
    let (h, h2) = (f.hessian[m], f.hessian[n]);
    [
        (f.value[m] - f.value[n]).abs(),
        (f.rate[m] - f.rate[n]).abs(),
        (g[0] - g2[0]).hypot(g[1] - g2[1]),
        h.iter().zip(&h2).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    ]
}

/// Per-level maxima of every ingredient of the norms.
#[derive(Debug, Clone, Copy, Default)]
struct Terms {
    sup: [f64; CHANNELS],
    holder: [f64; CHANNELS],
    time_holder: [f64; CHANNELS],
    pairs: usize,
}

impl Terms {
    fn merge(mut self, other: &Terms) -> Terms {
        for c in 0..CHANNELS {
            self.sup[c] = self.sup[c].max(other.sup[c]);
            self.holder[c] = self.holder[c].max(other.holder[c]);
            self.time_holder[c] = self.time_holder[c].max(other.time_holder[c]);
        }
        self.pairs += other.pairs;
        self
    }
}

const VALUE: usize = 0;
const RATE: usize = 1;
const GRADIENT: usize = 2;
const HESSIAN: usize = 3;

/// Splits the order-`a` norm into its sup part and its seminorm part.
/// Seminorms of order zero are dropped.
fn compose(t: &Terms, a: f64) -> (f64, f64) {
    match a.floor() as usize {
        0 => (t.sup[VALUE], t.holder[VALUE]),
        1 => (t.sup[VALUE] + t.sup[GRADIENT], t.time_holder[VALUE] + t.holder[GRADIENT]),
        _ => (
            t.sup[VALUE] + t.sup[RATE] + t.sup[GRADIENT] + t.sup[HESSIAN],
            t.holder[RATE] + t.time_holder[GRADIENT] + t.holder[HESSIAN],
        ),
    }
}

/// Random and extremal pairs; lattice-adjacent pairs are always included implicitly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSet {
    extra: Vec<(SampleId, SampleId)>,
}

impl PairSet {
    /// For each level: `pair_budget` random pairs, as many same-node time pairs,
    /// all pairs among the extremal samples, and each node's first and last admissible time.
    pub fn sample(field: &SpaceTimeField, request: &NormRequest) -> Self {
        let mut extra = Vec::new();
        for (level, &delta) in request.levels().iter().enumerate() {
            let nodes: Vec<usize> = (0..field.node_count()).filter(|&n| field.node_in(n, delta)).collect();
            let times: Vec<usize> = (0..field.times.len()).filter(|&k| field.time_in(k, delta)).collect();
            if nodes.is_empty() || times.is_empty() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
            rng.set_stream(level as u64);
            let pick = |rng: &mut ChaCha8Rng| {
                SampleId::new(
                    times[rng.random_range(0..times.len())],
                    nodes[rng.random_range(0..nodes.len())],
                )
            };
            for _ in 0..request.pair_budget {
                let p = pick(&mut rng);
                let q = pick(&mut rng);
                extra.push((p, q));
            }
            let (first, last) = (times[0], times[times.len() - 1]);
            if first != last {
                for _ in 0..request.pair_budget {
                    let n = nodes[rng.random_range(0..nodes.len())];
                    let k1 = times[rng.random_range(0..times.len())];
                    let k2 = times[rng.random_range(0..times.len())];
                    extra.push((SampleId::new(k1, n), SampleId::new(k2, n)));
                }
                extra.extend(nodes.iter().map(|&n| (SampleId::new(first, n), SampleId::new(last, n))));
            }
            let keys: [fn(&Vec2) -> f64; 2] = [|p| p.x, |p| p.y];
            let mut corner_nodes = Vec::new();
            for key in keys {
                let order = |i: &&usize, j: &&usize| key(&field.positions[**i]).total_cmp(&key(&field.positions[**j]));
                corner_nodes.extend(nodes.iter().min_by(order).copied());
                corner_nodes.extend(nodes.iter().max_by(order).copied());
            }
            let corners: Vec<SampleId> = corner_nodes
                .iter()
                .flat_map(|&n| [SampleId::new(first, n), SampleId::new(last, n)])
                .collect();
            for (k, &p) in corners.iter().enumerate() {
                extra.extend(corners[k + 1..].iter().map(|&q| (p, q)));
            }
        }
        Self { extra }
    }

    pub fn len(&self) -> usize {
        self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extra.is_empty()
    }

    pub fn pairs(&self) -> &[(SampleId, SampleId)] {
        &self.extra
    }

    /// Moves every pair through a sample map, e.g. an embedding into a wider lattice.
    pub fn remap(&self, map: impl Fn(SampleId) -> SampleId) -> Self {
        Self {
            extra: self.extra.iter().map(|&(p, q)| (map(p), map(q))).collect(),
        }
    }

    pub fn union(mut self, other: &PairSet) -> Self {
        self.extra.extend_from_slice(&other.extra);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub weight: f64,
    pub nodes: usize,
    pub times: usize,
    pub pairs: usize,
    pub sup: f64,
    pub seminorm: f64,
    pub norm: f64,
    pub weighted: f64,
    /// The interior set was empty at this level.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    /// Level attaining the value.
    pub argmax_delta: f64,
    pub per_delta: Vec<DeltaRow>,
}

/// `max_delta delta^(a+b) |u|_(a; I_delta)` with the default pair set.
pub fn weighted_norm_estimate(field: &SpaceTimeField, request: &NormRequest) -> Result<NormReport> {
    request.validate()?;
    weighted_norm_with(field, request, &PairSet::sample(field, request))
}

/// Level at which a sample enters the nested interiors, if ever.
fn entry_levels(field: &SpaceTimeField, levels: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let first = |inside: &dyn Fn(f64) -> bool| levels.iter().position(|&d| inside(d)).unwrap_or(usize::MAX);
    let nodes = (0..field.node_count()).map(|n| first(&|d| field.node_in(n, d))).collect();
    let times = (0..field.times.len()).map(|k| first(&|d| field.time_in(k, d))).collect();
    (nodes, times)
}

/// Same as [`weighted_norm_estimate`] with an explicit random and extremal pair set.
pub fn weighted_norm_with(field: &SpaceTimeField, request: &NormRequest, pairs: &PairSet) -> Result<NormReport> {
    request.validate()?;
    let levels = request.levels();
    let depth = levels.len();
    let (node_level, time_level) = entry_levels(field, &levels);
    let n = field.node_count();
    let exponent = request.a - request.a.floor();
    let level_of = |id: SampleId| node_level[id.node as usize].max(time_level[id.time as usize]);

    let visit = |mut acc: Vec<Terms>, p: SampleId, q: SampleId| {
        let level = level_of(p).max(level_of(q));
        if level >= depth || p == q {
            return acc;
        }
        let (m1, m2) = (field.flat(p), field.flat(q));
        let diffs = differences(field, m1, m2);
        let slot = &mut acc[level];
        slot.pairs += 1;
        if exponent > 0.0 {
            let dt = field.times[p.time as usize] - field.times[q.time as usize];
            let dx = field.positions[p.node as usize] - field.positions[q.node as usize];
            let scale = parabolic_distance(dx, dt).powf(exponent);
            if scale > 0.0 {
                for c in 0..CHANNELS {
                    slot.holder[c] = slot.holder[c].max(diffs[c] / scale);
                }
            }
            if p.node == q.node && dt != 0.0 {
                let scale = dt.abs().powf(0.5 * (1.0 + exponent));
                for c in 0..CHANNELS {
                    slot.time_holder[c] = slot.time_holder[c].max(diffs[c] / scale);
                }
            }
        }
        acc
    };
    let merge = |a: Vec<Terms>, b: Vec<Terms>| a.iter().zip(&b).map(|(x, y)| x.merge(y)).collect::<Vec<_>>();
    let empty = || vec![Terms::default(); depth];

    let lattice = (0..field.times.len())
        .into_par_iter()
        .fold(empty, |mut acc, k| {
            for &(u, v) in &field.links {
                acc = visit(acc, SampleId::new(k, u as usize), SampleId::new(k, v as usize));
            }
            if k + 1 < field.times.len() {
                for node in 0..n {
                    acc = visit(acc, SampleId::new(k, node), SampleId::new(k + 1, node));
                }
            }
            for node in 0..n {
                let level = level_of(SampleId::new(k, node));
                if level < depth {
                    let mags = magnitudes(field, k * n + node);
                    for c in 0..CHANNELS {
                        acc[level].sup[c] = acc[level].sup[c].max(mags[c]);
                    }
                }
            }
            acc
        })
        .reduce(empty, merge);
    let random = pairs
        .extra
        .par_chunks(4096)
        .fold(empty, |mut acc, chunk| {
            for &(p, q) in chunk {
                if (p.time as usize) < field.times.len()
                    && (q.time as usize) < field.times.len()
                    && (p.node as usize) < n
                    && (q.node as usize) < n
                {
                    acc = visit(acc, p, q);
                }
            }
            acc
        })
        .reduce(empty, merge);
    let buckets = merge(lattice, random);

    let mut per_delta = Vec::with_capacity(depth);
    let mut running = Terms::default();
    let (mut value, mut argmax_delta) = (0.0f64, f64::NAN);
    for (j, &delta) in levels.iter().enumerate() {
        running = running.merge(&buckets[j]);
        let nodes = node_level.iter().filter(|&&l| l <= j).count();
        let times = time_level.iter().filter(|&&l| l <= j).count();
        let skipped = nodes == 0 || times == 0;
        let (sup, seminorm) = compose(&running, request.a);
        let weight = if delta == 0.0 { 1.0 } else { delta.powf(request.a + request.b) };
        let norm = sup + seminorm;
        let weighted = if skipped { 0.0 } else { weight * norm };
        if !skipped && (argmax_delta.is_nan() || weighted > value) {
            value = weighted;
            argmax_delta = delta;
        }
        per_delta.push(DeltaRow {
            delta,
            weight,
            nodes,
            times,
            pairs: running.pairs,
            sup,
            seminorm,
            norm,
            weighted,
            skipped,
        });
    }
    if argmax_delta.is_nan() {
        return Err(GullyError::config("analysis.delta_levels", "every interior level is empty"));
    }
    Ok(NormReport {
        a: request.a,
        b: request.b,
        value,
        argmax_delta,
        per_delta,
    })
}

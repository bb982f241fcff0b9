//! Scenario files and the validated problem description built from them.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BoundaryData, InitialProfile, KernelShape, KernelSpec, ReactionSpec, TimeProfile};
use crate::error::{GullyError, Result};
use crate::geometry::{Curve, CurveKind, CurveShape, CurveSpec, FermiChart, Orientation};
use crate::grid::{GullyGrid, ReducedGrid};

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub curve: CurveSection,
    pub domain: DomainSection,
    pub kernel: KernelSection,
    pub reaction: ReactionSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub kind: CurveKind,
    pub params: CurveParams,
    pub orientation: Orientation,
}

/// Union of all shape parameters; each kind uses its own subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Reference half-width.
    #[serde(rename = "L")]
    pub l: f64,
    pub epsilon_list: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub shape: KernelShape,
    #[serde(rename = "A")]
    pub a: f64,
    pub r: f64,
    #[serde(rename = "C_L")]
    pub c_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSection {
    pub c_psi: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    /// Ignition threshold.
    pub theta: f64,
    pub inlet: TimeProfile,
    pub outlet: TimeProfile,
    pub initial: InitialProfile,
}

/// Transverse node count: one value for every width or one per width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransverseNodes {
    Uniform(usize),
    PerWidth(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub n_sigma: usize,
    pub n_s: TransverseNodes,
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Implicitness weight of the diffusion step.
    pub theta_scheme: f64,
    /// Keep every n-th step in trajectories.
    pub output_every: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            n_sigma: 101,
            n_s: TransverseNodes::Uniform(9),
            dt: 1e-3,
            picard_tol: 1e-10,
            picard_max: 50,
            theta_scheme: 1.0,
            output_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub lambda: f64,
    pub alpha: f64,
    pub pair_budget: usize,
    pub seed: u64,
    pub delta_levels: usize,
    pub window_margin: f64,
    pub t0_fraction: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            lambda: 0.2,
            alpha: 0.3,
            pair_budget: 20_000,
            seed: 0,
            delta_levels: 13,
            window_margin: 0.1,
            t0_fraction: 0.1,
        }
    }
}

impl ScenarioFile {
    /// Parses TOML; errors name the offending key path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| GullyError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.into_inner().message().trim().to_string();
            // Missing keys are reported at the parent table; name the key itself.
            if let Some(key) = message
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
            {
                path = if path == "." { key.to_string() } else { format!("{path}.{key}") };
            }
            GullyError::config(path, message)
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical (sorted-key) JSON rendering.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("scenario serializes");
        let canonical = serde_json::to_string(&value).expect("json value serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl CurveParams {
    fn require<T: Clone>(field: &Option<T>, name: &str) -> Result<T> {
        field
            .clone()
            .ok_or_else(|| GullyError::config(format!("curve.params.{name}"), "missing field"))
    }

    fn present(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        macro_rules! check {
            ($($f:ident),*) => {$(if self.$f.is_some() { names.push(stringify!($f)); })*};
        }
        check!(start, end, center, radius, start_angle, span, x_start, x_end, amplitude, wavenumber, points);
        names
    }

    fn to_shape(&self, kind: CurveKind) -> Result<CurveShape> {
        let allowed: &[&str] = match kind {
            CurveKind::Segment => &["start", "end"],
            CurveKind::CircularArc => &["center", "radius", "start_angle", "span"],
            CurveKind::SinePerturbed => &["x_start", "x_end", "amplitude", "wavenumber"],
            CurveKind::CubicSpline => &["points"],
        };
        if let Some(extra) = self.present().into_iter().find(|n| !allowed.contains(n)) {
            return Err(GullyError::config(
                format!("curve.params.{extra}"),
                format!("not a parameter of curve kind {kind:?}"),
            ));
        }
        Ok(match kind {
            CurveKind::Segment => CurveShape::Segment {
                start: Self::require(&self.start, "start")?,
                end: Self::require(&self.end, "end")?,
            },
            CurveKind::CircularArc => CurveShape::CircularArc {
                center: Self::require(&self.center, "center")?,
                radius: Self::require(&self.radius, "radius")?,
                start_angle: Self::require(&self.start_angle, "start_angle")?,
                span: Self::require(&self.span, "span")?,
            },
            CurveKind::SinePerturbed => CurveShape::SinePerturbed {
                x_start: Self::require(&self.x_start, "x_start")?,
                x_end: Self::require(&self.x_end, "x_end")?,
                amplitude: Self::require(&self.amplitude, "amplitude")?,
                wavenumber: Self::require(&self.wavenumber, "wavenumber")?,
            },
            CurveKind::CubicSpline => CurveShape::CubicSpline {
                points: Self::require(&self.points, "points")?,
            },
        })
    }

    fn from_shape(shape: &CurveShape) -> Self {
        let mut p = Self::default();
        match shape.clone() {
            CurveShape::Segment { start, end } => {
                p.start = Some(start);
                p.end = Some(end);
            }
            CurveShape::CircularArc {
                center,
                radius,
                start_angle,
                span,
            } => {
                p.center = Some(center);
                p.radius = Some(radius);
                p.start_angle = Some(start_angle);
                p.span = Some(span);
            }
            CurveShape::SinePerturbed {
                x_start,
                x_end,
                amplitude,
                wavenumber,
            } => {
                p.x_start = Some(x_start);
                p.x_end = Some(x_end);
                p.amplitude = Some(amplitude);
                p.wavenumber = Some(wavenumber);
            }
            CurveShape::CubicSpline { points } => p.points = Some(points),
        }
        p
    }
}

// ---------------------------------------------------------------------------
// Validated scenario

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub n_sigma: usize,
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub theta_scheme: f64,
    pub output_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub lambda: f64,
    pub alpha: f64,
    pub pair_budget: usize,
    pub seed: u64,
    pub delta_levels: usize,
    pub window_margin: f64,
    pub t0_fraction: f64,
}

/// A fully checked problem: axis, widths, data and discretization controls.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub curve_spec: CurveSpec,
    /// Reference half-width.
    pub reference_width: f64,
    /// Strictly decreasing half-widths.
    pub epsilons: Vec<f64>,
    pub final_time: f64,
    pub kernel: KernelSpec,
    pub reaction: ReactionSpec,
    pub boundary: BoundaryData,
    pub numerics: Numerics,
    /// Transverse node count for each width.
    pub n_s: Vec<usize>,
    pub analysis: AnalysisParams,
    curve: Arc<Curve>,
    l0: f64,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_file(&ScenarioFile::from_toml_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let shape = file.curve.params.to_shape(file.curve.kind)?;
        let curve_spec = CurveSpec::new(shape, file.curve.orientation);
        let n_s = match &file.numerics.n_s {
            TransverseNodes::Uniform(n) => vec![*n; file.domain.epsilon_list.len()],
            TransverseNodes::PerWidth(v) => {
                if v.len() != file.domain.epsilon_list.len() {
                    return Err(GullyError::config(
                        "numerics.n_s",
                        format!("{} entries for {} widths", v.len(), file.domain.epsilon_list.len()),
                    ));
                }
                v.clone()
            }
        };
        let n = &file.numerics;
        let a = &file.analysis;
        Self::new(
            curve_spec,
            file.domain.l,
            file.domain.epsilon_list.clone(),
            file.domain.t,
            KernelSpec {
                amplitude: file.kernel.a,
                range: file.kernel.r,
                shape: file.kernel.shape,
                bound: file.kernel.c_l,
            },
            ReactionSpec {
                c_psi: file.reaction.c_psi,
                cap: file.reaction.m,
            },
            BoundaryData {
                inlet: file.boundary.inlet,
                outlet: file.boundary.outlet,
                initial: file.boundary.initial,
                threshold: file.boundary.theta,
            },
            Numerics {
                n_sigma: n.n_sigma,
                dt: n.dt,
                picard_tol: n.picard_tol,
                picard_max: n.picard_max,
                theta_scheme: n.theta_scheme,
                output_every: n.output_every,
            },
            n_s,
            AnalysisParams {
                lambda: a.lambda,
                alpha: a.alpha,
                pair_budget: a.pair_budget,
                seed: a.seed,
                delta_levels: a.delta_levels,
                window_margin: a.window_margin,
                t0_fraction: a.t0_fraction,
            },
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        curve_spec: CurveSpec,
        reference_width: f64,
        epsilons: Vec<f64>,
        final_time: f64,
        kernel: KernelSpec,
        reaction: ReactionSpec,
        boundary: BoundaryData,
        numerics: Numerics,
        n_s: Vec<usize>,
        analysis: AnalysisParams,
    ) -> Result<Self> {
        let curve = Arc::new(Curve::new(curve_spec.clone()).map_err(|e| GullyError::config("curve", e.to_string()))?);
        let l0 = curve.min_curvature_radius();
        let scenario = Self {
            curve_spec,
            reference_width,
            epsilons,
            final_time,
            kernel,
            reaction,
            boundary,
            numerics,
            n_s,
            analysis,
            curve,
            l0,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<()> {
        let cfg = |path: &str, msg: String| Err(GullyError::config(path, msg));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;

        if !finite_pos(self.reference_width) {
            return cfg("domain.L", format!("must be positive, got {}", self.reference_width));
        }
        if !(self.reference_width < self.l0) {
            return cfg(
                "domain.L",
                format!("{} must be below the minimum curvature radius {}", self.reference_width, self.l0),
            );
        }
        if self.epsilons.is_empty() {
            return cfg("domain.epsilon_list", "must not be empty".into());
        }
        for (k, &eps) in self.epsilons.iter().enumerate() {
            let path = format!("domain.epsilon_list[{k}]");
            if !finite_pos(eps) || !(eps < self.reference_width) {
                return cfg(&path, format!("{eps} must lie in (0, L = {})", self.reference_width));
            }
            if k > 0 && !(eps < self.epsilons[k - 1]) {
                return cfg(&path, "widths must be strictly decreasing".into());
            }
        }
        if !(self.final_time >= 0.0) || !self.final_time.is_finite() {
            return cfg("domain.T", format!("must be nonnegative, got {}", self.final_time));
        }

        let k = &self.kernel;
        if !(k.amplitude >= 0.0) || !k.amplitude.is_finite() {
            return cfg("kernel.A", format!("must be nonnegative, got {}", k.amplitude));
        }
        if !finite_pos(k.range) {
            return cfg("kernel.r", format!("must be positive, got {}", k.range));
        }
        if !finite_pos(k.bound) {
            return cfg("kernel.C_L", format!("must be positive, got {}", k.bound));
        }
        if !(self.reaction.c_psi >= 0.0) || !self.reaction.c_psi.is_finite() {
            return cfg("reaction.c_psi", format!("must be nonnegative, got {}", self.reaction.c_psi));
        }
        if !finite_pos(self.reaction.cap) {
            return cfg("reaction.M", format!("must be positive, got {}", self.reaction.cap));
        }

        let b = &self.boundary;
        if !b.threshold.is_finite() {
            return cfg("boundary.theta", "must be finite".into());
        }
        for (name, profile) in [("boundary.inlet", &b.inlet), ("boundary.outlet", &b.outlet)] {
            match *profile {
                TimeProfile::Ramp { duration, .. } if !(duration > 0.0) => {
                    return cfg(&format!("{name}.duration"), format!("must be positive, got {duration}"));
                }
                TimeProfile::Sinusoid { period, .. } if !finite_pos(period) => {
                    return cfg(&format!("{name}.period"), format!("must be positive, got {period}"));
                }
                _ => {}
            }
        }
        if let InitialProfile::GaussianBump { width, .. } = b.initial {
            if !finite_pos(width) {
                return cfg("boundary.initial.width", format!("must be positive, got {width}"));
            }
        }
        let len = self.curve.length();
        let horizon = self.final_time.max(1.0);
        if !b.max_abs_up_to(horizon, len, &[]).is_finite() {
            return cfg("boundary", "data must be bounded".into());
        }

        let n = &self.numerics;
        if n.n_sigma < 3 {
            return cfg("numerics.n_sigma", format!("need at least 3 nodes, got {}", n.n_sigma));
        }
        for (k, &ns) in self.n_s.iter().enumerate() {
            if ns < 3 || ns % 2 == 0 {
                return cfg("numerics.n_s", format!("entry {k} must be odd and at least 3, got {ns}"));
            }
        }
        if !finite_pos(n.dt) {
            return cfg("numerics.dt", format!("must be positive, got {}", n.dt));
        }
        if self.final_time > 0.0 && n.dt > self.final_time {
            return cfg("numerics.dt", format!("{} exceeds the final time {}", n.dt, self.final_time));
        }
        let ratio = self.final_time / n.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return cfg("numerics.dt", format!("{} does not divide the final time {}", n.dt, self.final_time));
        }
        if !finite_pos(n.picard_tol) {
            return cfg("numerics.picard_tol", format!("must be positive, got {}", n.picard_tol));
        }
        if n.picard_max < 1 {
            return cfg("numerics.picard_max", "must be at least 1".into());
        }
        if !(0.5..=1.0).contains(&n.theta_scheme) {
            return cfg("numerics.theta_scheme", format!("must lie in [0.5, 1], got {}", n.theta_scheme));
        }
        if n.output_every < 1 {
            return cfg("numerics.output_every", "must be at least 1".into());
        }
        let limit = self.picard_dt_limit();
        if n.dt > limit {
            return cfg(
                "numerics.dt",
                format!("{} exceeds the fixed-point step limit {limit:.6e}", n.dt),
            );
        }

        let a = &self.analysis;
        for (path, v) in [("analysis.lambda", a.lambda), ("analysis.alpha", a.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return cfg(path, format!("must lie in (0, 1), got {v}"));
            }
        }
        if a.pair_budget < 1 {
            return cfg("analysis.pair_budget", "must be at least 1".into());
        }
        if a.delta_levels < 1 {
            return cfg("analysis.delta_levels", "must be at least 1".into());
        }
        if !(a.window_margin >= 0.0 && a.window_margin < 0.5) {
            return cfg("analysis.window_margin", format!("must lie in [0, 0.5), got {}", a.window_margin));
        }
        if !(a.t0_fraction >= 0.0 && a.t0_fraction < 1.0) {
            return cfg("analysis.t0_fraction", format!("must lie in [0, 1), got {}", a.t0_fraction));
        }
        Ok(())
    }

    /// Largest step for which the per-step fixed-point map contracts on the
    /// finest lattice: `1 / (2 (C_L + C_psi / h))`.
    pub fn picard_dt_limit(&self) -> f64 {
        let h = self.finest_spacing();
        let rate = self.kernel.bound + self.reaction.lipschitz() / h;
        1.0 / (2.0 * rate)
    }

    fn finest_spacing(&self) -> f64 {
        let h_sigma = self.curve.length() / (self.numerics.n_sigma - 1) as f64;
        self.epsilons
            .iter()
            .zip(&self.n_s)
            .map(|(&eps, &ns)| 2.0 * eps / (ns - 1) as f64)
            .fold(h_sigma, f64::min)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn shared_curve(&self) -> Arc<Curve> {
        Arc::clone(&self.curve)
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn total_length(&self) -> f64 {
        self.curve.length()
    }

    pub fn epsilon(&self, index: usize) -> Result<f64> {
        self.epsilons.get(index).copied().ok_or_else(|| {
            GullyError::config(
                "epsilon_index",
                format!("index {index} out of range for {} widths", self.epsilons.len()),
            )
        })
    }

    pub fn chart(&self, index: usize) -> Result<Arc<FermiChart>> {
        let eps = self.epsilon(index)?;
        Ok(Arc::new(FermiChart::with_l0(self.shared_curve(), eps, self.l0)?))
    }

    pub fn grid(&self, index: usize) -> Result<GullyGrid> {
        GullyGrid::build(self.chart(index)?, self.numerics.n_sigma, self.n_s[index])
    }

    pub fn reduced_grid(&self) -> Result<ReducedGrid> {
        ReducedGrid::new(self.total_length(), self.numerics.n_sigma)
    }

    /// Same problem with the threshold moved to zero and all data moved by `-theta`.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.boundary = self.boundary.shifted(-self.boundary.threshold);
        out.boundary.threshold = 0.0;
        out
    }

    /// Number of time steps to reach the final time.
    pub fn step_count(&self) -> usize {
        (self.final_time / self.numerics.dt).round() as usize
    }

    pub fn to_file(&self) -> ScenarioFile {
        let n_s = if self.n_s.iter().all(|&v| v == self.n_s[0]) {
            TransverseNodes::Uniform(self.n_s[0])
        } else {
            TransverseNodes::PerWidth(self.n_s.clone())
        };
        ScenarioFile {
            curve: CurveSection {
                kind: self.curve_spec.kind(),
                params: CurveParams::from_shape(&self.curve_spec.shape),
                orientation: self.curve_spec.orientation,
            },
            domain: DomainSection {
                l: self.reference_width,
                epsilon_list: self.epsilons.clone(),
                t: self.final_time,
            },
            kernel: KernelSection {
                shape: self.kernel.shape,
                a: self.kernel.amplitude,
                r: self.kernel.range,
                c_l: self.kernel.bound,
            },
            reaction: ReactionSection {
                c_psi: self.reaction.c_psi,
                m: self.reaction.cap,
            },
            boundary: BoundarySection {
                theta: self.boundary.threshold,
                inlet: self.boundary.inlet,
                outlet: self.boundary.outlet,
                initial: self.boundary.initial,
            },
            numerics: NumericsSection {
                n_sigma: self.numerics.n_sigma,
                n_s,
                dt: self.numerics.dt,
                picard_tol: self.numerics.picard_tol,
                picard_max: self.numerics.picard_max,
                theta_scheme: self.numerics.theta_scheme,
                output_every: self.numerics.output_every,
            },
            analysis: AnalysisSection {
                lambda: self.analysis.lambda,
                alpha: self.analysis.alpha,
                pair_budget: self.analysis.pair_budget,
                seed: self.analysis.seed,
                delta_levels: self.analysis.delta_levels,
                window_margin: self.analysis.window_margin,
                t0_fraction: self.analysis.t0_fraction,
            },
        }
    }

    pub fn digest(&self) -> String {
        self.to_file().digest()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[curve]
kind = "circular_arc"
orientation = "positive"
params = { center = [0.0, 0.0], radius = 1.0, start_angle = 0.0, span = 1.5707963267948966 }

[domain]
L = 0.2
epsilon_list = [0.08, 0.04, 0.02]
T = 0.1

[kernel]
shape = "gaussian"
A = 0.5
r = 0.1
C_L = 1.0

[reaction]
c_psi = 0.1
M = 10.0

[boundary]
theta = 0.0
inlet = { kind = "constant", value = 0.0 }
outlet = { kind = "constant", value = 0.0 }
initial = { kind = "gaussian_bump", base = 0.0, amplitude = 1.0, center = 0.5, width = 0.15 }

[numerics]
n_sigma = 41
n_s = 5
dt = 1e-3
"#;

    fn config_path(text: &str) -> String {
        match Scenario::from_toml_str(text) {
            Err(GullyError::Config { path, .. }) => path,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_defaults_numerics() {
        let s = Scenario::from_toml_str(BASE).unwrap();
        assert_eq!(s.epsilons, vec![0.08, 0.04, 0.02]);
        assert_eq!(s.numerics.picard_max, 50);
        assert_eq!(s.numerics.theta_scheme, 1.0);
        assert_eq!(s.n_s, vec![5, 5, 5]);
        assert!((s.total_length() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert_eq!(s.step_count(), 100);
    }

    #[test]
    fn unknown_and_missing_keys_are_path_qualified() {
        assert_eq!(config_path(&BASE.replace("C_L = 1.0", "C_L = 1.0\nbogus = 3")), "kernel.bogus");
        assert_eq!(config_path(&BASE.replace("c_psi = 0.1\n", "")), "reaction.c_psi");
        assert_eq!(config_path(&BASE.replace("radius = 1.0, ", "")), "curve.params.radius");
        assert_eq!(
            config_path(&BASE.replace("radius = 1.0,", "radius = 1.0, wavenumber = 2.0,")),
            "curve.params.wavenumber"
        );
        assert_eq!(config_path(&BASE.replace("A = 0.5", "A = \"x\"")), "kernel.A");
    }

    #[test]
    fn invariants_are_enforced() {
        assert_eq!(
            config_path(&BASE.replace("[0.08, 0.04, 0.02]", "[0.04, 0.08]")),
            "domain.epsilon_list[1]"
        );
        assert_eq!(
            config_path(&BASE.replace("[0.08, 0.04, 0.02]", "[0.3, 0.04]")),
            "domain.epsilon_list[0]"
        );
        assert_eq!(config_path(&BASE.replace("L = 0.2", "L = 1.5")), "domain.L");
        assert_eq!(config_path(&BASE.replace("dt = 1e-3", "dt = 0.5")), "numerics.dt");
        assert_eq!(
            config_path(&BASE.replace("n_s = 5", "n_s = 5\ntheta_scheme = 0.2")),
            "numerics.theta_scheme"
        );
    }

    #[test]
    fn step_limit_guards_the_fixed_point_iteration() {
        let text = BASE.replace("c_psi = 0.1", "c_psi = 5.0").replace("n_s = 5", "n_s = 41");
        assert_eq!(config_path(&text), "numerics.dt");
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = Scenario::from_toml_str(BASE).unwrap();
        let reordered = BASE.replace(
            "shape = \"gaussian\"\nA = 0.5\nr = 0.1\nC_L = 1.0",
            "C_L = 1.0\nr = 0.1\nA = 0.5\nshape = \"gaussian\"",
        );
        let b = Scenario::from_toml_str(&reordered).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = Scenario::from_toml_str(&BASE.replace("A = 0.5", "A = 0.4")).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn round_trip_through_toml() {
        let a = Scenario::from_toml_str(BASE).unwrap();
        let text = a.to_file().to_toml_string();
        let b = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(a.to_file(), b.to_file());
    }

    #[test]
    fn normalization_moves_threshold_to_zero() {
        let s = Scenario::from_toml_str(&BASE.replace("theta = 0.0", "theta = 0.25")).unwrap();
        let n = s.normalized();
        assert_eq!(n.boundary.threshold, 0.0);
        assert!((n.boundary.initial_value(0.0, 1.0) - (s.boundary.initial_value(0.0, 1.0) - 0.25)).abs() < 1e-15);
    }
}

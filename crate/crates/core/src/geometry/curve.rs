//! Planar axis curves parametrized by arclength.
//!
//! Segment and circular arc are handled in closed form. The sine graph and
//! the cubic spline go through a cumulative Gauss-Legendre arclength table;
//! `sigma -> t` is inverted with a monotone cubic guess polished by Newton.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::{rot90, Vec2};
use crate::error::{GullyError, Result};

/// Gauss-Legendre nodes per arclength table interval.
const GL_NODES: usize = 64;
/// Table intervals for the sine graph.
const SINE_INTERVALS: usize = 256;
/// Table intervals per spline knot span.
const SPLINE_SUBDIVISIONS: usize = 16;
/// Relative tolerance of the `sigma -> t` inversion.
const ARCLENGTH_TOL: f64 = 1e-13;

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_NODES).unwrap()))
}

/// Sign selecting which side of the tangent the unit normal points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Normal = tangent rotated 90 degrees counterclockwise.
    Positive,
    /// Normal = tangent rotated 90 degrees clockwise.
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Option<Self> {
        if sign == 1.0 {
            Some(Orientation::Positive)
        } else if sign == -1.0 {
            Some(Orientation::Negative)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Segment,
    CircularArc,
    SinePerturbed,
    CubicSpline,
}

/// Shape parameters of an axis curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Segment {
        start: [f64; 2],
        end: [f64; 2],
    },
    /// `span` is signed: positive runs counterclockwise.
    CircularArc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        span: f64,
    },
    /// Graph `y = amplitude * sin(wavenumber * x)` for `x` in `[x_start, x_end]`.
    SinePerturbed {
        x_start: f64,
        x_end: f64,
        amplitude: f64,
        wavenumber: f64,
    },
    /// Natural cubic spline through the control points, chord-length parametrized.
    CubicSpline { points: Vec<[f64; 2]> },
}

/// Gully axis description: shape plus normal orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub shape: CurveShape,
    pub orientation: Orientation,
}

impl CurveSpec {
    pub fn new(shape: CurveShape, orientation: Orientation) -> Self {
        Self { shape, orientation }
    }

    pub fn kind(&self) -> CurveKind {
        match self.shape {
            CurveShape::Segment { .. } => CurveKind::Segment,
            CurveShape::CircularArc { .. } => CurveKind::CircularArc,
            CurveShape::SinePerturbed { .. } => CurveKind::SinePerturbed,
            CurveShape::CubicSpline { .. } => CurveKind::CubicSpline,
        }
    }

    pub fn segment(start: [f64; 2], end: [f64; 2]) -> Self {
        Self::new(CurveShape::Segment { start, end }, Orientation::Positive)
    }

    /// Counterclockwise arc starting at angle `start_angle`, positive orientation
    /// (normal points towards the center).
    pub fn circular_arc(center: [f64; 2], radius: f64, start_angle: f64, span: f64) -> Self {
        Self::new(
            CurveShape::CircularArc {
                center,
                radius,
                start_angle,
                span,
            },
            Orientation::Positive,
        )
    }

    pub fn sine_perturbed(x_start: f64, x_end: f64, amplitude: f64, wavenumber: f64) -> Self {
        Self::new(
            CurveShape::SinePerturbed {
                x_start,
                x_end,
                amplitude,
                wavenumber,
            },
            Orientation::Positive,
        )
    }

    pub fn cubic_spline(points: Vec<[f64; 2]>) -> Self {
        Self::new(CurveShape::CubicSpline { points }, Orientation::Positive)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }
}

/// Moving frame of the axis at one arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    /// Signed curvature with `dT/dsigma = curvature * normal`.
    pub curvature: f64,
}

/// Position and first two derivatives in the curve's native parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamDerivatives {
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl ParamDerivatives {
    /// Curvature signed against the counterclockwise normal.
    fn ccw_curvature(&self) -> f64 {
        let speed = self.d1.norm();
        (self.d1.x * self.d2.y - self.d1.y * self.d2.x) / (speed * speed * speed)
    }
}

#[derive(Debug, Clone)]
struct NaturalSpline {
    knots: Vec<f64>,
    points: Vec<Vec2>,
    /// Second derivatives at the knots; zero at both ends.
    moments: Vec<Vec2>,
}

impl NaturalSpline {
    fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 4 {
            return Err(GullyError::Construction(format!(
                "cubic spline needs at least 4 control points, got {}",
                points.len()
            )));
        }
        let pts: Vec<Vec2> = points.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let mut knots = Vec::with_capacity(pts.len());
        knots.push(0.0);
        for w in pts.windows(2) {
            let chord = (w[1] - w[0]).norm();
            if !(chord > 0.0) {
                return Err(GullyError::Construction(
                    "cubic spline control points must be distinct".into(),
                ));
            }
            knots.push(knots.last().unwrap() + chord);
        }
        let n = pts.len() - 1;
        // Tridiagonal system for the interior moments (Thomas algorithm).
        let mut moments = vec![Vec2::zeros(); n + 1];
        if n >= 2 {
            let m = n - 1;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![Vec2::zeros(); m];
            for k in 0..m {
                let i = k + 1;
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[k] = 2.0 * (h0 + h1);
                upper[k] = h1;
                rhs[k] = 6.0 * ((pts[i + 1] - pts[i]) / h1 - (pts[i] - pts[i - 1]) / h0);
            }
            for k in 1..m {
                let lower = knots[k + 1] - knots[k];
                let factor = lower / diag[k - 1];
                diag[k] -= factor * upper[k - 1];
                let prev = rhs[k - 1];
                rhs[k] -= factor * prev;
            }
            let mut sol = vec![Vec2::zeros(); m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for k in (0..m - 1).rev() {
                sol[k] = (rhs[k] - upper[k] * sol[k + 1]) / diag[k];
            }
            moments[1..n].copy_from_slice(&sol);
        }
        Ok(Self {
            knots,
            points: pts,
            moments,
        })
    }

    fn span(&self) -> (f64, f64) {
        (0.0, *self.knots.last().unwrap())
    }

    fn segment_of(&self, t: f64) -> usize {
        let n = self.knots.len() - 1;
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    fn eval(&self, t: f64) -> ParamDerivatives {
        let i = self.segment_of(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let point = a * p0
            + b * p1
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
        let d1 = (p1 - p0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * (h / 6.0);
        let d2 = a * m0 + b * m1;
        ParamDerivatives { point, d1, d2 }
    }

    /// Parameter values of the knots.
    fn knots(&self) -> &[f64] {
        &self.knots
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Segment {
        start: Vec2,
        direction: Vec2,
    },
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        /// +1 counterclockwise, -1 clockwise.
        turn: f64,
    },
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    Spline(NaturalSpline),
}

/// Cumulative arclength table in the native parameter.
#[derive(Debug, Clone)]
struct ArclengthTable {
    params: Vec<f64>,
    arclengths: Vec<f64>,
    /// `dt/dsigma` at the table nodes.
    slopes: Vec<f64>,
}

/// A validated axis curve with its arclength parametrization.
#[derive(Debug, Clone)]
pub struct Curve {
    spec: CurveSpec,
    shape: Shape,
    sign: f64,
    length: f64,
    param_range: (f64, f64),
    table: Option<ArclengthTable>,
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        let sign = spec.orientation.sign();
        let (shape, param_range) = match &spec.shape {
            CurveShape::Segment { start, end } => {
                let a = Vec2::new(start[0], start[1]);
                let b = Vec2::new(end[0], end[1]);
                let length = (b - a).norm();
                if !(length > 0.0) || !length.is_finite() {
                    return Err(GullyError::Construction(
                        "segment endpoints must be distinct and finite".into(),
                    ));
                }
                (
                    Shape::Segment {
                        start: a,
                        direction: (b - a) / length,
                    },
                    (0.0, length),
                )
            }
            CurveShape::CircularArc {
                center,
                radius,
                start_angle,
                span,
            } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(GullyError::Construction("arc radius must be positive".into()));
                }
                if !(span.abs() > 0.0) || span.abs() >= 2.0 * PI {
                    return Err(GullyError::Construction(
                        "arc span must be nonzero and below a full turn".into(),
                    ));
                }
                let length = radius * span.abs();
                (
                    Shape::Arc {
                        center: Vec2::new(center[0], center[1]),
                        radius: *radius,
                        start_angle: *start_angle,
                        turn: span.signum(),
                    },
                    (0.0, length),
                )
            }
            CurveShape::SinePerturbed {
                x_start,
                x_end,
                amplitude,
                wavenumber,
            } => {
                if !(x_end > x_start) {
                    return Err(GullyError::Construction(
                        "sine curve needs x_end > x_start".into(),
                    ));
                }
                if !amplitude.is_finite() || !wavenumber.is_finite() {
                    return Err(GullyError::Construction("sine parameters must be finite".into()));
                }
                (
                    Shape::Sine {
                        amplitude: *amplitude,
                        wavenumber: *wavenumber,
                    },
                    (*x_start, *x_end),
                )
            }
            CurveShape::CubicSpline { points } => {
                let spline = NaturalSpline::new(points)?;
                let range = spline.span();
                (Shape::Spline(spline), range)
            }
        };
        let mut curve = Curve {
            spec,
            shape,
            sign,
            length: 0.0,
            param_range,
            table: None,
        };
        match curve.shape {
            Shape::Segment { .. } | Shape::Arc { .. } => curve.length = param_range.1,
            _ => {
                let table = curve.build_table()?;
                curve.length = *table.arclengths.last().unwrap();
                curve.table = Some(table);
            }
        }
        Ok(curve)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    /// Total arclength.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn orientation_sign(&self) -> f64 {
        self.sign
    }

    fn param_derivatives(&self, t: f64) -> ParamDerivatives {
        match &self.shape {
            Shape::Segment { start, direction } => ParamDerivatives {
                point: start + t * direction,
                d1: *direction,
                d2: Vec2::zeros(),
            },
            Shape::Arc {
                center,
                radius,
                start_angle,
                turn,
            } => {
                let theta = start_angle + turn * t / radius;
                let (sin, cos) = theta.sin_cos();
                ParamDerivatives {
                    point: center + *radius * Vec2::new(cos, sin),
                    d1: *turn * Vec2::new(-sin, cos),
                    d2: -Vec2::new(cos, sin) / *radius,
                }
            }
            Shape::Sine {
                amplitude,
                wavenumber,
            } => {
                let (sin, cos) = (wavenumber * t).sin_cos();
                ParamDerivatives {
                    point: Vec2::new(t, amplitude * sin),
                    d1: Vec2::new(1.0, amplitude * wavenumber * cos),
                    d2: Vec2::new(0.0, -amplitude * wavenumber * wavenumber * sin),
                }
            }
            Shape::Spline(spline) => spline.eval(t),
        }
    }

    fn speed(&self, t: f64) -> f64 {
        self.param_derivatives(t).d1.norm()
    }

    fn build_table(&self) -> Result<ArclengthTable> {
        let breaks: Vec<f64> = match &self.shape {
            Shape::Sine { .. } => {
                let (a, b) = self.param_range;
                (0..=SINE_INTERVALS)
                    .map(|k| a + (b - a) * k as f64 / SINE_INTERVALS as f64)
                    .collect()
            }
            Shape::Spline(spline) => {
                let knots = spline.knots();
                let mut out = Vec::with_capacity((knots.len() - 1) * SPLINE_SUBDIVISIONS + 1);
                for w in knots.windows(2) {
                    for k in 0..SPLINE_SUBDIVISIONS {
                        out.push(w[0] + (w[1] - w[0]) * k as f64 / SPLINE_SUBDIVISIONS as f64);
                    }
                }
                out.push(*knots.last().unwrap());
                out
            }
            _ => unreachable!("closed-form shapes have no table"),
        };
        let rule = gauss_legendre();
        let scale = (self.param_range.1 - self.param_range.0).abs();
        let mut arclengths = Vec::with_capacity(breaks.len());
        let mut slopes = Vec::with_capacity(breaks.len());
        arclengths.push(0.0);
        for (k, &t) in breaks.iter().enumerate() {
            let speed = self.speed(t);
            if !(speed > 1e-12 * scale.max(1.0)) || !speed.is_finite() {
                return Err(GullyError::Construction(format!(
                    "parametrization is not regular near t = {t}"
                )));
            }
            slopes.push(1.0 / speed);
            if k + 1 < breaks.len() {
                let mid = 0.5 * (t + breaks[k + 1]);
                if !(self.speed(mid) > 1e-12 * scale.max(1.0)) {
                    return Err(GullyError::Construction(format!(
                        "parametrization is not regular near t = {mid}"
                    )));
                }
                let piece = rule.integrate(t, breaks[k + 1], |x| self.speed(x));
                arclengths.push(arclengths[k] + piece);
            }
        }
        Ok(ArclengthTable {
            params: breaks,
            arclengths,
            slopes,
        })
    }

    fn check_sigma(&self, sigma: f64) -> Result<f64> {
        let slack = 1e-12 * self.length;
        if !sigma.is_finite() || sigma < -slack || sigma > self.length + slack {
            return Err(GullyError::Domain(format!(
                "arclength {sigma} outside [0, {}]",
                self.length
            )));
        }
        Ok(sigma.clamp(0.0, self.length))
    }

    /// Native parameter at arclength `sigma` (already range-checked).
    fn param_at(&self, sigma: f64) -> f64 {
        let Some(table) = &self.table else {
            return sigma;
        };
        let arcs = &table.arclengths;
        let last = arcs.len() - 2;
        let k = match arcs.binary_search_by(|a| a.partial_cmp(&sigma).unwrap()) {
            Ok(i) => return table.params[i],
            Err(i) => i.saturating_sub(1).min(last),
        };
        let (s0, s1) = (arcs[k], arcs[k + 1]);
        let (t0, t1) = (table.params[k], table.params[k + 1]);
        let guess = monotone_hermite(
            sigma,
            (s0, s1),
            (t0, t1),
            (table.slopes[k], table.slopes[k + 1]),
        );
        let rule = gauss_legendre();
        let mut t = guess.clamp(t0, t1);
        let tol = ARCLENGTH_TOL * self.length.max(1.0);
        for _ in 0..20 {
            let residual = s0 + rule.integrate(t0, t, |x| self.speed(x)) - sigma;
            if residual.abs() <= tol {
                break;
            }
            t = (t - residual / self.speed(t)).clamp(t0, t1);
        }
        t
    }

    /// Frame at arclength `sigma`.
    pub fn frame(&self, sigma: f64) -> Result<Frame> {
        let sigma = self.check_sigma(sigma)?;
        Ok(self.frame_unchecked(sigma))
    }

    pub(crate) fn frame_unchecked(&self, sigma: f64) -> Frame {
        let d = self.param_derivatives(self.param_at(sigma));
        self.frame_from(&d)
    }

    fn frame_from(&self, d: &ParamDerivatives) -> Frame {
        let tangent = d.d1.normalize();
        Frame {
            point: d.point,
            tangent,
            normal: self.sign * rot90(tangent),
            curvature: self.sign * d.ccw_curvature(),
        }
    }

    /// Native-parameter derivatives at arclength `sigma`.
    pub fn derivatives(&self, sigma: f64) -> Result<ParamDerivatives> {
        let sigma = self.check_sigma(sigma)?;
        Ok(self.param_derivatives(self.param_at(sigma)))
    }

    /// Signed curvature at arclength `sigma`.
    pub fn curvature(&self, sigma: f64) -> Result<f64> {
        Ok(self.frame(sigma)?.curvature)
    }

    /// Smallest curvature radius; `f64::INFINITY` for a straight axis.
    pub fn min_curvature_radius(&self) -> f64 {
        match &self.shape {
            Shape::Segment { .. } => f64::INFINITY,
            Shape::Arc { radius, .. } => *radius,
            _ => {
                let max_kappa = self.max_abs_curvature();
                if max_kappa > 0.0 {
                    1.0 / max_kappa
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Dense sample in the native parameter, then golden-section polish
    /// around every sampled local maximum of |kappa|.
    fn max_abs_curvature(&self) -> f64 {
        const SAMPLES: usize = 4096;
        let (a, b) = self.param_range;
        let abs_kappa = |t: f64| self.param_derivatives(t).ccw_curvature().abs();
        let ts: Vec<f64> = (0..=SAMPLES)
            .map(|k| a + (b - a) * k as f64 / SAMPLES as f64)
            .collect();
        let ks: Vec<f64> = ts.iter().map(|&t| abs_kappa(t)).collect();
        let mut best = ks.iter().cloned().fold(0.0, f64::max);
        for k in 0..=SAMPLES {
            let left = if k > 0 { ks[k - 1] } else { f64::NEG_INFINITY };
            let right = if k < SAMPLES { ks[k + 1] } else { f64::NEG_INFINITY };
            if ks[k] >= left && ks[k] >= right && ks[k] > 0.0 {
                let lo = ts[k.saturating_sub(1)];
                let hi = ts[(k + 1).min(SAMPLES)];
                best = best.max(golden_max(abs_kappa, lo, hi, 1e-13 * (b - a)));
            }
        }
        best
    }
}

/// Maximize a unimodal function on `[lo, hi]`; returns the best value seen.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f(lo).max(f(hi)).max(f1).max(f2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
            best = best.max(f2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
            best = best.max(f1);
        }
    }
    best
}

/// Fritsch-Carlson limited cubic Hermite on one interval.
fn monotone_hermite(x: f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64), (m0, m1): (f64, f64)) -> f64 {
    let h = x1 - x0;
    let secant = (y1 - y0) / h;
    let (mut m0, mut m1) = (m0, m1);
    if secant == 0.0 {
        m0 = 0.0;
        m1 = 0.0;
    } else {
        let a = m0 / secant;
        let b = m1 / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m0 = tau * a * secant;
            m1 = tau * b * secant;
        }
    }
    let u = (x - x0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * h * m1
}

use std::sync::Arc;

use super::{rot90, Curve, Vec2};
use crate::error::{GullyError, Result};

const COARSE_LATTICE: usize = 512;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Arclength along the axis and signed normal offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiCoords {
    pub sigma: f64,
    pub s: f64,
}

/// The map `(sigma, s) -> gamma(sigma) + s * normal(sigma)` on the tube of half-width `epsilon`.
#[derive(Debug, Clone)]
pub struct FermiChart {
    curve: Arc<Curve>,
    epsilon: f64,
    l0: f64,
    lattice: Vec<(f64, Vec2)>,
}

impl FermiChart {
    /// Fails unless `0 < epsilon < L0`, which is what makes the chart injective.
    pub fn new(curve: Arc<Curve>, epsilon: f64) -> Result<Self> {
        let l0 = curve.min_curvature_radius();
        Self::with_l0(curve, epsilon, l0)
    }

    /// Same as [`FermiChart::new`] with a precomputed minimum curvature radius.
    pub fn with_l0(curve: Arc<Curve>, epsilon: f64, l0: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(GullyError::Domain(format!("tube half-width {epsilon} must be positive")));
        }
        if !(epsilon < l0) {
            return Err(GullyError::Domain(format!(
                "tube half-width {epsilon} must be below the minimum curvature radius {l0}"
            )));
        }
        let len = curve.length();
        let lattice = (0..=COARSE_LATTICE)
            .map(|k| {
                let sigma = len * k as f64 / COARSE_LATTICE as f64;
                (sigma, curve.frame_unchecked(sigma).point)
            })
            .collect();
        Ok(Self {
            curve,
            epsilon,
            l0,
            lattice,
        })
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn shared_curve(&self) -> Arc<Curve> {
        Arc::clone(&self.curve)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn total_length(&self) -> f64 {
        self.curve.length()
    }

    /// Minimum curvature radius of the axis (may be infinite).
    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// Same axis, different half-width.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::with_l0(Arc::clone(&self.curve), epsilon, self.l0)
    }

    fn check_offset(&self, s: f64) -> Result<()> {
        if !s.is_finite() || s.abs() > self.epsilon * (1.0 + 1e-12) {
            return Err(GullyError::Domain(format!(
                "offset {s} outside [-{e}, {e}]",
                e = self.epsilon
            )));
        }
        Ok(())
    }

    pub fn forward(&self, sigma: f64, s: f64) -> Result<Vec2> {
        self.check_offset(s)?;
        let frame = self.curve.frame(sigma)?;
        Ok(frame.point + s * frame.normal)
    }

    /// Inverse chart by damped Newton from the nearest coarse lattice node.
    pub fn inverse(&self, point: Vec2) -> Result<FermiCoords> {
        let len = self.curve.length();
        let (mut sigma, _) = self
            .lattice
            .iter()
            .map(|(sg, p)| (*sg, (point - p).norm_squared()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let frame = self.curve.frame_unchecked(sigma);
        let mut s = (point - frame.point).dot(&frame.normal);
        let residual_at = |sigma: f64, s: f64| {
            let f = self.curve.frame_unchecked(sigma);
            (point - (f.point + s * f.normal), f)
        };
        let (mut r, mut f) = residual_at(sigma, s);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let jac = 1.0 - s * f.curvature;
            if jac <= 0.0 {
                break;
            }
            let d_sigma = r.dot(&f.tangent) / jac;
            let d_s = r.dot(&f.normal);
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1.0 / 1024.0 {
                let trial_sigma = (sigma + step * d_sigma).clamp(0.0, len);
                let trial_s = s + step * d_s;
                let (trial_r, trial_f) = residual_at(trial_sigma, trial_s);
                if trial_r.norm() < r.norm() || trial_r.norm() <= NEWTON_TOL {
                    sigma = trial_sigma;
                    s = trial_s;
                    r = trial_r;
                    f = trial_f;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || (d_sigma.abs() + d_s.abs()) * step <= NEWTON_TOL {
                converged = r.norm() <= 1e-10 * len.max(1.0);
                break;
            }
        }
        if !converged {
            converged = r.norm() <= 1e-10 * len.max(1.0);
        }
        if !converged || s.abs() > self.epsilon * (1.0 + 1e-12) {
            return Err(GullyError::OutOfDomain { sigma, s });
        }
        Ok(FermiCoords {
            sigma,
            s: s.clamp(-self.epsilon, self.epsilon),
        })
    }

    /// Area element ratio `1 - s * kappa(sigma)`.
    pub fn jacobian_factor(&self, sigma: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        Ok(1.0 - s * self.curve.curvature(sigma)?)
    }

    /// Curvature `kappa / (1 - s kappa)` of the offset curve at level `s`.
    pub fn offset_mean_curvature(&self, sigma: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        let kappa = self.curve.curvature(sigma)?;
        Ok(kappa / (1.0 - s * kappa))
    }

    /// Angle (radians) between the normal of the offset curve at `Phi(sigma, s)`,
    /// obtained by differentiating the offset curve, and the axis normal at `sigma`.
    pub fn offset_normal_deviation(&self, sigma: f64, s: f64) -> Result<f64> {
        self.check_offset(s)?;
        let d = self.curve.derivatives(sigma)?;
        let sign = self.curve.orientation_sign();
        let speed = d.d1.norm();
        let normal = sign * rot90(d.d1 / speed);
        let d_unit_tangent = d.d2 / speed - d.d1 * (d.d1.dot(&d.d2) / (speed * speed * speed));
        let offset_tangent = d.d1 + s * sign * rot90(d_unit_tangent);
        let offset_normal = sign * rot90(offset_tangent.normalize());
        let cross = offset_normal.x * normal.y - offset_normal.y * normal.x;
        Ok(cross.abs().atan2(offset_normal.dot(&normal)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveSpec;
    use approx::assert_abs_diff_eq;

    fn straight(eps: f64) -> FermiChart {
        let curve = Arc::new(Curve::new(CurveSpec::segment([0.0, 0.0], [1.0, 0.0])).unwrap());
        FermiChart::new(curve, eps).unwrap()
    }

    fn circle(eps: f64) -> FermiChart {
        let curve = Arc::new(
            Curve::new(CurveSpec::circular_arc([0.0, 0.0], 2.0, 0.0, std::f64::consts::PI)).unwrap(),
        );
        FermiChart::new(curve, eps).unwrap()
    }

    #[test]
    fn straight_chart_is_identity() {
        let chart = straight(0.1);
        let p = chart.forward(0.3, 0.05).unwrap();
        assert_abs_diff_eq!(p.x, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.05, epsilon = 1e-15);
        let c = chart.inverse(Vec2::new(0.3, 0.05)).unwrap();
        assert_abs_diff_eq!(c.sigma, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(c.s, 0.05, epsilon = 1e-12);
        assert_eq!(chart.jacobian_factor(0.4, 0.09).unwrap(), 1.0);
        assert_eq!(chart.offset_mean_curvature(0.4, 0.09).unwrap(), 0.0);
        assert_eq!(chart.offset_normal_deviation(0.4, 0.09).unwrap(), 0.0);
    }

    #[test]
    fn circle_chart_hand_values() {
        let chart = circle(0.6);
        let p = chart.forward(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(p.x, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        let c = chart.inverse(Vec2::new(1.5, 0.0)).unwrap();
        assert_abs_diff_eq!(c.sigma, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.s, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(chart.jacobian_factor(0.0, 0.5).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(chart.offset_mean_curvature(0.0, 0.5).unwrap(), 1.0 / 1.5, epsilon = 1e-15);
        for k in 0..10 {
            let sigma = 0.6 * k as f64;
            assert!(chart.offset_normal_deviation(sigma, -0.55).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn epsilon_must_stay_below_l0() {
        let curve = Arc::new(Curve::new(CurveSpec::circular_arc([0.0, 0.0], 2.0, 0.0, 1.0)).unwrap());
        assert!(FermiChart::new(Arc::clone(&curve), 2.0).is_err());
        assert!(FermiChart::new(curve, 0.0).is_err());
    }

    #[test]
    fn offsets_beyond_epsilon_are_rejected() {
        let chart = straight(0.1);
        assert!(matches!(chart.forward(0.5, 0.2), Err(GullyError::Domain(_))));
        match chart.inverse(Vec2::new(0.5, 0.2)) {
            Err(GullyError::OutOfDomain { s, .. }) => assert_abs_diff_eq!(s, 0.2, epsilon = 1e-12),
            other => panic!("expected out-of-domain, got {other:?}"),
        }
        // Beyond the terminal.
        assert!(chart.inverse(Vec2::new(1.3, 0.0)).is_err());
    }
}

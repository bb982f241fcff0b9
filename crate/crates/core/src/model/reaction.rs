use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Saturated gradient response `c_psi * min(|p|, cap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub c_psi: f64,
    pub cap: f64,
}

impl ReactionSpec {
    pub fn zero() -> Self {
        Self { c_psi: 0.0, cap: 1.0 }
    }

    #[inline]
    pub fn eval(&self, grad: Vec2) -> f64 {
        self.eval_norm(grad.norm())
    }

    #[inline]
    pub fn eval_norm(&self, grad_norm: f64) -> f64 {
        self.c_psi * grad_norm.min(self.cap)
    }

    /// Lipschitz constant in the gradient argument.
    pub fn lipschitz(&self) -> f64 {
        self.c_psi
    }

    pub fn is_zero(&self) -> bool {
        self.c_psi == 0.0
    }
}

pub fn psi_eval(spec: &ReactionSpec, grad: Vec2) -> f64 {
    spec.eval(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vanishes_at_zero_gradient() {
        let spec = ReactionSpec { c_psi: 3.0, cap: 2.0 };
        assert_eq!(psi_eval(&spec, Vec2::zeros()), 0.0);
    }

    #[test]
    fn hand_value() {
        let spec = ReactionSpec { c_psi: 2.0, cap: 10.0 };
        assert!((psi_eval(&spec, Vec2::new(0.3, 0.4)) - 1.0).abs() < 1e-15);
        assert_eq!(psi_eval(&spec, Vec2::new(30.0, 40.0)), 20.0);
    }

    #[test]
    fn sampled_lipschitz_quotient() {
        let spec = ReactionSpec { c_psi: 1.7, cap: 0.8 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let p = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let q = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let d = (p - q).norm();
            if d > 0.0 {
                worst = worst.max((psi_eval(&spec, p) - psi_eval(&spec, q)).abs() / d);
            }
        }
        assert!(worst <= spec.c_psi * (1.0 + 1e-12));
    }
}

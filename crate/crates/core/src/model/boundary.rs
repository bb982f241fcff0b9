//! Terminal values and initial data. All data are independent of the offset `s`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    Constant { value: f64 },
    /// Linear from `from` to `to` over `[0, duration]`, then held.
    Ramp { from: f64, to: f64, duration: f64 },
    Sinusoid { mean: f64, amplitude: f64, period: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { value } => value,
            TimeProfile::Ramp { from, to, duration } => {
                if duration <= 0.0 || t >= duration {
                    to
                } else {
                    from + (to - from) * (t / duration).max(0.0)
                }
            }
            TimeProfile::Sinusoid { mean, amplitude, period } => mean + amplitude * (2.0 * PI * t / period).sin(),
        }
    }

    /// Bound on `|g(t) - g(t')| / |t - t'|`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            TimeProfile::Constant { .. } => 0.0,
            TimeProfile::Ramp { from, to, duration } => {
                if duration <= 0.0 {
                    0.0
                } else {
                    (to - from).abs() / duration
                }
            }
            TimeProfile::Sinusoid { amplitude, period, .. } => 2.0 * PI * amplitude.abs() / period,
        }
    }

    /// `max_{[0, t]} |g|`.
    pub fn max_abs_up_to(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { value } => value.abs(),
            TimeProfile::Ramp { from, .. } => from.abs().max(self.eval(t).abs()),
            TimeProfile::Sinusoid { mean, amplitude, period } => {
                if t >= 0.5 * period {
                    mean.abs() + amplitude.abs()
                } else {
                    // Extremes of the sine over a partial period are at the ends or at the quarter period.
                    let mut m = self.eval(0.0).abs().max(self.eval(t).abs());
                    if t >= 0.25 * period {
                        m = m.max(self.eval(0.25 * period).abs());
                    }
                    m
                }
            }
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        match *self {
            TimeProfile::Constant { value } => TimeProfile::Constant { value: value + offset },
            TimeProfile::Ramp { from, to, duration } => TimeProfile::Ramp {
                from: from + offset,
                to: to + offset,
                duration,
            },
            TimeProfile::Sinusoid { mean, amplitude, period } => TimeProfile::Sinusoid {
                mean: mean + offset,
                amplitude,
                period,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Constant { value: f64 },
    /// `base + amplitude * sin(mode * pi * sigma / length)`.
    SineMode { base: f64, amplitude: f64, mode: u32 },
    /// `base + amplitude * exp(-(sigma - center)^2 / (2 width^2))`, with `center` a fraction of the length.
    GaussianBump { base: f64, amplitude: f64, center: f64, width: f64 },
    /// Linear interpolation between the two terminal values.
    Linear { inlet: f64, outlet: f64 },
}

impl InitialProfile {
    pub fn eval(&self, sigma: f64, length: f64) -> f64 {
        match *self {
            InitialProfile::Constant { value } => value,
            InitialProfile::SineMode { base, amplitude, mode } => {
                base + amplitude * (mode as f64 * PI * sigma / length).sin()
            }
            InitialProfile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let z = (sigma - center * length) / width;
                base + amplitude * (-0.5 * z * z).exp()
            }
            InitialProfile::Linear { inlet, outlet } => inlet + (outlet - inlet) * sigma / length,
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        match *self {
            InitialProfile::Constant { value } => InitialProfile::Constant { value: value + offset },
            InitialProfile::SineMode { base, amplitude, mode } => InitialProfile::SineMode {
                base: base + offset,
                amplitude,
                mode,
            },
            InitialProfile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => InitialProfile::GaussianBump {
                base: base + offset,
                amplitude,
                center,
                width,
            },
            InitialProfile::Linear { inlet, outlet } => InitialProfile::Linear {
                inlet: inlet + offset,
                outlet: outlet + offset,
            },
        }
    }
}

/// Parabolic-boundary data together with the ignition threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub inlet: TimeProfile,
    pub outlet: TimeProfile,
    pub initial: InitialProfile,
    pub threshold: f64,
}

/// Samples per unit of the sampled sup and Hoelder checks.
const DATA_SAMPLES: usize = 2048;

impl BoundaryData {
    pub fn zero() -> Self {
        Self {
            inlet: TimeProfile::Constant { value: 0.0 },
            outlet: TimeProfile::Constant { value: 0.0 },
            initial: InitialProfile::Constant { value: 0.0 },
            threshold: 0.0,
        }
    }

    pub fn inlet_value(&self, t: f64) -> f64 {
        self.inlet.eval(t)
    }

    pub fn outlet_value(&self, t: f64) -> f64 {
        self.outlet.eval(t)
    }

    pub fn initial_value(&self, sigma: f64, length: f64) -> f64 {
        self.initial.eval(sigma, length)
    }

    /// `max |g|` over the parabolic boundary up to time `t`, with the initial
    /// profile sampled on a fine lattice (plus the supplied nodes, if any).
    pub fn max_abs_up_to(&self, t: f64, length: f64, sigma_nodes: &[f64]) -> f64 {
        let sampled = (0..=DATA_SAMPLES)
            .map(|k| length * k as f64 / DATA_SAMPLES as f64)
            .chain(sigma_nodes.iter().copied())
            .map(|sg| self.initial_value(sg, length).abs())
            .fold(0.0, f64::max);
        sampled
            .max(self.inlet.max_abs_up_to(t))
            .max(self.outlet.max_abs_up_to(t))
    }

    /// Data with every value moved by `offset`; the threshold moves with it.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            inlet: self.inlet.shifted(offset),
            outlet: self.outlet.shifted(offset),
            initial: self.initial.shifted(offset),
            threshold: self.threshold + offset,
        }
    }

    /// Sampled sup of `|g(t) - g(t')| / |t - t'|^lambda` over `[0, horizon]`
    /// for both terminal profiles.
    pub fn sampled_time_holder(&self, horizon: f64, lambda: f64) -> f64 {
        if horizon <= 0.0 {
            return 0.0;
        }
        let times: Vec<f64> = (0..=DATA_SAMPLES)
            .map(|k| horizon * k as f64 / DATA_SAMPLES as f64)
            .collect();
        let mut worst = 0.0f64;
        for profile in [&self.inlet, &self.outlet] {
            let values: Vec<f64> = times.iter().map(|&t| profile.eval(t)).collect();
            for stride in [1usize, 2, 4, 16, 64, 256, 1024, DATA_SAMPLES] {
                for k in 0..times.len().saturating_sub(stride) {
                    let dt = times[k + stride] - times[k];
                    worst = worst.max((values[k + stride] - values[k]).abs() / dt.powf(lambda));
                }
            }
        }
        worst
    }

    /// Terminal values are compatible with the initial profile at `t = 0`.
    pub fn corner_mismatch(&self, length: f64) -> f64 {
        (self.inlet_value(0.0) - self.initial_value(0.0, length))
            .abs()
            .max((self.outlet_value(0.0) - self.initial_value(length, length)).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_and_sinusoid_values() {
        let ramp = TimeProfile::Ramp {
            from: 0.0,
            to: 2.0,
            duration: 0.5,
        };
        assert_eq!(ramp.eval(0.25), 1.0);
        assert_eq!(ramp.eval(3.0), 2.0);
        assert_eq!(ramp.lipschitz(), 4.0);
        let sine = TimeProfile::Sinusoid {
            mean: 1.0,
            amplitude: 0.5,
            period: 2.0,
        };
        assert!((sine.eval(0.5) - 1.5).abs() < 1e-15);
        assert_eq!(sine.max_abs_up_to(0.1), sine.eval(0.1).abs());
        assert_eq!(sine.max_abs_up_to(10.0), 1.5);
    }

    #[test]
    fn initial_profiles() {
        let s = InitialProfile::SineMode {
            base: 0.0,
            amplitude: 1.0,
            mode: 1,
        };
        assert!((s.eval(0.5, 1.0) - 1.0).abs() < 1e-15);
        let g = InitialProfile::GaussianBump {
            base: 0.1,
            amplitude: 1.0,
            center: 0.5,
            width: 0.1,
        };
        assert!((g.eval(1.0, 2.0) - 1.1).abs() < 1e-15);
        let l = InitialProfile::Linear { inlet: 1.0, outlet: 3.0 };
        assert_eq!(l.eval(0.5, 2.0), 1.5);
    }

    #[test]
    fn shift_moves_threshold_and_values() {
        let data = BoundaryData {
            inlet: TimeProfile::Constant { value: 1.0 },
            outlet: TimeProfile::Ramp {
                from: 0.0,
                to: 1.0,
                duration: 1.0,
            },
            initial: InitialProfile::Linear { inlet: 1.0, outlet: 0.0 },
            threshold: 0.3,
        };
        let s = data.shifted(-0.3);
        assert_eq!(s.threshold, 0.0);
        assert!((s.inlet_value(0.2) - 0.7).abs() < 1e-15);
        assert!((s.outlet_value(0.5) - 0.2).abs() < 1e-15);
        assert!((s.initial_value(1.0, 2.0) - 0.2).abs() < 1e-15);
        assert_eq!(data.corner_mismatch(2.0), 0.0);
    }

    #[test]
    fn holder_sampling_is_bounded_by_lipschitz() {
        let data = BoundaryData {
            inlet: TimeProfile::Sinusoid {
                mean: 0.0,
                amplitude: 1.0,
                period: 0.5,
            },
            ..BoundaryData::zero()
        };
        let h = data.sampled_time_holder(1.0, 0.5);
        assert!(h.is_finite() && h > 0.0);
        // |g(t) - g(t')| <= min(2, L |t - t'|) <= sqrt(2 L) |t - t'|^(1/2)
        let bound = (2.0 * data.inlet.lipschitz()).sqrt();
        assert!(h <= bound * (1.0 + 1e-12));
    }
}

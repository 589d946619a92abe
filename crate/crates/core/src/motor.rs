//! Eccentric-rotating-mass motor: drive frequency and centrifugal force.

use serde::{Deserialize, Serialize};

use crate::calibration::linear::fit_linear;
use crate::error::{ensure_positive, Error, Result};

/// Eccentric rotor parameters and the measured voltage/frequency map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorSpec {
    /// kg
    pub eccentric_mass: f64,
    /// m
    pub eccentricity: f64,
    /// (V, Hz) pairs, strictly increasing in both.
    pub voltage_freq_points: Vec<(f64, f64)>,
    pub rated_voltage: f64,
    /// Inclusive (min, max) in V.
    pub voltage_range: (f64, f64),
}

impl Default for MotorSpec {
    fn default() -> Self {
        Self {
            eccentric_mass: 0.9e-3,
            eccentricity: 0.5e-3,
            voltage_freq_points: vec![(3.0, 138.0), (4.0, 144.0)],
            rated_voltage: 3.0,
            voltage_range: (3.0, 4.0),
        }
    }
}

impl MotorSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("motor.eccentric_mass", self.eccentric_mass)?;
        ensure_positive("motor.eccentricity", self.eccentricity)?;
        if self.voltage_freq_points.len() < 2 {
            return Err(Error::validation(
                "motor.voltage_freq_points",
                "need at least two (voltage, frequency) points",
            ));
        }
        for w in self.voltage_freq_points.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::validation(
                    "motor.voltage_freq_points",
                    "voltages and frequencies must be strictly increasing",
                ));
            }
        }
        let (lo, hi) = self.voltage_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation("motor.voltage_range", "need min < max"));
        }
        if !(lo..=hi).contains(&self.rated_voltage) {
            return Err(Error::validation(
                "motor.rated_voltage",
                format!("{} V not within [{lo}, {hi}] V", self.rated_voltage),
            ));
        }
        Ok(())
    }

    /// Least-squares line (slope Hz/V, intercept Hz) through the map.
    pub fn frequency_line(&self) -> Result<(f64, f64)> {
        fit_linear(&self.voltage_freq_points)
    }

    /// Drive frequency in Hz. Voltages outside `voltage_range` are rejected.
    pub fn drive_frequency(&self, voltage: f64) -> Result<f64> {
        let (lo, hi) = self.voltage_range;
        if !(voltage >= lo && voltage <= hi) {
            return Err(Error::VoltageOutOfRange {
                voltage,
                min: lo,
                max: hi,
            });
        }
        let (slope, intercept) = self.frequency_line()?;
        Ok(intercept + slope * voltage)
    }

    /// Drive angular velocity in rad/s.
    pub fn drive_omega(&self, voltage: f64) -> Result<f64> {
        Ok(2.0 * std::f64::consts::PI * self.drive_frequency(voltage)?)
    }

    /// F0 = m d ω².
    pub fn centrifugal_amplitude(&self, omega: f64) -> f64 {
        self.eccentric_mass * self.eccentricity * omega * omega
    }

    pub fn rotating_force(&self, omega: f64, phase: f64) -> RotatingForce {
        RotatingForce {
            amplitude: self.centrifugal_amplitude(omega),
            angular_velocity: omega,
            phase,
        }
    }
}

/// Free-function form of [`MotorSpec::drive_frequency`].
pub fn drive_frequency(spec: &MotorSpec, voltage: f64) -> Result<f64> {
    spec.drive_frequency(voltage)
}

/// Free-function form of [`MotorSpec::centrifugal_amplitude`].
pub fn centrifugal_amplitude(spec: &MotorSpec, omega: f64) -> f64 {
    spec.centrifugal_amplitude(omega)
}

/// A force of constant magnitude rotating in the motor plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingForce {
    /// N
    pub amplitude: f64,
    /// rad/s
    pub angular_velocity: f64,
    /// rad
    pub phase: f64,
}

impl RotatingForce {
    /// (Fx, Fy) at time `t`.
    pub fn components(&self, t: f64) -> (f64, f64) {
        let angle = self.angular_velocity * t + self.phase;
        let (s, c) = angle.sin_cos();
        (self.amplitude * c, self.amplitude * s)
    }
}

pub fn force_components(force: &RotatingForce, t: f64) -> (f64, f64) {
    force.components(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_points() -> MotorSpec {
        MotorSpec::default()
    }

    #[test]
    fn frequency_at_anchor_voltages() {
        let m = reference_points();
        assert!((m.drive_frequency(3.0).unwrap() - 138.0).abs() < 1e-9);
        assert!((m.drive_frequency(4.0).unwrap() - 144.0).abs() < 1e-9);
        // f(V) = 120 + 6 V
        assert!((m.drive_frequency(3.5).unwrap() - 141.0).abs() < 1e-9);
    }

    #[test]
    fn frequency_rejects_extrapolation() {
        let m = reference_points();
        assert!(matches!(
            m.drive_frequency(2.99),
            Err(Error::VoltageOutOfRange { .. })
        ));
        assert!(m.drive_frequency(4.01).is_err());
        assert!(m.drive_frequency(f64::NAN).is_err());
    }

    #[test]
    fn centrifugal_examples() {
        let m = reference_points();
        assert_eq!(m.centrifugal_amplitude(0.0), 0.0);
        let w = 2.0 * PI * 138.0;
        // 0.9e-3 * 0.5e-3 * (867.08)^2 = 0.33832 N
        let f0 = m.centrifugal_amplitude(w);
        assert!((f0 - 0.338_32).abs() < 1e-4, "{f0}");
        let doubled = MotorSpec {
            eccentric_mass: 2.0 * m.eccentric_mass,
            ..m.clone()
        };
        assert_eq!(doubled.centrifugal_amplitude(w), 2.0 * f0);
    }

    #[test]
    fn components_quarter_period() {
        let f = RotatingForce {
            amplitude: 1.0,
            angular_velocity: 1.0,
            phase: 0.0,
        };
        assert_eq!(f.components(0.0), (1.0, 0.0));
        let (fx, fy) = f.components(PI / 2.0);
        assert!(fx.abs() < 1e-15 && (fy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_names_field() {
        let mut m = reference_points();
        m.voltage_freq_points = vec![(3.0, 138.0), (3.0, 140.0)];
        let err = m.validate().unwrap_err().to_string();
        assert!(err.contains("voltage_freq_points"), "{err}");
        let mut m = reference_points();
        m.rated_voltage = 5.0;
        assert!(m.validate().unwrap_err().to_string().contains("rated_voltage"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quadratic_in_omega(w in 0.0f64..5000.0) {
                let m = MotorSpec::default();
                let a = m.centrifugal_amplitude(w);
                let b = m.centrifugal_amplitude(2.0 * w);
                prop_assert!((b - 4.0 * a).abs() <= 1e-12 * b.max(1e-300));
            }

            #[test]
            fn pythagorean_and_periodic(f0 in 0.0f64..10.0, w in 0.1f64..2000.0,
                                        phase in -PI..PI, t in 0.0f64..1.0) {
                let f = RotatingForce { amplitude: f0, angular_velocity: w, phase };
                let (fx, fy) = f.components(t);
                prop_assert!((fx * fx + fy * fy - f0 * f0).abs() <= 1e-12 * (f0 * f0).max(1e-300));
                let (gx, gy) = f.components(t + 2.0 * PI / w);
                prop_assert!((fx - gx).abs() <= 1e-9 * f0.max(1e-12));
                prop_assert!((fy - gy).abs() <= 1e-9 * f0.max(1e-12));
            }

            #[test]
            fn frequency_monotone(v1 in 3.0f64..4.0, dv in 0.0f64..1.0) {
                let m = MotorSpec::default();
                let v2 = (v1 + dv).min(4.0);
                prop_assert!(m.drive_frequency(v2).unwrap() >= m.drive_frequency(v1).unwrap());
            }
        }
    }
}

//! From rotating force to fin oscillation amplitude to streaming thrust.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::modal::{
    build_reduced_model, FlexibleFinGeometry, FluidProperties, ModalConfig, ReducedOrderModel,
    RigidPartGeometry,
};
use crate::motor::MotorSpec;

/// Oscillation amplitudes of the fin assembly, all in m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OscillationAmplitudes {
    /// Rigid part along x.
    pub a_x1: f64,
    /// Fin free-end deformation along x.
    pub a_x2: f64,
    /// Total along x, `a_x1 + a_x2`.
    pub a_x3: f64,
    /// Rigid part along y.
    pub a_1y: f64,
}

/// Proportionality constants of the streaming scaling laws.
///
/// `velocity` (C_U) carries m² so that C_U ρ A² ω² / μ is a velocity.
/// `thrust` (C_F) is dimensionless and multiplies ρ U² L_f b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamingCoefficients {
    pub velocity: f64,
    pub thrust: f64,
}

impl Default for StreamingCoefficients {
    fn default() -> Self {
        Self {
            velocity: 1e-9,
            thrust: 1.0,
        }
    }
}

impl StreamingCoefficients {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("coefficients.velocity", self.velocity)?;
        ensure_positive("coefficients.thrust", self.thrust)
    }
}

/// Marker separations (m) at rest (`*_0`) and at maximum excursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerMeasurement {
    pub d_x: f64,
    pub d_x0: f64,
    pub d_y: f64,
    pub d_y0: f64,
}

fn response(force: f64, k: f64, m: f64, c: f64, omega: f64, axis: &'static str) -> Result<f64> {
    let re = k - m * omega * omega;
    let im = c * omega;
    let den = re.hypot(im);
    if den == 0.0 {
        if force == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Singular { axis });
    }
    Ok(force / den)
}

/// Steady-state amplitudes under a rotating force of magnitude `f0`.
pub fn forced_amplitude(
    model: &ReducedOrderModel,
    f0: f64,
    omega: f64,
) -> Result<OscillationAmplitudes> {
    ensure_positive("omega", omega)?;
    ensure_non_negative("F0", f0)?;
    let a_x1 = response(
        f0,
        model.stiffness_x,
        model.effective_mass_x,
        model.damping_x,
        omega,
        "x",
    )?;
    let a_1y = response(
        f0,
        model.stiffness_y,
        model.effective_mass_y,
        model.damping_y,
        omega,
        "y",
    )?;
    // fin driven by the housing acceleration a_x1 ω²
    let a_x2 = response(
        a_x1 * model.fin_modal_mass * omega * omega,
        model.fin_modal_stiffness,
        model.fin_modal_mass,
        model.fin_modal_damping,
        omega,
        "fin",
    )?;
    Ok(OscillationAmplitudes {
        a_x1,
        a_x2,
        a_x3: a_x1 + a_x2,
        a_1y,
    })
}

pub fn total_amplitude(a_x1: f64, a_x2: f64) -> Result<f64> {
    ensure_non_negative("A_x1", a_x1)?;
    ensure_non_negative("A_x2", a_x2)?;
    Ok(a_x1 + a_x2)
}

/// U = C_U ρ A² ω² / μ
pub fn streaming_velocity(
    a_x3: f64,
    omega: f64,
    fluid: &FluidProperties,
    coeffs: &StreamingCoefficients,
) -> f64 {
    coeffs.velocity * fluid.density * a_x3 * a_x3 * omega * omega / fluid.dynamic_viscosity
}

/// F = C_F ρ U² L_f b
pub fn streaming_thrust(
    u: f64,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    coeffs: &StreamingCoefficients,
) -> f64 {
    coeffs.thrust * fluid.density * u * u * fin.fin_length * fin.clamped_width
}

/// Every quantity along the voltage → thrust chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustPoint {
    pub voltage: f64,
    pub frequency: f64,
    pub amplitudes: OscillationAmplitudes,
    pub streaming_velocity: f64,
    pub thrust: f64,
}

/// Everything the thrust chain needs, by reference.
#[derive(Debug, Clone, Copy)]
pub struct FinAssembly<'a> {
    pub motor: &'a MotorSpec,
    pub rigid: &'a RigidPartGeometry,
    pub fin: &'a FlexibleFinGeometry,
    pub fluid: &'a FluidProperties,
    pub modal: &'a ModalConfig,
    pub coeffs: &'a StreamingCoefficients,
}

impl FinAssembly<'_> {
    pub fn evaluate(&self, voltage: f64) -> Result<ThrustPoint> {
        let frequency = self.motor.drive_frequency(voltage)?;
        let omega = 2.0 * std::f64::consts::PI * frequency;
        let f0 = self.motor.centrifugal_amplitude(omega);
        let model = build_reduced_model(self.rigid, self.fin, self.fluid, self.modal)?;
        let amplitudes = forced_amplitude(&model, f0, omega)?;
        let u = streaming_velocity(amplitudes.a_x3, omega, self.fluid, self.coeffs);
        let thrust = streaming_thrust(u, self.fin, self.fluid, self.coeffs);
        Ok(ThrustPoint {
            voltage,
            frequency,
            amplitudes,
            streaming_velocity: u,
            thrust,
        })
    }

    pub fn predict_thrust(&self, voltage: f64) -> Result<f64> {
        Ok(self.evaluate(voltage)?.thrust)
    }
}

/// Thrust in N at `voltage`. Pure composition of the chain above.
pub fn predict_thrust(
    voltage: f64,
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    motor: &MotorSpec,
    modal: &ModalConfig,
    coeffs: &StreamingCoefficients,
) -> Result<f64> {
    FinAssembly {
        motor,
        rigid,
        fin,
        fluid,
        modal,
        coeffs,
    }
    .predict_thrust(voltage)
}

/// Thrust-vs-voltage table, one row per voltage.
pub fn thrust_sweep(assembly: &FinAssembly<'_>, voltages: &[f64]) -> Result<Vec<ThrustPoint>> {
    voltages.iter().map(|v| assembly.evaluate(*v)).collect()
}

pub const THRUST_CSV_HEADER: [&str; 7] = [
    "voltage_v", "freq_hz", "a_x1_m", "a_x2_m", "a_x3_m", "u_mps", "thrust_n",
];

pub fn write_thrust_csv<W: std::io::Write>(rows: &[ThrustPoint], out: W) -> Result<()> {
    use crate::io::fmt_f64;
    let mut w = crate::io::csv_writer(out);
    w.write_record(THRUST_CSV_HEADER)?;
    for p in rows {
        w.write_record(
            [
                p.voltage,
                p.frequency,
                p.amplitudes.a_x1,
                p.amplitudes.a_x2,
                p.amplitudes.a_x3,
                p.streaming_velocity,
                p.thrust,
            ]
            .map(fmt_f64),
        )?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}

/// A_1x = d_x − d_x0, A_1y = d_y − d_y0.
pub fn amplitude_from_markers(m: &MarkerMeasurement) -> Result<(f64, f64)> {
    for (name, v) in [("d_x", m.d_x), ("d_x0", m.d_x0), ("d_y", m.d_y), ("d_y0", m.d_y0)] {
        ensure_non_negative(name, v)?;
    }
    if m.d_x < m.d_x0 {
        return Err(Error::validation("d_x", "smaller than resting separation d_x0"));
    }
    if m.d_y < m.d_y0 {
        return Err(Error::validation("d_y", "smaller than resting separation d_y0"));
    }
    Ok((m.d_x - m.d_x0, m.d_y - m.d_y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model_at(omega: f64) -> ReducedOrderModel {
        let m = 3e-3;
        ReducedOrderModel {
            effective_mass_x: m,
            effective_mass_y: m,
            stiffness_x: m * omega * omega,
            stiffness_y: 4.0 * m * omega * omega,
            damping_x: 0.05,
            damping_y: 0.05,
            fin_modal_mass: 1e-4,
            fin_modal_stiffness: 1e-4 * (3.0 * omega).powi(2),
            fin_modal_damping: 1e-3,
        }
    }

    #[test]
    fn resonant_amplitude() {
        let w = 2.0 * PI * 138.0;
        let a = forced_amplitude(&model_at(w), 0.338, w).unwrap();
        // F0 / (c ω) = 0.338 / (0.05 * 867.08)
        assert!((a.a_x1 - 7.796e-3).abs() < 1e-5, "{}", a.a_x1);
        assert_eq!(a.a_x3, a.a_x1 + a.a_x2);
    }

    #[test]
    fn zero_force_zero_amplitudes() {
        let w = 500.0;
        let a = forced_amplitude(&model_at(w), 0.0, w).unwrap();
        assert_eq!(a, OscillationAmplitudes::default());
    }

    #[test]
    fn quasi_static_limit() {
        let wn = 2.0 * PI * 138.0;
        let model = model_at(wn);
        let a = forced_amplitude(&model, 0.1, wn / 100.0).unwrap();
        assert!((a.a_x1 / (0.1 / model.stiffness_x) - 1.0).abs() < 2e-4);
    }

    #[test]
    fn undamped_resonance_is_singular() {
        let w = 100.0;
        let mut m = model_at(w);
        m.damping_x = 0.0;
        assert!(matches!(
            forced_amplitude(&m, 1.0, w),
            Err(Error::Singular { axis: "x" })
        ));
    }

    #[test]
    fn total_amplitude_contract() {
        assert_eq!(total_amplitude(0.0, 0.0).unwrap(), 0.0);
        assert!((total_amplitude(1e-3, 2e-3).unwrap() - 3e-3).abs() < 1e-18);
        assert_eq!(
            total_amplitude(1e-3, 2e-3).unwrap(),
            total_amplitude(2e-3, 1e-3).unwrap()
        );
        assert!(total_amplitude(-1e-3, 0.0).unwrap_err().is_validation());
    }

    #[test]
    fn streaming_velocity_example() {
        let c = StreamingCoefficients {
            velocity: 1e-9,
            thrust: 1.0,
        };
        let fl = FluidProperties::WATER;
        assert_eq!(streaming_velocity(0.0, 867.08, &fl, &c), 0.0);
        let u = streaming_velocity(1e-3, 867.08, &fl, &c);
        assert!((u - 7.518_277e-4).abs() < 1e-9, "{u}");
        assert!((streaming_velocity(2e-3, 867.08, &fl, &c) / u - 4.0).abs() < 1e-12);
    }

    #[test]
    fn streaming_thrust_example() {
        let c = StreamingCoefficients {
            velocity: 1e-9,
            thrust: 1.0,
        };
        let fl = FluidProperties::WATER;
        let fin = FlexibleFinGeometry {
            fin_length: 12e-3,
            clamped_width: 11e-3,
            ..Default::default()
        };
        assert_eq!(streaming_thrust(0.0, &fin, &fl, &c), 0.0);
        let f = streaming_thrust(0.05, &fin, &fl, &c);
        assert!((f - 3.3e-4).abs() < 1e-12, "{f}");
        let longer = FlexibleFinGeometry {
            fin_length: 24e-3,
            ..fin
        };
        assert!((streaming_thrust(0.05, &longer, &fl, &c) / f - 2.0).abs() < 1e-12);
    }

    #[test]
    fn markers() {
        let (ax, ay) = amplitude_from_markers(&MarkerMeasurement {
            d_x: 5.3e-3,
            d_x0: 5.0e-3,
            d_y: 4.1e-3,
            d_y0: 4.0e-3,
        })
        .unwrap();
        assert!((ax - 0.3e-3).abs() < 1e-12 && (ay - 0.1e-3).abs() < 1e-12);
        let (ax, _) = amplitude_from_markers(&MarkerMeasurement {
            d_x: 5e-3,
            d_x0: 5e-3,
            d_y: 4e-3,
            d_y0: 4e-3,
        })
        .unwrap();
        assert_eq!(ax, 0.0);
        let err = amplitude_from_markers(&MarkerMeasurement {
            d_x: 4.9e-3,
            d_x0: 5e-3,
            d_y: 4e-3,
            d_y0: 4e-3,
        })
        .unwrap_err();
        assert!(err.to_string().contains("d_x"));
    }

    #[test]
    fn below_range_voltage_is_error() {
        let motor = MotorSpec::default();
        let r = predict_thrust(
            2.5,
            &RigidPartGeometry::default(),
            &FlexibleFinGeometry::default(),
            &FluidProperties::WATER,
            &motor,
            &ModalConfig::default(),
            &StreamingCoefficients::default(),
        );
        assert!(matches!(r, Err(Error::VoltageOutOfRange { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// At the x resonance, A_x1 / A_1y grows with k_y / k_x.
            #[test]
            fn amplitude_ratio_grows_with_stiffness_ratio(ratio in 1.0f64..5.0, step in 0.01f64..1.0) {
                let w = 2.0 * PI * 138.0;
                let base = model_at(w);
                let eval = |r: f64| {
                    let mut m = base.clone();
                    m.stiffness_y = r * m.stiffness_x;
                    let a = forced_amplitude(&m, 0.3, w).unwrap();
                    a.a_x1 / a.a_1y
                };
                prop_assert!(eval(ratio + step) > eval(ratio));
            }

            #[test]
            fn thrust_zero_iff_amplitude_zero(a in 0.0f64..5e-3, lf in 1e-3f64..20e-3) {
                let c = StreamingCoefficients::default();
                let fl = FluidProperties::WATER;
                let fin = FlexibleFinGeometry { fin_length: lf, ..Default::default() };
                let f = streaming_thrust(streaming_velocity(a, 900.0, &fl, &c), &fin, &fl, &c);
                prop_assert!(f >= 0.0);
                prop_assert_eq!(f == 0.0, a == 0.0);
            }
        }
    }
}

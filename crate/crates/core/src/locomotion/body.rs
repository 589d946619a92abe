use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinRole {
    LeftPectoral,
    RightPectoral,
    Caudal,
}

impl FinRole {
    pub const ALL: [FinRole; 3] = [FinRole::LeftPectoral, FinRole::RightPectoral, FinRole::Caudal];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FinRole::LeftPectoral => "left_pectoral",
            FinRole::RightPectoral => "right_pectoral",
            FinRole::Caudal => "caudal",
        }
    }

    /// Required thrust direction in the body frame (x forward, y to port).
    /// Pectoral fins point 30° inboard of the caudal axis.
    pub fn direction(self) -> f64 {
        match self {
            FinRole::LeftPectoral => -PI / 6.0,
            FinRole::RightPectoral => PI / 6.0,
            FinRole::Caudal => 0.0,
        }
    }
}

/// Which fins are commanded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FinActivation {
    pub left: bool,
    pub right: bool,
    pub caudal: bool,
}

impl FinActivation {
    pub const OFF: FinActivation = FinActivation {
        left: false,
        right: false,
        caudal: false,
    };
    pub const ALL: FinActivation = FinActivation {
        left: true,
        right: true,
        caudal: true,
    };

    pub fn new(left: bool, right: bool, caudal: bool) -> Self {
        Self { left, right, caudal }
    }

    /// Indexed by [`FinRole::index`].
    pub fn as_array(self) -> [bool; 3] {
        [self.left, self.right, self.caudal]
    }

    pub fn levels(self) -> [f64; 3] {
        self.as_array().map(|on| if on { 1.0 } else { 0.0 })
    }

    pub fn mirrored(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            caudal: self.caudal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinMount {
    pub role: FinRole,
    /// Body-frame position (x, y), m.
    pub position: (f64, f64),
    /// Body-frame thrust direction, rad.
    pub thrust_direction: f64,
    /// Thrust at full spin, N.
    pub thrust_magnitude: f64,
}

impl FinMount {
    /// Force (Fx, Fy) and yaw moment at full spin.
    pub fn wrench(&self) -> (f64, f64, f64) {
        let (s, c) = self.thrust_direction.sin_cos();
        let fx = self.thrust_magnitude * c;
        let fy = self.thrust_magnitude * s;
        let (px, py) = self.position;
        (fx, fy, px * fy - py * fx)
    }
}

/// Planar vehicle parameters of the three-fin fish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FishBody {
    /// kg
    pub mass: f64,
    /// BL, m
    pub body_length: f64,
    /// m
    pub body_width: f64,
    pub added_mass_surge: f64,
    pub added_mass_sway: f64,
    /// kg·m²
    pub yaw_inertia: f64,
    pub added_yaw_inertia: f64,
    /// C_d·A for surge, m²
    pub drag_area_surge: f64,
    /// C_d·A for sway, m²
    pub drag_area_sway: f64,
    /// Quadratic yaw drag, N·m·s²
    pub yaw_drag: f64,
    /// Yaw damping proportional to surge speed, N·s²
    pub yaw_damping_speed: f64,
    /// First-order fin spin-up time constant, s. Zero means instantaneous.
    pub spin_up_tau: f64,
    /// kg/m³
    pub fluid_density: f64,
    /// Indexed by [`FinRole::index`].
    pub fins: [FinMount; 3],
}

impl Default for FishBody {
    fn default() -> Self {
        let mass = 0.088;
        let bl = 0.085;
        let width = 0.055;
        // solid prolate spheroid about the minor axis
        let (a, b) = (bl / 2.0, width / 2.0);
        let yaw_inertia = mass * (a * a + b * b) / 5.0;
        Self {
            mass,
            body_length: bl,
            body_width: width,
            added_mass_surge: 0.2 * mass,
            added_mass_sway: 0.8 * mass,
            yaw_inertia,
            added_yaw_inertia: 0.2 * yaw_inertia,
            drag_area_surge: 1.1e-3,
            drag_area_sway: 5e-3,
            yaw_drag: 1e-5,
            yaw_damping_speed: 1e-3,
            spin_up_tau: 0.2,
            fluid_density: 1000.0,
            fins: [
                FinMount {
                    role: FinRole::LeftPectoral,
                    position: (-0.1 * bl, 0.25 * bl),
                    thrust_direction: FinRole::LeftPectoral.direction(),
                    thrust_magnitude: 0.002,
                },
                FinMount {
                    role: FinRole::RightPectoral,
                    position: (-0.1 * bl, -0.25 * bl),
                    thrust_direction: FinRole::RightPectoral.direction(),
                    thrust_magnitude: 0.002,
                },
                FinMount {
                    role: FinRole::Caudal,
                    position: (-0.5 * bl, 0.0),
                    thrust_direction: 0.0,
                    thrust_magnitude: 0.004,
                },
            ],
        }
    }
}

impl FishBody {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("body.mass", self.mass)?;
        ensure_positive("body.body_length", self.body_length)?;
        ensure_positive("body.body_width", self.body_width)?;
        ensure_non_negative("body.added_mass_surge", self.added_mass_surge)?;
        ensure_non_negative("body.added_mass_sway", self.added_mass_sway)?;
        ensure_positive("body.yaw_inertia", self.yaw_inertia)?;
        ensure_non_negative("body.added_yaw_inertia", self.added_yaw_inertia)?;
        ensure_non_negative("body.drag_area_surge", self.drag_area_surge)?;
        ensure_non_negative("body.drag_area_sway", self.drag_area_sway)?;
        ensure_non_negative("body.yaw_drag", self.yaw_drag)?;
        ensure_non_negative("body.yaw_damping_speed", self.yaw_damping_speed)?;
        ensure_non_negative("body.spin_up_tau", self.spin_up_tau)?;
        ensure_positive("body.fluid_density", self.fluid_density)?;
        for (i, (fin, role)) in self.fins.iter().zip(FinRole::ALL).enumerate() {
            if fin.role != role {
                return Err(Error::validation(
                    format!("body.fins[{i}].role"),
                    format!("expected {}, got {}", role.name(), fin.role.name()),
                ));
            }
            if (fin.thrust_direction - role.direction()).abs() > 1e-9 {
                return Err(Error::validation(
                    format!("body.fins.{}.direction", role.name()),
                    format!("must be {} rad", role.direction()),
                ));
            }
            let (px, py) = fin.position;
            if !(px.hypot(py) <= self.body_length) {
                return Err(Error::validation(
                    format!("body.fins.{}.position", role.name()),
                    "must lie within one body length of the centre",
                ));
            }
            ensure_non_negative(&format!("body.fins.{}.thrust", role.name()), fin.thrust_magnitude)?;
        }
        Ok(())
    }

    pub fn fin(&self, role: FinRole) -> &FinMount {
        &self.fins[role.index()]
    }

    pub fn fin_mut(&mut self, role: FinRole) -> &mut FinMount {
        &mut self.fins[role.index()]
    }

    pub fn surge_mass(&self) -> f64 {
        self.mass + self.added_mass_surge
    }

    pub fn sway_mass(&self) -> f64 {
        self.mass + self.added_mass_sway
    }

    pub fn total_yaw_inertia(&self) -> f64 {
        self.yaw_inertia + self.added_yaw_inertia
    }

    /// Radius of the disc approximating the hull for collisions.
    pub fn collision_radius(&self) -> f64 {
        0.35 * self.body_length
    }

    /// True if left and right pectoral fins are exact mirror images.
    pub fn is_symmetric(&self) -> bool {
        let l = self.fin(FinRole::LeftPectoral);
        let r = self.fin(FinRole::RightPectoral);
        l.position.0 == r.position.0
            && l.position.1 == -r.position.1
            && l.thrust_direction == -r.thrust_direction
            && l.thrust_magnitude == r.thrust_magnitude
            && self.fin(FinRole::Caudal).position.1 == 0.0
    }
}

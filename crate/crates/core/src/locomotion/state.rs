use serde::{Deserialize, Serialize};

/// Planar kinematic state. Heading is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimState {
    /// s
    pub t: f64,
    /// World position, m.
    pub x: f64,
    pub y: f64,
    /// Heading, rad.
    pub theta: f64,
    /// Surge, m/s.
    pub u: f64,
    /// Sway, m/s.
    pub v: f64,
    /// Yaw rate, rad/s.
    pub r: f64,
    /// Spin-up level of each fin in [0, 1], indexed by `FinRole::index`.
    pub fin_level: [f64; 3],
}

pub(crate) const DIM: usize = 9;

impl SimState {
    pub fn at_rest(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta,
            ..Default::default()
        }
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// World-frame velocity.
    pub fn world_velocity(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.u * c - self.v * s, self.u * s + self.v * c)
    }

    /// Reflection across the world x axis, swapping the pectoral fins.
    pub fn mirrored(&self) -> Self {
        Self {
            t: self.t,
            x: self.x,
            y: -self.y,
            theta: -self.theta,
            u: self.u,
            v: -self.v,
            r: -self.r,
            fin_level: [self.fin_level[1], self.fin_level[0], self.fin_level[2]],
        }
    }

    pub(crate) fn to_vec(self) -> [f64; DIM] {
        let [l, r, c] = self.fin_level;
        [self.x, self.y, self.theta, self.u, self.v, self.r, l, r, c]
    }

    pub(crate) fn from_vec(t: f64, s: [f64; DIM]) -> Self {
        Self {
            t,
            x: s[0],
            y: s[1],
            theta: s[2],
            u: s[3],
            v: s[4],
            r: s[5],
            fin_level: [s[6], s[7], s[8]],
        }
    }

    /// Name of the first non-finite component, if any.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        const NAMES: [&str; DIM] = [
            "x", "y", "theta", "u", "v", "r", "fin_level.left", "fin_level.right", "fin_level.caudal",
        ];
        if !self.t.is_finite() {
            return Some("t");
        }
        self.to_vec()
            .iter()
            .zip(NAMES)
            .find(|(v, _)| !v.is_finite())
            .map(|(_, n)| n)
    }
}

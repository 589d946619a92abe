use serde::{Deserialize, Serialize};

use super::body::FishBody;
use super::state::SimState;
use crate::error::{Error, Result};

/// Fixed circular obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    /// World centre (x, y), m.
    pub center: (f64, f64),
    /// m
    pub radius: f64,
}

impl Obstacle {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Self {
            center: (x, y),
            radius,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let (x, y) = self.center;
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::validation(
                format!("obstacles[{index}].radius"),
                format!("must be positive and finite, got {}", self.radius),
            ));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::validation(format!("obstacles[{index}].center"), "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    /// s
    pub t: f64,
    pub obstacle: usize,
    /// Point on the obstacle surface facing the fish, m.
    pub contact: (f64, f64),
}

/// Resolve contacts of the fish disc against every obstacle in index order.
///
/// Penetrating states are projected back to the contact distance and the
/// inward normal component of the world velocity is removed. Tangential
/// velocity and yaw rate are untouched. Returns one event per contact.
pub fn check_collision(state: &mut SimState, body: &FishBody, obstacles: &[Obstacle]) -> Vec<CollisionEvent> {
    let fish_r = body.collision_radius();
    let mut events = Vec::new();
    for (index, obs) in obstacles.iter().enumerate() {
        let dx = state.x - obs.center.0;
        let dy = state.y - obs.center.1;
        let dist = dx.hypot(dy);
        let reach = fish_r + obs.radius;
        if dist >= reach {
            continue;
        }
        // Coincident centres have no defined normal; push out along -heading.
        let (nx, ny) = if dist > 0.0 {
            (dx / dist, dy / dist)
        } else {
            let (s, c) = state.theta.sin_cos();
            (-c, -s)
        };
        state.x = obs.center.0 + nx * reach;
        state.y = obs.center.1 + ny * reach;

        let (vx, vy) = state.world_velocity();
        let vn = vx * nx + vy * ny;
        if vn < 0.0 {
            let (vx, vy) = (vx - vn * nx, vy - vn * ny);
            let (s, c) = state.theta.sin_cos();
            state.u = vx * c + vy * s;
            state.v = -vx * s + vy * c;
        }
        events.push(CollisionEvent {
            t: state.t,
            obstacle: index,
            contact: (obs.center.0 + nx * obs.radius, obs.center.1 + ny * obs.radius),
        });
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_obstacles_no_events() {
        let mut s = SimState::default();
        assert!(check_collision(&mut s, &FishBody::default(), &[]).is_empty());
    }

    #[test]
    fn head_on_contact_kills_normal_velocity() {
        let body = FishBody::default();
        let reach = body.collision_radius() + 0.03;
        let obs = [Obstacle::new(0.1, 0.0, 0.03)];
        let mut s = SimState {
            x: 0.1 - reach + 0.001,
            u: 0.05,
            v: 0.01,
            ..Default::default()
        };
        let events = check_collision(&mut s, &body, &obs);
        assert_eq!(events.len(), 1);
        assert!((s.x - (0.1 - reach)).abs() < 1e-15);
        assert!(s.u.abs() < 1e-15);
        assert_eq!(s.v, 0.01);
        assert!((events[0].contact.0 - 0.07).abs() < 1e-15);
    }

    #[test]
    fn receding_velocity_is_kept() {
        let body = FishBody::default();
        let obs = [Obstacle::new(0.0, 0.0, 0.03)];
        let mut s = SimState {
            x: 0.03,
            u: 0.05,
            ..Default::default()
        };
        check_collision(&mut s, &body, &obs);
        assert_eq!(s.u, 0.05);
    }

    #[test]
    fn invalid_radius() {
        assert!(Obstacle::new(0.0, 0.0, 0.0).validate(2).unwrap_err().is_validation());
    }
}

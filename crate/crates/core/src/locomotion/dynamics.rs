//! Planar surge/sway/yaw dynamics integrated with classic RK4.
//!
//! Body frame: x forward, y to port, yaw positive counter-clockwise.
//!
//! ```text
//! M_u u̇ = X + M_v v r − ½ρ C_u |u| u
//! M_v v̇ = Y − M_u u r − ½ρ C_v |v| v
//! J ṙ   = N − (M_v − M_u) u v − C_r |r| r − C_ru |u| r
//! ```
//!
//! The `(M_v − M_u) u v` Munk moment closes the added-mass coupling so that
//! kinetic energy ½(M_u u² + M_v v² + J r²) only ever decreases without
//! thrust.

use super::body::{FinActivation, FishBody};
use super::state::{SimState, DIM};
use crate::error::{Error, Result};

/// Largest accepted step, s.
pub const MAX_DT: f64 = 5e-3;

/// Per-step constants pulled out of the body once.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coefficients {
    m_u: f64,
    m_v: f64,
    j: f64,
    half_rho_cu: f64,
    half_rho_cv: f64,
    yaw_drag: f64,
    yaw_speed: f64,
    tau: f64,
    /// (Fx, Fy, N) per fin at full spin.
    wrench: [(f64, f64, f64); 3],
}

impl Coefficients {
    pub(crate) fn new(body: &FishBody) -> Self {
        Self {
            m_u: body.surge_mass(),
            m_v: body.sway_mass(),
            j: body.total_yaw_inertia(),
            half_rho_cu: 0.5 * body.fluid_density * body.drag_area_surge,
            half_rho_cv: 0.5 * body.fluid_density * body.drag_area_sway,
            yaw_drag: body.yaw_drag,
            yaw_speed: body.yaw_damping_speed,
            tau: body.spin_up_tau,
            wrench: [body.fins[0].wrench(), body.fins[1].wrench(), body.fins[2].wrench()],
        }
    }

    fn derivative(&self, s: &[f64; DIM], command: &[f64; 3]) -> [f64; DIM] {
        let [_, _, theta, u, v, r, l0, l1, l2] = *s;
        let levels = [l0, l1, l2];
        let (mut fx, mut fy, mut n) = (0.0, 0.0, 0.0);
        for (lvl, w) in levels.iter().zip(&self.wrench) {
            fx += lvl * w.0;
            fy += lvl * w.1;
            n += lvl * w.2;
        }
        let (sin, cos) = theta.sin_cos();
        let du = (fx + self.m_v * v * r - self.half_rho_cu * u.abs() * u) / self.m_u;
        let dv = (fy - self.m_u * u * r - self.half_rho_cv * v.abs() * v) / self.m_v;
        let dr = (n
            - (self.m_v - self.m_u) * u * v
            - self.yaw_drag * r.abs() * r
            - self.yaw_speed * u.abs() * r)
            / self.j;
        let lag = |i: usize| {
            if self.tau > 0.0 {
                (command[i] - levels[i]) / self.tau
            } else {
                0.0
            }
        };
        [
            u * cos - v * sin,
            u * sin + v * cos,
            r,
            du,
            dv,
            dr,
            lag(0),
            lag(1),
            lag(2),
        ]
    }

    /// One RK4 step; `t` is left for the caller to set.
    pub(crate) fn rk4(&self, state: &SimState, fins: FinActivation, dt: f64) -> SimState {
        let command = fins.levels();
        let mut y0 = state.to_vec();
        if self.tau <= 0.0 {
            y0[6..9].copy_from_slice(&command);
        }
        let add = |y: &[f64; DIM], k: &[f64; DIM], h: f64| -> [f64; DIM] {
            let mut out = *y;
            for i in 0..DIM {
                out[i] += h * k[i];
            }
            out
        };
        let k1 = self.derivative(&y0, &command);
        let k2 = self.derivative(&add(&y0, &k1, 0.5 * dt), &command);
        let k3 = self.derivative(&add(&y0, &k2, 0.5 * dt), &command);
        let k4 = self.derivative(&add(&y0, &k3, dt), &command);
        let mut y1 = y0;
        for i in 0..DIM {
            y1[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        SimState::from_vec(state.t, y1)
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= MAX_DT {
        Ok(())
    } else {
        Err(Error::validation("dt", format!("must lie in (0, {MAX_DT}] s, got {dt}")))
    }
}

/// Advance `state` by one RK4 step of `dt` with the given fins commanded.
pub fn step(state: &SimState, body: &FishBody, fins: FinActivation, dt: f64) -> Result<SimState> {
    check_dt(dt)?;
    let mut next = Coefficients::new(body).rk4(state, fins, dt);
    next.t = state.t + dt;
    if let Some(component) = next.first_non_finite() {
        return Err(Error::NonFinite { component, t: next.t });
    }
    Ok(next)
}

/// ½(M_u u² + M_v v² + J r²), J.
pub fn kinetic_energy(state: &SimState, body: &FishBody) -> f64 {
    0.5 * (body.surge_mass() * state.u * state.u
        + body.sway_mass() * state.v * state.v
        + body.total_yaw_inertia() * state.r * state.r)
}

/// Steady surge speed for thrust `force` against quadratic drag alone.
pub fn terminal_surge_speed(force: f64, fluid_density: f64, drag_area: f64) -> f64 {
    (2.0 * force / (fluid_density * drag_area)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locomotion::body::FinRole;

    #[test]
    fn rest_is_equilibrium() {
        let body = FishBody::default();
        let s0 = SimState::at_rest(0.1, -0.2, 0.3);
        let s1 = step(&s0, &body, FinActivation::OFF, 1e-3).unwrap();
        assert_eq!(s1.t, 1e-3);
        assert_eq!(SimState { t: 0.0, ..s1 }, s0);
    }

    #[test]
    fn caudal_only_stays_on_centreline() {
        let body = FishBody::default();
        let mut s = SimState::default();
        for _ in 0..3000 {
            s = step(&s, &body, FinActivation::new(false, false, true), 2e-3).unwrap();
            assert_eq!(s.v, 0.0);
            assert_eq!(s.r, 0.0);
        }
        assert!(s.u > 0.0);
    }

    #[test]
    fn steady_surge_force_balance() {
        // F = ½ ρ C_u u² with F = 4 mN, C_u = 1.1e-3 m²
        let u = terminal_surge_speed(0.004, 1000.0, 1.1e-3);
        assert!((u - 0.0853).abs() < 5e-4, "{u}");

        let mut body = FishBody {
            drag_area_surge: 1.1e-3,
            ..FishBody::default()
        };
        body.fin_mut(FinRole::Caudal).thrust_magnitude = 0.004;
        let mut s = SimState::default();
        for _ in 0..15_000 {
            s = step(&s, &body, FinActivation::new(false, false, true), 2e-3).unwrap();
        }
        assert!((s.u / u - 1.0).abs() < 1e-6, "{} vs {u}", s.u);
    }

    #[test]
    fn dt_bounds() {
        let body = FishBody::default();
        let s = SimState::default();
        assert!(step(&s, &body, FinActivation::OFF, 0.0).is_err());
        assert!(step(&s, &body, FinActivation::OFF, 6e-3).is_err());
        assert!(step(&s, &body, FinActivation::OFF, 5e-3).is_ok());
    }

    #[test]
    fn non_finite_is_named() {
        let body = FishBody::default();
        let s = SimState {
            v: f64::NAN,
            ..Default::default()
        };
        match step(&s, &body, FinActivation::OFF, 1e-3) {
            Err(Error::NonFinite { component, .. }) => assert!(["x", "y", "u", "v", "r"].contains(&component)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coasting_loses_energy() {
        let body = FishBody::default();
        let mut s = SimState {
            u: 0.1,
            v: -0.03,
            r: 0.8,
            ..Default::default()
        };
        let mut e = kinetic_energy(&s, &body);
        for _ in 0..5000 {
            s = step(&s, &body, FinActivation::OFF, 1e-3).unwrap();
            let e1 = kinetic_energy(&s, &body);
            assert!(e1 <= e, "{e1} > {e}");
            e = e1;
        }
    }
}

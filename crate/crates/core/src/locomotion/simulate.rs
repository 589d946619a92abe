use std::io::{Read, Write};

use super::body::{FinActivation, FishBody};
use super::collision::{check_collision, CollisionEvent, Obstacle};
use super::dynamics::{check_dt, Coefficients};
use super::scenario::Scenario;
use super::state::SimState;
use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64};

/// Fixed-step integrator with collision handling.
///
/// Both the offline `simulate` and the interactive server drive physics
/// through this type, which is what makes a recorded command log replay
/// bit-identically.
#[derive(Debug, Clone)]
pub struct Stepper {
    coeffs: Coefficients,
    body: FishBody,
    obstacles: Vec<Obstacle>,
    dt: f64,
    tick: u64,
    state: SimState,
    in_contact: Vec<bool>,
}

impl Stepper {
    pub fn new(body: &FishBody, obstacles: &[Obstacle], initial: SimState, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        body.validate()?;
        for (i, o) in obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        let mut state = initial;
        state.t = 0.0;
        Ok(Self {
            coeffs: Coefficients::new(body),
            body: body.clone(),
            obstacles: obstacles.to_vec(),
            dt,
            tick: 0,
            state,
            in_contact: vec![false; obstacles.len()],
        })
    }

    pub fn for_scenario(scenario: &Scenario, body: &FishBody) -> Result<Self> {
        scenario.validate()?;
        Self::new(body, &scenario.obstacles, scenario.initial, scenario.dt)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Steps taken so far.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn body(&self) -> &FishBody {
        &self.body
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    /// Advance one step with `fins` commanded. Returns collision events for
    /// contacts that began during this step.
    pub fn advance(&mut self, fins: FinActivation) -> Result<Vec<CollisionEvent>> {
        let mut next = self.coeffs.rk4(&self.state, fins, self.dt);
        self.tick += 1;
        next.t = self.tick as f64 * self.dt;
        if let Some(component) = next.first_non_finite() {
            return Err(Error::NonFinite { component, t: next.t });
        }
        let contacts = check_collision(&mut next, &self.body, &self.obstacles);
        let mut touching = vec![false; self.obstacles.len()];
        let mut onset = Vec::new();
        for ev in contacts {
            touching[ev.obstacle] = true;
            if !self.in_contact[ev.obstacle] {
                onset.push(ev);
            }
        }
        self.in_contact = touching;
        self.state = next;
        Ok(onset)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub states: Vec<SimState>,
    pub events: Vec<CollisionEvent>,
}

/// Integrate `scenario` from its initial state, honoring the fin schedule.
pub fn simulate(scenario: &Scenario, body: &FishBody) -> Result<Trajectory> {
    let mut stepper = Stepper::for_scenario(scenario, body)?;
    let n = scenario.steps();
    let mut traj = Trajectory {
        states: Vec::with_capacity(n / scenario.decimation + 2),
        events: Vec::new(),
    };
    traj.states.push(*stepper.state());
    for k in 0..n {
        let fins = scenario.fins_at(k as f64 * scenario.dt);
        traj.events.extend(stepper.advance(fins)?);
        if (k + 1) % scenario.decimation == 0 || k + 1 == n {
            traj.states.push(*stepper.state());
        }
    }
    Ok(traj)
}

pub const TRAJECTORY_CSV_HEADER: [&str; 10] = [
    "t_s", "x_m", "y_m", "theta_rad", "u_mps", "v_mps", "r_radps", "fin_l", "fin_r", "fin_c",
];

/// Write states as CSV. The fin columns hold spin-up levels in [0, 1].
pub fn write_trajectory_csv<W: Write>(states: &[SimState], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(TRAJECTORY_CSV_HEADER)?;
    for s in states {
        let row = [
            s.t,
            s.x,
            s.y,
            s.theta,
            s.u,
            s.v,
            s.r,
            s.fin_level[0],
            s.fin_level[1],
            s.fin_level[2],
        ];
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing trajectory: {e}")))?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<SimState>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TRAJECTORY_CSV_HEADER) {
        return Err(Error::Parse {
            context: "trajectory csv".into(),
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut states = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 10];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|e| Error::Parse {
                context: format!("trajectory csv row {}", line + 2),
                message: format!("{field:?}: {e}"),
            })?;
        }
        if rec.len() != 10 {
            return Err(Error::Parse {
                context: format!("trajectory csv row {}", line + 2),
                message: format!("expected 10 fields, got {}", rec.len()),
            });
        }
        states.push(SimState {
            t: v[0],
            x: v[1],
            y: v[2],
            theta: v[3],
            u: v[4],
            v: v[5],
            r: v[6],
            fin_level: [v[7], v[8], v[9]],
        });
    }
    Ok(states)
}

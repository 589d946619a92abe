use std::path::Path;

use serde::{Deserialize, Serialize};

use super::body::FinActivation;
use super::collision::Obstacle;
use super::dynamics::check_dt;
use super::state::SimState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// s, inclusive
    pub t_start: f64,
    /// s, exclusive
    pub t_end: f64,
    pub fins: FinActivation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    /// s
    pub duration: f64,
    /// s
    pub dt: f64,
    /// Keep every n-th step in the output trajectory.
    pub decimation: usize,
    pub schedule: Vec<ScheduleEntry>,
    pub obstacles: Vec<Obstacle>,
    pub initial: SimState,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "unnamed".into(),
            description: String::new(),
            duration: 30.0,
            dt: 1e-3,
            decimation: 1,
            schedule: Vec::new(),
            obstacles: Vec::new(),
            initial: SimState::default(),
        }
    }
}

impl Scenario {
    /// Hold one fin triple for the whole run.
    pub fn constant(name: &str, fins: FinActivation, duration: f64) -> Self {
        Self {
            name: name.into(),
            duration,
            schedule: vec![ScheduleEntry {
                t_start: 0.0,
                t_end: duration,
                fins,
            }],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dt(self.dt)?;
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::validation("duration", format!("must be finite and >= 0, got {}", self.duration)));
        }
        if self.decimation == 0 {
            return Err(Error::validation("decimation", "must be at least 1"));
        }
        for (i, e) in self.schedule.iter().enumerate() {
            if !(0.0 <= e.t_start && e.t_start <= e.t_end && e.t_end <= self.duration) {
                return Err(Error::validation(
                    format!("schedule[{i}]"),
                    format!("interval [{}, {}] must lie within [0, {}]", e.t_start, e.t_end, self.duration),
                ));
            }
        }
        for (i, a) in self.schedule.iter().enumerate() {
            for (j, b) in self.schedule.iter().enumerate().skip(i + 1) {
                let shared = a.fins.as_array().iter().zip(b.fins.as_array()).any(|(x, y)| *x && y);
                if shared && a.t_start < b.t_end && b.t_start < a.t_end {
                    return Err(Error::validation(
                        format!("schedule[{j}]"),
                        format!("overlaps schedule[{i}] for the same fin"),
                    ));
                }
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        if let Some(c) = self.initial.first_non_finite() {
            return Err(Error::validation(format!("initial.{c}"), "must be finite"));
        }
        Ok(())
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Commanded fins at time `t`.
    pub fn fins_at(&self, t: f64) -> FinActivation {
        let mut out = [false; 3];
        for e in &self.schedule {
            if e.t_start <= t && t < e.t_end {
                for (o, on) in out.iter_mut().zip(e.fins.as_array()) {
                    *o |= on;
                }
            }
        }
        FinActivation::new(out[0], out[1], out[2])
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
            context: "scenario".into(),
            message: e.to_string(),
        })?;
        let s = file.into_scenario();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                context: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ScenarioFile::from_scenario(self)).expect("scenario serializes")
    }
}

/// On-disk scenario layout with unit-suffixed keys.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    duration_s: f64,
    #[serde(default = "default_dt_ms")]
    dt_ms: f64,
    #[serde(default = "one")]
    decimation: usize,
    #[serde(default)]
    initial: InitialFile,
    #[serde(default)]
    schedule: Vec<ScheduleFile>,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
}

fn default_dt_ms() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct InitialFile {
    x_m: f64,
    y_m: f64,
    theta_rad: f64,
    u_mps: f64,
    v_mps: f64,
    r_radps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    t_start_s: f64,
    t_end_s: f64,
    #[serde(default)]
    left: bool,
    #[serde(default)]
    right: bool,
    #[serde(default)]
    caudal: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    x_m: f64,
    y_m: f64,
    radius_m: f64,
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        let i = self.initial;
        Scenario {
            name: self.name,
            description: self.description,
            duration: self.duration_s,
            dt: self.dt_ms * 1e-3,
            decimation: self.decimation,
            schedule: self
                .schedule
                .into_iter()
                .map(|e| ScheduleEntry {
                    t_start: e.t_start_s,
                    t_end: e.t_end_s,
                    fins: FinActivation::new(e.left, e.right, e.caudal),
                })
                .collect(),
            obstacles: self
                .obstacles
                .into_iter()
                .map(|o| Obstacle::new(o.x_m, o.y_m, o.radius_m))
                .collect(),
            initial: SimState {
                t: 0.0,
                x: i.x_m,
                y: i.y_m,
                theta: i.theta_rad,
                u: i.u_mps,
                v: i.v_mps,
                r: i.r_radps,
                fin_level: [0.0; 3],
            },
        }
    }

    fn from_scenario(s: &Scenario) -> Self {
        let i = &s.initial;
        Self {
            name: s.name.clone(),
            description: s.description.clone(),
            duration_s: s.duration,
            dt_ms: s.dt * 1e3,
            decimation: s.decimation,
            initial: InitialFile {
                x_m: i.x,
                y_m: i.y,
                theta_rad: i.theta,
                u_mps: i.u,
                v_mps: i.v,
                r_radps: i.r,
            },
            schedule: s
                .schedule
                .iter()
                .map(|e| ScheduleFile {
                    t_start_s: e.t_start,
                    t_end_s: e.t_end,
                    left: e.fins.left,
                    right: e.fins.right,
                    caudal: e.fins.caudal,
                })
                .collect(),
            obstacles: s
                .obstacles
                .iter()
                .map(|o| ObstacleFile {
                    x_m: o.center.0,
                    y_m: o.center.1,
                    radius_m: o.radius,
                })
                .collect(),
        }
    }
}

/// Interactive scenarios known by name. Obstacle layouts are made up for
/// steering practice and carry no measured geometry.
pub const BUILTIN_SCENARIOS: [&str; 3] = ["open_water", "floating_balls", "measurement_post"];

pub fn builtin(name: &str) -> Option<Scenario> {
    let base = Scenario {
        name: name.into(),
        duration: 0.0,
        ..Default::default()
    };
    match name {
        "open_water" => Some(Scenario {
            description: "Open tank without obstacles.".into(),
            ..base
        }),
        "floating_balls" => {
            let pitch = 0.18;
            let mut obstacles = Vec::with_capacity(9);
            for row in 0..3 {
                for col in 0..3 {
                    obstacles.push(Obstacle::new(
                        0.25 + pitch * col as f64,
                        pitch * (row as f64 - 1.0),
                        0.03,
                    ));
                }
            }
            Some(Scenario {
                description: "Illustrative 3x3 grid of 30 mm balls at 0.18 m pitch. Layout is invented."
                    .into(),
                obstacles,
                initial: SimState::at_rest(0.0, pitch / 2.0, 0.0),
                ..base
            })
        }
        "measurement_post" => Some(Scenario {
            description: "Single 50 mm post ahead of the start. Layout is invented.".into(),
            obstacles: vec![Obstacle::new(0.3, 0.0, 0.05)],
            ..base
        }),
        _ => None,
    }
}

/// Fin combinations of the steady-swimming reference runs, by name.
pub const TARGET_SCENARIOS: [(&str, FinActivation); 6] = [
    ("caudal_only", FinActivation { left: false, right: false, caudal: true }),
    ("all_fins", FinActivation { left: true, right: true, caudal: true }),
    ("left_pectoral_only", FinActivation { left: true, right: false, caudal: false }),
    ("right_pectoral_only", FinActivation { left: false, right: true, caudal: false }),
    ("caudal_left", FinActivation { left: true, right: false, caudal: true }),
    ("caudal_right", FinActivation { left: false, right: true, caudal: true }),
];

/// Default length of a steady-swimming run, s.
pub const TARGET_DURATION: f64 = 30.0;

/// Steady-swimming run from rest with one fin combination held throughout.
pub fn target_scenario(name: &str, duration: f64, dt: f64) -> Option<Scenario> {
    let (_, fins) = TARGET_SCENARIOS.iter().find(|(n, _)| *n == name)?;
    let mut s = Scenario::constant(name, *fins, duration);
    s.dt = dt;
    Some(s)
}

use serde::Serialize;

use super::state::SimState;
use crate::error::{Error, Result};

pub const DEFAULT_STEADY_FRACTION: f64 = 0.3;
/// Below this |yaw rate| (rad/s) the path is treated as straight.
pub const STRAIGHT_YAW_RATE: f64 = 1e-3;
/// Relative band used for time to steady.
pub const STEADY_BAND: f64 = 0.02;
/// Shortest trajectory accepted by [`summarize`], s.
pub const MIN_SPAN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    /// m/s
    pub steady_speed: f64,
    /// rad/s
    pub steady_yaw_rate: f64,
    /// Circle-fit radius, m. Infinite for straight paths.
    pub turning_radius: f64,
    /// steady_speed / |steady_yaw_rate|, m.
    pub kinematic_radius: f64,
    /// s
    pub time_to_steady: f64,
    /// Samples inside the steady window.
    #[serde(skip)]
    pub path: Vec<SimState>,
}

impl TrajectorySummary {
    pub fn speed_bl_per_s(&self, body_length: f64) -> f64 {
        self.steady_speed / body_length
    }

    pub fn radius_bl(&self, body_length: f64) -> f64 {
        self.turning_radius / body_length
    }

    /// Structured text with SI and BL-normalized values.
    pub fn to_toml_string(&self, body_length: f64) -> String {
        let mut t = toml::Table::new();
        let mut put = |k: &str, v: f64| {
            t.insert(k.into(), toml::Value::Float(v));
        };
        put("steady_speed_mps", self.steady_speed);
        put("steady_speed_bl_per_s", self.speed_bl_per_s(body_length));
        put("steady_yaw_rate_radps", self.steady_yaw_rate);
        put("turning_radius_m", self.turning_radius);
        put("turning_radius_bl", self.radius_bl(body_length));
        put("kinematic_radius_m", self.kinematic_radius);
        put("time_to_steady_s", self.time_to_steady);
        put("body_length_m", body_length);
        t.insert("window_samples".into(), toml::Value::Integer(self.path.len() as i64));
        toml::to_string(&t).expect("summary serializes")
    }
}

/// Steady-state metrics over the final `window_fraction` of a trajectory.
pub fn summarize(states: &[SimState], window_fraction: f64) -> Result<TrajectorySummary> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::validation("window_fraction", format!("must lie in (0, 1], got {window_fraction}")));
    }
    let (first, last) = match (states.first(), states.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::validation("trajectory", "is empty")),
    };
    let span = last.t - first.t;
    if !(span > MIN_SPAN) {
        return Err(Error::validation("trajectory", format!("spans {span} s, need more than {MIN_SPAN} s")));
    }
    let t_window = last.t - window_fraction * span;
    let start = states.partition_point(|s| s.t < t_window);
    let window = &states[start..];
    if window.len() < 3 {
        return Err(Error::validation(
            "trajectory",
            format!("steady window holds {} samples, need at least 3", window.len()),
        ));
    }
    let n = window.len() as f64;
    let steady_speed = window.iter().map(SimState::speed).sum::<f64>() / n;
    let steady_yaw_rate = window.iter().map(|s| s.r).sum::<f64>() / n;
    let turning_radius = if steady_yaw_rate.abs() < STRAIGHT_YAW_RATE {
        f64::INFINITY
    } else {
        let pts: Vec<(f64, f64)> = window.iter().map(|s| (s.x, s.y)).collect();
        fit_circle(&pts).map(|(_, _, r)| r).unwrap_or(f64::INFINITY)
    };
    let kinematic_radius = if steady_yaw_rate == 0.0 {
        f64::INFINITY
    } else {
        steady_speed / steady_yaw_rate.abs()
    };

    let band = STEADY_BAND * steady_speed;
    let time_to_steady = match states.iter().rposition(|s| (s.speed() - steady_speed).abs() > band) {
        None => first.t,
        Some(i) if i + 1 < states.len() => states[i + 1].t,
        Some(i) => states[i].t,
    };

    Ok(TrajectorySummary {
        steady_speed,
        steady_yaw_rate,
        turning_radius,
        kinematic_radius,
        time_to_steady,
        path: window.to_vec(),
    })
}

/// Algebraic least-squares circle through `points`, returned as
/// (centre x, centre y, radius). `None` when the points are collinear or
/// fewer than three.
pub fn fit_circle(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    // Centred coordinates: minimise Σ(x² + y² − 2ax − 2by − c)².
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (x, y) = (x - mx, y - my);
        let z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    // With centred data Σx = Σy = 0, so c decouples: c = Σz/n − 0.
    let det = sxx * syy - sxy * sxy;
    let scale = (sxx * syy).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    let a = 0.5 * (sxz * syy - syz * sxy) / det;
    let b = 0.5 * (syz * sxx - sxz * sxy) / det;
    let r2 = a * a + b * b + sz / n;
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    Some((a + mx, b + my, r2.sqrt()))
}

//! Command log format and offline replay.
//!
//! One JSON object per line: `{"tick":N,"message":{...}}`, where `message`
//! is a client message exactly as on the wire and `tick` is the number of
//! physics steps completed when the command was accepted. A command at
//! tick N governs step N onwards. The first line is always a `reset`.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use vibrafin::locomotion::{simulate, FinActivation, FishBody, ScheduleEntry, Trajectory};

use crate::engine::{resolve_scenario, DT};
use crate::protocol::ClientMessage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub tick: u64,
    pub message: ClientMessage,
}

impl LogEntry {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("log entry serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("replay log line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay log: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] vibrafin::Error),
}

pub fn read_log<R: BufRead>(input: R) -> Result<Vec<LogEntry>, ReplayError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry = serde_json::from_str(&line).map_err(|e| ReplayError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if out.last().is_some_and(|prev: &LogEntry| prev.tick > entry.tick) {
            return Err(ReplayError::Parse {
                line: i + 1,
                message: "ticks must not decrease".into(),
            });
        }
        out.push(entry);
    }
    Ok(out)
}

/// Re-run the last episode of `log` through [`simulate`] up to `end_tick`.
///
/// Pause, resume and rate changes do not touch physics (ticks only count
/// physics steps), so only the final reset and the fin commands after it
/// shape the trajectory. The result holds one state per tick from the
/// reset onwards.
pub fn replay(log: &[LogEntry], body: &FishBody, end_tick: u64) -> Result<Trajectory, ReplayError> {
    let start = log
        .iter()
        .rposition(|e| matches!(e.message, ClientMessage::Reset { .. }))
        .ok_or_else(|| ReplayError::Invalid("no reset command".into()))?;
    let ClientMessage::Reset { scenario } = &log[start].message else {
        unreachable!()
    };
    let mut sc = resolve_scenario(scenario).map_err(|m| ReplayError::Invalid(m.to_json()))?;
    let reset_tick = log[start].tick;
    if end_tick < reset_tick {
        return Err(ReplayError::Invalid(format!("end tick {end_tick} precedes reset at {reset_tick}")));
    }
    // Fin commands issued before the reset stay in force after it.
    let mut fins = FinActivation::OFF;
    for e in &log[..start] {
        if let ClientMessage::SetFins { left, right, caudal } = e.message {
            fins = FinActivation::new(left, right, caudal);
        }
    }
    let mut changes: Vec<(u64, FinActivation)> = vec![(0, fins)];
    for e in &log[start + 1..] {
        if e.tick > end_tick {
            break;
        }
        if let ClientMessage::SetFins { left, right, caudal } = e.message {
            let rel = e.tick - reset_tick;
            let f = FinActivation::new(left, right, caudal);
            match changes.last_mut() {
                Some(last) if last.0 == rel => last.1 = f,
                _ => changes.push((rel, f)),
            }
        }
    }
    let steps = end_tick - reset_tick;
    sc.duration = steps as f64 * DT;
    sc.schedule = changes
        .iter()
        .enumerate()
        .map(|(i, &(from, fins))| {
            let to = changes.get(i + 1).map_or(steps, |c| c.0);
            ScheduleEntry {
                t_start: from as f64 * DT,
                t_end: to as f64 * DT,
                fins,
            }
        })
        .filter(|e| e.t_start < e.t_end && e.fins != FinActivation::OFF)
        .collect();
    Ok(simulate(&sc, body)?)
}

//! Deterministic lockstep core. No clocks or sockets: the network layer
//! decides when to call `step` and `snapshot`, so everything here can be
//! driven tick by tick from tests.

use std::io::Write;

use vibrafin::locomotion::{builtin, CollisionEvent, FinActivation, FishBody, Scenario, SimState, Stepper};

use crate::protocol::{
    ClientMessage, ErrorCode, EventMsg, ScenarioRef, ServerMessage, StateMsg, DEFAULT_SNAPSHOT_RATE,
    MAX_SNAPSHOT_RATE, MIN_SNAPSHOT_RATE,
};
use crate::replay::LogEntry;

/// Physics step, s.
pub const DT: f64 = 1e-3;

/// Resolve a scenario reference the way the server does.
pub fn resolve_scenario(scenario: &ScenarioRef) -> Result<Scenario, ServerMessage> {
    let mut s = match scenario {
        ScenarioRef::Name(name) => builtin(name).ok_or_else(|| {
            ServerMessage::error(ErrorCode::UnknownScenario, format!("no scenario named `{name}`"))
        })?,
        ScenarioRef::Inline(inline) => inline.to_scenario(),
    };
    s.dt = DT;
    s.duration = 0.0;
    s.schedule.clear();
    s.validate()
        .map_err(|e| ServerMessage::error(ErrorCode::InvalidScenario, e.to_string()))?;
    Ok(s)
}

pub struct Engine {
    body: FishBody,
    scenario: Scenario,
    stepper: Stepper,
    fins: FinActivation,
    paused: bool,
    tick: u64,
    snapshot_rate: u32,
    pending_events: Vec<CollisionEvent>,
    log: Vec<LogEntry>,
    sink: Option<Box<dyn Write + Send>>,
    history: Option<Vec<SimState>>,
}

impl Engine {
    /// Start paused-free on `scenario`, logging it as the first command.
    pub fn new(body: FishBody, scenario: &str) -> Result<Self, ServerMessage> {
        let reset = ScenarioRef::Name(scenario.to_string());
        let sc = resolve_scenario(&reset)?;
        let stepper = Stepper::for_scenario(&sc, &body)
            .map_err(|e| ServerMessage::error(ErrorCode::InvalidScenario, e.to_string()))?;
        let mut engine = Self {
            body,
            scenario: sc,
            stepper,
            fins: FinActivation::OFF,
            paused: false,
            tick: 0,
            snapshot_rate: DEFAULT_SNAPSHOT_RATE,
            pending_events: Vec::new(),
            log: Vec::new(),
            sink: None,
            history: None,
        };
        engine.record(ClientMessage::Reset { scenario: reset });
        Ok(engine)
    }

    /// Mirror every logged command to `sink` as JSON lines, starting with
    /// the entries already logged.
    pub fn with_replay_sink(mut self, mut sink: Box<dyn Write + Send>) -> std::io::Result<Self> {
        for entry in &self.log {
            writeln!(sink, "{}", entry.to_json_line())?;
        }
        sink.flush()?;
        self.sink = Some(sink);
        Ok(self)
    }

    /// Keep every physics state, for offline comparison.
    pub fn record_history(mut self) -> Self {
        self.history = Some(vec![*self.stepper.state()]);
        self
    }

    fn record(&mut self, message: ClientMessage) {
        let entry = LogEntry {
            tick: self.tick,
            message,
        };
        if let Some(sink) = self.sink.as_mut() {
            // A broken replay file must not stop the simulation.
            let _ = writeln!(sink, "{}", entry.to_json_line()).and_then(|_| sink.flush());
        }
        self.log.push(entry);
    }

    /// Apply a controller command; it takes effect at the next `step`.
    pub fn command(&mut self, msg: ClientMessage) -> Result<(), ServerMessage> {
        match &msg {
            ClientMessage::Hello { .. } => {
                return Err(ServerMessage::error(ErrorCode::DuplicateHello, "hello is only valid once"))
            }
            ClientMessage::SetFins { left, right, caudal } => self.fins = FinActivation::new(*left, *right, *caudal),
            ClientMessage::SetRate { snapshots_per_s } => {
                if !(MIN_SNAPSHOT_RATE..=MAX_SNAPSHOT_RATE).contains(snapshots_per_s) {
                    return Err(ServerMessage::error(
                        ErrorCode::InvalidRate,
                        format!("snapshots_per_s must lie in [{MIN_SNAPSHOT_RATE}, {MAX_SNAPSHOT_RATE}]"),
                    ));
                }
                self.snapshot_rate = *snapshots_per_s;
            }
            ClientMessage::Pause => self.paused = true,
            ClientMessage::Resume => self.paused = false,
            ClientMessage::Reset { scenario } => {
                let sc = resolve_scenario(scenario)?;
                self.stepper = Stepper::for_scenario(&sc, &self.body)
                    .map_err(|e| ServerMessage::error(ErrorCode::InvalidScenario, e.to_string()))?;
                self.scenario = sc;
                self.pending_events.clear();
                if let Some(h) = self.history.as_mut() {
                    h.clear();
                    h.push(*self.stepper.state());
                }
            }
        }
        self.record(msg);
        Ok(())
    }

    /// Controller left: stop all fins and pause, logged like any command.
    pub fn controller_lost(&mut self) {
        self.command(ClientMessage::set_fins(FinActivation::OFF)).expect("valid command");
        self.command(ClientMessage::Pause).expect("valid command");
    }

    /// One physics tick unless paused. Returns whether physics advanced.
    pub fn step(&mut self) -> Result<bool, ServerMessage> {
        if self.paused {
            return Ok(false);
        }
        match self.stepper.advance(self.fins) {
            Ok(events) => {
                self.tick += 1;
                self.pending_events.extend(events);
                if let Some(h) = self.history.as_mut() {
                    h.push(*self.stepper.state());
                }
                Ok(true)
            }
            Err(e) => {
                self.paused = true;
                Err(ServerMessage::error(ErrorCode::Integration, e.to_string()))
            }
        }
    }

    /// Current state; collision events since the previous snapshot ride along.
    pub fn snapshot(&mut self) -> ServerMessage {
        let s = self.stepper.state();
        ServerMessage::State(StateMsg {
            tick: self.tick,
            t: s.t,
            x: s.x,
            y: s.y,
            theta: s.theta,
            u: s.u,
            v: s.v,
            r: s.r,
            fins: self.fins,
            events: self.pending_events.drain(..).map(|e| EventMsg::from(&e)).collect(),
            scenario: self.scenario.name.clone(),
            paused: self.paused,
        })
    }

    /// Physics ticks since start. Never decreases.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn state(&self) -> &SimState {
        self.stepper.state()
    }

    pub fn fins(&self) -> FinActivation {
        self.fins
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn snapshot_rate(&self) -> u32 {
        self.snapshot_rate
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// States since the last reset, when recording.
    pub fn history(&self) -> Option<&[SimState]> {
        self.history.as_deref()
    }
}

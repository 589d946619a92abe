//! Wire messages. Every frame is one JSON object tagged by `type`.

use serde::{Deserialize, Serialize};
use vibrafin::locomotion::{CollisionEvent, FinActivation, Obstacle, Scenario, SimState};

/// Major protocol version. Clients must send exactly this in `hello`.
pub const PROTOCOL_VERSION: u32 = 1;

pub const MIN_SNAPSHOT_RATE: u32 = 1;
pub const MAX_SNAPSHOT_RATE: u32 = 60;
pub const DEFAULT_SNAPSHOT_RATE: u32 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello { protocol_version: u32 },
    Reset { scenario: ScenarioRef },
    SetFins { left: bool, right: bool, caudal: bool },
    SetRate { snapshots_per_s: u32 },
    Pause,
    Resume,
}

impl ClientMessage {
    pub fn set_fins(fins: FinActivation) -> Self {
        ClientMessage::SetFins {
            left: fins.left,
            right: fins.right,
            caudal: fins.caudal,
        }
    }
}

/// A built-in scenario by name, or an inline layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Inline(InlineScenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenario {
    #[serde(default = "inline_name")]
    pub name: String,
    #[serde(default)]
    pub obstacles: Vec<ObstacleMsg>,
    #[serde(default)]
    pub initial: InitialPose,
}

fn inline_name() -> String {
    "inline".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleMsg {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl InlineScenario {
    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            name: self.name.clone(),
            description: "client-supplied layout".into(),
            duration: 0.0,
            obstacles: self.obstacles.iter().map(|o| Obstacle::new(o.x, o.y, o.radius)).collect(),
            initial: SimState::at_rest(self.initial.x, self.initial.y, self.initial.theta),
            ..Scenario::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub description: String,
    pub obstacles: Vec<ObstacleMsg>,
}

impl ScenarioInfo {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            description: s.description.clone(),
            obstacles: s
                .obstacles
                .iter()
                .map(|o| ObstacleMsg {
                    x: o.center.0,
                    y: o.center.1,
                    radius: o.radius,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Controller,
    Observer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMsg {
    pub t: f64,
    pub obstacle: usize,
    pub contact_x: f64,
    pub contact_y: f64,
}

impl From<&CollisionEvent> for EventMsg {
    fn from(e: &CollisionEvent) -> Self {
        Self {
            t: e.t,
            obstacle: e.obstacle,
            contact_x: e.contact.0,
            contact_y: e.contact.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMsg {
    pub tick: u64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub fins: FinActivation,
    pub events: Vec<EventMsg>,
    pub scenario: String,
    pub paused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        server_version: String,
        protocol_version: u32,
        role: Role,
        scenarios: Vec<ScenarioInfo>,
    },
    State(StateMsg),
    Error {
        code: ErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    VersionMismatch,
    HelloRequired,
    DuplicateHello,
    NotController,
    UnknownScenario,
    InvalidScenario,
    InvalidRate,
    Integration,
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server message serializes")
    }
}

pub fn parse_client(text: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(text)
}

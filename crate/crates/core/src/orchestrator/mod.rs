//! Session control: the mode state machine, gesture-to-command mapping, the tick loop that
//! drives guidance and simulation, session logs, and the wire protocol.
//!
//! The orchestrator runs in `f64`.

mod gestures;
mod log;
mod machine;
mod protocol;
mod queue;
mod session;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use gestures::{map_gesture, DebounceConfig, Debouncer, GestureAction, GestureMap, GestureRule};
pub use log::{read_log, replay, write_log, LogEntry, LogError, SessionLog, LOG_VERSION};
pub use machine::{apply_command, apply_input, ControlState, Effect, MachineInput, Transition};
pub use protocol::{
    decode, encode, Body, ErrorReport, Hello, MessageKind, MetricsReport, ProtocolError, ProtocolMessage,
    SequenceTracker, ServerInfo, TraceChunk, PROTOCOL_NAME, PROTOCOL_VERSION,
};
pub use queue::{Input, InputQueue};
pub use session::{DroneSpec, Session, SessionConfig, SessionError, Snapshot};

use crate::formation::{FormationCommand, ShapeKind};
use crate::geometry::Vector3;
use crate::gesture::GestureClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Armed,
    TrajectoryDraw,
    FreeShape,
    SwarmControl,
    Landing,
}

impl Phase {
    pub const ALL: [Phase; 6] =
        [Phase::Idle, Phase::Armed, Phase::TrajectoryDraw, Phase::FreeShape, Phase::SwarmControl, Phase::Landing];

    /// Airborne phases that accept `land`.
    pub fn is_flying(self) -> bool {
        matches!(self, Phase::Armed | Phase::TrajectoryDraw | Phase::FreeShape | Phase::SwarmControl)
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::Armed => "armed",
            Phase::TrajectoryDraw => "trajectory_draw",
            Phase::FreeShape => "free_shape",
            Phase::SwarmControl => "swarm_control",
            Phase::Landing => "landing",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Back to plain hovering.
    Hover,
    Trajectory,
    FreeShape,
    SwarmControl,
}

impl ControlMode {
    pub const ALL: [ControlMode; 4] =
        [ControlMode::Hover, ControlMode::Trajectory, ControlMode::FreeShape, ControlMode::SwarmControl];

    pub fn phase(self) -> Phase {
        match self {
            ControlMode::Hover => Phase::Armed,
            ControlMode::Trajectory => Phase::TrajectoryDraw,
            ControlMode::FreeShape => Phase::FreeShape,
            ControlMode::SwarmControl => Phase::SwarmControl,
        }
    }
}

/// Continuous input carried by `move`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveTarget {
    /// Drawing pointer, screen pixels.
    Pointer {
        x: f64,
        y: f64,
    },
    /// Swarm centroid target, meters.
    ControlPoint {
        position: Vector3<f64>,
    },
    Formation {
        formation: FormationCommand<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    TakeOff,
    Land,
    SelectMode { mode: ControlMode },
    DrawStart,
    DrawStop,
    Erase,
    SetShape { shape: ShapeKind },
    Confirm,
    Move { target: MoveTarget },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::TakeOff => "take_off",
            Command::Land => "land",
            Command::SelectMode { .. } => "select_mode",
            Command::DrawStart => "draw_start",
            Command::DrawStop => "draw_stop",
            Command::Erase => "erase",
            Command::SetShape { .. } => "set_shape",
            Command::Confirm => "confirm",
            Command::Move { .. } => "move",
        }
    }

    pub fn is_move(&self) -> bool {
        matches!(self, Command::Move { .. })
    }
}

/// Things that happened during a tick, reported in the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    PhaseChanged { from: Phase, to: Phase },
    Rejected { command: String, phase: Phase, reason: String },
    InputIgnored { reason: String },
    DrawingChanged { drawing: bool },
    PathErased,
    TrajectoryDispatched { waypoints: Vec<Vector3<f64>>, duration: f64, start: f64 },
    PlaybackComplete { elapsed: f64 },
    ShapeSelected { shape: ShapeKind },
    TrialCompleted { targets: Vec<Vector3<f64>>, formation: FormationCommand<f64> },
    Landed,
    GestureFired { gesture: GestureClass, command: String },
}

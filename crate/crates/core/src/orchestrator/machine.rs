use serde::{Deserialize, Serialize};

use super::{Command, ControlMode, Event, MoveTarget, Phase};
use crate::formation::ShapeKind;
use crate::trajectory::PixelSample;

/// The discrete part of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlState {
    pub phase: Phase,
    pub drawing: bool,
    /// Pointer samples collected while drawing.
    pub path: Vec<PixelSample<f64>>,
}

impl Default for ControlState {
    fn default() -> Self {
        Self { phase: Phase::Idle, drawing: false, path: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MachineInput {
    Command(Command),
    /// Every drone is on the floor.
    Grounded,
}

/// Work the session must carry out after a transition.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    TakeOff,
    Hover,
    EnterMode(ControlMode),
    StartLanding,
    LandOnFormation,
    DispatchPath(Vec<PixelSample<f64>>),
    SetShape(ShapeKind),
    Move(MoveTarget),
    MotorsOff,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transition {
    pub events: Vec<Event>,
    pub effects: Vec<Effect>,
}

impl Transition {
    fn goto(state: &mut ControlState, to: Phase, effect: Effect) -> Self {
        let from = state.phase;
        state.phase = to;
        if to != Phase::TrajectoryDraw {
            state.drawing = false;
            state.path.clear();
        }
        Self { events: vec![Event::PhaseChanged { from, to }], effects: vec![effect] }
    }

    fn reject(cmd: &Command, phase: Phase, reason: &str) -> Self {
        Self {
            events: vec![Event::Rejected { command: cmd.name().to_string(), phase, reason: reason.to_string() }],
            effects: Vec::new(),
        }
    }

    fn event(event: Event) -> Self {
        Self { events: vec![event], effects: Vec::new() }
    }
}

/// Applies one command at session time `t`. Illegal commands leave the state unchanged and
/// produce a `Rejected` event; `move` inputs outside their phase are dropped silently.
pub fn apply_command(state: &mut ControlState, cmd: &Command, t: f64) -> Transition {
    use Phase::*;
    let phase = state.phase;
    match (phase, cmd) {
        (Idle, Command::TakeOff) => Transition::goto(state, Armed, Effect::TakeOff),
        (_, Command::TakeOff) => Transition::reject(cmd, phase, "take_off is only accepted while idle"),

        (p, Command::Land) if p.is_flying() => Transition::goto(state, Landing, Effect::StartLanding),
        (_, Command::Land) => Transition::reject(cmd, phase, "not flying"),

        (Armed, Command::SelectMode { mode: ControlMode::Hover }) => Transition::reject(cmd, phase, "already hovering"),
        (Armed, Command::SelectMode { mode }) => Transition::goto(state, mode.phase(), Effect::EnterMode(*mode)),
        (TrajectoryDraw | FreeShape | SwarmControl, Command::SelectMode { mode: ControlMode::Hover }) => {
            Transition::goto(state, Armed, Effect::Hover)
        }
        (_, Command::SelectMode { .. }) => Transition::reject(cmd, phase, "modes are selected from armed"),

        (TrajectoryDraw, Command::DrawStart) if !state.drawing => {
            state.drawing = true;
            Transition::event(Event::DrawingChanged { drawing: true })
        }
        (TrajectoryDraw, Command::DrawStop) if state.drawing => {
            state.drawing = false;
            Transition::event(Event::DrawingChanged { drawing: false })
        }
        (TrajectoryDraw, Command::DrawStart) => Transition::reject(cmd, phase, "already drawing"),
        (TrajectoryDraw, Command::DrawStop) => Transition::reject(cmd, phase, "not drawing"),
        (TrajectoryDraw, Command::Erase) => {
            state.path.clear();
            Transition::event(Event::PathErased)
        }
        (TrajectoryDraw, Command::Confirm) => {
            if state.path.len() < 2 {
                return Transition::reject(cmd, phase, "no trajectory drawn");
            }
            let mut tr = Transition::default();
            if state.drawing {
                state.drawing = false;
                tr.events.push(Event::DrawingChanged { drawing: false });
            }
            tr.effects.push(Effect::DispatchPath(std::mem::take(&mut state.path)));
            tr
        }
        (_, Command::DrawStart | Command::DrawStop | Command::Erase) => {
            Transition::reject(cmd, phase, "drawing commands need trajectory mode")
        }

        (FreeShape, Command::SetShape { shape }) => {
            Transition { events: vec![Event::ShapeSelected { shape: *shape }], effects: vec![Effect::SetShape(*shape)] }
        }
        (_, Command::SetShape { .. }) => Transition::reject(cmd, phase, "shapes are chosen in free-shape mode"),
        (FreeShape, Command::Confirm) => Transition::goto(state, Landing, Effect::LandOnFormation),
        (_, Command::Confirm) => Transition::reject(cmd, phase, "nothing to confirm"),

        (TrajectoryDraw, Command::Move { target: MoveTarget::Pointer { x, y } }) => {
            if state.drawing {
                state.path.push(PixelSample::new(*x, *y, t));
            }
            Transition::default()
        }
        (FreeShape, Command::Move { target: target @ MoveTarget::Formation { .. } })
        | (SwarmControl, Command::Move { target: target @ MoveTarget::ControlPoint { .. } }) => {
            Transition { events: Vec::new(), effects: vec![Effect::Move(*target)] }
        }
        (_, Command::Move { .. }) => Transition::default(),
    }
}

pub fn apply_input(state: &mut ControlState, input: &MachineInput, t: f64) -> Transition {
    match input {
        MachineInput::Command(cmd) => apply_command(state, cmd, t),
        MachineInput::Grounded if state.phase == Phase::Landing => {
            let mut tr = Transition::goto(state, Phase::Idle, Effect::MotorsOff);
            tr.events.push(Event::Landed);
            tr
        }
        MachineInput::Grounded => Transition::default(),
    }
}

use serde::{Deserialize, Serialize};

use super::{Command, ControlMode, Phase};
use crate::formation::ShapeKind;
use crate::gesture::GestureClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureAction {
    Command(Command),
    /// `draw_start` when not drawing, `draw_stop` when drawing.
    ToggleDraw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureRule {
    pub gesture: GestureClass,
    pub phases: Vec<Phase>,
    pub action: GestureAction,
}

/// Ordered gesture rules; the first rule matching `(gesture, phase)` wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GestureMap {
    pub rules: Vec<GestureRule>,
}

impl Default for GestureMap {
    fn default() -> Self {
        use GestureClass::*;
        use Phase::*;
        let rule = |gesture, phases: &[Phase], action| GestureRule { gesture, phases: phases.to_vec(), action };
        let cmd = GestureAction::Command;
        let mode = |mode| cmd(Command::SelectMode { mode });
        let shape = |shape| cmd(Command::SetShape { shape });
        GestureMap {
            rules: vec![
                rule(Five, &[Idle], cmd(Command::TakeOff)),
                rule(Five, &[TrajectoryDraw, FreeShape, SwarmControl], mode(ControlMode::Hover)),
                rule(Rock, &[Armed, TrajectoryDraw, FreeShape, SwarmControl], cmd(Command::Land)),
                rule(ThumbsUp, &[TrajectoryDraw, FreeShape], cmd(Command::Confirm)),
                rule(Okay, &[TrajectoryDraw], GestureAction::ToggleDraw),
                rule(Four, &[TrajectoryDraw], cmd(Command::Erase)),
                rule(One, &[Armed], mode(ControlMode::Trajectory)),
                rule(Two, &[Armed], mode(ControlMode::FreeShape)),
                rule(Three, &[Armed], mode(ControlMode::SwarmControl)),
                rule(One, &[FreeShape], shape(ShapeKind::Line)),
                rule(Two, &[FreeShape], shape(ShapeKind::Triangle)),
                rule(Three, &[FreeShape], shape(ShapeKind::Square)),
            ],
        }
    }
}

pub fn map_gesture(map: &GestureMap, gesture: GestureClass, phase: Phase, drawing: bool) -> Option<Command> {
    let rule = map.rules.iter().find(|r| r.gesture == gesture && r.phases.contains(&phase))?;
    Some(match rule.action {
        GestureAction::Command(c) => c,
        GestureAction::ToggleDraw if drawing => Command::DrawStop,
        GestureAction::ToggleDraw => Command::DrawStart,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DebounceConfig {
    /// Seconds a class must persist before it fires.
    pub window: f64,
    /// Classifications below this probability count as no gesture.
    pub min_confidence: f64,
}

impl Default for DebounceConfig {
    fn default() -> Self {
        Self { window: 0.3, min_confidence: 0.8 }
    }
}

/// Fires a gesture once it has been observed on consecutive frames for the debounce window.
/// A held gesture fires once; it must change (or drop out) before it can fire again.
#[derive(Debug, Clone, PartialEq)]
pub struct Debouncer {
    cfg: DebounceConfig,
    candidate: Option<(GestureClass, f64)>,
    fired: bool,
}

impl Debouncer {
    pub fn new(cfg: DebounceConfig) -> Self {
        Self { cfg, candidate: None, fired: false }
    }

    /// Feeds the classification of the frame at time `t`.
    pub fn observe(&mut self, observed: Option<(GestureClass, f64)>, t: f64) -> Option<GestureClass> {
        let g = match observed {
            Some((g, p)) if p >= self.cfg.min_confidence => g,
            _ => {
                self.candidate = None;
                self.fired = false;
                return None;
            }
        };
        match self.candidate {
            Some((c, _)) if c == g => {}
            _ => {
                self.candidate = Some((g, t));
                self.fired = false;
            }
        }
        let (_, since) = self.candidate?;
        if !self.fired && t - since >= self.cfg.window - 1e-9 {
            self.fired = true;
            return Some(g);
        }
        None
    }

    pub fn reset(&mut self) {
        self.candidate = None;
        self.fired = false;
    }
}

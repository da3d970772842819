use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Command;
use crate::gesture::LandmarkFrame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum Input {
    Command { command: Command },
    LandmarkFrame { frame: LandmarkFrame<f64> },
}

impl Input {
    /// Continuous inputs that may be coalesced under back-pressure.
    pub fn is_move(&self) -> bool {
        match self {
            Input::Command { command } => command.is_move(),
            Input::LandmarkFrame { .. } => true,
        }
    }
}

impl From<Command> for Input {
    fn from(command: Command) -> Self {
        Input::Command { command }
    }
}

impl From<LandmarkFrame<f64>> for Input {
    fn from(frame: LandmarkFrame<f64>) -> Self {
        Input::LandmarkFrame { frame }
    }
}

/// Bounded FIFO of pending inputs. When full, the oldest move-type input is dropped to make
/// room; discrete commands are never dropped, even if that means exceeding the bound.
#[derive(Debug, Clone)]
pub struct InputQueue {
    items: VecDeque<Input>,
    capacity: usize,
    coalesced: u64,
}

impl InputQueue {
    pub fn new(capacity: usize) -> Self {
        Self { items: VecDeque::new(), capacity: capacity.max(1), coalesced: 0 }
    }

    pub fn push(&mut self, input: Input) {
        if self.items.len() >= self.capacity {
            if let Some(i) = self.items.iter().position(Input::is_move) {
                self.items.remove(i);
                self.coalesced += 1;
            } else if input.is_move() {
                self.coalesced += 1;
                return;
            }
        }
        self.items.push_back(input);
    }

    /// Appends without applying the bound, for replaying inputs that were already accepted.
    pub fn push_unbounded(&mut self, input: Input) {
        self.items.push_back(input);
    }

    pub fn drain(&mut self) -> Vec<Input> {
        self.items.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Move-type inputs dropped so far.
    pub fn coalesced(&self) -> u64 {
        self.coalesced
    }
}

impl Default for InputQueue {
    fn default() -> Self {
        Self::new(1024)
    }
}

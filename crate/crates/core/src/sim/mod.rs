//! Discrete-time quadrotor approximation: one thrust along the body axis, clamped
//! roll/pitch, discrete PID position control; swarm integration with field guidance.

mod dynamics;
mod pid;
mod swarm;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dynamics::step;
pub use pid::{PidController, PidGains};
pub use swarm::{simulate_swarm, Goal, GuidanceSource, Swarm};
pub use trace::{max_tilt, min_pairwise_distance, read_trace, write_trace, SwarmTrace, TraceFrame, TraceRecord};

use crate::field::FieldError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("non-finite state for drone {id} at t = {t}")]
    NonFiniteState { id: u32, t: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("at least two drones are required")]
    SingleDrone,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("initial positions of drones {0} and {1} coincide")]
    CoincidentStart(u32, u32),
    #[error("expected {expected} goals, got {actual}")]
    GoalCount { expected: usize, actual: usize },
    #[error("trace parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Scalar")]
pub struct SimConfig<T> {
    /// Timestep, seconds.
    pub dt: T,
    pub gravity: T,
    /// kg
    pub mass: T,
    /// Linear drag coefficient, 1/s.
    pub drag: T,
    /// Roll/pitch limit, radians.
    pub tilt_limit: T,
    /// Newtons.
    pub max_thrust: T,
    pub gains: PidGains<T>,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        let mass = T::lit(0.03);
        let gravity = T::lit(9.81);
        Self {
            dt: T::lit(0.01),
            gravity,
            mass,
            drag: T::lit(0.5),
            tilt_limit: T::lit(20.0).to_radians(),
            max_thrust: T::lit(2.0) * mass * gravity,
            gains: PidGains::default(),
        }
    }
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<(), SimError> {
        let (zero, half_pi) = (T::zero(), T::FRAC_PI_2());
        if !(self.dt > zero) || !self.dt.is_finite() {
            return Err(SimError::InvalidConfig("dt must be positive"));
        }
        if !(self.mass > zero) {
            return Err(SimError::InvalidConfig("mass must be positive"));
        }
        if !(self.tilt_limit > zero && self.tilt_limit < half_pi) {
            return Err(SimError::InvalidConfig("tilt limit must lie in (0, pi/2)"));
        }
        if !(self.drag >= zero) || !(self.gravity > zero) {
            return Err(SimError::InvalidConfig("drag and gravity must be non-negative"));
        }
        if !(self.max_thrust > self.mass * self.gravity) {
            return Err(SimError::InvalidConfig("max thrust must exceed hover thrust"));
        }
        self.gains.validate()
    }

    pub fn hover_thrust(&self) -> T {
        self.mass * self.gravity
    }
}

/// Color tag used by targeting tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorTag {
    #[default]
    None,
    Red,
    Green,
    Blue,
    Yellow,
    White,
}

impl ColorTag {
    pub const ALL: [ColorTag; 6] =
        [ColorTag::None, ColorTag::Red, ColorTag::Green, ColorTag::Blue, ColorTag::Yellow, ColorTag::White];

    pub fn name(self) -> &'static str {
        match self {
            ColorTag::None => "none",
            ColorTag::Red => "red",
            ColorTag::Green => "green",
            ColorTag::Blue => "blue",
            ColorTag::Yellow => "yellow",
            ColorTag::White => "white",
        }
    }
}

impl fmt::Display for ColorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColorTag::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown color `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DroneState<T> {
    pub id: u32,
    #[serde(default)]
    pub color: ColorTag,
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
    /// Last commanded thrust, N.
    #[serde(default)]
    pub thrust: T,
}

impl<T: Scalar> DroneState<T> {
    pub fn at_rest(id: u32, position: Vector3<T>) -> Self {
        Self {
            id,
            color: ColorTag::None,
            position,
            velocity: Vector3::zero(),
            roll: T::zero(),
            pitch: T::zero(),
            yaw: T::zero(),
            thrust: T::zero(),
        }
    }

    pub fn with_color(mut self, color: ColorTag) -> Self {
        self.color = color;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.velocity.is_finite()
            && self.roll.is_finite()
            && self.pitch.is_finite()
            && self.yaw.is_finite()
            && self.thrust.is_finite()
    }
}

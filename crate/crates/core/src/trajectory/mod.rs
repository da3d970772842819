//! Drawn-path processing: smoothing, uniform resampling, timing, and tracing-accuracy
//! metrics.

mod filter;
mod metrics;
mod pathfile;
mod resample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{critically_damped_beta, smooth, AlphaBetaTracker};
pub use metrics::{point_to_polyline_distance, tracing_errors, tracing_errors_with, ErrorDirection, TraceErrorReport};
pub use pathfile::{read_path, write_path, PathFile, Units};
pub use resample::{resample_uniform, schedule, TimedWaypoints, Waypoint};

use crate::geometry::Vector3;
use crate::gesture::FlightZone;
use crate::scalar::Scalar;

/// Ordered world-frame points, meters.
pub type WorldPath<T> = Vec<Vector3<T>>;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("path is empty")]
    Empty,
    #[error("path has zero length")]
    DegeneratePath,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("unit mismatch: {0} vs {1}")]
    UnitMismatch(Units, Units),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PixelSample<T> {
    pub x: T,
    pub y: T,
    pub t: T,
}

impl<T: Scalar> PixelSample<T> {
    pub fn new(x: T, y: T, t: T) -> Self {
        Self { x, y, t }
    }
}

/// Pointer or fingertip samples on the drawing screen, pixels, `y` growing downward.
pub type PixelPath<T> = Vec<PixelSample<T>>;

/// Processing constants for drawn trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    /// Position gain of the smoothing tracker.
    pub alpha: f64,
    /// Resample spacing, meters.
    pub spacing: f64,
    /// Flight speed used to time the waypoints, m/s.
    pub speed: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { alpha: 0.7, spacing: 0.05, speed: 0.5 }
    }
}

/// Maps a point of the vertical drawing screen into the zone: screen `x` drives `d_x`,
/// screen `y` (flipped) drives `d_z`, depth is held at the zone's mid-plane.
pub fn screen_to_world<T: Scalar>(x: T, y: T, screen: (T, T), zone: &FlightZone<T>) -> Vector3<T> {
    let half = T::lit(0.5);
    let d = Vector3::new(zone.extent.x * (x / screen.0 - half), T::zero(), zone.extent.z * ((screen.1 - y) / screen.1));
    zone.clamp(zone.origin + d)
}

/// Smooths a drawn pixel path, maps it into the zone, resamples it uniformly and times it.
pub fn process_drawn_path<T: Scalar>(
    raw: &[PixelSample<T>],
    cfg: &TrajectoryConfig,
    screen: (T, T),
    zone: &FlightZone<T>,
) -> Result<TimedWaypoints<T>, PathError> {
    let smoothed = smooth(raw, T::lit(cfg.alpha))?;
    let world: WorldPath<T> = smoothed.iter().map(|s| screen_to_world(s.x, s.y, screen, zone)).collect();
    let uniform = resample_uniform(&world, T::lit(cfg.spacing))?;
    schedule(&uniform, T::lit(cfg.speed))
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, Vector3};
use crate::scalar::Scalar;

/// Exact minimum distance from `p` to the union of the polyline's segments. A single-point
/// polyline is treated as that point.
pub fn point_to_polyline_distance<T: Scalar>(p: &Vector3<T>, polyline: &[Vector3<T>]) -> T {
    match polyline {
        [] => T::infinity(),
        [only] => p.distance(only),
        _ => polyline.windows(2).map(|w| point_segment_distance(p, &w[0], &w[1])).fold(T::infinity(), T::min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDirection {
    /// Samples of the drawn path against the truth polyline.
    #[default]
    DrawnToTruth,
    /// Both directions pooled: drawn samples to truth and truth vertices to drawn.
    Symmetric,
}

/// Tracing-accuracy summary, meters and seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceErrorReport {
    #[serde(rename = "max_error_m")]
    pub max_error: f64,
    #[serde(rename = "mean_error_m")]
    pub mean_error: f64,
    #[serde(rename = "rmse_m")]
    pub rmse: f64,
    #[serde(rename = "time_s")]
    pub duration: f64,
}

impl TraceErrorReport {
    pub fn from_errors(errors: &[f64], duration: f64) -> Self {
        if errors.is_empty() {
            return Self { max_error: 0.0, mean_error: 0.0, rmse: 0.0, duration };
        }
        let n = errors.len() as f64;
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let mean_error = errors.iter().sum::<f64>() / n;
        let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
        // rounding can push mean a hair above rmse or rmse above max
        let rmse = rmse.max(mean_error).min(max_error);
        Self { max_error, mean_error, rmse, duration }
    }
}

impl fmt::Display for TraceErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Max error, m {:.2} | Mean error, m {:.2} | RMSE, m {:.2} | Time, sec {:.2}",
            self.max_error, self.mean_error, self.rmse, self.duration
        )
    }
}

pub fn tracing_errors<T: Scalar>(drawn: &[Vector3<T>], truth: &[Vector3<T>], duration: T) -> TraceErrorReport {
    tracing_errors_with(drawn, truth, duration, ErrorDirection::DrawnToTruth)
}

pub fn tracing_errors_with<T: Scalar>(
    drawn: &[Vector3<T>],
    truth: &[Vector3<T>],
    duration: T,
    direction: ErrorDirection,
) -> TraceErrorReport {
    let mut errors: Vec<f64> = drawn.iter().map(|p| point_to_polyline_distance(p, truth).to_f64_lossy()).collect();
    if direction == ErrorDirection::Symmetric {
        errors.extend(truth.iter().map(|p| point_to_polyline_distance(p, drawn).to_f64_lossy()));
    }
    TraceErrorReport::from_errors(&errors, duration.to_f64_lossy())
}

//! Hand landmark frames and the line-delimited landmark stream format.
//!
//! Keypoint numbering follows the common 21-point hand model: 0 is the wrist, then four
//! points per digit from the base to the tip (thumb 1-4, index 5-8, middle 9-12,
//! ring 13-16, pinky 17-20).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::GestureError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

pub const NUM_LANDMARKS: usize = 21;

pub const WRIST: usize = 0;
pub const THUMB: [usize; 4] = [1, 2, 3, 4];
pub const INDEX: [usize; 4] = [5, 6, 7, 8];
pub const MIDDLE: [usize; 4] = [9, 10, 11, 12];
pub const RING: [usize; 4] = [13, 14, 15, 16];
pub const PINKY: [usize; 4] = [17, 18, 19, 20];

pub const FINGERS: [[usize; 4]; 5] = [THUMB, INDEX, MIDDLE, RING, PINKY];
pub const FINGERTIPS: [usize; 5] = [4, 8, 12, 16, 20];

pub const THUMB_TIP: usize = 4;
pub const INDEX_TIP: usize = 8;
pub const MIDDLE_MCP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Left,
    #[default]
    Right,
}

/// One capture of 21 hand keypoints.
///
/// `x` and `y` are normalized to the screen (`[0, 1]`, `y` growing downward as in image
/// rows); `z` is a unitless depth relative to the wrist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LandmarkFrame<T> {
    #[serde(rename = "t")]
    pub timestamp: T,
    #[serde(rename = "hand", default)]
    pub handedness: Handedness,
    pub points: [Vector3<T>; NUM_LANDMARKS],
}

impl<T: Scalar> LandmarkFrame<T> {
    pub fn new(
        timestamp: T,
        handedness: Handedness,
        points: [Vector3<T>; NUM_LANDMARKS],
    ) -> Result<Self, GestureError> {
        let frame = Self { timestamp, handedness, points };
        frame.validate()?;
        Ok(frame)
    }

    /// Builds a frame from a flat `x0, y0, z0, x1, ...` slice.
    pub fn from_flat(timestamp: T, handedness: Handedness, coords: &[T]) -> Result<Self, GestureError> {
        if coords.len() != NUM_LANDMARKS * 3 {
            return Err(GestureError::LandmarkCount(coords.len() / 3));
        }
        let mut points = [Vector3::zero(); NUM_LANDMARKS];
        for (p, c) in points.iter_mut().zip(coords.chunks_exact(3)) {
            *p = Vector3::new(c[0], c[1], c[2]);
        }
        Self::new(timestamp, handedness, points)
    }

    pub fn validate(&self) -> Result<(), GestureError> {
        if !self.timestamp.is_finite() {
            return Err(GestureError::NonFiniteFeature);
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GestureError::NonFiniteFeature);
            }
            let unit = |v: T| v >= T::zero() && v <= T::one();
            if !unit(p.x) || !unit(p.y) {
                return Err(GestureError::OutOfScreen { index: i });
            }
        }
        Ok(())
    }

    pub fn flat(&self) -> Vec<T> {
        self.points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    /// Image-plane position of keypoint `i` (depth dropped).
    pub fn planar(&self, i: usize) -> Vector3<T> {
        let p = self.points[i];
        Vector3::new(p.x, p.y, T::zero())
    }

    /// Palm size in normalized screen units: wrist to middle-finger MCP, image plane only.
    pub fn palm_size(&self) -> T {
        self.planar(WRIST).distance(&self.planar(MIDDLE_MCP))
    }

    /// Palm size in pixels for a screen of `width` x `height`.
    pub fn palm_size_px(&self, width: T, height: T) -> T {
        let w = self.points[WRIST];
        let m = self.points[MIDDLE_MCP];
        let dx = (m.x - w.x) * width;
        let dy = (m.y - w.y) * height;
        (dx * dx + dy * dy).sqrt()
    }

    /// Palm center: mean of the wrist and the four finger MCP joints, normalized units.
    pub fn palm_center(&self) -> Vector3<T> {
        let ids = [WRIST, INDEX[0], MIDDLE[0], RING[0], PINKY[0]];
        let sum = ids.iter().fold(Vector3::zero(), |acc, &i| acc + self.planar(i));
        sum / T::lit(ids.len() as f64)
    }
}

/// Reads a JSON-lines landmark stream. Blank lines and `#` comments are skipped; timestamps
/// must strictly increase.
pub fn read_landmark_stream<T: Scalar, R: BufRead>(reader: R) -> Result<Vec<LandmarkFrame<T>>, GestureError> {
    let mut frames: Vec<LandmarkFrame<T>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let frame: LandmarkFrame<T> = serde_json::from_str(trimmed)
            .map_err(|e| GestureError::Parse { line: lineno + 1, message: e.to_string() })?;
        frame.validate()?;
        if let Some(prev) = frames.last() {
            if frame.timestamp <= prev.timestamp {
                return Err(GestureError::NonMonotonicTimestamp { line: lineno + 1 });
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn write_landmark_stream<T: Scalar, W: Write>(
    mut writer: W,
    frames: &[LandmarkFrame<T>],
) -> Result<(), GestureError> {
    for f in frames {
        let line = serde_json::to_string(f).map_err(|e| GestureError::Parse { line: 0, message: e.to_string() })?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

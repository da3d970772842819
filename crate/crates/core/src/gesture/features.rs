//! Translation- and scale-invariant hand features.
//!
//! The vector holds 15 joint angles (three per digit) followed by 15 fingertip distances
//! (five tip-to-wrist, ten tip-to-tip) divided by the palm size. Everything is computed in
//! the image plane; the depth coordinate is ignored.

use serde::{Deserialize, Serialize};

use super::landmarks::{LandmarkFrame, FINGERS, FINGERTIPS, WRIST};
use super::GestureError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

pub const NUM_ANGLES: usize = 15;
pub const NUM_DISTANCES: usize = 15;
pub const FEATURE_DIM: usize = NUM_ANGLES + NUM_DISTANCES;

const DEGENERATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    /// Wraps raw values; used for hand-built training sets and model tests.
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn joint_angles(&self) -> &[T] {
        &self.values[..NUM_ANGLES.min(self.values.len())]
    }

    pub fn fingertip_distances(&self) -> &[T] {
        &self.values[NUM_ANGLES.min(self.values.len())..]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Interior angle at `joint` between the bones towards `prev` and `next`; `pi` when straight.
fn joint_angle<T: Scalar>(prev: Vector3<T>, joint: Vector3<T>, next: Vector3<T>, eps: T) -> Result<T, GestureError> {
    let a = prev - joint;
    let b = next - joint;
    let na = a.norm();
    let nb = b.norm();
    if na < eps || nb < eps {
        return Err(GestureError::DegenerateHand);
    }
    // atan2 of |a x b| and a.b is well-conditioned near 0 and pi
    let cross = a.cross(&b).norm();
    Ok(cross.atan2(a.dot(&b)))
}

pub fn extract_features<T: Scalar>(frame: &LandmarkFrame<T>) -> Result<FeatureVector<T>, GestureError> {
    let palm = frame.palm_size();
    let eps = T::lit(DEGENERATE_EPS);
    if !(palm > eps) {
        return Err(GestureError::DegenerateHand);
    }
    let mut values = Vec::with_capacity(FEATURE_DIM);

    let wrist = frame.planar(WRIST);
    for finger in FINGERS {
        let chain =
            [wrist, frame.planar(finger[0]), frame.planar(finger[1]), frame.planar(finger[2]), frame.planar(finger[3])];
        for j in 1..4 {
            values.push(joint_angle(chain[j - 1], chain[j], chain[j + 1], eps * palm)?);
        }
    }

    for &tip in &FINGERTIPS {
        values.push(frame.planar(tip).distance(&wrist) / palm);
    }
    for (i, &a) in FINGERTIPS.iter().enumerate() {
        for &b in &FINGERTIPS[i + 1..] {
            values.push(frame.planar(a).distance(&frame.planar(b)) / palm);
        }
    }
    debug_assert_eq!(values.len(), FEATURE_DIM);

    let fv = FeatureVector { values };
    if !fv.is_finite() {
        return Err(GestureError::NonFiniteFeature);
    }
    Ok(fv)
}

//! Hand-to-flight-zone mapping and palm-size calibration.
//!
//! A hand seen at pixel `(h_x, h_y)` with palm size `h_s` maps to zone-relative offsets
//!
//! ```text
//! d_x = L_x (h_x / F_x - 1/2)
//! d_y = L_y (h_s / h_s_max - 1/2)
//! d_z = L_z (F_y - h_y) / F_y
//! ```
//!
//! `h_y` is an image-row coordinate (growing downward), so it is flipped to make raising the
//! hand raise the drones. `h_s` is clamped into the calibrated range first.

use serde::{Deserialize, Serialize};

use super::landmarks::LandmarkFrame;
use super::GestureError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

pub const MIN_CALIBRATION_FRAMES: usize = 30;
pub const MIN_CALIBRATION_RATIO: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PalmCalibration<T> {
    /// Largest palm size (hand nearest the camera), pixels.
    pub palm_max: T,
    /// Smallest palm size, pixels.
    pub palm_min: T,
    /// Screen resolution `(F_x, F_y)`, pixels.
    pub screen: (T, T),
}

impl<T: Scalar> PalmCalibration<T> {
    pub fn validate(&self) -> Result<(), GestureError> {
        if !(self.palm_min > T::zero()) {
            return Err(GestureError::InvalidCalibration("palm_min must be positive"));
        }
        if !(self.palm_min < self.palm_max) {
            return Err(GestureError::InvalidCalibration("palm_min must be below palm_max"));
        }
        if !(self.screen.0 > T::zero() && self.screen.1 > T::zero()) {
            return Err(GestureError::InvalidCalibration("screen size must be positive"));
        }
        Ok(())
    }
}

/// Flight zone: extents `(L_x, L_y, L_z)` around `origin`, which sits at the center of the
/// zone floor. Points span `origin + [-L_x/2, L_x/2] x [-L_y/2, L_y/2] x [0, L_z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FlightZone<T> {
    pub extent: Vector3<T>,
    #[serde(default = "Vector3::zero")]
    pub origin: Vector3<T>,
}

impl<T: Scalar> FlightZone<T> {
    pub fn new(extent: Vector3<T>, origin: Vector3<T>) -> Self {
        Self { extent, origin }
    }

    pub fn is_valid(&self) -> bool {
        self.extent.x > T::zero() && self.extent.y > T::zero() && self.extent.z > T::zero()
    }

    pub fn min_corner(&self) -> Vector3<T> {
        let h = T::lit(0.5);
        self.origin + Vector3::new(-h * self.extent.x, -h * self.extent.y, T::zero())
    }

    pub fn max_corner(&self) -> Vector3<T> {
        let h = T::lit(0.5);
        self.origin + Vector3::new(h * self.extent.x, h * self.extent.y, self.extent.z)
    }

    /// Volumetric center of the zone.
    pub fn center(&self) -> Vector3<T> {
        self.origin + Vector3::new(T::zero(), T::zero(), T::lit(0.5) * self.extent.z)
    }

    pub fn clamp(&self, p: Vector3<T>) -> Vector3<T> {
        let lo = self.min_corner();
        let hi = self.max_corner();
        Vector3::new(p.x.max(lo.x).min(hi.x), p.y.max(lo.y).min(hi.y), p.z.max(lo.z).min(hi.z))
    }

    pub fn contains(&self, p: &Vector3<T>) -> bool {
        let lo = self.min_corner();
        let hi = self.max_corner();
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z
    }
}

pub fn hand_to_world<T: Scalar>(
    h_x: T,
    h_y: T,
    h_s: T,
    calib: &PalmCalibration<T>,
    zone: &FlightZone<T>,
) -> Result<Vector3<T>, GestureError> {
    calib.validate()?;
    if !zone.is_valid() {
        return Err(GestureError::InvalidCalibration("flight zone extents must be positive"));
    }
    let half = T::lit(0.5);
    let (fx, fy) = calib.screen;
    let h_s = h_s.max(calib.palm_min).min(calib.palm_max);
    let d = Vector3::new(
        zone.extent.x * (h_x / fx - half),
        zone.extent.y * (h_s / calib.palm_max - half),
        zone.extent.z * ((fy - h_y) / fy),
    );
    Ok(zone.clamp(zone.origin + d))
}

/// Inverse of [`hand_to_world`] for points inside the zone: recovers `(h_x, h_y, h_s)`.
pub fn world_to_hand<T: Scalar>(p: Vector3<T>, calib: &PalmCalibration<T>, zone: &FlightZone<T>) -> (T, T, T) {
    let half = T::lit(0.5);
    let d = p - zone.origin;
    let (fx, fy) = calib.screen;
    let h_x = fx * (d.x / zone.extent.x + half);
    let h_s = calib.palm_max * (d.y / zone.extent.y + half);
    let h_y = fy - fy * d.z / zone.extent.z;
    (h_x, h_y, h_s)
}

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Palm-size range from a calibration recording: 1st and 99th percentiles of the observed
/// palm sizes (pixels).
pub fn calibrate_palm<T: Scalar>(
    frames: &[LandmarkFrame<T>],
    screen: (T, T),
) -> Result<PalmCalibration<T>, GestureError> {
    if frames.len() < MIN_CALIBRATION_FRAMES {
        return Err(GestureError::InsufficientFrames { needed: MIN_CALIBRATION_FRAMES, got: frames.len() });
    }
    let mut sizes: Vec<f64> = frames.iter().map(|f| f.palm_size_px(screen.0, screen.1).to_f64_lossy()).collect();
    sizes.sort_by(f64::total_cmp);
    let lo = percentile(&sizes, 0.01);
    let hi = percentile(&sizes, 0.99);
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(lo > 0.0) {
        return Err(GestureError::DegenerateHand);
    }
    if ratio < MIN_CALIBRATION_RATIO {
        return Err(GestureError::InsufficientRange { ratio });
    }
    let calib = PalmCalibration { palm_max: T::lit(hi), palm_min: T::lit(lo), screen };
    calib.validate()?;
    Ok(calib)
}

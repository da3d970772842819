//! Synthetic hand skeletons for the eight gestures.
//!
//! Each gesture is a flexion pattern over a fixed skeleton: extended digits stay straight,
//! folded digits bend out of the image plane (and sweep slightly towards the palm), so
//! their projected bones shorten and fold back. Samples are placed at a random position,
//! size, in-plane rotation and handedness, then perturbed with Gaussian keypoint noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::LabeledFrame;
use super::landmarks::{Handedness, LandmarkFrame, NUM_LANDMARKS};
use super::GestureClass;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

/// Where and how large a synthesized hand appears on screen.
#[derive(Debug, Clone, PartialEq)]
pub struct HandPlacement {
    /// Wrist position, normalized screen coordinates (`y` down).
    pub wrist: (f64, f64),
    /// Wrist to middle-MCP distance, normalized screen units.
    pub palm_size: f64,
    /// In-plane rotation, radians, counter-clockwise as seen on screen.
    pub rotation: f64,
    pub handedness: Handedness,
}

impl Default for HandPlacement {
    fn default() -> Self {
        Self { wrist: (0.5, 0.75), palm_size: 0.15, rotation: 0.0, handedness: Handedness::Right }
    }
}

#[derive(Clone, Copy)]
struct Digit {
    base: (f64, f64),
    bones: [f64; 3],
}

// Hand-local frame: u to the right, v up, wrist at the origin, unit palm size.
const DIGITS: [Digit; 5] = [
    Digit { base: (-0.30, 0.22), bones: [0.38, 0.32, 0.26] },
    Digit { base: (-0.30, 0.92), bones: [0.45, 0.27, 0.22] },
    Digit { base: (0.0, 1.0), bones: [0.50, 0.30, 0.24] },
    Digit { base: (0.26, 0.94), bones: [0.46, 0.28, 0.22] },
    Digit { base: (0.48, 0.82), bones: [0.36, 0.22, 0.20] },
];

#[derive(Clone, Copy)]
struct Pose {
    /// Out-of-plane bend per joint, radians.
    flex: [f64; 3],
    /// In-plane sweep per joint, radians, positive towards +u.
    sweep: [f64; 3],
}

const STRAIGHT: Pose = Pose { flex: [0.10, 0.10, 0.05], sweep: [0.0; 3] };
const THUMB_FOLDED: Pose = Pose { flex: [0.30, 0.40, 0.30], sweep: [0.50, 0.60, 0.40] };
const THUMB_HALF: Pose = Pose { flex: [0.20, 0.30, 0.20], sweep: [0.25, 0.35, 0.30] };
const INDEX_HALF: Pose = Pose { flex: [0.60, 1.00, 0.70], sweep: [0.05, 0.05, 0.05] };

fn curled(digit: usize) -> Pose {
    let s = match digit {
        1 => 0.12,
        2 => 0.05,
        _ => -0.12,
    };
    Pose { flex: [1.20, 1.70, 1.00], sweep: [s; 3] }
}

fn pose_for(gesture: GestureClass, digit: usize) -> Pose {
    use GestureClass::*;
    // extended digits per gesture: thumb, index, middle, ring, pinky
    let extended: [bool; 5] = match gesture {
        One => [false, true, false, false, false],
        Two => [false, true, true, false, false],
        Three => [false, true, true, true, false],
        Four => [false, true, true, true, true],
        Five => [true, true, true, true, true],
        Okay => [false, false, true, true, true],
        Rock => [false, true, false, false, true],
        ThumbsUp => [true, false, false, false, false],
    };
    if extended[digit] {
        return STRAIGHT;
    }
    match (gesture, digit) {
        (Okay, 0) => THUMB_HALF,
        (Okay, 1) => INDEX_HALF,
        (_, 0) => THUMB_FOLDED,
        _ => curled(digit),
    }
}

/// Local (u, v, depth) keypoints of the noise-free skeleton.
fn local_skeleton(gesture: GestureClass) -> [(f64, f64, f64); NUM_LANDMARKS] {
    let mut out = [(0.0, 0.0, 0.0); NUM_LANDMARKS];
    for (d, digit) in DIGITS.iter().enumerate() {
        let pose = pose_for(gesture, d);
        let (bu, bv) = digit.base;
        let heading = bu.atan2(bv);
        let base_idx = 1 + 4 * d;
        out[base_idx] = (bu, bv, 0.0);
        let (mut u, mut v, mut depth) = (bu, bv, 0.0);
        let (mut theta, mut psi) = (0.0, 0.0);
        for k in 0..3 {
            theta += pose.flex[k];
            psi += pose.sweep[k];
            let len = digit.bones[k];
            let planar = len * theta.cos();
            u += planar * (heading + psi).sin();
            v += planar * (heading + psi).cos();
            depth -= len * theta.sin();
            out[base_idx + 1 + k] = (u, v, depth);
        }
    }
    out
}

fn place<T: Scalar>(
    local: &[(f64, f64, f64); NUM_LANDMARKS],
    placement: &HandPlacement,
    timestamp: f64,
) -> LandmarkFrame<T> {
    let (s_r, c_r) = placement.rotation.sin_cos();
    let mirror = match placement.handedness {
        Handedness::Right => 1.0,
        Handedness::Left => -1.0,
    };
    let mut points = [Vector3::zero(); NUM_LANDMARKS];
    for (p, &(u, v, depth)) in points.iter_mut().zip(local.iter()) {
        let u = u * mirror;
        let ru = u * c_r - v * s_r;
        let rv = u * s_r + v * c_r;
        let x = placement.wrist.0 + placement.palm_size * ru;
        let y = placement.wrist.1 - placement.palm_size * rv;
        *p = Vector3::new(T::lit(x.clamp(0.0, 1.0)), T::lit(y.clamp(0.0, 1.0)), T::lit(placement.palm_size * depth));
    }
    LandmarkFrame { timestamp: T::lit(timestamp), handedness: placement.handedness, points }
}

/// The noise-free skeleton of `gesture` at `placement`.
pub fn canonical_frame<T: Scalar>(gesture: GestureClass, placement: &HandPlacement) -> LandmarkFrame<T> {
    place(&local_skeleton(gesture), placement, 0.0)
}

/// `per_class` frames for each of the eight gestures, in class order.
///
/// `noise_sigma` is the keypoint noise standard deviation relative to the palm size.
pub fn generate_synthetic_dataset<T: Scalar>(per_class: usize, noise_sigma: f64, seed: u64) -> Vec<LabeledFrame<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::with_capacity(per_class * GestureClass::COUNT);
    let mut t = 0.0;
    for gesture in GestureClass::ALL {
        let skeleton = local_skeleton(gesture);
        for _ in 0..per_class {
            let placement = HandPlacement {
                wrist: (rng.random_range(0.3..0.7), rng.random_range(0.65..0.85)),
                palm_size: rng.random_range(0.08..0.16),
                rotation: rng.random_range(-0.35..0.35),
                handedness: if rng.random_bool(0.5) { Handedness::Right } else { Handedness::Left },
            };
            let mut noisy = skeleton;
            for p in noisy.iter_mut() {
                p.0 += noise_sigma * unit.sample(&mut rng);
                p.1 += noise_sigma * unit.sample(&mut rng);
                p.2 += noise_sigma * unit.sample(&mut rng);
            }
            out.push(LabeledFrame { label: gesture, frame: place(&noisy, &placement, t) });
            t += 1.0 / 30.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::extract_features;

    #[test]
    fn dataset_size_matches_request() {
        let d: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(1000, 0.04, 3);
        assert_eq!(d.len(), 8000);
        for g in GestureClass::ALL {
            assert_eq!(d.iter().filter(|s| s.label == g).count(), 1000);
        }
        assert!(d.iter().all(|s| s.frame.validate().is_ok()));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(5, 0.0, 11);
        let b: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(5, 0.0, 11);
        assert_eq!(a, b);
        let c: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(5, 0.05, 11);
        let d: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(5, 0.05, 11);
        assert_eq!(c, d);
    }

    // Oracle: with one clean sample per class, each sample sits on its own class centroid and
    // must be strictly closer to it than to any other gesture's centroid.
    #[test]
    fn clean_samples_are_nearest_centroid_separable() {
        let d: Vec<LabeledFrame<f64>> = generate_synthetic_dataset(1, 0.0, 5);
        let feats: Vec<Vec<f64>> = d.iter().map(|s| extract_features(&s.frame).unwrap().as_slice().to_vec()).collect();
        for (i, f) in feats.iter().enumerate() {
            let nearest = feats
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let d2: f64 = f.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
                    (j, d2)
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert_eq!(d[nearest.0].label, d[i].label);
            let second = feats
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| f.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            assert!(second > 1e-3, "gesture {} collides with another", d[i].label);
        }
    }
}

//! Hand landmark processing: feature extraction, the gesture classifier, the synthetic
//! dataset generator and the hand-to-flight-zone transform.

mod classifier;
mod dataset;
mod features;
mod landmarks;
mod synthetic;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classifier::{
    accuracy, classify, train_classifier, Gradient, Hyperparams, LabeledSample, Mlp, TrainingMetadata, TrainingOutcome,
};
pub use dataset::{featurize, read_dataset, write_dataset, LabeledFrame};
pub use features::{extract_features, FeatureVector, FEATURE_DIM, NUM_ANGLES, NUM_DISTANCES};
pub use landmarks::*;
pub use synthetic::{canonical_frame, generate_synthetic_dataset, HandPlacement};
pub use transform::{calibrate_palm, hand_to_world, world_to_hand, FlightZone, PalmCalibration};

#[derive(Debug, Error)]
pub enum GestureError {
    #[error("frame has {0} landmarks, expected 21")]
    LandmarkCount(usize),
    #[error("landmark {index} lies outside the normalized screen")]
    OutOfScreen { index: usize },
    #[error("degenerate hand: coincident keypoints")]
    DegenerateHand,
    #[error("model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("insufficient training data: {0}")]
    InsufficientData(String),
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("invalid palm calibration: {0}")]
    InvalidCalibration(&'static str),
    #[error("palm size range too narrow (max/min ratio {ratio:.3} < 1.2)")]
    InsufficientRange { ratio: f64 },
    #[error("need at least {needed} calibration frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("timestamps must strictly increase (line {line})")]
    NonMonotonicTimestamp { line: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown gesture label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The closed set of recognized hand gestures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureClass {
    One,
    Two,
    Three,
    Four,
    Five,
    Okay,
    Rock,
    ThumbsUp,
}

impl GestureClass {
    pub const COUNT: usize = 8;

    pub const ALL: [GestureClass; Self::COUNT] = [
        GestureClass::One,
        GestureClass::Two,
        GestureClass::Three,
        GestureClass::Four,
        GestureClass::Five,
        GestureClass::Okay,
        GestureClass::Rock,
        GestureClass::ThumbsUp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GestureClass::One => "one",
            GestureClass::Two => "two",
            GestureClass::Three => "three",
            GestureClass::Four => "four",
            GestureClass::Five => "five",
            GestureClass::Okay => "okay",
            GestureClass::Rock => "rock",
            GestureClass::ThumbsUp => "thumbs_up",
        }
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GestureClass {
    type Err = GestureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|g| g.name() == s).ok_or_else(|| GestureError::UnknownLabel(s.to_string()))
    }
}

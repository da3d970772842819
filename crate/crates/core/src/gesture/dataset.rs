//! Labeled landmark datasets and their text format.
//!
//! One record per line: the gesture label followed by 63 comma-separated floats
//! (`x, y, z` for each of the 21 keypoints). Lines starting with `#` are comments; the
//! writer emits a header comment naming the columns.

use std::io::{BufRead, Write};

use super::classifier::LabeledSample;
use super::features::extract_features;
use super::landmarks::{Handedness, LandmarkFrame, NUM_LANDMARKS};
use super::{GestureClass, GestureError};
use crate::scalar::Scalar;

pub const DATASET_HEADER: &str = "# gesture-dataset v1: label,x0,y0,z0,...,x20,y20,z20 (normalized screen coordinates)";

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFrame<T> {
    pub label: GestureClass,
    pub frame: LandmarkFrame<T>,
}

pub fn write_dataset<T: Scalar, W: Write>(mut w: W, samples: &[LabeledFrame<T>]) -> Result<(), GestureError> {
    writeln!(w, "{DATASET_HEADER}")?;
    for s in samples {
        write!(w, "{}", s.label)?;
        for v in s.frame.flat() {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_dataset<T: Scalar, R: BufRead>(r: R) -> Result<Vec<LabeledFrame<T>>, GestureError> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let label: GestureClass = fields.next().unwrap_or_default().trim().parse()?;
        let coords = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| GestureError::Parse { line: lineno + 1, message: e.to_string() })
            })
            .collect::<Result<Vec<T>, _>>()?;
        if coords.len() != NUM_LANDMARKS * 3 {
            return Err(GestureError::Parse {
                line: lineno + 1,
                message: format!("expected 63 coordinates, found {}", coords.len()),
            });
        }
        let t = T::lit(out.len() as f64);
        let frame = LandmarkFrame::from_flat(t, Handedness::Right, &coords)?;
        out.push(LabeledFrame { label, frame });
    }
    Ok(out)
}

/// Extracts features for every frame of a labeled dataset.
pub fn featurize<T: Scalar>(samples: &[LabeledFrame<T>]) -> Result<Vec<LabeledSample<T>>, GestureError> {
    samples.iter().map(|s| Ok(LabeledSample { label: s.label, features: extract_features(&s.frame)? })).collect()
}

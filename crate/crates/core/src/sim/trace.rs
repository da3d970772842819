//! Swarm traces and their line-delimited file form: one JSON record
//! `{"t", "id", "x", "y", "z", "roll", "pitch", "yaw"}` per drone per tick.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{DroneState, SimError};
use crate::geometry::Vector3;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TraceFrame<T> {
    pub t: T,
    pub drones: Vec<DroneState<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SwarmTrace<T> {
    pub dt: T,
    pub frames: Vec<TraceFrame<T>>,
}

impl<T: Scalar> SwarmTrace<T> {
    pub fn final_positions(&self) -> Vec<Vector3<T>> {
        self.frames.last().map(|f| f.drones.iter().map(|d| d.position).collect()).unwrap_or_default()
    }

    /// Position history of the drone at `index`.
    pub fn path(&self, index: usize) -> Vec<Vector3<T>> {
        self.frames.iter().filter_map(|f| f.drones.get(index).map(|d| d.position)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TraceRecord<T> {
    pub t: T,
    pub id: u32,
    pub x: T,
    pub y: T,
    pub z: T,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

pub fn min_pairwise_distance<T: Scalar>(trace: &SwarmTrace<T>) -> Result<T, SimError> {
    let mut best = T::infinity();
    for f in &trace.frames {
        if f.drones.len() < 2 {
            return Err(SimError::SingleDrone);
        }
        for (i, a) in f.drones.iter().enumerate() {
            for b in &f.drones[i + 1..] {
                best = best.min(a.position.distance(&b.position));
            }
        }
    }
    if trace.frames.is_empty() {
        return Err(SimError::SingleDrone);
    }
    Ok(best)
}

/// Largest |roll| or |pitch| anywhere in the trace.
pub fn max_tilt<T: Scalar>(trace: &SwarmTrace<T>) -> T {
    trace.frames.iter().flat_map(|f| f.drones.iter()).map(|d| d.roll.abs().max(d.pitch.abs())).fold(T::zero(), T::max)
}

pub fn write_trace<T: Scalar, W: Write>(mut w: W, trace: &SwarmTrace<T>) -> Result<(), SimError> {
    for f in &trace.frames {
        for d in &f.drones {
            let rec = TraceRecord {
                t: f.t,
                id: d.id,
                x: d.position.x,
                y: d.position.y,
                z: d.position.z,
                roll: d.roll,
                pitch: d.pitch,
                yaw: d.yaw,
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a trace file. Velocities and thrust are not stored and come back as zero; `dt` is
/// taken from the first two frames.
pub fn read_trace<T: Scalar, R: BufRead>(r: R) -> Result<SwarmTrace<T>, SimError> {
    let mut frames: Vec<TraceFrame<T>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord<T> =
            serde_json::from_str(&line).map_err(|e| SimError::Parse { line: i + 1, message: e.to_string() })?;
        let mut d = DroneState::at_rest(rec.id, Vector3::new(rec.x, rec.y, rec.z));
        d.roll = rec.roll;
        d.pitch = rec.pitch;
        d.yaw = rec.yaw;
        match frames.last_mut() {
            Some(f) if f.t == rec.t => f.drones.push(d),
            Some(f) if rec.t < f.t => {
                return Err(SimError::Parse { line: i + 1, message: "time went backwards".into() })
            }
            _ => frames.push(TraceFrame { t: rec.t, drones: vec![d] }),
        }
    }
    if let Some(first) = frames.first() {
        let ids: Vec<u32> = first.drones.iter().map(|d| d.id).collect();
        if frames.iter().any(|f| f.drones.iter().map(|d| d.id).ne(ids.iter().copied())) {
            return Err(SimError::Parse { line: 0, message: "drone ids differ between ticks".into() });
        }
    }
    let dt = match frames.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => T::zero(),
    };
    Ok(SwarmTrace { dt, frames })
}

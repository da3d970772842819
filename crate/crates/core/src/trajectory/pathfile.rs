//! Path files: a `#` header naming units and frame, then one `x,y[,z],t` record per line.
//!
//! ```text
//! # path v1 units=meters frame=zone
//! 0.0,0.0,1.0,0.0
//! 0.5,0.0,1.0,1.0
//! ```
//!
//! Pixel paths (`units=pixels frame=screen`) carry `x,y,t`; meter paths carry `x,y,z,t`,
//! with `z` optional (defaults to 0).

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::PathError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Pixels,
    Meters,
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Pixels => "pixels",
            Units::Meters => "meters",
        })
    }
}

impl Units {
    fn frame(self) -> &'static str {
        match self {
            Units::Pixels => "screen",
            Units::Meters => "zone",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathFile<T> {
    pub units: Units,
    pub points: Vec<Vector3<T>>,
    pub times: Vec<T>,
}

fn parse_header(line: &str) -> Option<Units> {
    let body = line.trim_start_matches('#').trim();
    let mut words = body.split_whitespace();
    if words.next() != Some("path") {
        return None;
    }
    words.find_map(|w| match w {
        "units=pixels" => Some(Units::Pixels),
        "units=meters" => Some(Units::Meters),
        _ => None,
    })
}

pub fn read_path<T: Scalar, R: BufRead>(r: R) -> Result<PathFile<T>, PathError> {
    let mut units = None;
    let mut points = Vec::new();
    let mut times = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if units.is_none() {
                units = parse_header(line);
            }
            continue;
        }
        let Some(u) = units else {
            return Err(PathError::Parse { line: lineno, message: "missing `# path v1 units=...` header".into() });
        };
        let vals = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| PathError::Parse { line: lineno, message: e.to_string() })
            })
            .collect::<Result<Vec<T>, _>>()?;
        let (p, t) = match (u, vals.as_slice()) {
            (Units::Pixels, [x, y, t]) => (Vector3::new(*x, *y, T::zero()), *t),
            (Units::Meters, [x, y, t]) => (Vector3::new(*x, *y, T::zero()), *t),
            (Units::Meters, [x, y, z, t]) => (Vector3::new(*x, *y, *z), *t),
            _ => {
                return Err(PathError::Parse {
                    line: lineno,
                    message: format!("unexpected field count {} for {u}", vals.len()),
                })
            }
        };
        if let Some(prev) = times.last() {
            if t < *prev {
                return Err(PathError::Parse { line: lineno, message: "timestamps must not decrease".into() });
            }
        }
        points.push(p);
        times.push(t);
    }
    let units = units.ok_or(PathError::Parse { line: 0, message: "missing header".into() })?;
    if points.is_empty() {
        return Err(PathError::Empty);
    }
    Ok(PathFile { units, points, times })
}

pub fn write_path<T: Scalar, W: Write>(mut w: W, path: &PathFile<T>) -> Result<(), PathError> {
    writeln!(w, "# path v1 units={} frame={}", path.units, path.units.frame())?;
    for (p, t) in path.points.iter().zip(&path.times) {
        match path.units {
            Units::Pixels => writeln!(w, "{},{},{}", p.x, p.y, t)?,
            Units::Meters => writeln!(w, "{},{},{},{}", p.x, p.y, p.z, t)?,
        }
    }
    Ok(())
}

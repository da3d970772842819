use serde::{Deserialize, Serialize};

use super::PathError;
use crate::geometry::{cumulative_lengths, Vector3};
use crate::scalar::Scalar;

/// Points at equal arc-length steps of `spacing` along the polyline, endpoints included.
///
/// Every gap except the last equals `spacing` exactly in arc length; the last is at most
/// `spacing`.
pub fn resample_uniform<T: Scalar>(path: &[Vector3<T>], spacing: T) -> Result<Vec<Vector3<T>>, PathError> {
    if !(spacing > T::zero()) {
        return Err(PathError::InvalidParameter("spacing must be positive"));
    }
    if path.is_empty() {
        return Err(PathError::Empty);
    }
    let cum = cumulative_lengths(path);
    let total = *cum.last().unwrap();
    if !(total > T::zero()) {
        return Err(PathError::DegeneratePath);
    }
    // tolerance absorbs the case where total is an exact multiple of spacing
    let eps = T::lit(1e-9) * total.max(T::one());
    let steps = ((total + eps) / spacing).floor().to_usize().unwrap_or(0);

    let mut out = Vec::with_capacity(steps + 2);
    let mut seg = 0;
    for k in 0..=steps {
        let s = spacing * T::lit(k as f64);
        if s > total - eps && k > 0 {
            break;
        }
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        // skip zero-length segments
        while seg + 2 < cum.len() && cum[seg + 1] <= cum[seg] {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let f = if len > T::zero() { ((s - cum[seg]) / len).max(T::zero()).min(T::one()) } else { T::zero() };
        out.push(path[seg].lerp(&path[seg + 1], f));
    }
    out.push(*path.last().unwrap());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Waypoint<T> {
    pub position: Vector3<T>,
    /// Seconds from the start of playback.
    pub arrival: T,
}

/// A path with strictly increasing arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimedWaypoints<T> {
    waypoints: Vec<Waypoint<T>>,
}

impl<T: Scalar> TimedWaypoints<T> {
    pub fn waypoints(&self) -> &[Waypoint<T>] {
        &self.waypoints
    }

    pub fn points(&self) -> Vec<Vector3<T>> {
        self.waypoints.iter().map(|w| w.position).collect()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Arrival time of the last waypoint.
    pub fn duration(&self) -> T {
        self.waypoints.last().map(|w| w.arrival).unwrap_or_else(T::zero)
    }

    /// Offsets every waypoint by `delta`.
    pub fn translated(&self, delta: Vector3<T>) -> Self {
        Self {
            waypoints: self
                .waypoints
                .iter()
                .map(|w| Waypoint { position: w.position + delta, arrival: w.arrival })
                .collect(),
        }
    }

    /// Scheduled position and velocity at playback time `t`, linear between waypoints.
    /// Before the start it holds the first point, after the end the last, with zero velocity.
    pub fn sample(&self, t: T) -> (Vector3<T>, Vector3<T>) {
        let w = &self.waypoints;
        match w.len() {
            0 => (Vector3::zero(), Vector3::zero()),
            _ if t <= w[0].arrival => (w[0].position, Vector3::zero()),
            _ if t >= w[w.len() - 1].arrival => (w[w.len() - 1].position, Vector3::zero()),
            _ => {
                // first waypoint with arrival > t
                let i = w.partition_point(|p| p.arrival <= t);
                let (a, b) = (w[i - 1], w[i]);
                let span = b.arrival - a.arrival;
                let f = (t - a.arrival) / span;
                (a.position.lerp(&b.position, f), (b.position - a.position) / span)
            }
        }
    }
}

/// Times a path for travel at constant `speed`; consecutive duplicate points are merged so
/// arrival times strictly increase.
pub fn schedule<T: Scalar>(path: &[Vector3<T>], speed: T) -> Result<TimedWaypoints<T>, PathError> {
    if !(speed > T::zero()) {
        return Err(PathError::InvalidParameter("speed must be positive"));
    }
    let Some(first) = path.first() else {
        return Err(PathError::Empty);
    };
    let mut waypoints = vec![Waypoint { position: *first, arrival: T::zero() }];
    let mut t = T::zero();
    for p in &path[1..] {
        let last = waypoints.last().unwrap().position;
        let gap = last.distance(p);
        if gap == T::zero() {
            continue;
        }
        t += gap / speed;
        waypoints.push(Waypoint { position: *p, arrival: t });
    }
    Ok(TimedWaypoints { waypoints })
}

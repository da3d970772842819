//! Formation targets from a shape, scale, heading and center-of-mass command, plus the
//! landing-accuracy metrics.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{centroid, Vector3};
use crate::gesture::{
    hand_to_world, FlightZone, GestureError, LandmarkFrame, PalmCalibration, INDEX_TIP, MIDDLE_MCP, THUMB_TIP, WRIST,
};
use crate::scalar::Scalar;
use crate::sim::ColorTag;

#[derive(Debug, Error)]
pub enum FormationError {
    #[error("{shape} formation cannot host {count} drones")]
    UnsupportedCount { shape: ShapeKind, count: usize },
    #[error("formation scale must be positive")]
    InvalidScale,
    #[error("length mismatch: {finals} final positions vs {targets} targets")]
    LengthMismatch { finals: usize, targets: usize },
    #[error("no target for drone {0}")]
    MissingTarget(String),
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Line,
    Triangle,
    Square,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Line, ShapeKind::Triangle, ShapeKind::Square];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Line => "line",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Square => "square",
        }
    }

    /// Fewest drones the shape can host.
    pub fn min_count(self) -> usize {
        match self {
            ShapeKind::Line => 2,
            ShapeKind::Triangle => 3,
            ShapeKind::Square => 4,
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown shape `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FormationCommand<T> {
    pub shape: ShapeKind,
    /// Commanded centroid of the targets.
    pub com: Vector3<T>,
    /// Spacing between neighbouring drones, meters.
    pub scale: T,
    /// Rotation about the vertical axis, radians.
    pub yaw: T,
}

impl<T: Scalar> FormationCommand<T> {
    pub fn new(shape: ShapeKind, com: Vector3<T>, scale: T, yaw: T) -> Self {
        Self { shape, com, scale, yaw }
    }
}

/// Zero-mean horizontal offsets with unit spacing between neighbours. Line: along `+x`.
/// Triangle and square: the `n` drones are spread evenly along a perimeter of length `n`,
/// so three and four drones sit on the corners of a unit triangle and unit square.
pub fn shape_offsets<T: Scalar>(shape: ShapeKind, n: usize) -> Result<Vec<Vector3<T>>, FormationError> {
    if n < shape.min_count() {
        return Err(FormationError::UnsupportedCount { shape, count: n });
    }
    let offsets: Vec<Vector3<f64>> = match shape {
        ShapeKind::Line => {
            let mid = (n as f64 - 1.0) / 2.0;
            (0..n).map(|i| Vector3::new(i as f64 - mid, 0.0, 0.0)).collect()
        }
        ShapeKind::Triangle => {
            let side = n as f64 / 3.0;
            let r = side / 3f64.sqrt();
            let corners: Vec<Vector3<f64>> = [90.0f64, 210.0, 330.0]
                .iter()
                .map(|a| {
                    let (s, c) = a.to_radians().sin_cos();
                    Vector3::new(r * c, r * s, 0.0)
                })
                .collect();
            along_perimeter(&corners, n)
        }
        ShapeKind::Square => {
            let h = n as f64 / 8.0;
            let corners = [
                Vector3::new(-h, -h, 0.0),
                Vector3::new(h, -h, 0.0),
                Vector3::new(h, h, 0.0),
                Vector3::new(-h, h, 0.0),
            ];
            along_perimeter(&corners, n)
        }
    };
    Ok(offsets.iter().map(|o| o.cast()).collect())
}

/// `n` points at unit arc-length steps around the closed polygon, starting at its first
/// corner, recentred to zero mean.
fn along_perimeter(corners: &[Vector3<f64>], n: usize) -> Vec<Vector3<f64>> {
    let k = corners.len();
    let side = corners[0].distance(&corners[1]);
    let pts: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            let s = i as f64 / side;
            let edge = (s.floor() as usize).min(n * k) % k;
            let f = s - s.floor();
            corners[edge].lerp(&corners[(edge + 1) % k], f)
        })
        .collect();
    let c = centroid(&pts).unwrap_or_else(Vector3::zero);
    pts.iter().map(|p| *p - c).collect()
}

/// `com + scale · R(yaw) · offset_i` for each drone.
pub fn formation_targets<T: Scalar>(cmd: &FormationCommand<T>, n: usize) -> Result<Vec<Vector3<T>>, FormationError> {
    if !(cmd.scale > T::zero()) {
        return Err(FormationError::InvalidScale);
    }
    Ok(shape_offsets::<T>(cmd.shape, n)?.iter().map(|o| cmd.com + (*o * cmd.scale).rotate_z(cmd.yaw)).collect())
}

/// Maps the normalized thumb–index spread onto a formation scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpreadMapping {
    /// Spread (tip distance over palm size) mapped to `scale_min`.
    pub spread_min: f64,
    pub spread_max: f64,
    /// Meters.
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for SpreadMapping {
    fn default() -> Self {
        Self { spread_min: 0.2, spread_max: 1.5, scale_min: 0.4, scale_max: 1.5 }
    }
}

impl SpreadMapping {
    pub fn scale(&self, spread: f64) -> f64 {
        let f = ((spread - self.spread_min) / (self.spread_max - self.spread_min)).clamp(0.0, 1.0);
        self.scale_min + f * (self.scale_max - self.scale_min)
    }
}

/// Thumb-tip to index-tip distance over palm size, in pixel space.
pub fn finger_spread<T: Scalar>(frame: &LandmarkFrame<T>, screen: (T, T)) -> Result<T, GestureError> {
    let px = |i: usize| {
        let p = frame.points[i];
        Vector3::new(p.x * screen.0, p.y * screen.1, T::zero())
    };
    let palm = px(WRIST).distance(&px(MIDDLE_MCP));
    if !(palm > T::lit(1e-9)) {
        return Err(GestureError::DegenerateHand);
    }
    Ok(px(THUMB_TIP).distance(&px(INDEX_TIP)) / palm)
}

/// In-plane inclination of the wrist→middle-MCP vector: zero for an upright hand,
/// positive when the hand leans counter-clockwise on screen.
pub fn hand_inclination<T: Scalar>(frame: &LandmarkFrame<T>, screen: (T, T)) -> Result<T, GestureError> {
    let w = frame.points[WRIST];
    let m = frame.points[MIDDLE_MCP];
    let dx = (m.x - w.x) * screen.0;
    let dy = (m.y - w.y) * screen.1;
    if !((dx * dx + dy * dy).sqrt() > T::lit(1e-9)) {
        return Err(GestureError::DegenerateHand);
    }
    Ok((-dx).atan2(-dy))
}

/// Formation command from one hand frame: the palm center drives the centroid through the
/// hand-to-world transform, finger spread the scale, and hand inclination the yaw.
pub fn hand_formation_command<T: Scalar>(
    frame: &LandmarkFrame<T>,
    calib: &PalmCalibration<T>,
    zone: &FlightZone<T>,
    shape: ShapeKind,
    spread: &SpreadMapping,
) -> Result<FormationCommand<T>, FormationError> {
    frame.validate()?;
    let (fx, fy) = calib.screen;
    let c = frame.palm_center();
    let com = hand_to_world(c.x * fx, c.y * fy, frame.palm_size_px(fx, fy), calib, zone)?;
    let s = finger_spread(frame, calib.screen)?.to_f64_lossy();
    let yaw = hand_inclination(frame, calib.screen)?;
    Ok(FormationCommand { shape, com, scale: T::lit(spread.scale(s)), yaw })
}

/// Landing accuracy of one trial, meters and seconds. Errors are horizontal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetingReport {
    pub per_drone_errors: Vec<f64>,
    pub formation_mean_error: f64,
    pub centroid_mean_error: f64,
    pub centroid_max_error: f64,
    pub duration: f64,
}

impl TargetingReport {
    /// Averages trials drone by drone; the centroid max is the worst trial.
    pub fn aggregate(reports: &[TargetingReport]) -> Option<TargetingReport> {
        let first = reports.first()?;
        let n = reports.len() as f64;
        let drones = first.per_drone_errors.len();
        if reports.iter().any(|r| r.per_drone_errors.len() != drones) {
            return None;
        }
        let mean = |f: &dyn Fn(&TargetingReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(TargetingReport {
            per_drone_errors: (0..drones).map(|i| mean(&|r| r.per_drone_errors[i])).collect(),
            formation_mean_error: mean(&|r| r.formation_mean_error),
            centroid_mean_error: mean(&|r| r.centroid_mean_error),
            centroid_max_error: reports.iter().map(|r| r.centroid_max_error).fold(0.0, f64::max),
            duration: mean(&|r| r.duration),
        })
    }
}

impl fmt::Display for TargetingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.per_drone_errors.iter().enumerate() {
            write!(f, "Drone {}, cm {:.1} | ", i + 1, e * 100.0)?;
        }
        write!(
            f,
            "Formation mean error, cm {:.1} | Centroid mean error, cm {:.1} | Centroid max error, cm {:.1} | Time, s {:.0}",
            self.formation_mean_error * 100.0,
            self.centroid_mean_error * 100.0,
            self.centroid_max_error * 100.0,
            self.duration
        )
    }
}

pub fn targeting_errors<T: Scalar>(
    finals: &[Vector3<T>],
    targets: &[Vector3<T>],
    duration: T,
) -> Result<TargetingReport, FormationError> {
    if finals.len() != targets.len() || finals.is_empty() {
        return Err(FormationError::LengthMismatch { finals: finals.len(), targets: targets.len() });
    }
    let per: Vec<f64> =
        finals.iter().zip(targets).map(|(a, b)| a.horizontal().distance(&b.horizontal()).to_f64_lossy()).collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let flat = |ps: &[Vector3<T>]| ps.iter().map(|p| p.horizontal()).collect::<Vec<_>>();
    let cf = centroid(&flat(finals)).unwrap_or_else(Vector3::zero);
    let ct = centroid(&flat(targets)).unwrap_or_else(Vector3::zero);
    let c = cf.distance(&ct).to_f64_lossy();
    Ok(TargetingReport {
        per_drone_errors: per,
        formation_mean_error: mean,
        centroid_mean_error: c,
        centroid_max_error: c,
        duration: duration.to_f64_lossy(),
    })
}

/// How a floor target is matched to a drone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetLabel {
    Id(u32),
    Color(ColorTag),
}

impl fmt::Display for TargetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetLabel::Id(id) => write!(f, "{id}"),
            TargetLabel::Color(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorTarget {
    pub label: TargetLabel,
    pub x: f64,
    pub y: f64,
}

/// Matches targets to drones by color if the drone has one, else by id.
pub fn match_targets<T: Scalar>(
    drones: &[crate::sim::DroneState<T>],
    targets: &[FloorTarget],
) -> Result<Vec<Vector3<T>>, FormationError> {
    drones
        .iter()
        .map(|d| {
            let hit = targets.iter().find(|t| match t.label {
                TargetLabel::Color(c) => d.color != ColorTag::None && c == d.color,
                TargetLabel::Id(id) => id == d.id,
            });
            hit.map(|t| Vector3::new(T::lit(t.x), T::lit(t.y), T::zero()))
                .ok_or_else(|| FormationError::MissingTarget(d.id.to_string()))
        })
        .collect()
}

/// Target-pattern file: `# targets v1` then `label,x,y` per line, where `label` is a drone
/// id or a color name.
pub fn read_targets<R: BufRead>(r: R) -> Result<Vec<FloorTarget>, FormationError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| FormationError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [label, x, y] = fields.as_slice() else {
            return Err(err(format!("expected 3 fields, got {}", fields.len())));
        };
        let label = match label.parse::<u32>() {
            Ok(id) => TargetLabel::Id(id),
            Err(_) => TargetLabel::Color(label.parse().map_err(err)?),
        };
        let x = x.parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        let y = y.parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        out.push(FloorTarget { label, x, y });
    }
    Ok(out)
}

pub fn write_targets<W: Write>(mut w: W, targets: &[FloorTarget]) -> Result<(), FormationError> {
    writeln!(w, "# targets v1")?;
    for t in targets {
        writeln!(w, "{},{},{}", t.label, t.x, t.y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::{canonical_frame, GestureClass, HandPlacement};
    use crate::sim::DroneState;
    use proptest::prelude::*;

    type V = Vector3<f64>;

    fn pairwise(ps: &[V]) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, a) in ps.iter().enumerate() {
            for b in &ps[i + 1..] {
                out.push(a.distance(b));
            }
        }
        out
    }

    #[test]
    fn line_of_three() {
        let o: Vec<V> = shape_offsets(ShapeKind::Line, 3).unwrap();
        assert_eq!(o, vec![V::new(-1.0, 0.0, 0.0), V::zero(), V::new(1.0, 0.0, 0.0)]);
    }

    #[test]
    fn unit_triangle() {
        let o: Vec<V> = shape_offsets(ShapeKind::Triangle, 3).unwrap();
        assert!(pairwise(&o).iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!(centroid(&o).unwrap().norm() < 1e-15);
    }

    #[test]
    fn unit_square() {
        let o: Vec<V> = shape_offsets(ShapeKind::Square, 4).unwrap();
        assert_eq!(centroid(&o).unwrap(), V::zero());
        let mut d = pairwise(&o);
        d.sort_by(f64::total_cmp);
        for side in &d[..4] {
            assert!((side - 1.0).abs() < 1e-15);
        }
        for diag in &d[4..] {
            assert!((diag - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn other_counts_share_the_perimeter_evenly() {
        for shape in [ShapeKind::Triangle, ShapeKind::Square] {
            for n in shape.min_count()..12 {
                let o: Vec<V> = shape_offsets(shape, n).unwrap();
                assert_eq!(o.len(), n);
                assert!(centroid(&o).unwrap().norm() < 1e-12);
                // neighbours along the perimeter are at most one unit apart
                for i in 0..n {
                    assert!(o[i].distance(&o[(i + 1) % n]) <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn unsupported_counts() {
        for (shape, n) in [(ShapeKind::Line, 1), (ShapeKind::Triangle, 2), (ShapeKind::Square, 3)] {
            assert!(matches!(shape_offsets::<f64>(shape, n), Err(FormationError::UnsupportedCount { .. })));
        }
    }

    #[test]
    fn identity_command() {
        let cmd = FormationCommand::new(ShapeKind::Square, V::zero(), 1.0, 0.0);
        assert_eq!(formation_targets(&cmd, 4).unwrap(), shape_offsets(ShapeKind::Square, 4).unwrap());
        let bad = FormationCommand { scale: 0.0, ..cmd };
        assert!(matches!(formation_targets(&bad, 4), Err(FormationError::InvalidScale)));
    }

    #[test]
    fn rotated_line_endpoints() {
        let cmd = FormationCommand::new(ShapeKind::Line, V::new(1.0, 1.0, 1.0), 0.5, std::f64::consts::FRAC_PI_2);
        let t = formation_targets(&cmd, 3).unwrap();
        assert!(t[0].distance(&V::new(1.0, 0.5, 1.0)) < 1e-12);
        assert!(t[2].distance(&V::new(1.0, 1.5, 1.0)) < 1e-12);
    }

    #[test]
    fn dyadic_centroid_is_exact() {
        let cmd = FormationCommand::new(ShapeKind::Square, V::new(0.25, -1.5, 1.0), 0.5, 0.0);
        assert_eq!(centroid(&formation_targets(&cmd, 4).unwrap()).unwrap(), cmd.com);
        let line = FormationCommand::new(ShapeKind::Line, V::new(0.75, 0.5, 1.25), 0.625, 0.0);
        assert_eq!(centroid(&formation_targets(&line, 5).unwrap()).unwrap(), line.com);
    }

    proptest! {
        #[test]
        fn centroid_rotation_and_scale(
            cx in -2.0f64..2.0, cy in -2.0f64..2.0, cz in 0.0f64..2.0,
            scale in 0.3f64..2.0, yaw in -3.2f64..3.2, theta in -3.2f64..3.2,
            k in 0.5f64..3.0, shape in 0usize..3, extra in 0usize..4,
        ) {
            let shape = ShapeKind::ALL[shape];
            let n = shape.min_count() + extra;
            let cmd = FormationCommand::new(shape, V::new(cx, cy, cz), scale, yaw);
            let t = formation_targets(&cmd, n).unwrap();
            prop_assert!(centroid(&t).unwrap().distance(&cmd.com) < 1e-12);

            let turned = formation_targets(&FormationCommand { yaw: yaw + theta, ..cmd }, n).unwrap();
            for (a, b) in t.iter().zip(&turned) {
                let expect = cmd.com + (*a - cmd.com).rotate_z(theta);
                prop_assert!(expect.distance(b) < 1e-9);
            }

            let scaled = formation_targets(&FormationCommand { scale: scale * k, ..cmd }, n).unwrap();
            for (d0, d1) in pairwise(&t).iter().zip(pairwise(&scaled)) {
                prop_assert!((d1 - k * d0).abs() < 1e-9);
            }
        }

        #[test]
        fn targeting_is_rigid_invariant(
            pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
            tgt in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
            theta in -3.2f64..3.2, dx in -1.0f64..1.0, dy in -1.0f64..1.0,
        ) {
            let f: Vec<V> = pts.iter().map(|(x, y)| V::new(*x, *y, 0.0)).collect();
            let t: Vec<V> = tgt.iter().map(|(x, y)| V::new(*x, *y, 0.0)).collect();
            let move_ = |p: &V| p.rotate_z(theta) + V::new(dx, dy, 0.0);
            let a = targeting_errors(&f, &t, 1.0).unwrap();
            let b = targeting_errors(&f.iter().map(move_).collect::<Vec<_>>(), &t.iter().map(move_).collect::<Vec<_>>(), 1.0).unwrap();
            for (x, y) in a.per_drone_errors.iter().zip(&b.per_drone_errors) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((a.centroid_mean_error - b.centroid_mean_error).abs() < 1e-9);
            prop_assert_eq!(a.formation_mean_error, a.per_drone_errors.iter().sum::<f64>() / 3.0);
        }
    }

    #[test]
    fn translated_landing() {
        let t = vec![V::new(0.0, 0.0, 0.0), V::new(1.0, 0.0, 0.0), V::new(0.5, 1.0, 0.0)];
        let zero = targeting_errors(&t, &t, 10.0).unwrap();
        assert_eq!(zero.formation_mean_error, 0.0);
        assert_eq!(zero.centroid_max_error, 0.0);
        let shifted: Vec<V> = t.iter().map(|p| *p + V::new(0.03, 0.04, 0.5)).collect();
        let r = targeting_errors(&shifted, &t, 10.0).unwrap();
        assert!(r.per_drone_errors.iter().all(|e| (e - 0.05).abs() < 1e-12));
        assert!((r.centroid_mean_error - 0.05).abs() < 1e-12);
        assert!(matches!(targeting_errors(&t[..2], &t, 1.0), Err(FormationError::LengthMismatch { .. })));
    }

    #[test]
    fn report_expresses_line_pattern_row() {
        let r = TargetingReport {
            per_drone_errors: vec![0.089, 0.045, 0.085],
            formation_mean_error: 0.073,
            centroid_mean_error: 0.043,
            centroid_max_error: 0.113,
            duration: 41.0,
        };
        assert_eq!(
            r.to_string(),
            "Drone 1, cm 8.9 | Drone 2, cm 4.5 | Drone 3, cm 8.5 | Formation mean error, cm 7.3 | \
             Centroid mean error, cm 4.3 | Centroid max error, cm 11.3 | Time, s 41"
        );
        let back: TargetingReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn aggregate_over_trials() {
        let a = TargetingReport {
            per_drone_errors: vec![0.1, 0.0],
            formation_mean_error: 0.05,
            centroid_mean_error: 0.02,
            centroid_max_error: 0.02,
            duration: 40.0,
        };
        let b =
            TargetingReport { per_drone_errors: vec![0.0, 0.1], centroid_max_error: 0.08, duration: 42.0, ..a.clone() };
        let m = TargetingReport::aggregate(&[a, b]).unwrap();
        assert_eq!(m.per_drone_errors, vec![0.05, 0.05]);
        assert_eq!((m.centroid_max_error, m.duration), (0.08, 41.0));
    }

    fn calib() -> PalmCalibration<f64> {
        PalmCalibration { palm_max: 240.0, palm_min: 40.0, screen: (1280.0, 720.0) }
    }

    fn zone() -> FlightZone<f64> {
        FlightZone::new(V::new(4.0, 4.0, 2.0), V::zero())
    }

    #[test]
    fn centered_upright_hand() {
        // palm size 120 px on a 720 px tall screen puts depth at mid-zone
        let placement = HandPlacement { wrist: (0.5, 0.5), palm_size: 120.0 / 720.0, ..HandPlacement::default() };
        let mut frame: LandmarkFrame<f64> = canonical_frame(GestureClass::Five, &placement);
        // move the palm center onto the screen center
        let c = frame.palm_center();
        for p in frame.points.iter_mut() {
            p.x += 0.5 - c.x;
            p.y += 0.5 - c.y;
        }
        let palm_px = frame.palm_size_px(1280.0, 720.0);
        let cal = PalmCalibration { palm_max: 2.0 * palm_px, ..calib() };
        let cmd = hand_formation_command(&frame, &cal, &zone(), ShapeKind::Line, &SpreadMapping::default()).unwrap();
        assert!(cmd.com.distance(&zone().center()) < 1e-9);
        assert!(cmd.yaw.abs() < 1e-12);
    }

    #[test]
    fn pinched_fingers_give_minimum_scale() {
        let mut frame: LandmarkFrame<f64> = canonical_frame(GestureClass::Five, &HandPlacement::default());
        frame.points[THUMB_TIP] = frame.points[INDEX_TIP];
        let cmd =
            hand_formation_command(&frame, &calib(), &zone(), ShapeKind::Line, &SpreadMapping::default()).unwrap();
        assert_eq!(cmd.scale, 0.4);
        let open: LandmarkFrame<f64> = canonical_frame(GestureClass::Five, &HandPlacement::default());
        let spread = finger_spread(&open, calib().screen).unwrap();
        assert!(spread > 0.2 && spread < 1.5, "{spread}");
    }

    #[test]
    fn inclination_follows_rotation() {
        // square pixels keep in-plane angles undistorted
        let screen = (720.0, 720.0);
        for deg in [-45.0f64, 30.0, 45.0] {
            let placement = HandPlacement { rotation: deg.to_radians(), ..HandPlacement::default() };
            let frame: LandmarkFrame<f64> = canonical_frame(GestureClass::Five, &placement);
            let yaw = hand_inclination(&frame, screen).unwrap().to_degrees();
            assert!((yaw - deg).abs() < 2.0, "{yaw} vs {deg}");
        }
    }

    #[test]
    fn degenerate_hand() {
        let mut frame: LandmarkFrame<f64> = canonical_frame(GestureClass::Five, &HandPlacement::default());
        frame.points[MIDDLE_MCP] = frame.points[WRIST];
        assert!(matches!(
            hand_formation_command(&frame, &calib(), &zone(), ShapeKind::Line, &SpreadMapping::default()),
            Err(FormationError::Gesture(GestureError::DegenerateHand))
        ));
    }

    #[test]
    fn target_file_and_matching() {
        let text = "# targets v1\nred,0.5,0.0\n1, -0.5, 0.25\n";
        let targets = read_targets(text.as_bytes()).unwrap();
        assert_eq!(targets[0].label, TargetLabel::Color(ColorTag::Red));
        assert_eq!(targets[1].label, TargetLabel::Id(1));
        let mut buf = Vec::new();
        write_targets(&mut buf, &targets).unwrap();
        assert_eq!(read_targets(&buf[..]).unwrap(), targets);

        let drones = vec![
            DroneState::<f64>::at_rest(0, V::zero()).with_color(ColorTag::Red),
            DroneState::at_rest(1, V::new(1.0, 0.0, 0.0)),
        ];
        let m = match_targets(&drones, &targets).unwrap();
        assert_eq!(m, vec![V::new(0.5, 0.0, 0.0), V::new(-0.5, 0.25, 0.0)]);
        assert!(match_targets(&drones[1..], &targets[..1]).is_err());
        assert!(read_targets("purple,1,2\n".as_bytes()).is_err());
    }
}

//! Small 3-vector type and polyline kernels used throughout the crate.
//!
//! World frame convention: `x` lateral, `y` depth (away from the operator), `z` up.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound = "T: Scalar")]
pub struct Vector3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> From<[T; 3]> for Vector3<T> {
    fn from(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl<T: Scalar> From<Vector3<T>> for [T; 3] {
    fn from(v: Vector3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<T: Scalar> Vector3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    /// Projection onto the horizontal (x, y) plane.
    pub fn horizontal(&self) -> Self {
        Self::new(self.x, self.y, T::zero())
    }

    /// Rotation about the vertical axis by `angle` radians (counter-clockwise seen from above).
    pub fn rotate_z(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    /// Rescales the vector so its length does not exceed `max_len`.
    pub fn clamp_norm(&self, max_len: T) -> Self {
        let n = self.norm();
        if n > max_len {
            *self * (max_len / n)
        } else {
            *self
        }
    }

    pub fn lerp(&self, other: &Self, t: T) -> Self {
        *self + (*other - *self) * t
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Scalar>(&self) -> Vector3<U> {
        Vector3::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()), U::lit(self.z.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for Vector3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for Vector3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Mul<T> for Vector3<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl<T: Scalar> Div<T> for Vector3<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        Self::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl<T: Scalar> Neg for Vector3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> AddAssign for Vector3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Vector3<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> Index<usize> for Vector3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vector3 index {i} out of range"),
        }
    }
}

/// Arithmetic mean of a non-empty point set.
pub fn centroid<T: Scalar>(points: &[Vector3<T>]) -> Option<Vector3<T>> {
    if points.is_empty() {
        return None;
    }
    let sum = points.iter().fold(Vector3::zero(), |acc, p| acc + *p);
    Some(sum / T::lit(points.len() as f64))
}

/// Closest point to `p` on the segment `a`-`b`.
pub fn closest_point_on_segment<T: Scalar>(p: &Vector3<T>, a: &Vector3<T>, b: &Vector3<T>) -> Vector3<T> {
    let ab = *b - *a;
    let len2 = ab.norm_squared();
    if len2 == T::zero() {
        return *a;
    }
    let t = ((*p - *a).dot(&ab) / len2).max(T::zero()).min(T::one());
    *a + ab * t
}

pub fn point_segment_distance<T: Scalar>(p: &Vector3<T>, a: &Vector3<T>, b: &Vector3<T>) -> T {
    p.distance(&closest_point_on_segment(p, a, b))
}

/// Sum of segment lengths.
pub fn polyline_length<T: Scalar>(points: &[Vector3<T>]) -> T {
    points.windows(2).fold(T::zero(), |acc, w| acc + w[0].distance(&w[1]))
}

/// Cumulative arc length at each vertex; first entry is zero.
pub fn cumulative_lengths<T: Scalar>(points: &[Vector3<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = T::zero();
    out.push(acc);
    for w in points.windows(2) {
        acc += w[0].distance(&w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Vector3<f64>;

    #[test]
    fn rotate_quarter_turn() {
        let v = V::new(1.0, 0.0, 2.0).rotate_z(std::f64::consts::FRAC_PI_2);
        assert!((v.x).abs() < 1e-15);
        assert!((v.y - 1.0).abs() < 1e-15);
        assert_eq!(v.z, 2.0);
    }

    #[test]
    fn segment_distance_cases() {
        let a = V::new(-1.0, 0.0, 0.0);
        let b = V::new(1.0, 0.0, 0.0);
        assert_eq!(point_segment_distance(&V::new(0.0, 1.0, 0.0), &a, &b), 1.0);
        assert_eq!(point_segment_distance(&V::new(2.0, 0.0, 0.0), &a, &b), 1.0);
        // degenerate segment
        assert_eq!(point_segment_distance(&V::new(0.0, 3.0, 4.0), &a, &a), (1.0f64 + 25.0).sqrt());
    }

    #[test]
    fn clamp_norm_keeps_direction() {
        let v = V::new(3.0, 4.0, 0.0).clamp_norm(1.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v.x - 0.6).abs() < 1e-15);
    }

    #[test]
    fn serde_as_array() {
        let v = V::new(1.0, 2.5, -3.0);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.0,2.5,-3.0]");
        let back: V = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}

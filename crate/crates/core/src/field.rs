//! Artificial potential field guidance: attraction to the active goal, repulsion from
//! obstacles and neighbouring drones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vector3;
use crate::scalar::Scalar;

/// Obstacle distances below this are treated as coincident with the query point.
pub const SINGULAR_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FieldError {
    #[error("obstacle distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("query point coincides with obstacle {index}")]
    SingularConfiguration { index: usize },
    #[error("invalid field parameter: {0}")]
    InvalidParams(&'static str),
}

/// Shape of the repulsive term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepulsionForm {
    /// `½ k_r (1/d − 1/r_0)² d²`; bounded (→ ½ k_r) as d → 0.
    #[default]
    Bounded,
    /// `½ k_r (1/d − 1/r_0)²`; unbounded as d → 0.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Scalar")]
pub struct FieldParams<T> {
    pub k_a: T,
    pub k_r: T,
    /// Repulsion cutoff, meters.
    pub r_0: T,
    /// Speed cap of the velocity command, m/s.
    pub v_max: T,
    pub form: RepulsionForm,
}

impl<T: Scalar> Default for FieldParams<T> {
    fn default() -> Self {
        Self { k_a: T::one(), k_r: T::lit(30.0), r_0: T::lit(0.45), v_max: T::one(), form: RepulsionForm::Bounded }
    }
}

impl<T: Scalar> FieldParams<T> {
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.k_a > T::zero()) {
            return Err(FieldError::InvalidParams("k_a must be positive"));
        }
        if !(self.k_r >= T::zero()) {
            return Err(FieldError::InvalidParams("k_r must be non-negative"));
        }
        if !(self.r_0 > T::zero()) || !self.r_0.is_finite() {
            return Err(FieldError::InvalidParams("r_0 must be positive"));
        }
        if !(self.v_max > T::zero()) {
            return Err(FieldError::InvalidParams("v_max must be positive"));
        }
        Ok(())
    }
}

pub fn attractive_potential<T: Scalar>(q: &Vector3<T>, goal: &Vector3<T>, k_a: T) -> T {
    T::lit(0.5) * k_a * (*q - *goal).norm_squared()
}

pub fn repulsive_potential<T: Scalar>(d: T, params: &FieldParams<T>) -> Result<T, FieldError> {
    if !(d > T::zero()) {
        return Err(FieldError::NonPositiveDistance(d.to_f64_lossy()));
    }
    if d >= params.r_0 {
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let gap = T::one() / d - T::one() / params.r_0;
    Ok(match params.form {
        RepulsionForm::Bounded => half * params.k_r * gap * gap * d * d,
        RepulsionForm::Classical => half * params.k_r * gap * gap,
    })
}

/// Magnitude of `−dU_r/dd`: positive values push away from the obstacle.
pub fn repulsive_force_magnitude<T: Scalar>(d: T, params: &FieldParams<T>) -> T {
    if d >= params.r_0 {
        return T::zero();
    }
    match params.form {
        // U_r = ½ k_r (1 − d/r_0)²
        RepulsionForm::Bounded => params.k_r * (T::one() - d / params.r_0) / params.r_0,
        RepulsionForm::Classical => params.k_r * (T::one() / d - T::one() / params.r_0) / (d * d),
    }
}

pub fn total_potential<T: Scalar>(
    q: &Vector3<T>,
    goal: &Vector3<T>,
    obstacles: &[Vector3<T>],
    params: &FieldParams<T>,
) -> Result<T, FieldError> {
    let mut u = attractive_potential(q, goal, params.k_a);
    for o in obstacles {
        u += repulsive_potential(q.distance(o), params)?;
    }
    Ok(u)
}

/// Negative analytic gradient of [`total_potential`] at `q`.
pub fn field_force<T: Scalar>(
    q: &Vector3<T>,
    goal: &Vector3<T>,
    obstacles: &[Vector3<T>],
    params: &FieldParams<T>,
) -> Result<Vector3<T>, FieldError> {
    let eps = T::lit(SINGULAR_DISTANCE);
    let mut f = (*goal - *q) * params.k_a;
    for (index, o) in obstacles.iter().enumerate() {
        let sep = *q - *o;
        let d = sep.norm();
        if !(d >= eps) {
            return Err(FieldError::SingularConfiguration { index });
        }
        if d < params.r_0 {
            f += sep * (repulsive_force_magnitude(d, params) / d);
        }
    }
    Ok(f)
}

/// Field force clipped to `v_max`, used as a setpoint velocity.
pub fn velocity_command<T: Scalar>(
    q: &Vector3<T>,
    goal: &Vector3<T>,
    obstacles: &[Vector3<T>],
    params: &FieldParams<T>,
) -> Result<Vector3<T>, FieldError> {
    Ok(field_force(q, goal, obstacles, params)?.clamp_norm(params.v_max))
}

/// Repulsion centers spread over a sphere surface (Fibonacci lattice).
pub fn sphere_surface_points<T: Scalar>(center: Vector3<T>, radius: T, count: usize) -> Vec<Vector3<T>> {
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let n = T::from_usize(count.max(1)).unwrap_or_else(T::one);
    (0..count)
        .map(|i| {
            let i = T::from_usize(i).unwrap_or_else(T::zero);
            let z = T::one() - (i + T::lit(0.5)) * T::lit(2.0) / n;
            let r = (T::one() - z * z).max(T::zero()).sqrt();
            let (s, c) = (golden * i).sin_cos();
            center + Vector3::new(r * c, r * s, z) * radius
        })
        .collect()
}

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::Vector3;
use crate::scalar::Scalar;

/// Per-axis PID gains. The controller output is a desired acceleration, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Scalar")]
pub struct PidGains<T> {
    pub kp: Vector3<T>,
    pub ki: Vector3<T>,
    pub kd: Vector3<T>,
    /// Bound on each component of the error integral, m·s.
    pub integral_limit: Vector3<T>,
}

impl<T: Scalar> Default for PidGains<T> {
    fn default() -> Self {
        let all = |v: f64| Vector3::new(T::lit(v), T::lit(v), T::lit(v));
        Self { kp: all(9.0), ki: all(0.5), kd: all(4.9), integral_limit: all(0.2) }
    }
}

impl<T: Scalar> PidGains<T> {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = |v: &Vector3<T>| v.is_finite() && v.x >= T::zero() && v.y >= T::zero() && v.z >= T::zero();
        if ok(&self.kp) && ok(&self.ki) && ok(&self.kd) && ok(&self.integral_limit) {
            Ok(())
        } else {
            Err(SimError::InvalidConfig("PID gains and integral limits must be finite and non-negative"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PidController<T> {
    pub gains: PidGains<T>,
    integral: Vector3<T>,
    prev_error: Option<Vector3<T>>,
}

impl<T: Scalar> PidController<T> {
    pub fn new(gains: PidGains<T>) -> Self {
        Self { gains, integral: Vector3::zero(), prev_error: None }
    }

    pub fn integral(&self) -> Vector3<T> {
        self.integral
    }

    pub fn reset(&mut self) {
        self.integral = Vector3::zero();
        self.prev_error = None;
    }

    /// `k_p·e + k_i·∫e + k_d·(e − e_prev)/dt`, with the integral clamped per axis. The
    /// derivative term is zero on the first update after construction or reset.
    pub fn update(&mut self, error: Vector3<T>, dt: T) -> Vector3<T> {
        let g = &self.gains;
        let lim = g.integral_limit;
        let acc = self.integral + error * dt;
        self.integral =
            Vector3::new(acc.x.max(-lim.x).min(lim.x), acc.y.max(-lim.y).min(lim.y), acc.z.max(-lim.z).min(lim.z));
        let deriv = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => Vector3::zero(),
        };
        self.prev_error = Some(error);
        let mul = |a: Vector3<T>, b: Vector3<T>| Vector3::new(a.x * b.x, a.y * b.y, a.z * b.z);
        mul(g.kp, error) + mul(g.ki, self.integral) + mul(g.kd, deriv)
    }
}

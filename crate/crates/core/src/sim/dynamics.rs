use super::{DroneState, PidController, SimConfig, SimError};
use crate::geometry::Vector3;
use crate::scalar::Scalar;

/// Advances one drone by `dt` toward `setpoint`.
///
/// The horizontal PID output is rotated into the heading frame and converted into the
/// roll/pitch that tilt the thrust vector accordingly; the vertical output sets thrust about
/// hover. Attitude is kinematic (reached within the tick). Motion is integrated with
/// semi-implicit Euler and the floor at `z = 0` is a hard stop.
pub fn step<T: Scalar>(
    state: &DroneState<T>,
    setpoint: &Vector3<T>,
    ctrl: &mut PidController<T>,
    cfg: &SimConfig<T>,
    dt: T,
) -> Result<DroneState<T>, SimError> {
    let zero = T::zero();
    let g = cfg.gravity;
    let a_cmd = ctrl.update(*setpoint - state.position, dt);

    let (s_yaw, c_yaw) = state.yaw.sin_cos();
    let ax_body = c_yaw * a_cmd.x + s_yaw * a_cmd.y;
    let ay_body = -s_yaw * a_cmd.x + c_yaw * a_cmd.y;
    let lift = (g + a_cmd.z).max(T::lit(0.2) * g);
    let tilt = cfg.tilt_limit;
    let pitch = ax_body.atan2(lift).max(-tilt).min(tilt);
    let roll = (-ay_body * pitch.cos()).atan2(lift).max(-tilt).min(tilt);

    let (s_r, c_r) = roll.sin_cos();
    let (s_p, c_p) = pitch.sin_cos();
    let thrust = (cfg.mass * (g + a_cmd.z) / (c_r * c_p)).max(zero).min(cfg.max_thrust);

    // body z axis in the world frame for R = Rz(yaw) Ry(pitch) Rx(roll)
    let axis = Vector3::new(c_yaw * s_p * c_r + s_yaw * s_r, s_yaw * s_p * c_r - c_yaw * s_r, c_p * c_r);
    let accel = axis * (thrust / cfg.mass) - Vector3::new(zero, zero, g) - state.velocity * cfg.drag;

    let mut velocity = state.velocity + accel * dt;
    let mut position = state.position + velocity * dt;
    if position.z < zero {
        position.z = zero;
        velocity.z = velocity.z.max(zero);
        if setpoint.z <= zero {
            velocity = Vector3::zero();
        }
    }

    let next = DroneState { position, velocity, roll, pitch, thrust, ..*state };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(SimError::NonFiniteState { id: state.id, t: f64::NAN })
    }
}

use serde::{Deserialize, Serialize};

use super::{step, DroneState, PidController, SimConfig, SimError, SwarmTrace, TraceFrame};
use crate::field::{field_force, FieldParams};
use crate::geometry::Vector3;
use crate::scalar::Scalar;
use crate::trajectory::TimedWaypoints;

/// Where a drone should be now and how fast that point is moving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Goal<T> {
    pub position: Vector3<T>,
    /// Feed-forward velocity of the goal, m/s.
    pub velocity: Vector3<T>,
    /// Heading to adopt, radians; `None` keeps the current one.
    pub yaw: Option<T>,
}

impl<T: Scalar> Goal<T> {
    pub fn hold(position: Vector3<T>) -> Self {
        Self { position, velocity: Vector3::zero(), yaw: None }
    }

    pub fn moving(position: Vector3<T>, velocity: Vector3<T>) -> Self {
        Self { position, velocity, yaw: None }
    }
}

/// Supplies one goal per drone each tick.
pub trait GuidanceSource<T: Scalar> {
    fn goals(&mut self, t: T, drones: &[DroneState<T>]) -> Vec<Goal<T>>;
}

/// Fixed goals.
impl<T: Scalar> GuidanceSource<T> for Vec<Vector3<T>> {
    fn goals(&mut self, _t: T, _drones: &[DroneState<T>]) -> Vec<Goal<T>> {
        self.iter().map(|p| Goal::hold(*p)).collect()
    }
}

/// One timed route per drone, all starting at `t = 0`.
impl<T: Scalar> GuidanceSource<T> for Vec<TimedWaypoints<T>> {
    fn goals(&mut self, t: T, _drones: &[DroneState<T>]) -> Vec<Goal<T>> {
        self.iter()
            .map(|route| {
                let (p, v) = route.sample(t);
                Goal::moving(p, v)
            })
            .collect()
    }
}

impl<T: Scalar, F> GuidanceSource<T> for F
where
    F: FnMut(T, &[DroneState<T>]) -> Vec<Goal<T>>,
{
    fn goals(&mut self, t: T, drones: &[DroneState<T>]) -> Vec<Goal<T>> {
        self(t, drones)
    }
}

/// A swarm under field guidance. Each drone tracks a virtual setpoint that moves with the
/// goal's feed-forward velocity plus the field force, clipped to `v_max`; the field treats
/// the other drones and any static obstacles as repulsion centers.
#[derive(Debug, Clone)]
pub struct Swarm<T> {
    cfg: SimConfig<T>,
    field: FieldParams<T>,
    drones: Vec<DroneState<T>>,
    controllers: Vec<PidController<T>>,
    setpoints: Vec<Vector3<T>>,
    obstacles: Vec<Vector3<T>>,
    motors: bool,
    ticks: u64,
}

impl<T: Scalar> Swarm<T> {
    pub fn new(initials: Vec<DroneState<T>>, cfg: SimConfig<T>, field: FieldParams<T>) -> Result<Self, SimError> {
        cfg.validate()?;
        field.validate()?;
        for (i, a) in initials.iter().enumerate() {
            if !a.is_finite() {
                return Err(SimError::NonFiniteState { id: a.id, t: 0.0 });
            }
            for b in &initials[i + 1..] {
                if a.position == b.position {
                    return Err(SimError::CoincidentStart(a.id, b.id));
                }
            }
        }
        let n = initials.len();
        Ok(Self {
            setpoints: initials.iter().map(|d| d.position).collect(),
            controllers: vec![PidController::new(cfg.gains); n],
            drones: initials,
            cfg,
            field,
            obstacles: Vec::new(),
            motors: true,
            ticks: 0,
        })
    }

    pub fn with_obstacles(mut self, obstacles: Vec<Vector3<T>>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.cfg
    }

    pub fn field(&self) -> &FieldParams<T> {
        &self.field
    }

    pub fn drones(&self) -> &[DroneState<T>] {
        &self.drones
    }

    pub fn setpoints(&self) -> &[Vector3<T>] {
        &self.setpoints
    }

    pub fn len(&self) -> usize {
        self.drones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drones.is_empty()
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn time(&self) -> T {
        T::from_u64(self.ticks).unwrap_or_else(T::zero) * self.cfg.dt
    }

    pub fn motors_on(&self) -> bool {
        self.motors
    }

    /// With motors off drones stay where they are and controllers are reset.
    pub fn set_motors(&mut self, on: bool) {
        if self.motors == on {
            return;
        }
        self.motors = on;
        for ((d, c), s) in self.drones.iter_mut().zip(&mut self.controllers).zip(&mut self.setpoints) {
            c.reset();
            *s = d.position;
            d.velocity = Vector3::zero();
            d.roll = T::zero();
            d.pitch = T::zero();
            d.thrust = T::zero();
        }
    }

    pub fn frame(&self) -> TraceFrame<T> {
        TraceFrame { t: self.time(), drones: self.drones.clone() }
    }

    pub fn tick(&mut self, goals: &[Goal<T>]) -> Result<(), SimError> {
        if goals.len() != self.drones.len() {
            return Err(SimError::GoalCount { expected: self.drones.len(), actual: goals.len() });
        }
        let dt = self.cfg.dt;
        if self.motors {
            let positions: Vec<Vector3<T>> = self.drones.iter().map(|d| d.position).collect();
            let mut obstacles = Vec::with_capacity(positions.len() + self.obstacles.len());
            let mut next = Vec::with_capacity(positions.len());
            for (i, goal) in goals.iter().enumerate() {
                obstacles.clear();
                obstacles.extend(positions.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p));
                obstacles.extend_from_slice(&self.obstacles);
                let f = field_force(&self.setpoints[i], &goal.position, &obstacles, &self.field)?;
                let v = (goal.velocity + f).clamp_norm(self.field.v_max);
                next.push(self.setpoints[i] + v * dt);
            }
            self.setpoints = next;
            let t = self.time();
            for (i, goal) in goals.iter().enumerate() {
                let d = &mut self.drones[i];
                if let Some(yaw) = goal.yaw {
                    d.yaw = yaw;
                }
                *d = step(d, &self.setpoints[i], &mut self.controllers[i], &self.cfg, dt).map_err(|e| match e {
                    SimError::NonFiniteState { id, .. } => SimError::NonFiniteState { id, t: t.to_f64_lossy() },
                    other => other,
                })?;
            }
        }
        self.ticks += 1;
        Ok(())
    }
}

/// Runs `guidance` for `duration` seconds and records every tick, including the initial
/// state at `t = 0`.
pub fn simulate_swarm<T: Scalar, G: GuidanceSource<T> + ?Sized>(
    initials: Vec<DroneState<T>>,
    guidance: &mut G,
    cfg: SimConfig<T>,
    field: FieldParams<T>,
    duration: T,
) -> Result<SwarmTrace<T>, SimError> {
    if !(duration > T::zero()) {
        return Err(SimError::InvalidConfig("duration must be positive"));
    }
    let mut swarm = Swarm::new(initials, cfg, field)?;
    let steps = (duration / cfg.dt).round().to_u64().unwrap_or(0);
    let mut frames = Vec::with_capacity(steps as usize + 1);
    frames.push(swarm.frame());
    for _ in 0..steps {
        let goals = guidance.goals(swarm.time(), swarm.drones());
        swarm.tick(&goals)?;
        frames.push(swarm.frame());
    }
    Ok(SwarmTrace { dt: cfg.dt, frames })
}

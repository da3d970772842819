use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    apply_input, map_gesture, Command, ControlMode, ControlState, DebounceConfig, Debouncer, Effect, Event, GestureMap,
    Input, InputQueue, LogEntry, MachineInput, MoveTarget, Phase, SessionLog, LOG_VERSION,
};
use crate::field::FieldParams;
use crate::formation::{formation_targets, hand_formation_command, FormationCommand, ShapeKind, SpreadMapping};
use crate::geometry::{centroid, Vector3};
use crate::gesture::{
    classify, extract_features, hand_to_world, FlightZone, LandmarkFrame, Mlp, PalmCalibration, INDEX_TIP,
};
use crate::sim::{ColorTag, DroneState, Goal, SimConfig, SimError, Swarm};
use crate::trajectory::{process_drawn_path, PixelSample, TimedWaypoints, TrajectoryConfig};

type V = Vector3<f64>;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid session config: {0}")]
    Config(String),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("session terminated by an earlier fault")]
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub id: u32,
    #[serde(default)]
    pub color: ColorTag,
    pub position: V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub zone: FlightZone<f64>,
    /// Palm-size calibration; its screen size is also the drawing canvas.
    pub calibration: PalmCalibration<f64>,
    pub sim: SimConfig<f64>,
    pub field: FieldParams<f64>,
    pub trajectory: TrajectoryConfig,
    pub drones: Vec<DroneSpec>,
    /// Meters above the floor after take-off.
    pub takeoff_altitude: f64,
    /// Descent rate, m/s.
    pub landing_speed: f64,
    /// Formation spacing on entering free-shape mode, meters.
    pub formation_scale: f64,
    /// How long a move's velocity is extrapolated, seconds.
    pub move_hold: f64,
    /// Distance to the route end at which playback counts as complete, meters.
    pub playback_tolerance: f64,
    pub debounce: DebounceConfig,
    pub gestures: GestureMap,
    pub spread: SpreadMapping,
    pub queue_capacity: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let colors = [ColorTag::Red, ColorTag::Green, ColorTag::Blue];
        Self {
            zone: FlightZone::new(V::new(4.0, 3.0, 2.0), V::zero()),
            calibration: PalmCalibration { palm_max: 240.0, palm_min: 40.0, screen: (1280.0, 720.0) },
            sim: SimConfig::default(),
            field: FieldParams::default(),
            trajectory: TrajectoryConfig::default(),
            drones: colors
                .iter()
                .enumerate()
                .map(|(i, c)| DroneSpec { id: i as u32, color: *c, position: V::new(-0.8 + 0.8 * i as f64, 0.0, 0.0) })
                .collect(),
            takeoff_altitude: 1.0,
            landing_speed: 0.4,
            formation_scale: 0.6,
            move_hold: 0.1,
            playback_tolerance: 0.05,
            debounce: DebounceConfig::default(),
            gestures: GestureMap::default(),
            spread: SpreadMapping::default(),
            queue_capacity: 1024,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |m: &str| Err(SessionError::Config(m.to_string()));
        if self.drones.is_empty() {
            return bad("at least one drone is required");
        }
        if !self.zone.is_valid() {
            return bad("flight zone extents must be positive");
        }
        self.calibration.validate().map_err(|e| SessionError::Config(e.to_string()))?;
        if !(self.takeoff_altitude > 0.0 && self.takeoff_altitude <= self.zone.extent.z) {
            return bad("take-off altitude must lie inside the zone");
        }
        if !(self.landing_speed > 0.0) || !(self.formation_scale > 0.0) || !(self.move_hold >= 0.0) {
            return bad("landing speed and formation scale must be positive");
        }
        let t = &self.trajectory;
        if !(t.alpha > 0.0 && t.alpha <= 1.0 && t.spacing > 0.0 && t.speed > 0.0) {
            return bad("trajectory alpha must be in (0, 1], spacing and speed positive");
        }
        Ok(())
    }
}

/// One broadcast per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Gapless, starting at 0.
    pub seq: u64,
    /// Simulation time after the tick, seconds.
    pub t: f64,
    pub phase: Phase,
    pub drawing: bool,
    pub drones: Vec<DroneState<f64>>,
    /// Guidance goals used for the tick.
    pub goals: Vec<V>,
    pub events: Vec<Event>,
}

/// A goal point with a velocity estimated from successive moves. The velocity is
/// extrapolated for at most `hold` seconds after the latest move, then dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MovingTarget {
    value: V,
    velocity: V,
    at: Option<f64>,
}

impl MovingTarget {
    fn new(value: V) -> Self {
        Self { value, velocity: V::zero(), at: None }
    }

    fn update(&mut self, value: V, at: f64, hold: f64) {
        match self.at {
            Some(prev) if at > prev => {
                let gap = at - prev;
                self.velocity = if gap <= hold { (value - self.value) / gap } else { V::zero() };
            }
            Some(_) => {}
            None => self.velocity = V::zero(),
        }
        self.value = value;
        self.at = Some(at);
    }

    fn predict(&self, t: f64, hold: f64) -> (V, V) {
        match self.at {
            Some(at) if t - at < hold => {
                let e = (t - at).max(0.0);
                (self.value + self.velocity * e, self.velocity)
            }
            _ => (self.value, V::zero()),
        }
    }
}

#[derive(Debug, Clone)]
struct Playback {
    routes: Vec<TimedWaypoints<f64>>,
    start: f64,
    duration: f64,
    complete: bool,
}

#[derive(Debug, Clone)]
struct FormationState {
    cmd: FormationCommand<f64>,
    com: MovingTarget,
}

#[derive(Debug, Clone)]
struct ControlPointState {
    offsets: Vec<V>,
    com: MovingTarget,
}

#[derive(Debug, Clone)]
struct LandingState {
    xy: Vec<V>,
    altitude: Vec<f64>,
    descent_from: Vec<Option<f64>>,
}

/// A live or replayed teleoperation session. Inputs are queued, then consumed in arrival
/// order at the start of the next tick; every consumed input is logged with its tick.
#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    control: ControlState,
    swarm: Swarm<f64>,
    queue: InputQueue,
    classifier: Option<Mlp<f64>>,
    debouncer: Debouncer,
    hold: Vec<V>,
    playback: Option<Playback>,
    formation: Option<FormationState>,
    control_point: Option<ControlPointState>,
    landing: Option<LandingState>,
    shape: ShapeKind,
    events: Vec<Event>,
    log: Vec<LogEntry>,
    seq: u64,
    failed: bool,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let initials: Vec<DroneState<f64>> =
            config.drones.iter().map(|d| DroneState::at_rest(d.id, d.position).with_color(d.color)).collect();
        let mut swarm = Swarm::new(initials, config.sim, config.field)?;
        swarm.set_motors(false);
        Ok(Self {
            hold: config.drones.iter().map(|d| d.position).collect(),
            control: ControlState::default(),
            queue: InputQueue::new(config.queue_capacity),
            classifier: None,
            debouncer: Debouncer::new(config.debounce),
            playback: None,
            formation: None,
            control_point: None,
            landing: None,
            shape: ShapeKind::Line,
            events: Vec::new(),
            log: Vec::new(),
            seq: 0,
            failed: false,
            swarm,
            config,
        })
    }

    pub fn with_classifier(mut self, model: Mlp<f64>) -> Self {
        self.classifier = Some(model);
        self
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.control.phase
    }

    pub fn control(&self) -> &ControlState {
        &self.control
    }

    pub fn swarm(&self) -> &Swarm<f64> {
        &self.swarm
    }

    pub fn time(&self) -> f64 {
        self.swarm.time()
    }

    pub fn ticks(&self) -> u64 {
        self.seq
    }

    pub fn queue(&self) -> &InputQueue {
        &self.queue
    }

    pub fn push(&mut self, input: impl Into<Input>) {
        self.queue.push(input.into());
    }

    /// Queues an input bypassing back-pressure.
    pub fn inject(&mut self, input: Input) {
        self.queue.push_unbounded(input);
    }

    pub fn log(&self) -> SessionLog {
        SessionLog { version: LOG_VERSION, config: self.config.clone(), entries: self.log.clone(), ticks: self.seq }
    }

    /// Current formation command in free-shape mode.
    pub fn formation(&self) -> Option<FormationCommand<f64>> {
        self.formation.as_ref().map(|f| f.cmd)
    }

    pub fn tick(&mut self) -> Result<Snapshot, SessionError> {
        if self.failed {
            return Err(SessionError::Terminated);
        }
        let t = self.swarm.time();
        for input in self.queue.drain() {
            self.log.push(LogEntry { tick: self.seq, input: input.clone() });
            match input {
                Input::Command { command } => self.apply(MachineInput::Command(command), t),
                Input::LandmarkFrame { frame } => self.handle_frame(&frame, t),
            }
        }
        let goals = self.goals(t);
        if let Err(e) = self.swarm.tick(&goals) {
            self.failed = true;
            return Err(e.into());
        }
        self.after_tick();
        let snap = Snapshot {
            seq: self.seq,
            t: self.swarm.time(),
            phase: self.control.phase,
            drawing: self.control.drawing,
            drones: self.swarm.drones().to_vec(),
            goals: goals.iter().map(|g| g.position).collect(),
            events: std::mem::take(&mut self.events),
        };
        self.seq += 1;
        Ok(snap)
    }

    fn positions(&self) -> Vec<V> {
        self.swarm.drones().iter().map(|d| d.position).collect()
    }

    fn apply(&mut self, input: MachineInput, t: f64) {
        let tr = apply_input(&mut self.control, &input, t);
        self.events.extend(tr.events);
        for effect in tr.effects {
            self.execute(effect, t);
        }
    }

    fn clamp(&self, p: V) -> V {
        self.config.zone.clamp(p)
    }

    fn execute(&mut self, effect: Effect, t: f64) {
        let n = self.swarm.len();
        match effect {
            Effect::TakeOff => {
                self.swarm.set_motors(true);
                let alt = self.config.takeoff_altitude;
                self.hold = self.positions().iter().map(|p| V::new(p.x, p.y, p.z.max(alt))).collect();
                self.debouncer.reset();
            }
            Effect::Hover => {
                self.hold = self.positions();
                self.clear_modes();
            }
            Effect::EnterMode(mode) => {
                self.clear_modes();
                let pos = self.positions();
                let c = centroid(&pos).unwrap_or_else(V::zero);
                match mode {
                    ControlMode::FreeShape => {
                        let cmd = FormationCommand::new(self.shape, c, self.config.formation_scale, 0.0);
                        if formation_targets(&cmd, n).is_err() {
                            self.events.push(Event::InputIgnored {
                                reason: format!("{} formation cannot host {n} drones", self.shape),
                            });
                        }
                        self.formation = Some(FormationState { cmd, com: MovingTarget::new(c) });
                    }
                    ControlMode::SwarmControl => {
                        self.control_point = Some(ControlPointState {
                            offsets: pos.iter().map(|p| *p - c).collect(),
                            com: MovingTarget::new(c),
                        });
                    }
                    ControlMode::Trajectory | ControlMode::Hover => {}
                }
            }
            Effect::SetShape(shape) => match formation_targets(&FormationCommand::new(shape, V::zero(), 1.0, 0.0), n) {
                Ok(_) => {
                    self.shape = shape;
                    if let Some(f) = &mut self.formation {
                        f.cmd.shape = shape;
                    }
                }
                Err(e) => self.events.push(Event::Rejected {
                    command: "set_shape".into(),
                    phase: self.control.phase,
                    reason: e.to_string(),
                }),
            },
            Effect::DispatchPath(raw) => self.dispatch(&raw, t),
            Effect::Move(target) => self.on_move(target, t),
            Effect::StartLanding => {
                let pos = self.positions();
                self.start_landing(pos, t);
            }
            Effect::LandOnFormation => {
                let targets = self.formation.as_ref().map(|f| {
                    let (com, _) = f.com.predict(t, self.config.move_hold);
                    (
                        FormationCommand { com: self.clamp(com), ..f.cmd },
                        formation_targets(&FormationCommand { com: self.clamp(com), ..f.cmd }, n),
                    )
                });
                match targets {
                    Some((cmd, Ok(ts))) => {
                        let floor: Vec<V> = ts.iter().map(|p| V::new(p.x, p.y, 0.0)).collect();
                        self.events.push(Event::TrialCompleted { targets: floor.clone(), formation: cmd });
                        self.start_landing(ts, t);
                    }
                    _ => {
                        let pos = self.positions();
                        self.start_landing(pos, t);
                    }
                }
            }
            Effect::MotorsOff => {
                self.swarm.set_motors(false);
                self.clear_modes();
                self.hold = self.positions();
                self.debouncer.reset();
            }
        }
    }

    fn clear_modes(&mut self) {
        self.playback = None;
        self.formation = None;
        self.control_point = None;
        self.landing = None;
    }

    fn start_landing(&mut self, xy: Vec<V>, _t: f64) {
        let altitude = self.positions().iter().map(|p| p.z.max(0.0)).collect();
        let n = xy.len();
        self.clear_modes();
        self.landing = Some(LandingState { xy, altitude, descent_from: vec![None; n] });
    }

    fn dispatch(&mut self, raw: &[PixelSample<f64>], t: f64) {
        let cfg = &self.config;
        match process_drawn_path(raw, &cfg.trajectory, cfg.calibration.screen, &cfg.zone) {
            Ok(route) => {
                let pos = self.positions();
                let c = centroid(&pos).unwrap_or_else(V::zero);
                let first = route.points()[0];
                // time to reach the start of the path, plus a second to settle there
                let gap = c.distance(&first);
                let transit = if gap > cfg.playback_tolerance { gap / cfg.trajectory.speed + 1.0 } else { 0.0 };
                let start = t + transit;
                let duration = route.duration();
                self.events.push(Event::TrajectoryDispatched { waypoints: route.points(), duration, start });
                let routes = pos.iter().map(|p| route.translated(*p - c)).collect();
                self.playback = Some(Playback { routes, start, duration, complete: false });
            }
            Err(e) => self.events.push(Event::Rejected {
                command: "confirm".into(),
                phase: self.control.phase,
                reason: e.to_string(),
            }),
        }
    }

    fn on_move(&mut self, target: MoveTarget, t: f64) {
        let hold = self.config.move_hold;
        let zone = self.config.zone;
        match target {
            MoveTarget::Formation { formation } => {
                if let Some(f) = &mut self.formation {
                    if !(formation.scale > 0.0) || !formation.com.is_finite() || !formation.yaw.is_finite() {
                        self.events.push(Event::InputIgnored { reason: "invalid formation command".into() });
                        return;
                    }
                    f.cmd.scale = formation.scale;
                    f.cmd.yaw = formation.yaw;
                    f.com.update(zone.clamp(formation.com), t, hold);
                    f.cmd.com = f.com.value;
                }
            }
            MoveTarget::ControlPoint { position } => {
                if let Some(cp) = &mut self.control_point {
                    if !position.is_finite() {
                        self.events.push(Event::InputIgnored { reason: "invalid control point".into() });
                        return;
                    }
                    cp.com.update(zone.clamp(position), t, hold);
                }
            }
            MoveTarget::Pointer { .. } => {}
        }
    }

    fn handle_frame(&mut self, frame: &LandmarkFrame<f64>, t: f64) {
        if let Err(e) = frame.validate() {
            self.debouncer.observe(None, frame.timestamp);
            self.events.push(Event::InputIgnored { reason: e.to_string() });
            return;
        }
        if let Some(model) = &self.classifier {
            let observed = extract_features(frame).ok().and_then(|f| classify(model, &f).ok());
            if let Some(g) = self.debouncer.observe(observed, frame.timestamp) {
                if let Some(cmd) = map_gesture(&self.config.gestures, g, self.control.phase, self.control.drawing) {
                    self.events.push(Event::GestureFired { gesture: g, command: cmd.name().to_string() });
                    self.apply(MachineInput::Command(cmd), t);
                }
            }
        }
        let cal = self.config.calibration;
        let (fx, fy) = cal.screen;
        let target = match self.control.phase {
            Phase::TrajectoryDraw if self.control.drawing => {
                let tip = frame.points[INDEX_TIP];
                Some(MoveTarget::Pointer { x: tip.x * fx, y: tip.y * fy })
            }
            Phase::FreeShape => hand_formation_command(frame, &cal, &self.config.zone, self.shape, &self.config.spread)
                .ok()
                .map(|formation| MoveTarget::Formation { formation }),
            Phase::SwarmControl => {
                let c = frame.palm_center();
                hand_to_world(c.x * fx, c.y * fy, frame.palm_size_px(fx, fy), &cal, &self.config.zone)
                    .ok()
                    .map(|position| MoveTarget::ControlPoint { position })
            }
            _ => None,
        };
        if let Some(target) = target {
            self.apply(MachineInput::Command(Command::Move { target }), t);
        }
    }

    fn goals(&self, t: f64) -> Vec<Goal<f64>> {
        let n = self.swarm.len();
        let hold = self.config.move_hold;
        let held = || self.hold.iter().map(|p| Goal::hold(*p)).collect::<Vec<_>>();
        match self.control.phase {
            Phase::Idle | Phase::Armed => held(),
            Phase::TrajectoryDraw => match &self.playback {
                Some(pb) => pb
                    .routes
                    .iter()
                    .map(|r| {
                        let (p, v) = r.sample(t - pb.start);
                        Goal::moving(p, v)
                    })
                    .collect(),
                None => held(),
            },
            Phase::FreeShape => match &self.formation {
                Some(f) => {
                    let (com, vel) = f.com.predict(t, hold);
                    let cmd = FormationCommand { com: self.clamp(com), ..f.cmd };
                    match formation_targets(&cmd, n) {
                        Ok(ts) => ts.iter().map(|p| Goal { position: *p, velocity: vel, yaw: Some(cmd.yaw) }).collect(),
                        Err(_) => held(),
                    }
                }
                None => held(),
            },
            Phase::SwarmControl => match &self.control_point {
                Some(cp) => {
                    let (com, vel) = cp.com.predict(t, hold);
                    cp.offsets.iter().map(|o| Goal::moving(self.clamp(com + *o), vel)).collect()
                }
                None => held(),
            },
            Phase::Landing => match &self.landing {
                Some(l) => {
                    let v = self.config.landing_speed;
                    (0..n)
                        .map(|i| {
                            let (z, vz) = match l.descent_from[i] {
                                None => (l.altitude[i], 0.0),
                                Some(t0) => {
                                    let z = l.altitude[i] - v * (t - t0);
                                    if z > 0.0 {
                                        (z, -v)
                                    } else {
                                        (0.0, 0.0)
                                    }
                                }
                            };
                            Goal::moving(V::new(l.xy[i].x, l.xy[i].y, z), V::new(0.0, 0.0, vz))
                        })
                        .collect()
                }
                None => held(),
            },
        }
    }

    fn after_tick(&mut self) {
        let t = self.swarm.time();
        let pos = self.positions();
        let v = self.config.landing_speed;
        let mut grounded = false;
        if let Some(l) = &mut self.landing {
            for (i, p) in pos.iter().enumerate() {
                if l.descent_from[i].is_none() && p.horizontal().distance(&l.xy[i].horizontal()) < 0.1 {
                    l.descent_from[i] = Some(t);
                }
            }
            grounded = l
                .descent_from
                .iter()
                .zip(&l.altitude)
                .zip(&pos)
                .all(|((d, z0), p)| matches!(d, Some(t0) if z0 - v * (t - t0) <= 0.0) && p.z <= 1e-3);
        }
        if grounded {
            self.apply(MachineInput::Grounded, t);
        }
        let tol = self.config.playback_tolerance;
        if let Some(pb) = &mut self.playback {
            if !pb.complete && t >= pb.start + pb.duration {
                let done = pb.routes.iter().zip(&pos).all(|(r, p)| {
                    let (end, _) = r.sample(pb.duration);
                    p.distance(&end) <= tol
                });
                if done {
                    pb.complete = true;
                    self.events.push(Event::PlaybackComplete { elapsed: t - pb.start });
                }
            }
        }
    }
}

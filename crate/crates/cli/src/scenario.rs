//! Scenario files for `simulate`: a TOML description of the zone, dynamics, field, drones and
//! the guidance they follow.
//!
//! ```toml
//! seed = 7
//! duration = 14.0
//!
//! [[drones]]
//! id = 0
//! position = [-2.0, -0.4, 1.0]
//!
//! [guidance]
//! kind = "routes"
//! routes = [[[-2.0, -0.4, 1.0], [2.0, -0.4, 1.0]]]
//! ```
//!
//! Relative file paths are resolved against the directory of the scenario file.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use skyhand_core::field::FieldParams;
use skyhand_core::formation::{
    formation_targets, match_targets, read_targets, targeting_errors, FormationCommand, ShapeKind, TargetingReport,
};
use skyhand_core::geometry::{centroid, Vector3};
use skyhand_core::gesture::{FlightZone, Mlp};
use skyhand_core::orchestrator::{read_log, replay, DroneSpec, MetricsReport};
use skyhand_core::sim::{min_pairwise_distance, DroneState, Goal, SimConfig, SwarmTrace, TraceFrame};
use skyhand_core::trajectory::{
    process_drawn_path, read_path, resample_uniform, schedule, tracing_errors, PixelSample, TimedWaypoints,
    TrajectoryConfig, Units,
};

use crate::error::{open_input, CliError, CliResult};

type V = Vector3<f64>;

type GuidanceFn<'a> = dyn FnMut(f64, &[DroneState<f64>]) -> Vec<Goal<f64>> + 'a;

/// Slack after the last scheduled arrival before a simulation stops, seconds.
const SETTLE_TIME: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Required whenever a stage draws random numbers.
    pub seed: Option<u64>,
    /// Simulated seconds; derived from the guidance when absent.
    pub duration: Option<f64>,
    #[serde(default = "default_zone")]
    pub zone: FlightZone<f64>,
    /// Drawing canvas for pixel path files, pixels.
    #[serde(default = "default_screen")]
    pub screen: (f64, f64),
    #[serde(default)]
    pub sim: SimConfig<f64>,
    #[serde(default)]
    pub field: FieldParams<f64>,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub drones: Vec<DroneSpec>,
    /// Static repulsion centers.
    #[serde(default)]
    pub obstacles: Vec<V>,
    pub guidance: Guidance,
    /// Ground-truth path (meters) for the tracing report.
    pub truth: Option<PathBuf>,
    /// Floor targets for the targeting report.
    pub targets: Option<PathBuf>,
}

fn default_zone() -> FlightZone<f64> {
    FlightZone::new(V::new(4.0, 3.0, 2.0), V::zero())
}

fn default_screen() -> (f64, f64) {
    (1280.0, 720.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Guidance {
    /// Fixed goal per drone.
    Goals { goals: Vec<V> },
    /// Straight polylines per drone, flown at the trajectory speed.
    Routes { routes: Vec<Vec<V>> },
    /// A path file shared by the swarm; each drone flies it offset by its start position
    /// relative to the swarm centroid. Pixel files go through the drawing pipeline, with
    /// optional Gaussian pixel noise (requires `seed`).
    Trajectory {
        path: PathBuf,
        #[serde(default)]
        noise_px: f64,
    },
    /// Formation commands taking effect at the given times.
    Formation { steps: Vec<FormationStep> },
    /// A recorded interactive session, replayed.
    Session { log: PathBuf, model: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormationStep {
    pub t: f64,
    pub shape: ShapeKind,
    pub com: V,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub yaw: f64,
}

fn one() -> f64 {
    1.0
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub spacing: Option<f64>,
    pub speed: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::error::read_input(path)?;
        let mut cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| CliError::config(path.display(), e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.truth.as_mut() {
            fix(p);
        }
        if let Some(p) = self.targets.as_mut() {
            fix(p);
        }
        match &mut self.guidance {
            Guidance::Trajectory { path, .. } => fix(path),
            Guidance::Session { log, model } => {
                fix(log);
                if let Some(m) = model.as_mut() {
                    fix(m);
                }
            }
            _ => {}
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(a) = o.alpha {
            self.trajectory.alpha = a;
        }
        if let Some(s) = o.spacing {
            self.trajectory.spacing = s;
        }
        if let Some(s) = o.speed {
            self.trajectory.speed = s;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !self.zone.is_valid() {
            return bad("zone extents must be positive".into());
        }
        self.sim.validate().map_err(|e| CliError::config("sim", e))?;
        self.field.validate().map_err(|e| CliError::config("field", e))?;
        let t = &self.trajectory;
        if !(t.alpha > 0.0 && t.alpha <= 1.0) || !(t.spacing > 0.0) || !(t.speed > 0.0) {
            return bad("trajectory: alpha must be in (0, 1], spacing and speed positive".into());
        }
        if let Some(d) = self.duration {
            if !(d > 0.0) {
                return bad("duration must be positive".into());
            }
        }
        let n = self.drones.len();
        let needs_drones = !matches!(self.guidance, Guidance::Session { .. });
        if needs_drones && n == 0 {
            return bad("at least one drone is required".into());
        }
        match &self.guidance {
            Guidance::Goals { goals } if goals.len() != n => bad(format!("{} goals for {n} drones", goals.len())),
            Guidance::Goals { .. } if self.duration.is_none() => bad("goal guidance needs a duration".into()),
            Guidance::Routes { routes } if routes.len() != n => bad(format!("{} routes for {n} drones", routes.len())),
            Guidance::Trajectory { noise_px, .. } if *noise_px != 0.0 && self.seed.is_none() => {
                bad("pixel noise is random: set a seed".into())
            }
            Guidance::Trajectory { noise_px, .. } if !(*noise_px >= 0.0) => bad("noise_px must be non-negative".into()),
            Guidance::Formation { steps } => {
                if steps.is_empty() {
                    return bad("formation guidance needs at least one step".into());
                }
                for s in steps {
                    if s.shape.min_count() > n {
                        return bad(format!("a {} needs at least {} drones", s.shape.name(), s.shape.min_count()));
                    }
                    if !(s.scale > 0.0) {
                        return bad("formation scale must be positive".into());
                    }
                }
                if steps.windows(2).any(|w| w[1].t < w[0].t) {
                    return bad("formation steps must be in time order".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn initials(&self) -> Vec<DroneState<f64>> {
        self.drones.iter().map(|d| DroneState::at_rest(d.id, d.position).with_color(d.color)).collect()
    }
}

/// Result of a scenario run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub trace: SwarmTrace<f64>,
    pub reports: Vec<MetricsReport>,
}

fn sim_error(e: impl std::fmt::Display) -> CliError {
    CliError::runtime("simulation", e)
}

fn read_meters(path: &Path) -> CliResult<Vec<V>> {
    let file = read_path::<f64, _>(open_input(path)?).map_err(|e| CliError::config(path.display(), e))?;
    if file.units != Units::Meters {
        return Err(CliError::Config(format!("{}: expected a path in meters", path.display())));
    }
    Ok(file.points)
}

/// The swarm route described by a trajectory path file.
fn shared_route(cfg: &ScenarioConfig, path: &Path, noise_px: f64) -> CliResult<TimedWaypoints<f64>> {
    let file = read_path::<f64, _>(open_input(path)?).map_err(|e| CliError::config(path.display(), e))?;
    let t = &cfg.trajectory;
    let route = match file.units {
        Units::Meters => resample_uniform(&file.points, t.spacing).and_then(|p| schedule(&p, t.speed)),
        Units::Pixels => {
            let mut raw: Vec<PixelSample<f64>> =
                file.points.iter().zip(&file.times).map(|(p, &t)| PixelSample::new(p.x, p.y, t)).collect();
            if noise_px > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or_default());
                let normal = Normal::new(0.0, noise_px).map_err(|e| CliError::config("noise_px", e))?;
                for s in raw.iter_mut() {
                    s.x += normal.sample(&mut rng);
                    s.y += normal.sample(&mut rng);
                }
            }
            process_drawn_path(&raw, t, cfg.screen, &cfg.zone)
        }
    };
    route.map_err(|e| CliError::config(path.display(), e))
}

fn polyline_routes(cfg: &ScenarioConfig, routes: &[Vec<V>]) -> CliResult<Vec<TimedWaypoints<f64>>> {
    routes.iter().map(|r| schedule(r, cfg.trajectory.speed).map_err(|e| CliError::config("routes", e))).collect()
}

fn formation_command(s: &FormationStep) -> FormationCommand<f64> {
    FormationCommand::new(s.shape, s.com, s.scale, s.yaw)
}

fn centroid_path(trace: &SwarmTrace<f64>) -> Vec<V> {
    trace.frames.iter().filter_map(|f| centroid(&f.drones.iter().map(|d| d.position).collect::<Vec<_>>())).collect()
}

fn separation(trace: &SwarmTrace<f64>, reports: &mut Vec<MetricsReport>) -> CliResult<()> {
    if trace.frames.first().is_some_and(|f| f.drones.len() >= 2) {
        let min_distance = min_pairwise_distance(trace).map_err(sim_error)?;
        reports.push(MetricsReport::Separation { min_distance });
    }
    Ok(())
}

fn targeting(
    cfg: &ScenarioConfig,
    trace: &SwarmTrace<f64>,
    fallback: Option<Vec<V>>,
) -> CliResult<Option<TargetingReport>> {
    let Some(last) = trace.frames.last() else {
        return Ok(None);
    };
    let targets = match &cfg.targets {
        Some(path) => {
            let floor = read_targets(open_input(path)?).map_err(|e| CliError::config(path.display(), e))?;
            match_targets(&last.drones, &floor).map_err(|e| CliError::config(path.display(), e))?
        }
        None => match fallback {
            Some(t) => t,
            None => return Ok(None),
        },
    };
    let finals: Vec<V> = last.drones.iter().map(|d| d.position).collect();
    targeting_errors(&finals, &targets, last.t).map(Some).map_err(|e| CliError::runtime("targeting", e))
}

/// Runs a validated scenario.
pub fn run(cfg: &ScenarioConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let mut reports = Vec::new();
    let initials = cfg.initials();
    let simulate = |guidance: &mut GuidanceFn, duration: f64| fly(cfg, &initials, guidance, duration);

    let trace = match &cfg.guidance {
        Guidance::Goals { goals } => {
            let duration = cfg.duration.expect("validated");
            let trace = simulate(&mut |_, _| goals.iter().map(|g| Goal::hold(*g)).collect(), duration)?;
            if let Some(r) = targeting(cfg, &trace, Some(goals.clone()))? {
                reports.push(MetricsReport::Targeting(r));
            }
            trace
        }
        Guidance::Routes { routes } => {
            let timed = polyline_routes(cfg, routes)?;
            let longest = timed.iter().map(|r| r.duration()).fold(0.0, f64::max);
            let duration = cfg.duration.unwrap_or(longest + SETTLE_TIME);
            let trace = simulate(&mut |t, _| timed.iter().map(|r| sample(r, t)).collect(), duration)?;
            if let Some(truth) = &cfg.truth {
                let truth = read_meters(truth)?;
                reports.push(MetricsReport::Tracing(tracing_errors(&centroid_path(&trace), &truth, longest)));
            }
            trace
        }
        Guidance::Trajectory { path, noise_px } => {
            let route = shared_route(cfg, path, *noise_px)?;
            let starts: Vec<V> = initials.iter().map(|d| d.position).collect();
            let center = centroid(&starts).expect("validated non-empty");
            let routes: Vec<TimedWaypoints<f64>> = starts.iter().map(|s| route.translated(*s - center)).collect();
            let duration = cfg.duration.unwrap_or(route.duration() + SETTLE_TIME);
            let trace = simulate(&mut |t, _| routes.iter().map(|r| sample(r, t)).collect(), duration)?;
            let truth = match &cfg.truth {
                Some(p) => read_meters(p)?,
                None => route.points(),
            };
            reports.push(MetricsReport::Tracing(tracing_errors(&centroid_path(&trace), &truth, route.duration())));
            trace
        }
        Guidance::Formation { steps } => {
            let n = initials.len();
            let targets: Vec<Vec<V>> = steps
                .iter()
                .map(|s| formation_targets(&formation_command(s), n).map_err(|e| CliError::config("formation", e)))
                .collect::<CliResult<_>>()?;
            let last_t = steps.last().map_or(0.0, |s| s.t);
            let duration = cfg.duration.unwrap_or(last_t + 10.0);
            let trace = simulate(
                &mut |t, _| {
                    let k = steps.iter().rposition(|s| s.t <= t).unwrap_or(0);
                    targets[k].iter().map(|p| Goal::hold(*p)).collect()
                },
                duration,
            )?;
            if let Some(r) = targeting(cfg, &trace, targets.last().cloned())? {
                reports.push(MetricsReport::Targeting(r));
            }
            trace
        }
        Guidance::Session { log, model } => {
            let session_log = read_log(open_input(log)?).map_err(|e| CliError::config(log.display(), e))?;
            let classifier = match model {
                Some(p) => Some(Mlp::<f64>::load(open_input(p)?).map_err(|e| CliError::config(p.display(), e))?),
                None => None,
            };
            let snaps = replay(&session_log, classifier).map_err(|e| CliError::runtime("replay", e))?;
            let mut frames = Vec::with_capacity(snaps.len());
            for s in snaps {
                frames.push(TraceFrame { t: s.t, drones: s.drones });
            }
            let trace = SwarmTrace { dt: session_log.config.sim.dt, frames };
            if let Some(r) = targeting(cfg, &trace, None)? {
                reports.push(MetricsReport::Targeting(r));
            }
            trace
        }
    };
    separation(&trace, &mut reports)?;
    Ok(Outcome { trace, reports })
}

fn sample(route: &TimedWaypoints<f64>, t: f64) -> Goal<f64> {
    let (p, v) = route.sample(t);
    Goal::moving(p, v)
}

/// Records every tick of the scenario's swarm, including the initial state.
fn fly(
    cfg: &ScenarioConfig,
    initials: &[DroneState<f64>],
    guidance: &mut GuidanceFn,
    duration: f64,
) -> CliResult<SwarmTrace<f64>> {
    let mut swarm = skyhand_core::sim::Swarm::new(initials.to_vec(), cfg.sim, cfg.field)
        .map_err(sim_error)?
        .with_obstacles(cfg.obstacles.clone());
    let steps = (duration / cfg.sim.dt).round() as u64;
    let mut frames = Vec::with_capacity(steps as usize + 1);
    frames.push(swarm.frame());
    for _ in 0..steps {
        let goals = guidance(swarm.time(), swarm.drones());
        swarm.tick(&goals).map_err(sim_error)?;
        frames.push(swarm.frame());
    }
    Ok(SwarmTrace { dt: cfg.sim.dt, frames })
}

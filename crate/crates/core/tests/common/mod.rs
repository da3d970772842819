#![allow(dead_code)]

use std::collections::HashSet;

use skyhand_core::field::FieldParams;
use skyhand_core::formation::{FormationCommand, ShapeKind};
use skyhand_core::geometry::{centroid, Vector3};
use skyhand_core::gesture::{
    canonical_frame, featurize, generate_synthetic_dataset, train_classifier, GestureClass, HandPlacement, Hyperparams,
    LandmarkFrame, Mlp,
};
use skyhand_core::orchestrator::{
    apply_input, Command, ControlMode, ControlState, Event, MachineInput, MoveTarget, Phase, Session, SessionConfig,
    Snapshot,
};
use skyhand_core::sim::{simulate_swarm, DroneState, SimConfig, SwarmTrace};
use skyhand_core::trajectory::schedule;

pub type V = Vector3<f64>;

pub fn run(session: &mut Session, ticks: usize, out: &mut Vec<Snapshot>) {
    for _ in 0..ticks {
        out.push(session.tick().expect("tick"));
    }
}

pub fn run_until(
    session: &mut Session,
    max_ticks: usize,
    out: &mut Vec<Snapshot>,
    done: impl Fn(&Snapshot) -> bool,
) -> bool {
    for _ in 0..max_ticks {
        let s = session.tick().expect("tick");
        let stop = done(&s);
        out.push(s);
        if stop {
            return true;
        }
    }
    false
}

pub fn events(snaps: &[Snapshot]) -> impl Iterator<Item = &Event> {
    snaps.iter().flat_map(|s| s.events.iter())
}

pub fn drone_centroid(s: &Snapshot) -> V {
    centroid(&s.drones.iter().map(|d| d.position).collect::<Vec<_>>()).unwrap()
}

pub fn armed_session(config: SessionConfig) -> (Session, Vec<Snapshot>) {
    let mut s = Session::new(config).unwrap();
    let mut snaps = Vec::new();
    s.push(Command::TakeOff);
    run(&mut s, 400, &mut snaps);
    (s, snaps)
}

/// World (x, z) on the drawing plane to screen pixels for `config`.
pub fn to_screen(config: &SessionConfig, x: f64, z: f64) -> (f64, f64) {
    let (w, h) = config.calibration.screen;
    let e = config.zone.extent;
    ((x - config.zone.origin.x) / e.x * w + 0.5 * w, h - z / e.z * h)
}

/// Takes off, draws a 1 m square on the screen with the pointer, confirms, and flies it.
/// Returns the session, all snapshots, and the time at which the drawing was confirmed.
pub fn drawn_square_run() -> (Session, Vec<Snapshot>) {
    let config = SessionConfig::default();
    let corners = [(-0.5, 0.6), (0.5, 0.6), (0.5, 1.6), (-0.5, 1.6), (-0.5, 0.6)];
    let (mut s, mut snaps) = armed_session(config.clone());
    s.push(Command::SelectMode { mode: ControlMode::Trajectory });
    s.push(Command::DrawStart);
    run(&mut s, 1, &mut snaps);
    for w in corners.windows(2) {
        for k in 0..30 {
            let f = k as f64 / 30.0;
            let (x, y) = to_screen(&config, w[0].0 + (w[1].0 - w[0].0) * f, w[0].1 + (w[1].1 - w[0].1) * f);
            s.push(Command::Move { target: MoveTarget::Pointer { x, y } });
            run(&mut s, 3, &mut snaps);
        }
    }
    let (x, y) = to_screen(&config, corners[4].0, corners[4].1);
    s.push(Command::Move { target: MoveTarget::Pointer { x, y } });
    s.push(Command::DrawStop);
    s.push(Command::Confirm);
    run_until(&mut s, 3000, &mut snaps, |snap| snap.events.iter().any(|e| matches!(e, Event::PlaybackComplete { .. })));
    (s, snaps)
}

/// Free-shape mode: line of three, moved to a pattern at `com`, then confirmed and landed.
pub fn line_landing_run(com: V, scale: f64, yaw: f64) -> (Session, Vec<Snapshot>, Vec<V>) {
    let (mut s, mut snaps) = armed_session(SessionConfig::default());
    s.push(Command::SelectMode { mode: ControlMode::FreeShape });
    s.push(Command::SetShape { shape: ShapeKind::Line });
    run(&mut s, 1, &mut snaps);
    let start = drone_centroid(snaps.last().unwrap());
    // sweep the pattern over at 0.5 m/s, one move per 3 ticks
    let steps = ((com - start).norm() / (0.5 * 0.03)).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let f = k as f64 / steps as f64;
        let formation = FormationCommand::new(ShapeKind::Line, start.lerp(&com, f), scale, yaw * f);
        s.push(Command::Move { target: MoveTarget::Formation { formation } });
        run(&mut s, 3, &mut snaps);
    }
    run(&mut s, 300, &mut snaps);
    s.push(Command::Confirm);
    run_until(&mut s, 2000, &mut snaps, |snap| snap.phase == Phase::Idle);
    let targets = events(&snaps)
        .find_map(|e| match e {
            Event::TrialCompleted { targets, .. } => Some(targets.clone()),
            _ => None,
        })
        .expect("trial completed");
    (s, snaps, targets)
}

/// Two groups of two drones, 0.8 m apart side by side, flying straight lines that cross at
/// right angles through the origin at 0.5 m/s.
pub fn crossing_run() -> SwarmTrace<f64> {
    let (h, z) = (0.4, 1.0);
    let starts = [V::new(-2.0, -h, z), V::new(-2.0, h, z), V::new(-h, -2.0, z), V::new(h, -2.0, z)];
    let ends = [V::new(2.0, -h, z), V::new(2.0, h, z), V::new(-h, 2.0, z), V::new(h, 2.0, z)];
    let mut routes: Vec<_> = starts.iter().zip(&ends).map(|(a, b)| schedule(&[*a, *b], 0.5).unwrap()).collect();
    let initials = starts.iter().enumerate().map(|(i, p)| DroneState::at_rest(i as u32, *p)).collect();
    simulate_swarm(initials, &mut routes, SimConfig::default(), FieldParams::default(), 14.0).unwrap()
}

pub fn crossing_ends() -> [V; 4] {
    let (h, z) = (0.4, 1.0);
    [V::new(2.0, -h, z), V::new(2.0, h, z), V::new(-h, 2.0, z), V::new(h, 2.0, z)]
}

// ---- exhaustive state-machine enumeration ----

pub fn alphabet() -> Vec<MachineInput> {
    let mut cmds = vec![
        Command::TakeOff,
        Command::Land,
        Command::DrawStart,
        Command::DrawStop,
        Command::Erase,
        Command::Confirm,
        Command::Move { target: MoveTarget::Pointer { x: 10.0, y: 20.0 } },
        Command::Move { target: MoveTarget::ControlPoint { position: V::new(0.0, 0.0, 1.0) } },
        Command::Move {
            target: MoveTarget::Formation { formation: FormationCommand::new(ShapeKind::Line, V::zero(), 0.5, 0.0) },
        },
    ];
    cmds.extend(ControlMode::ALL.map(|mode| Command::SelectMode { mode }));
    cmds.extend(ShapeKind::ALL.map(|shape| Command::SetShape { shape }));
    let mut inputs: Vec<MachineInput> = cmds.into_iter().map(MachineInput::Command).collect();
    inputs.push(MachineInput::Grounded);
    inputs
}

pub fn check_state(s: &ControlState) {
    assert!(Phase::ALL.contains(&s.phase));
    if s.phase != Phase::TrajectoryDraw {
        assert!(s.path.is_empty() && !s.drawing, "{s:?}");
    }
    // land, then touchdown, always ends idle
    let mut t = s.clone();
    apply_input(&mut t, &MachineInput::Command(Command::Land), 0.0);
    apply_input(&mut t, &MachineInput::Grounded, 0.0);
    assert_eq!(t.phase, Phase::Idle, "from {s:?}");
}

pub fn explore(
    s: &ControlState,
    depth: usize,
    inputs: &[MachineInput],
    seen: &mut HashSet<(Phase, bool, usize)>,
    count: &mut u64,
) {
    check_state(s);
    seen.insert((s.phase, s.drawing, s.path.len()));
    *count += 1;
    if depth == 0 {
        return;
    }
    for input in inputs {
        let mut next = s.clone();
        let tr = apply_input(&mut next, input, 0.0);
        if tr.events.iter().any(|e| matches!(e, Event::Rejected { .. })) {
            assert_eq!(&next, s, "a rejected command changed state");
        }
        explore(&next, depth - 1, inputs, seen, count);
    }
}

// ---- gestures through the session ----

pub fn held(g: GestureClass, from: f64, seconds: f64, out: &mut Vec<LandmarkFrame<f64>>) -> f64 {
    let frames = (seconds * 30.0).round() as usize;
    for k in 0..frames {
        let mut f = canonical_frame(g, &HandPlacement::default());
        f.timestamp = from + k as f64 / 30.0;
        out.push(f);
    }
    from + frames as f64 / 30.0
}

pub fn fired(snaps: &[Snapshot]) -> Vec<(GestureClass, String)> {
    events(snaps)
        .filter_map(|e| match e {
            Event::GestureFired { gesture, command } => Some((*gesture, command.clone())),
            _ => None,
        })
        .collect()
}

pub fn feed(session: &mut Session, frames: &[LandmarkFrame<f64>]) -> Vec<Snapshot> {
    let mut snaps = Vec::new();
    for f in frames {
        session.push(f.clone());
        run(session, 3, &mut snaps);
    }
    snaps
}

pub fn model(seed: u64) -> Mlp<f64> {
    let data = featurize(&generate_synthetic_dataset::<f64>(60, 0.08, seed)).unwrap();
    let hyper = Hyperparams { epochs: 15, ..Hyperparams::default() };
    train_classifier(&data, &hyper, seed).unwrap().model
}

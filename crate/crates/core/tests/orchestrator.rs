mod common;

use std::collections::HashSet;

use common::*;
use skyhand_core::formation::{targeting_errors, FormationCommand, ShapeKind};
use skyhand_core::geometry::{centroid, polyline_length};
use skyhand_core::gesture::GestureClass;
use skyhand_core::orchestrator::*;

#[test]
fn hover_drift_is_tiny() {
    let (mut s, mut snaps) = armed_session(SessionConfig::default());
    run(&mut s, 300, &mut snaps);
    let n = snaps.len();
    for w in snaps[n - 200..].windows(2) {
        for (a, b) in w[0].drones.iter().zip(&w[1].drones) {
            assert!(a.position.distance(&b.position) < 1e-3);
        }
    }
    assert_eq!(s.phase(), Phase::Armed);
}

#[test]
fn snapshots_are_gapless() {
    let (_, snaps) = armed_session(SessionConfig::default());
    assert!(snaps.iter().enumerate().all(|(i, s)| s.seq == i as u64));
}

#[test]
fn drawn_square_plays_back_on_schedule() {
    let (_, snaps) = drawn_square_run();
    let (route, duration) = events(&snaps)
        .find_map(|e| match e {
            Event::TrajectoryDispatched { waypoints, duration, .. } => Some((waypoints.clone(), *duration)),
            _ => None,
        })
        .unwrap();
    let elapsed = events(&snaps)
        .find_map(|e| match e {
            Event::PlaybackComplete { elapsed } => Some(*elapsed),
            _ => None,
        })
        .expect("playback completes");
    let nominal = 4.0 / 0.5;
    assert!((elapsed - nominal).abs() <= 0.05 * nominal, "elapsed {elapsed}");
    assert!((duration - polyline_length(&route) / 0.5).abs() < 1e-9);
}

#[test]
fn formation_sweep_lag() {
    let (mut s, mut snaps) = armed_session(SessionConfig::default());
    s.push(Command::SelectMode { mode: ControlMode::FreeShape });
    run(&mut s, 300, &mut snaps);
    let start = drone_centroid(snaps.last().unwrap());
    let end = start + V::new(1.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for k in 1..=67 {
        let com = start.lerp(&end, (k as f64 / 67.0).min(1.0));
        let formation = FormationCommand::new(ShapeKind::Line, com, 0.6, 0.0);
        s.push(Command::Move { target: MoveTarget::Formation { formation } });
        let mut chunk = Vec::new();
        run(&mut s, 3, &mut chunk);
        for snap in &chunk {
            worst = worst.max(drone_centroid(snap).distance(&com));
        }
        snaps.extend(chunk);
    }
    assert!(worst < 0.1, "lag {worst}");
}

#[test]
fn line_landing_beats_operator_error() {
    let (s, snaps, targets) = line_landing_run(V::new(0.5, 0.4, 1.0), 0.7, 0.3);
    assert_eq!(s.phase(), Phase::Idle);
    let last = snaps.last().unwrap();
    let finals: Vec<V> = last.drones.iter().map(|d| d.position).collect();
    assert!(finals.iter().all(|p| p.z <= 1e-3));
    let r = targeting_errors(&finals, &targets, last.t).unwrap();
    assert!(r.formation_mean_error < 0.073, "{r}");
    assert!((centroid(&targets).unwrap() - V::new(0.5, 0.4, 0.0)).norm() < 1e-9);
}

#[test]
fn record_then_replay_is_bit_identical() {
    let (s, snaps) = drawn_square_run();
    let log = s.log();
    let mut buf = Vec::new();
    write_log(&mut buf, &log).unwrap();
    let back = read_log(&buf[..]).unwrap();
    assert_eq!(back, log);
    assert_eq!(replay(&back, None).unwrap(), snaps);
}

#[test]
fn truncated_or_foreign_logs_are_rejected() {
    let (s, _) = armed_session(SessionConfig::default());
    let mut buf = Vec::new();
    write_log(&mut buf, &s.log()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let truncated = lines[..lines.len() - 1].join("\n");
    assert!(matches!(read_log(truncated.as_bytes()), Err(LogError::CorruptLog(_))));
    let garbled = text.replacen("\"record\":\"input\"", "\"record\":\"inp", 1);
    assert!(matches!(read_log(garbled.as_bytes()), Err(LogError::CorruptLog(_))));
    let future = text.replacen("\"version\":1", "\"version\":9", 1);
    assert!(matches!(read_log(future.as_bytes()), Err(LogError::VersionMismatch { found: 9, .. })));
    assert!(matches!(read_log(&b""[..]), Err(LogError::CorruptLog(_))));
}

#[test]
fn rejections_are_events_not_faults() {
    let mut s = Session::new(SessionConfig::default()).unwrap();
    s.push(Command::Land);
    s.push(Command::Confirm);
    let snap = s.tick().unwrap();
    assert_eq!(snap.phase, Phase::Idle);
    assert_eq!(snap.events.iter().filter(|e| matches!(e, Event::Rejected { .. })).count(), 2);
}

#[test]
fn land_returns_to_idle_from_every_mode() {
    for mode in [ControlMode::Trajectory, ControlMode::FreeShape, ControlMode::SwarmControl] {
        let (mut s, mut snaps) = armed_session(SessionConfig::default());
        s.push(Command::SelectMode { mode });
        run(&mut s, 50, &mut snaps);
        s.push(Command::Land);
        assert!(run_until(&mut s, 2000, &mut snaps, |x| x.phase == Phase::Idle), "{mode:?}");
        assert!(!s.swarm().motors_on());
    }
}

#[test]
fn swarm_control_tracks_control_point() {
    let (mut s, mut snaps) = armed_session(SessionConfig::default());
    s.push(Command::SelectMode { mode: ControlMode::SwarmControl });
    run(&mut s, 1, &mut snaps);
    let goal = V::new(0.6, -0.5, 1.4);
    s.push(Command::Move { target: MoveTarget::ControlPoint { position: goal } });
    run(&mut s, 600, &mut snaps);
    assert!(drone_centroid(snaps.last().unwrap()).distance(&goal) < 0.02);
}

#[test]
fn command_sequences_to_depth_six_stay_defined() {
    let inputs = alphabet();
    let mut seen = HashSet::new();
    let mut count = 0;
    explore(&ControlState::default(), 6, &inputs, &mut seen, &mut count);
    let n = inputs.len() as u64;
    assert_eq!(count, (0..=6).map(|k| n.pow(k)).sum::<u64>());
    let phases: HashSet<Phase> = seen.iter().map(|k| k.0).collect();
    assert_eq!(phases.len(), Phase::ALL.len());
}

#[test]
fn gestures_drive_the_session_and_replay_identically() {
    let mut frames = Vec::new();
    let t = held(GestureClass::Five, 0.0, 0.5, &mut frames);
    let t = held(GestureClass::Rock, t, 0.1, &mut frames);
    let t = held(GestureClass::One, t, 0.5, &mut frames);
    let t = held(GestureClass::Okay, t, 0.4, &mut frames);
    held(GestureClass::ThumbsUp, t, 0.2, &mut frames);

    let mut a = Session::new(SessionConfig::default()).unwrap().with_classifier(model(11));
    let snaps_a = feed(&mut a, &frames);
    let fired_a = fired(&snaps_a);
    assert_eq!(
        fired_a,
        vec![
            (GestureClass::Five, "take_off".to_string()),
            (GestureClass::One, "select_mode".to_string()),
            (GestureClass::Okay, "draw_start".to_string()),
        ]
    );
    assert_eq!(a.phase(), Phase::TrajectoryDraw);
    assert!(a.control().drawing);

    // same seed, retrained: same command stream, and the log replays bit for bit
    let mut b = Session::new(SessionConfig::default()).unwrap().with_classifier(model(11));
    assert_eq!(fired(&feed(&mut b, &frames)), fired_a);
    assert_eq!(replay(&a.log(), Some(model(11))).unwrap(), snaps_a);
}

#[test]
fn flickering_classification_fires_nothing() {
    let mut frames = Vec::new();
    let mut t = 0.0;
    for i in 0..30 {
        let g = if i % 2 == 0 { GestureClass::Five } else { GestureClass::Rock };
        t = held(g, t, 1.0 / 30.0, &mut frames);
    }
    let mut s = Session::new(SessionConfig::default()).unwrap().with_classifier(model(11));
    let snaps = feed(&mut s, &frames);
    assert!(fired(&snaps).is_empty());
    assert_eq!(s.phase(), Phase::Idle);
}

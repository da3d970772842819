use skyhand_core::field::{sphere_surface_points, FieldParams};
use skyhand_core::geometry::Vector3;
use skyhand_core::gesture::{accuracy, featurize, generate_synthetic_dataset, FlightZone, Hyperparams, LabeledFrame};
use skyhand_core::sim::{min_pairwise_distance, read_trace, simulate_swarm, write_trace, DroneState, SimConfig, Swarm};
use skyhand_core::trajectory::{process_drawn_path, schedule, PixelSample, TrajectoryConfig};

fn drawn_circle<T: skyhand_core::Scalar>(n: usize) -> Vec<PixelSample<T>> {
    (0..=n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            PixelSample::new(T::lit(640.0 + 200.0 * a.cos()), T::lit(360.0 + 200.0 * a.sin()), T::lit(i as f64 / 30.0))
        })
        .collect()
}

#[test]
fn drawn_path_agrees_across_precisions() {
    let cfg = TrajectoryConfig::default();
    let zone64 = FlightZone::new(Vector3::new(4.0, 3.0, 2.0), Vector3::zero());
    let zone32 = FlightZone::new(Vector3::new(4.0f32, 3.0, 2.0), Vector3::zero());
    let a = process_drawn_path(&drawn_circle::<f64>(240), &cfg, (1280.0, 720.0), &zone64).unwrap();
    let b = process_drawn_path(&drawn_circle::<f32>(240), &cfg, (1280.0, 720.0), &zone32).unwrap();
    assert!((a.len() as i64 - b.len() as i64).abs() <= 1);
    for (p, q) in a.points().iter().zip(b.points()) {
        let q: Vector3<f64> = q.cast();
        assert!(p.distance(&q) < 1e-3);
    }
    assert!((a.duration() - b.duration() as f64).abs() < 1e-2);
}

#[test]
fn drone_skirts_a_spherical_obstacle() {
    let center = Vector3::new(0.0, 0.25, 1.0);
    let obstacles = sphere_surface_points(center, 0.1, 24);
    let start = Vector3::new(-2.0, 0.0, 1.0);
    let goal = Vector3::new(2.0, 0.0, 1.0);
    let route = schedule(&[start, goal], 0.5).unwrap();
    let mut swarm = Swarm::new(vec![DroneState::at_rest(0, start)], SimConfig::default(), FieldParams::default())
        .unwrap()
        .with_obstacles(obstacles);
    let mut closest = f64::INFINITY;
    for _ in 0..1400 {
        let t = swarm.time();
        let (p, v) = route.sample(t);
        swarm.tick(&[skyhand_core::sim::Goal::moving(p, v)]).unwrap();
        closest = closest.min(swarm.drones()[0].position.distance(&center));
    }
    assert!(closest > 0.15, "{closest}");
    assert!(swarm.drones()[0].position.distance(&goal) < 0.1);
}

#[test]
fn trace_survives_a_file_round_trip() {
    let initials =
        vec![DroneState::at_rest(0, Vector3::new(-1.0, 0.0, 1.0)), DroneState::at_rest(1, Vector3::new(1.0, 0.0, 1.0))];
    let mut goals = vec![Vector3::new(1.0, 0.5, 1.0), Vector3::new(-1.0, -0.5, 1.0)];
    let trace = simulate_swarm(initials, &mut goals, SimConfig::default(), FieldParams::default(), 6.0).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace).unwrap();
    let back = read_trace::<f64, _>(buf.as_slice()).unwrap();
    assert_eq!(back.frames.len(), trace.frames.len());
    assert_eq!(min_pairwise_distance(&back).unwrap(), min_pairwise_distance(&trace).unwrap());
    for (a, b) in back.frames.iter().zip(&trace.frames) {
        for (x, y) in a.drones.iter().zip(&b.drones) {
            assert_eq!(x.position, y.position);
        }
    }
}

#[test]
fn single_precision_classifier_trains() {
    let frames: Vec<LabeledFrame<f32>> = generate_synthetic_dataset(60, 0.05, 17);
    let samples = featurize(&frames).unwrap();
    let hyper = Hyperparams { epochs: 20, ..Hyperparams::default() };
    let out = skyhand_core::gesture::train_classifier(&samples, &hyper, 17).unwrap();
    let fresh = featurize(&generate_synthetic_dataset::<f32>(30, 0.05, 18)).unwrap();
    assert!(accuracy(&out.model, &fresh).unwrap() > 0.95);
}

//! Gesture-steered drone swarm teleoperation.
//!
//! Hand landmarks are classified into gesture commands and mapped into the flight zone,
//! drawn paths become timed waypoints, and a simulated quadrotor swarm follows them under
//! artificial-potential-field collision avoidance. The [`orchestrator`] ties the pieces into
//! a deterministic, replayable session.
//!
//! The numeric modules are generic over [`scalar::Scalar`]; the aliases below fix them to
//! `f64`, which is what the session runs in.

pub mod field;
pub mod formation;
pub mod geometry;
pub mod gesture;
pub mod orchestrator;
pub mod scalar;
pub mod sim;
pub mod trajectory;

pub use scalar::Scalar;

pub type Vec3 = geometry::Vector3<f64>;
pub type Vec3f = geometry::Vector3<f32>;

pub type FieldParams = field::FieldParams<f64>;
pub type FormationCommand = formation::FormationCommand<f64>;
pub type LandmarkFrame = gesture::LandmarkFrame<f64>;
pub type PalmCalibration = gesture::PalmCalibration<f64>;
pub type FlightZone = gesture::FlightZone<f64>;
pub type Classifier = gesture::Mlp<f64>;
pub type ClassifierF32 = gesture::Mlp<f32>;
pub type SimConfig = sim::SimConfig<f64>;
pub type DroneState = sim::DroneState<f64>;
pub type Swarm = sim::Swarm<f64>;
pub type SwarmTrace = sim::SwarmTrace<f64>;
pub type TimedWaypoints = trajectory::TimedWaypoints<f64>;
pub type PixelSample = trajectory::PixelSample<f64>;

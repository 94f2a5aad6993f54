//! Simulation and control of a thruster-driven scale surface vessel.
//!
//! The crate models the vessel in surge, sway and yaw, maps generalized
//! forces onto four azimuth thrusters, shapes operator commands with a
//! second-order reference model, and controls heading and position with
//! either a sliding-mode controller or a small neural network cloned from it.
//!
//! | module | contents |
//! |---|---|
//! | [`dynamics`] | rigid-body model, Coriolis matrix, RK4 step |
//! | [`allocation`] | thruster configuration matrix, pseudo-inverse allocation, limits |
//! | [`reference`] | second-order reference filters |
//! | [`closed_loop`] | the shared simulation loop and the [`Controller`](closed_loop::Controller) trait |
//! | [`teacher`] | sliding-mode controller and gain search |
//! | [`neurocontrol`] | perceptron, demonstrations, training, weight files |
//! | [`harness`] | scenarios, run records, metrics, the course-change battery |

pub mod allocation;
pub mod closed_loop;
pub mod dynamics;
pub mod harness;
pub mod neurocontrol;
pub mod reference;
pub mod teacher;

pub use allocation::{Allocator, ThrusterCommand, ThrusterLayout};
pub use closed_loop::{Controller, LoopConfig, Maneuver};
pub use dynamics::{BodyVelocity, EarthPose, GeneralizedForce, ShipState, VesselParams};
pub use harness::Config;
pub use neurocontrol::{MlpController, NeuralController};
pub use reference::{FilterParams, ReferenceModel};
pub use teacher::{SlidingMode, SmcGains};

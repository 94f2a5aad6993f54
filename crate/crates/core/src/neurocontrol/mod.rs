//! Neural heading and position controller cloned from the sliding-mode
//! teacher: a 7-10-3 perceptron mapping tracking errors and body velocities
//! to the generalized force demand.

pub mod dataset;
pub mod mlp;
pub mod train;
pub mod weights;

pub use dataset::{features, generate_dataset, ActionNoise, Battery, SampleOrigin, TrainingSample, N_FEATURES};
pub use mlp::{Gradients, MlpController, Normalization};
pub use train::{train, Hyperparams, TrainError, TrainOutcome};

use crate::closed_loop::Controller;
use crate::dynamics::{GeneralizedForce, ShipState};
use crate::reference::DesiredPose;

/// Closed-loop wrapper around a trained network.
#[derive(Debug, Clone)]
pub struct NeuralController {
    net: MlpController,
    ws: mlp::Workspace,
}

impl NeuralController {
    /// Panics if the network does not have 7 inputs and 3 outputs.
    pub fn new(net: MlpController) -> Self {
        assert!(
            net.n_in == N_FEATURES && net.n_out == 3,
            "controller network must be {N_FEATURES}-in/3-out, got {}-in/{}-out",
            net.n_in,
            net.n_out
        );
        let ws = mlp::Workspace::new(&net);
        Self { net, ws }
    }

    pub fn net(&self) -> &MlpController {
        &self.net
    }
}

impl Controller for NeuralController {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce {
        self.net.forward_into(&features(state, desired), &mut self.ws);
        let y = self.ws.output();
        GeneralizedForce::new(y[0], y[1], y[2])
    }
}

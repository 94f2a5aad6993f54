//! Single-hidden-layer perceptron with tanh hidden units, a linear output
//! layer and per-feature input/output standardization.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-component affine standardization, `(x − mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(n: usize) -> Self {
        Self {
            mean: vec![0.0; n],
            std: vec![1.0; n],
        }
    }

    /// Column statistics of `rows`. Columns with (near) zero spread get a
    /// unit std so the transform stays invertible.
    pub fn fit<'a, I>(rows: I, n: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut count = 0usize;
        let mut mean = vec![0.0; n];
        let mut m2 = vec![0.0; n];
        for row in rows {
            count += 1;
            for j in 0..n {
                let d = row[j] - mean[j];
                mean[j] += d / count as f64;
                m2[j] += d * (row[j] - mean[j]);
            }
        }
        let std = m2
            .iter()
            .map(|&s| {
                let sd = if count > 0 { (s / count as f64).sqrt() } else { 0.0 };
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.mean.len() {
            out[j] = (x[j] - self.mean[j]) / self.std[j];
        }
    }

    pub fn denormalize_into(&self, z: &[f64], out: &mut [f64]) {
        for j in 0..self.mean.len() {
            out[j] = z[j] * self.std[j] + self.mean[j];
        }
    }

    pub fn is_valid(&self) -> bool {
        self.mean.len() == self.std.len()
            && self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

/// Network parameters. Matrices are row-major: `w1[i * n_in + j]` is the
/// weight from input `j` to hidden unit `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpController {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub input_stats: Normalization,
    pub output_stats: Normalization,
}

/// Gradients with the same layout as the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &MlpController) -> Self {
        Self {
            w1: vec![0.0; net.w1.len()],
            b1: vec![0.0; net.b1.len()],
            w2: vec![0.0; net.w2.len()],
            b2: vec![0.0; net.b2.len()],
        }
    }

    pub fn fill(&mut self, value: f64) {
        for p in self.parts_mut() {
            p.fill(value);
        }
    }

    pub fn parts(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn parts_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.parts().into_iter().flat_map(|p| p.iter().copied())
    }
}

/// Reusable buffers for one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Workspace {
    x_norm: Vec<f64>,
    hidden: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
    delta_out: Vec<f64>,
    delta_hidden: Vec<f64>,
}

impl Workspace {
    pub fn new(net: &MlpController) -> Self {
        Self {
            x_norm: vec![0.0; net.n_in],
            hidden: vec![0.0; net.n_hidden],
            z: vec![0.0; net.n_out],
            y: vec![0.0; net.n_out],
            delta_out: vec![0.0; net.n_out],
            delta_hidden: vec![0.0; net.n_hidden],
        }
    }

    pub fn output(&self) -> &[f64] {
        &self.y
    }
}

impl MlpController {
    /// Zero weights and identity normalization.
    pub fn zeros(n_in: usize, n_hidden: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_hidden,
            n_out,
            w1: vec![0.0; n_hidden * n_in],
            b1: vec![0.0; n_hidden],
            w2: vec![0.0; n_out * n_hidden],
            b2: vec![0.0; n_out],
            input_stats: Normalization::identity(n_in),
            output_stats: Normalization::identity(n_out),
        }
    }

    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn random(n_in: usize, n_hidden: usize, n_out: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::zeros(n_in, n_hidden, n_out);
        let a1 = 1.0 / (n_in as f64).sqrt();
        let a2 = 1.0 / (n_hidden as f64).sqrt();
        for w in net.w1.iter_mut().chain(net.b1.iter_mut()) {
            *w = rng.random_range(-a1..a1);
        }
        for w in net.w2.iter_mut().chain(net.b2.iter_mut()) {
            *w = rng.random_range(-a2..a2);
        }
        net
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn params_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn is_consistent(&self) -> bool {
        self.w1.len() == self.n_hidden * self.n_in
            && self.b1.len() == self.n_hidden
            && self.w2.len() == self.n_out * self.n_hidden
            && self.b2.len() == self.n_out
            && self.input_stats.len() == self.n_in
            && self.output_stats.len() == self.n_out
            && self.input_stats.is_valid()
            && self.output_stats.is_valid()
    }

    /// Forward pass into `ws`; the denormalized output is `ws.output()`.
    pub fn forward_into(&self, x: &[f64], ws: &mut Workspace) {
        assert_eq!(x.len(), self.n_in, "feature vector length");
        self.input_stats.normalize_into(x, &mut ws.x_norm);
        for i in 0..self.n_hidden {
            let row = &self.w1[i * self.n_in..(i + 1) * self.n_in];
            let a: f64 = self.b1[i] + row.iter().zip(&ws.x_norm).map(|(w, x)| w * x).sum::<f64>();
            ws.hidden[i] = a.tanh();
        }
        for k in 0..self.n_out {
            let row = &self.w2[k * self.n_hidden..(k + 1) * self.n_hidden];
            ws.z[k] = self.b2[k] + row.iter().zip(&ws.hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        self.output_stats.denormalize_into(&ws.z, &mut ws.y);
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut ws = Workspace::new(self);
        self.forward_into(x, &mut ws);
        ws.y
    }

    /// Adds `weight_k`-scaled gradients of `½ Σ_k weight_k (y_k − t_k)²` to
    /// `grads` and returns that loss.
    pub fn accumulate_gradients(
        &self,
        x: &[f64],
        target: &[f64],
        channel_weight: &[f64],
        ws: &mut Workspace,
        grads: &mut Gradients,
    ) -> f64 {
        self.forward_into(x, ws);
        let mut loss = 0.0;
        for k in 0..self.n_out {
            let r = ws.y[k] - target[k];
            loss += 0.5 * channel_weight[k] * r * r;
            // dy/dz = std
            ws.delta_out[k] = channel_weight[k] * r * self.output_stats.std[k];
        }
        for i in 0..self.n_hidden {
            let mut back = 0.0;
            for k in 0..self.n_out {
                back += self.w2[k * self.n_hidden + i] * ws.delta_out[k];
            }
            let h = ws.hidden[i];
            ws.delta_hidden[i] = back * (1.0 - h * h);
        }
        for k in 0..self.n_out {
            let d = ws.delta_out[k];
            grads.b2[k] += d;
            let row = &mut grads.w2[k * self.n_hidden..(k + 1) * self.n_hidden];
            for (g, h) in row.iter_mut().zip(&ws.hidden) {
                *g += d * h;
            }
        }
        for i in 0..self.n_hidden {
            let d = ws.delta_hidden[i];
            grads.b1[i] += d;
            let row = &mut grads.w1[i * self.n_in..(i + 1) * self.n_in];
            for (g, x) in row.iter_mut().zip(&ws.x_norm) {
                *g += d * x;
            }
        }
        loss
    }

    /// Exact gradients of `½‖forward(x) − target‖²`.
    pub fn backward(&self, x: &[f64], target: &[f64]) -> Gradients {
        let mut ws = Workspace::new(self);
        let mut g = Gradients::zeros_like(self);
        let ones = vec![1.0; self.n_out];
        self.accumulate_gradients(x, target, &ones, &mut ws, &mut g);
        g
    }

    pub fn loss(&self, x: &[f64], target: &[f64]) -> f64 {
        self.forward(x)
            .iter()
            .zip(target)
            .map(|(y, t)| 0.5 * (y - t) * (y - t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_the_output_mean() {
        let mut net = MlpController::zeros(3, 4, 2);
        net.output_stats = Normalization {
            mean: vec![1.5, -2.0],
            std: vec![3.0, 0.5],
        };
        assert_eq!(net.forward(&[0.3, -1.0, 7.0]), vec![1.5, -2.0]);
    }

    #[test]
    fn constant_network_ignores_input() {
        let mut net = MlpController::random(3, 4, 2, 1);
        net.w2.fill(0.0);
        net.b2 = vec![0.25, -1.0];
        net.output_stats = Normalization {
            mean: vec![1.0, 1.0],
            std: vec![2.0, 4.0],
        };
        for x in [[0.0, 0.0, 0.0], [1.0, -5.0, 2.0]] {
            assert_eq!(net.forward(&x), vec![1.5, -3.0]);
        }
    }

    #[test]
    fn toy_network_matches_hand_evaluation() {
        // 2-2-1, hand-set weights
        let mut net = MlpController::zeros(2, 2, 1);
        net.w1 = vec![0.5, -1.0, 0.25, 2.0];
        net.b1 = vec![0.1, -0.2];
        net.w2 = vec![1.5, -0.75];
        net.b2 = vec![0.3];
        let x = [0.4, -0.6];
        let h1 = (0.5 * 0.4 + -1.0 * -0.6 + 0.1f64).tanh();
        let h2 = (0.25 * 0.4 + 2.0 * -0.6 - 0.2f64).tanh();
        let want = 1.5 * h1 - 0.75 * h2 + 0.3;
        assert!((net.forward(&x)[0] - want).abs() < 1e-12);
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let net = MlpController::random(4, 5, 3, 9);
        let x = [0.1, 0.2, -0.3, 0.4];
        let y = net.forward(&x);
        let g = net.backward(&x, &y);
        assert!(g.iter().all(|v| v == 0.0));
    }

    #[test]
    fn duplicated_sample_doubles_gradient() {
        let net = MlpController::random(3, 4, 2, 5);
        let x = [0.7, -0.2, 0.1];
        let t = [1.0, -1.0];
        let single = net.backward(&x, &t);
        let mut ws = Workspace::new(&net);
        let mut twice = Gradients::zeros_like(&net);
        for _ in 0..2 {
            net.accumulate_gradients(&x, &t, &[1.0, 1.0], &mut ws, &mut twice);
        }
        for (a, b) in single.iter().zip(twice.iter()) {
            assert_eq!(2.0 * a, b);
        }
    }

    #[test]
    fn fit_gives_unit_std_to_constant_columns() {
        let rows = [[1.0, 2.0], [1.0, 4.0], [1.0, 6.0]];
        let n = Normalization::fit(rows.iter().map(|r| r.as_slice()), 2);
        assert_eq!(n.mean, vec![1.0, 4.0]);
        assert_eq!(n.std[0], 1.0);
        assert!((n.std[1] - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seeded_init_is_bounded_and_repeatable() {
        let a = MlpController::random(7, 10, 3, 42);
        let b = MlpController::random(7, 10, 3, 42);
        assert_eq!(a, b);
        let bound = 1.0 / 7f64.sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= bound));
        assert_eq!(a.parameter_count(), 7 * 10 + 10 + 30 + 3);
    }
}

//! Small fully-connected autoencoder used as a non-linear black-box reducer.
//!
//! Architecture: `N → h → N_r → h → N` with tanh hidden layers, a linear
//! code layer and a linear output layer, `h = max(N_r, ⌈(N + N_r) / 2⌉)`.
//! Inputs are standardized per feature with statistics frozen at fit time.
//! Training is minibatch Adam on mean squared reconstruction error and is a
//! pure function of (data, n_components, seed, epochs).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::{dot, DataMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// out × in
    pub weights: DataMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .iter_rows()
                .zip(&self.bias)
                .map(|(w, b)| self.activation.apply(dot(w, input) + b)),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub encoder: Vec<DenseLayer>,
    pub decoder: Vec<DenseLayer>,
    /// Per-feature standardization applied before the encoder.
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub hidden_width: usize,
    pub epochs_trained: usize,
    /// Reconstruction MSE on the training data, in original feature units.
    pub final_train_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderConfig {
    pub n_components: usize,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AutoencoderConfig {
    pub fn new(n_components: usize, seed: u64, epochs: usize) -> Self {
        Self {
            n_components,
            seed,
            epochs,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

pub fn hidden_width(n_features: usize, n_components: usize) -> usize {
    n_components.max((n_features + n_components).div_ceil(2))
}

pub fn autoencoder_fit(
    data: &DataMatrix,
    n_components: usize,
    seed: u64,
    epochs: usize,
) -> Result<AutoencoderModel> {
    autoencoder_fit_with(data, &AutoencoderConfig::new(n_components, seed, epochs))
}

struct TrainLayer {
    in_dim: usize,
    out_dim: usize,
    activation: Activation,
    w: Vec<f64>,
    b: Vec<f64>,
    gw: Vec<f64>,
    gb: Vec<f64>,
    mw: Vec<f64>,
    vw: Vec<f64>,
    mb: Vec<f64>,
    vb: Vec<f64>,
}

impl TrainLayer {
    fn new(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            in_dim,
            out_dim,
            activation,
            w,
            b: vec![0.0; out_dim],
            gw: vec![0.0; in_dim * out_dim],
            gb: vec![0.0; out_dim],
            mw: vec![0.0; in_dim * out_dim],
            vw: vec![0.0; in_dim * out_dim],
            mb: vec![0.0; out_dim],
            vb: vec![0.0; out_dim],
        }
    }

    fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.w.chunks_exact(self.in_dim).zip(&self.b))
        {
            *o = self.activation.apply(dot(row, input) + b);
        }
    }

    /// Accumulates parameter gradients given dL/d(output) and writes
    /// dL/d(input) into `grad_in`.
    fn backward(&mut self, input: &[f64], output: &[f64], grad_out: &[f64], grad_in: &mut [f64]) {
        grad_in.iter_mut().for_each(|g| *g = 0.0);
        for o in 0..self.out_dim {
            let delta = grad_out[o] * self.activation.derivative_from_output(output[o]);
            if delta == 0.0 {
                continue;
            }
            self.gb[o] += delta;
            let row = o * self.in_dim;
            for i in 0..self.in_dim {
                self.gw[row + i] += delta * input[i];
                grad_in[i] += delta * self.w[row + i];
            }
        }
    }

    fn adam_step(&mut self, cfg: &AutoencoderConfig, step: i32) {
        let bc1 = 1.0 - cfg.beta1.powi(step);
        let bc2 = 1.0 - cfg.beta2.powi(step);
        let update = |p: &mut [f64], g: &mut [f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
                g[i] = 0.0;
            }
        };
        update(&mut self.w, &mut self.gw, &mut self.mw, &mut self.vw);
        update(&mut self.b, &mut self.gb, &mut self.mb, &mut self.vb);
    }

    fn into_dense(self) -> Result<DenseLayer> {
        Ok(DenseLayer {
            weights: DataMatrix::new(self.out_dim, self.in_dim, self.w)?,
            bias: self.b,
            activation: self.activation,
        })
    }
}

pub fn autoencoder_fit_with(
    data: &DataMatrix,
    cfg: &AutoencoderConfig,
) -> Result<AutoencoderModel> {
    let n = data.cols();
    let nr = cfg.n_components;
    if nr == 0 || nr > n {
        return Err(Error::InvalidInput(format!(
            "n_components must be in 1..={n}, got {nr}"
        )));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidInput("epochs must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput(
            "autoencoder needs at least one row".into(),
        ));
    }
    let batch_size = cfg.batch_size.max(1);

    let shift = data.column_means();
    let scale: Vec<f64> = data
        .column_sample_std()
        .into_iter()
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let standardized: Vec<Vec<f64>> = data
        .iter_rows()
        .map(|r| {
            r.iter()
                .zip(shift.iter().zip(&scale))
                .map(|(x, (m, s))| (x - m) / s)
                .collect()
        })
        .collect();

    let h = hidden_width(n, nr);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dims = [
        (n, h, Activation::Tanh),
        (h, nr, Activation::Linear),
        (nr, h, Activation::Tanh),
        (h, n, Activation::Linear),
    ];
    let mut layers: Vec<TrainLayer> = dims
        .iter()
        .map(|&(i, o, a)| TrainLayer::new(i, o, a, &mut rng))
        .collect();

    // activations[0] is the input, activations[l + 1] the output of layer l
    let widths = [n, h, nr, h, n];
    let mut activations: Vec<Vec<f64>> = widths.iter().map(|&w| vec![0.0; w]).collect();
    let mut grads: Vec<Vec<f64>> = widths.iter().map(|&w| vec![0.0; w]).collect();

    let mut order: Vec<usize> = (0..data.rows()).collect();
    let mut step = 0i32;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(batch_size) {
            let norm = 2.0 / (batch.len() * n) as f64;
            for &idx in batch {
                activations[0].copy_from_slice(&standardized[idx]);
                for (l, layer) in layers.iter().enumerate() {
                    let (before, after) = activations.split_at_mut(l + 1);
                    layer.forward(&before[l], &mut after[0]);
                }
                let out = &activations[4];
                let target = &standardized[idx];
                for ((g, o), t) in grads[4].iter_mut().zip(out).zip(target) {
                    let d = o - t;
                    epoch_loss += d * d;
                    *g = norm * d;
                }
                for l in (0..layers.len()).rev() {
                    let (g_lo, g_hi) = grads.split_at_mut(l + 1);
                    layers[l].backward(
                        &activations[l],
                        &activations[l + 1],
                        &g_hi[0],
                        &mut g_lo[l],
                    );
                }
            }
            step += 1;
            for layer in &mut layers {
                layer.adam_step(cfg, step);
            }
        }
        if !epoch_loss.is_finite() || layers.iter().any(|l| !l.w.iter().all(|w| w.is_finite())) {
            return Err(Error::Divergence { epoch });
        }
    }

    let mut layers = layers.into_iter();
    let encoder = vec![
        layers.next().unwrap().into_dense()?,
        layers.next().unwrap().into_dense()?,
    ];
    let decoder = vec![
        layers.next().unwrap().into_dense()?,
        layers.next().unwrap().into_dense()?,
    ];
    let mut model = AutoencoderModel {
        encoder,
        decoder,
        input_shift: shift,
        input_scale: scale,
        hidden_width: h,
        epochs_trained: cfg.epochs,
        final_train_mse: 0.0,
    };
    let mut sq = 0.0;
    for row in data.iter_rows() {
        let rec = model.reconstruct(row)?;
        sq += rec
            .iter()
            .zip(row)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    model.final_train_mse = sq / (data.rows() * n) as f64;
    if !model.final_train_mse.is_finite() {
        return Err(Error::Divergence { epoch: cfg.epochs });
    }
    Ok(model)
}

impl AutoencoderModel {
    pub fn input_dims(&self) -> usize {
        self.input_shift.len()
    }

    pub fn reduced_dims(&self) -> usize {
        self.encoder.last().map_or(0, |l| l.bias.len())
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("autoencoder input", self.input_dims(), x.len())?;
        check_finite("autoencoder input", x)?;
        let mut out = vec![0.0; self.reduced_dims()];
        self.transform_unchecked(x, &mut out);
        Ok(out)
    }

    pub(crate) fn transform_unchecked(&self, x: &[f64], out: &mut [f64]) {
        let mut current: Vec<f64> = x
            .iter()
            .zip(self.input_shift.iter().zip(&self.input_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        let mut next = Vec::new();
        for layer in &self.encoder {
            layer.forward(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        out.copy_from_slice(&current);
    }

    /// Decodes a code vector back to original feature units.
    pub fn decode(&self, code: &[f64]) -> Result<Vec<f64>> {
        check_len("autoencoder code", self.reduced_dims(), code.len())?;
        let mut current = code.to_vec();
        let mut next = Vec::new();
        for layer in &self.decoder {
            layer.forward(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current
            .iter()
            .zip(self.input_shift.iter().zip(&self.input_scale))
            .map(|(z, (m, s))| z * s + m)
            .collect())
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decode(&self.transform(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    /// Points on a noisy curved 1-D manifold embedded in 4-D.
    fn curved(rows: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let t: f64 = rng.random_range(-1.5..1.5);
                let e: f64 = StandardNormal.sample(&mut rng);
                vec![t, t * t, (2.0 * t).sin(), 0.5 * t + 0.05 * e]
            })
            .collect();
        DataMatrix::from_rows(&values).unwrap()
    }

    #[test]
    fn hidden_width_rule() {
        assert_eq!(hidden_width(4, 3), 4);
        assert_eq!(hidden_width(10, 8), 9);
        assert_eq!(hidden_width(64, 25), 45);
        assert_eq!(hidden_width(2, 2), 2);
    }

    #[test]
    fn beats_the_mean_baseline() {
        let data = curved(200, 1);
        let model = autoencoder_fit(&data, 2, 7, 150).unwrap();
        let means = data.column_means();
        let baseline: f64 = data
            .iter_rows()
            .flat_map(|r| r.iter().zip(&means).map(|(x, m)| (x - m) * (x - m)))
            .sum::<f64>()
            / (data.rows() * data.cols()) as f64;
        assert!(
            model.final_train_mse < baseline,
            "{} vs {}",
            model.final_train_mse,
            baseline
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let data = curved(64, 3);
        let a = autoencoder_fit(&data, 2, 11, 5).unwrap();
        let b = autoencoder_fit(&data, 2, 11, 5).unwrap();
        assert_eq!(a, b);
        let c = autoencoder_fit(&data, 2, 12, 5).unwrap();
        assert_ne!(a.encoder[0].weights, c.encoder[0].weights);
    }

    #[test]
    fn code_has_reduced_width() {
        let data = curved(40, 5);
        let model = autoencoder_fit(&data, 3, 1, 2).unwrap();
        assert_eq!(model.reduced_dims(), 3);
        assert_eq!(model.transform(data.row(0)).unwrap().len(), 3);
        assert_eq!(model.encoder[0].weights.rows(), model.hidden_width);
    }

    #[test]
    fn rejects_bad_config() {
        let data = curved(10, 5);
        assert!(autoencoder_fit(&data, 2, 1, 0).is_err());
        assert!(autoencoder_fit(&data, 5, 1, 1).is_err());
    }

    #[test]
    fn divergence_names_epoch() {
        let data = curved(40, 5);
        let mut cfg = AutoencoderConfig::new(2, 1, 3);
        cfg.learning_rate = f64::INFINITY;
        match autoencoder_fit_with(&data, &cfg) {
            Err(Error::Divergence { epoch }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}

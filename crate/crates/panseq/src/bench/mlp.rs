//! One-hidden-layer MLP (ReLU, sigmoid output) trained with mini-batch
//! Adam on the binary cross-entropy, from scratch on sparse rows.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::features::SparseRow;
use super::TrainConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MlpModel {
    pub n_inputs: usize,
    pub n_hidden: usize,
    /// Input-to-hidden weights, row-major by input: w1[i * n_hidden + j].
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Hidden-to-output weights.
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradients in the same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    /// Mean loss on the held-out pairs; None when no validation set was
    /// provided.
    pub val_loss: Option<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl MlpModel {
    /// He-initialized model, deterministic under the seed.
    pub fn new_seeded(n_inputs: usize, n_hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std1 = (2.0 / n_inputs as f64).sqrt();
        let std2 = (2.0 / n_hidden as f64).sqrt();
        let normal1 = Normal::new(0.0, std1).expect("positive std");
        let normal2 = Normal::new(0.0, std2).expect("positive std");
        MlpModel {
            n_inputs,
            n_hidden,
            w1: (0..n_inputs * n_hidden)
                .map(|_| normal1.sample(&mut rng))
                .collect(),
            b1: vec![0.0; n_hidden],
            w2: (0..n_hidden).map(|_| normal2.sample(&mut rng)).collect(),
            b2: 0.0,
        }
    }

    /// Hidden pre-activations for one sparse row.
    fn pre_activations(&self, row: &SparseRow) -> Vec<f64> {
        let mut pre = self.b1.clone();
        for &(i, v) in row {
            let base = i as usize * self.n_hidden;
            let w = &self.w1[base..base + self.n_hidden];
            for (p, &wj) in pre.iter_mut().zip(w) {
                *p += v * wj;
            }
        }
        pre
    }

    fn logit(&self, row: &SparseRow) -> f64 {
        let pre = self.pre_activations(row);
        let mut z = self.b2;
        for (&p, &w) in pre.iter().zip(&self.w2) {
            if p > 0.0 {
                z += w * p;
            }
        }
        z
    }

    pub fn predict_proba(&self, row: &SparseRow) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Mean sigmoid-BCE over a batch.
    pub fn batch_loss(&self, rows: &[SparseRow], labels: &[bool]) -> f64 {
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let z = self.logit(row);
            loss += softplus(z) - if y { z } else { 0.0 };
        }
        loss / rows.len() as f64
    }

    /// Mean loss and analytic gradients over a batch (backpropagation).
    pub fn batch_grads(&self, rows: &[SparseRow], labels: &[bool]) -> (f64, MlpGrads) {
        let h = self.n_hidden;
        let mut grads = MlpGrads {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; h],
            w2: vec![0.0; h],
            b2: 0.0,
        };
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let pre = self.pre_activations(row);
            let mut z = self.b2;
            for (p, &w) in pre.iter().zip(&self.w2) {
                if *p > 0.0 {
                    z += w * p;
                }
            }
            loss += softplus(z) - if y { z } else { 0.0 };
            let dz = sigmoid(z) - if y { 1.0 } else { 0.0 };
            grads.b2 += dz;
            for (j, &p) in pre.iter().enumerate() {
                if p > 0.0 {
                    grads.w2[j] += dz * p;
                    grads.b1[j] += dz * self.w2[j];
                }
            }
            for &(i, v) in row {
                let base = i as usize * h;
                let w1_slice = &mut grads.w1[base..base + h];
                for ((g, &p), &w2) in w1_slice.iter_mut().zip(&pre).zip(&self.w2) {
                    if p > 0.0 {
                        *g += dz * w2 * v;
                    }
                }
            }
        }
        let n = rows.len() as f64;
        loss /= n;
        grads.w1.iter_mut().for_each(|g| *g /= n);
        grads.b1.iter_mut().for_each(|g| *g /= n);
        grads.w2.iter_mut().for_each(|g| *g /= n);
        grads.b2 /= n;
        (loss, grads)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(len: usize) -> Self {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        const BETA1: f64 = 0.9;
        const BETA2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let correction1 = 1.0 - BETA1.powi(self.t as i32);
        let correction2 = 1.0 - BETA2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}

/// Train with Adam (fixed learning rate, no weight decay) for
/// `cfg.epochs` epochs of `cfg.batch_size` mini-batches. The batch order
/// reshuffles each epoch from the seeded stream, so training is
/// deterministic under `cfg.seed`. Validation pairs, when given, are
/// scored after every epoch.
pub fn train_mlp(
    rows: &[SparseRow],
    labels: &[bool],
    val_rows: &[SparseRow],
    val_labels: &[bool],
    n_features: usize,
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<EpochLog>)> {
    cfg.validate()?;
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::DegenerateData(format!(
            "need equal non-empty rows and labels (got {} and {})",
            rows.len(),
            labels.len()
        )));
    }
    if val_rows.len() != val_labels.len() {
        return Err(Error::DegenerateData(
            "validation rows and labels differ in length".to_string(),
        ));
    }

    let mut model = MlpModel::new_seeded(n_features, cfg.hidden_units, cfg.seed);
    let mut adam_w1 = Adam::new(model.w1.len());
    let mut adam_b1 = Adam::new(model.b1.len());
    let mut adam_w2 = Adam::new(model.w2.len());
    let mut adam_b2 = Adam::new(1);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut log = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch_rows: Vec<SparseRow> = chunk.iter().map(|&i| rows[i].clone()).collect();
            let batch_labels: Vec<bool> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.batch_grads(&batch_rows, &batch_labels);
            adam_w1.step(&mut model.w1, &grads.w1, cfg.learning_rate);
            adam_b1.step(&mut model.b1, &grads.b1, cfg.learning_rate);
            adam_w2.step(&mut model.w2, &grads.w2, cfg.learning_rate);
            let mut b2 = [model.b2];
            adam_b2.step(&mut b2, &[grads.b2], cfg.learning_rate);
            model.b2 = b2[0];
            epoch_loss += loss;
            batches += 1;
        }
        let val_loss = if val_rows.is_empty() {
            None
        } else {
            Some(model.batch_loss(val_rows, val_labels))
        };
        log.push(EpochLog {
            epoch,
            train_loss: epoch_loss / batches as f64,
            val_loss,
        });
    }
    Ok((model, log))
}

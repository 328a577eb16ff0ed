//! L2-regularized logistic regression trained by L-BFGS on sparse rows.

use std::collections::VecDeque;

use super::features::SparseRow;
use super::TrainConfig;
use crate::error::{Error, Result};

/// Gradient sup-norm convergence tolerance.
const GRAD_TOL: f64 = 1e-6;
/// L-BFGS memory.
const LBFGS_MEMORY: usize = 10;

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(n_features: usize) -> Self {
        LinearModel {
            weights: vec![0.0; n_features],
            bias: 0.0,
        }
    }

    fn logit(&self, row: &SparseRow) -> f64 {
        let mut z = self.bias;
        for &(i, v) in row {
            z += v * self.weights[i as usize];
        }
        z
    }

    pub fn predict_proba(&self, row: &SparseRow) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Mean binary cross-entropy plus (l2/2)||w||^2 (bias unpenalized).
    pub fn regularized_loss(&self, rows: &[SparseRow], labels: &[bool], l2: f64) -> f64 {
        let n = rows.len() as f64;
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let z = self.logit(row);
            loss += softplus(z) - if y { z } else { 0.0 };
        }
        loss / n + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z), stable for large |z|.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Loss and gradient at `params` (weights ++ [bias]).
fn loss_and_grad(
    params: &[f64],
    rows: &[SparseRow],
    labels: &[bool],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let bias = params[d];
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (row, &y) in rows.iter().zip(labels) {
        let mut z = bias;
        for &(i, v) in row {
            z += v * params[i as usize];
        }
        loss += softplus(z) - if y { z } else { 0.0 };
        let residual = sigmoid(z) - if y { 1.0 } else { 0.0 };
        for &(i, v) in row {
            grad[i as usize] += residual * v;
        }
        grad[d] += residual;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for i in 0..d {
        loss += 0.5 * l2 * params[i] * params[i];
        grad[i] += l2 * params[i];
    }
    (loss, grad)
}

/// Train by L-BFGS with Armijo backtracking from zero initialization,
/// stopping at gradient sup-norm `1e-6` or `cfg.max_iterations`.
/// Deterministic: no randomness is involved.
pub fn train_logreg(
    rows: &[SparseRow],
    labels: &[bool],
    n_features: usize,
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    cfg.validate()?;
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::DegenerateData(format!(
            "need equal non-empty rows and labels (got {} and {})",
            rows.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateData(
            "training data contains a single class".to_string(),
        ));
    }
    for row in rows {
        if let Some(&(i, _)) = row.iter().find(|&&(i, _)| i as usize >= n_features) {
            return Err(Error::DegenerateData(format!(
                "feature index {i} out of range (n_features = {n_features})"
            )));
        }
    }

    let mut params = vec![0.0; n_features + 1];
    let (mut loss, mut grad) = loss_and_grad(&params, rows, labels, cfg.l2_penalty);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    for _ in 0..cfg.max_iterations {
        if inf_norm(&grad) <= GRAD_TOL {
            break;
        }
        let mut direction = lbfgs_direction(&grad, &history);
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            // Curvature information went stale; fall back to steepest
            // descent.
            history.clear();
            direction = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &direction);
        }

        // Armijo backtracking.
        let mut step = 1.0;
        let c1 = 1e-4;
        let mut candidate;
        let mut new_loss;
        let mut new_grad;
        loop {
            candidate = params
                .iter()
                .zip(&direction)
                .map(|(p, d)| p + step * d)
                .collect::<Vec<f64>>();
            let (l, g) = loss_and_grad(&candidate, rows, labels, cfg.l2_penalty);
            new_loss = l;
            new_grad = g;
            if new_loss <= loss + c1 * step * slope || step < 1e-16 {
                break;
            }
            step *= 0.5;
        }
        if step < 1e-16 {
            break; // no further progress possible in f64
        }

        let s: Vec<f64> = candidate
            .iter()
            .zip(&params)
            .map(|(n, o)| n - o)
            .collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(n, o)| n - o).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        params = candidate;
        loss = new_loss;
        grad = new_grad;
    }

    let bias = params[n_features];
    params.truncate(n_features);
    Ok(LinearModel {
        weights: params,
        bias,
    })
}

/// Two-loop recursion for the L-BFGS search direction -H*g.
fn lbfgs_direction(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let alpha = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= alpha * yi;
        }
        alphas.push(alpha);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha - beta) * si;
        }
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

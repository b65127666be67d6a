//! L2-regularized logistic regression and cross-validation helpers shared
//! by the factuality and objectivity classifiers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature mean and standard deviation, estimated on training rows.
/// Zero-variance features keep a unit scale so they only get centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty on the weights (the bias is not penalized).
    pub l2: f64,
    pub max_iters: usize,
    /// Convergence threshold on the gradient norm.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 0.01,
            max_iters: 20_000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn zeros(dim: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.score(x))
    }
}

/// Mean logistic loss plus `l2/2 * |w|^2`, with its gradient.
/// Parameters are packed as `[w..., b]`.
pub fn loss_and_grad(theta: &[f64], x: &[Vec<f64>], y: &[bool], l2: f64) -> (f64, Vec<f64>) {
    let d = theta.len() - 1;
    let n = x.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; d + 1];
    for (row, &label) in x.iter().zip(y) {
        let z: f64 = row.iter().zip(&theta[..d]).map(|(a, b)| a * b).sum::<f64>() + theta[d];
        let t = if label { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, v) in grad[..d].iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    for j in 0..d {
        loss += 0.5 * l2 * theta[j] * theta[j];
        grad[j] += l2 * theta[j];
    }
    (loss, grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Fits by accelerated gradient descent with backtracking line search and
/// function-value restarts, until the gradient norm drops below `tol`.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> (LogisticModel, FitReport) {
    let d = x.first().map_or(0, Vec::len);
    let eval = |t: &[f64]| loss_and_grad(t, x, y, params.l2);
    let mut theta = vec![0.0; d + 1];
    let (mut f_theta, mut g_theta) = eval(&theta);
    let mut look = theta.clone();
    let mut momentum = 1.0f64;
    let mut step = 1.0f64;
    let mut iterations = 0;
    while iterations < params.max_iters && norm(&g_theta) >= params.tol {
        iterations += 1;
        let (f_look, g_look) = eval(&look);
        let g2 = g_look.iter().map(|g| g * g).sum::<f64>();
        let mut cand: Vec<f64>;
        let mut f_cand;
        loop {
            cand = look.iter().zip(&g_look).map(|(a, g)| a - step * g).collect();
            f_cand = eval(&cand).0;
            if f_cand <= f_look - 0.5 * step * g2 || step < 1e-12 {
                break;
            }
            step *= 0.5;
        }
        if f_cand > f_theta {
            // Restart from a plain gradient step at the current iterate.
            momentum = 1.0;
            look = theta.clone();
            continue;
        }
        let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_momentum;
        look = cand
            .iter()
            .zip(&theta)
            .map(|(c, t)| c + beta * (c - t))
            .collect();
        momentum = next_momentum;
        theta = cand;
        let (f, g) = eval(&theta);
        f_theta = f;
        g_theta = g;
        step *= 1.25;
    }
    let grad_norm = norm(&g_theta);
    let converged = grad_norm < params.tol;
    if !converged {
        log::warn!("logistic fit stopped at {iterations} iterations with gradient norm {grad_norm:e}");
    }
    let bias = theta.pop().unwrap_or(0.0);
    (
        LogisticModel {
            weights: theta,
            bias,
        },
        FitReport {
            iterations,
            grad_norm,
            converged,
        },
    )
}

/// Seeded stratified fold assignment: returns the fold of every example.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![0; labels.len()];
    for (slot, i) in pos.into_iter().chain(neg).enumerate() {
        folds[i] = slot % k;
    }
    folds
}

/// Seeded assignment of `n` items to `k` folds of near-equal size.
pub fn shuffled_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (slot, i) in order.into_iter().enumerate() {
        folds[i] = slot % k;
    }
    folds
}

pub(crate) fn check_binary(labels: &[bool], folds: usize) -> Result<()> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::invalid("training data must contain both classes"));
    }
    if labels.len() < folds {
        return Err(Error::invalid(format!(
            "{} examples cannot fill {folds} folds",
            labels.len()
        )));
    }
    Ok(())
}

/// Fraction of correct `p >= 0.5` decisions.
pub fn accuracy(probs: &[f64], labels: &[bool]) -> f64 {
    let right = probs
        .iter()
        .zip(labels)
        .filter(|(p, l)| (**p >= 0.5) == **l)
        .count();
    right as f64 / labels.len().max(1) as f64
}

/// Line cursor over the tab-separated text model formats.
pub(crate) struct ModelReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> ModelReader<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        ModelReader { lines: input.lines().collect(), pos: 0 }
    }

    pub(crate) fn line_no(&self) -> usize {
        self.pos
    }

    pub(crate) fn raw(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Model("model file is truncated".into()))?;
        self.pos += 1;
        Ok(line)
    }

    pub(crate) fn field(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.raw()?;
        let mut cols = line.split('\t');
        if cols.next() != Some(key) {
            return Err(Error::line(self.pos, format!("expected `{key}`")));
        }
        Ok(cols.collect())
    }

    pub(crate) fn num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let cols = self.field(key)?;
        match cols.as_slice() {
            [v] => parse_num(v).map_err(|_| Error::line(self.pos, format!("malformed `{key}`"))),
            _ => Err(Error::line(self.pos, format!("`{key}` takes one value"))),
        }
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Model(format!("malformed number `{v}`")))
}

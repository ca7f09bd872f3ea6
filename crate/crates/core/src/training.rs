//! Training of BP-RNN weights with binary cross-entropy and RMSprop.
//!
//! The decoder is unrolled for `i_train` iterations without early stopping.
//! The forward pass reuses the kernels of [`crate::bp`] and records the
//! check inputs and outputs of every iteration; the backward pass walks the
//! trace in reverse and sums each iteration's contribution into the tied
//! per-edge weights. Under the all-zero codeword assumption the loss is
//! `-(1/N) Σ log σ(L̃_n)` on the final a-posteriori LLRs.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorbing::AbsorbingSet;
use crate::bp::{self, WeightSet, MESSAGE_CLAMP, TANH_PRODUCT_LIMIT};
use crate::channel::{self, ChannelParams};
use crate::tanner::TannerGraph;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("class has no absorbing sets to sample from")]
    EmptyClass,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Source of the training words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainingClass {
    /// Words whose error set is an absorbing set of the named class.
    Specialized(String),
    /// Plain channel words.
    Unspecialized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub i_train: usize,
    pub snr_db: f64,
    pub batch_size: usize,
    pub n_batches: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub class: TrainingClass,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            i_train: 10,
            snr_db: 4.0,
            batch_size: 8192,
            n_batches: 64,
            epochs: 10,
            learning_rate: 1e-3,
            rms_decay: 0.9,
            rms_epsilon: 1e-7,
            class: TrainingClass::Unspecialized,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.i_train < 1 {
            return Err(TrainError::Config("i_train must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(TrainError::Config("batch_size must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(TrainError::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub epoch_means: Vec<f64>,
    pub final_loss: f64,
    pub history: Vec<LossRecord>,
}

impl LossReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,batch,loss\n");
        for r in &self.history {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.batch, r.loss));
        }
        out
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Average binary cross-entropy for the all-zero codeword.
pub fn loss(llr_final: &[f64]) -> f64 {
    let n = llr_final.len() as f64;
    llr_final.iter().map(|&l| softplus(-l)).sum::<f64>() / n
}

/// Everything the backward pass needs from one unrolled forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    pub llr_ch: Vec<f64>,
    /// Check-pass inputs α⁰ … α^{I-1}; α⁰ is the clamped channel LLR.
    pub alphas: Vec<Vec<f64>>,
    /// Check-pass outputs β¹ … β^I.
    pub betas: Vec<Vec<f64>>,
    pub llr_final: Vec<f64>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.betas.len()
    }
}

/// Runs `i_train` iterations without early stopping, keeping the trace.
/// The a-posteriori layer is evaluated only after the last iteration.
pub fn forward_unrolled(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    i_train: usize,
) -> Trace {
    assert!(i_train >= 1);
    let e = graph.n_edges();
    let mut alphas = Vec::with_capacity(i_train);
    let mut betas = Vec::with_capacity(i_train);
    let mut alpha = vec![0.0; e];
    bp::initial_alpha(graph, llr_ch, &mut alpha);
    for it in 0..i_train {
        let mut beta = vec![0.0; e];
        bp::check_pass_all(graph, &alpha, &mut beta);
        alphas.push(alpha.clone());
        if it + 1 < i_train {
            bp::data_pass(graph, weights, llr_ch, &beta, &mut alpha);
        }
        betas.push(beta);
    }
    let mut post = vec![0.0; graph.n_vars()];
    bp::aposteriori(graph, weights, llr_ch, betas.last().unwrap(), &mut post);
    Trace {
        llr_ch: llr_ch.to_vec(),
        alphas,
        betas,
        llr_final: post,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w_data: Vec<f64>,
    pub w_apost: Vec<f64>,
}

impl Gradient {
    pub fn zeros(n_edges: usize) -> Self {
        Self {
            w_data: vec![0.0; n_edges],
            w_apost: vec![0.0; n_edges],
        }
    }

    fn add_assign(&mut self, other: &Gradient) {
        for (a, b) in self.w_data.iter_mut().zip(&other.w_data) {
            *a += b;
        }
        for (a, b) in self.w_apost.iter_mut().zip(&other.w_apost) {
            *a += b;
        }
    }

    fn scale(&mut self, s: f64) {
        self.w_data.iter_mut().for_each(|x| *x *= s);
        self.w_apost.iter_mut().for_each(|x| *x *= s);
    }
}

#[inline]
fn inside_clamp(x: f64) -> bool {
    x > -MESSAGE_CLAMP && x < MESSAGE_CLAMP
}

/// Exact reverse-mode gradient of [`loss`] with respect to both weight
/// vectors. Clamped values pass no gradient.
pub fn backward(trace: &Trace, graph: &TannerGraph, weights: &WeightSet) -> Gradient {
    let e = graph.n_edges();
    let n_vars = graph.n_vars();
    let mut grad = Gradient::zeros(e);

    // dLoss/dL̃_n = -(1/N) σ(-L̃_n)
    let g_post: Vec<f64> = trace
        .llr_final
        .iter()
        .map(|&l| -sigmoid(-l) / n_vars as f64)
        .collect();

    let last = trace.betas.last().unwrap();
    let mut g_beta = vec![0.0; e];
    for ed in 0..e {
        let g = g_post[graph.edge_var(ed)];
        grad.w_apost[ed] = g * last[ed];
        g_beta[ed] = g * weights.w_apost[ed];
    }

    let mut g_alpha = vec![0.0; e];
    for t in (0..trace.iterations()).rev() {
        // β^{t+1} = CP(α^t)
        check_pass_backward(
            graph,
            &trace.alphas[t],
            &trace.betas[t],
            &g_beta,
            &mut g_alpha,
        );
        if t == 0 {
            break;
        }
        // α^t = clamp(L_ch + w · Σ_extrinsic β^t)
        let beta_t = &trace.betas[t - 1];
        g_beta.iter_mut().for_each(|x| *x = 0.0);
        for n in 0..n_vars {
            let r = graph.var_edges(n);
            let start = r.start;
            let b = &beta_t[r.clone()];
            let alpha_t = &trace.alphas[t];
            for ed in r.clone() {
                if !inside_clamp(alpha_t[ed]) {
                    continue;
                }
                let s = bp::extrinsic_sum(b, ed - start);
                let gu = g_alpha[ed];
                grad.w_data[ed] += gu * s;
                let gs = gu * weights.w_data[ed];
                for other in r.clone() {
                    if other != ed {
                        g_beta[other] += gs;
                    }
                }
            }
        }
    }
    grad
}

// Gradient of the check pass: g_alpha from g_beta, for one iteration.
// `beta` is the forward output; a clamped product or message passes no
// gradient.
fn check_pass_backward(
    graph: &TannerGraph,
    alpha: &[f64],
    beta: &[f64],
    g_beta: &[f64],
    g_alpha: &mut [f64],
) {
    let mut t = Vec::with_capacity(16);
    let mut gp = Vec::with_capacity(16);
    let mut prefix = Vec::with_capacity(17);
    let mut suffix = Vec::with_capacity(17);
    for m in 0..graph.n_checks() {
        let edges = graph.check_edges(m);
        let d = edges.len();
        t.clear();
        t.extend(edges.iter().map(|&ed| (0.5 * alpha[ed]).tanh()));
        // dβ_k/dP_k = 2 / (1 − P_k²)
        gp.clear();
        for (k, &ed) in edges.iter().enumerate() {
            let p = bp::extrinsic_product(&t, k);
            let g = if p.abs() < TANH_PRODUCT_LIMIT && inside_clamp(beta[ed]) {
                g_beta[ed] * 2.0 / (1.0 - p * p)
            } else {
                0.0
            };
            gp.push(g);
        }
        // dLoss/dT_j = Σ_{k≠j} gp_k Π_{i∉{j,k}} T_i
        prefix.clear();
        prefix.push(1.0);
        for i in 0..d {
            prefix.push(prefix[i] * t[i]);
        }
        suffix.clear();
        suffix.resize(d + 1, 1.0);
        for i in (0..d).rev() {
            suffix[i] = suffix[i + 1] * t[i];
        }
        for (j, &ed) in edges.iter().enumerate() {
            // Π over i ∉ {j,k} split around the two skipped positions
            let mut gt = 0.0;
            for (k, &gpk) in gp.iter().enumerate().take(d) {
                if k == j {
                    continue;
                }
                let (lo, hi) = if k < j { (k, j) } else { (j, k) };
                let mut mid = 1.0;
                for &ti in &t[lo + 1..hi] {
                    mid *= ti;
                }
                gt += gpk * prefix[lo] * mid * suffix[hi + 1];
            }
            g_alpha[ed] = gt * 0.5 * (1.0 - t[j] * t[j]);
        }
    }
}

/// Loss and gradient for one word.
pub fn loss_and_gradient(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    i_train: usize,
) -> (f64, Gradient) {
    let trace = forward_unrolled(graph, weights, llr_ch, i_train);
    let l = loss(&trace.llr_final);
    (l, backward(&trace, graph, weights))
}

/// Mean loss of `weights` over a set of words.
pub fn mean_loss(
    graph: &TannerGraph,
    weights: &WeightSet,
    words: &[Vec<f64>],
    i_train: usize,
) -> f64 {
    let total: f64 = words
        .par_iter()
        .map(|llr| loss(&forward_unrolled(graph, weights, llr, i_train).llr_final))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / words.len() as f64
}

/// RMSprop state, one accumulator per weight.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    v_data: Vec<f64>,
    v_apost: Vec<f64>,
}

impl RmsProp {
    pub fn new(n_edges: usize, learning_rate: f64, decay: f64, epsilon: f64) -> Self {
        Self {
            learning_rate,
            decay,
            epsilon,
            v_data: vec![0.0; n_edges],
            v_apost: vec![0.0; n_edges],
        }
    }

    /// `v ← ρv + (1−ρ)g²`, `w ← w − lr·g / (√v + ε)`.
    pub fn step(&mut self, weights: &mut WeightSet, grad: &Gradient) {
        let (lr, rho, eps) = (self.learning_rate, self.decay, self.epsilon);
        let update = |w: &mut [f64], v: &mut [f64], g: &[f64]| {
            for ((wi, vi), &gi) in w.iter_mut().zip(v.iter_mut()).zip(g) {
                *vi = rho * *vi + (1.0 - rho) * gi * gi;
                *wi -= lr * gi / (vi.sqrt() + eps);
            }
        };
        update(&mut weights.w_data, &mut self.v_data, &grad.w_data);
        update(&mut weights.w_apost, &mut self.v_apost, &grad.w_apost);
    }
}

/// Draws one training word: an error-class word for a randomly chosen set
/// of the class, or a plain channel word when `class_sets` is empty.
pub fn draw_training_word<R: Rng + ?Sized>(
    params: &ChannelParams,
    class_sets: &[AbsorbingSet],
    n_vars: usize,
    rng: &mut R,
) -> Vec<f64> {
    if class_sets.is_empty() {
        channel::sample_awgn(params, n_vars, rng).llr
    } else {
        let set = &class_sets[rng.random_range(0..class_sets.len())];
        channel::sample_error_class(params, &set.members, n_vars, rng).llr
    }
}

// Samples per parallel work unit. Fixed so the reduction order, and hence
// the trained weights, do not depend on the thread count.
const CHUNK: usize = 64;

/// Trains one decoder from all-ones weights.
///
/// Batch `b` of epoch `k` draws its words from the substream
/// `(seed, k·n_batches + b)`, so a run is fully determined by
/// `(seed, cfg, class_sets)`.
pub fn train(
    graph: &TannerGraph,
    cfg: &TrainConfig,
    class_sets: &[AbsorbingSet],
    seed: u64,
) -> Result<(WeightSet, LossReport), TrainError> {
    cfg.validate()?;
    let specialized = matches!(cfg.class, TrainingClass::Specialized(_));
    if specialized && class_sets.is_empty() {
        return Err(TrainError::EmptyClass);
    }
    let sets: &[AbsorbingSet] = if specialized { class_sets } else { &[] };
    let params = ChannelParams::from_snr_db(cfg.snr_db);
    let n_vars = graph.n_vars();
    let e = graph.n_edges();

    let mut weights = WeightSet::ones(e);
    let mut opt = RmsProp::new(e, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon);
    let mut history = Vec::with_capacity(cfg.epochs * cfg.n_batches);
    let mut epoch_means = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut epoch_total = 0.0;
        for batch in 0..cfg.n_batches {
            let mut batch_rng = channel::substream(seed, (epoch * cfg.n_batches + batch) as u64);
            let word_seeds: Vec<u64> = (0..cfg.batch_size).map(|_| batch_rng.next_u64()).collect();

            let partials: Vec<(f64, Gradient)> = word_seeds
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut acc = Gradient::zeros(e);
                    let mut loss_sum = 0.0;
                    for &s in chunk {
                        let mut rng = channel::substream(s, 0);
                        let llr = draw_training_word(&params, sets, n_vars, &mut rng);
                        let (l, g) = loss_and_gradient(graph, &weights, &llr, cfg.i_train);
                        loss_sum += l;
                        acc.add_assign(&g);
                    }
                    (loss_sum, acc)
                })
                .collect();

            let mut grad = Gradient::zeros(e);
            let mut batch_loss = 0.0;
            for (l, g) in &partials {
                batch_loss += l;
                grad.add_assign(g);
            }
            let inv = 1.0 / cfg.batch_size as f64;
            batch_loss *= inv;
            grad.scale(inv);
            if !batch_loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch });
            }
            opt.step(&mut weights, &grad);
            epoch_total += batch_loss;
            history.push(LossRecord {
                epoch,
                batch,
                loss: batch_loss,
            });
        }
        epoch_means.push(epoch_total / cfg.n_batches.max(1) as f64);
    }

    let final_loss = history.last().map_or(f64::NAN, |r| r.loss);
    Ok((
        weights,
        LossReport {
            epoch_means,
            final_loss,
            history,
        },
    ))
}

/// Weight profile: each weight vector sorted ascending.
pub fn weight_profile(weights: &WeightSet) -> (Vec<f64>, Vec<f64>) {
    let mut d = weights.w_data.clone();
    let mut a = weights.w_apost.clone();
    d.sort_by(f64::total_cmp);
    a.sort_by(f64::total_cmp);
    (d, a)
}

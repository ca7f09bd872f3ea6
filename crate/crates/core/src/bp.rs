//! Weighted belief propagation (BP-RNN) with a flooding schedule.
//!
//! One iteration is a check pass, a data pass and an a-posteriori pass:
//!
//! ```text
//! β_{m→n} = 2 atanh( Π_{n'∈N(m)\n} tanh(α_{n'→m} / 2) )
//! α_{n→m} = L_ch,n + w_{n→m} · Σ_{m'∈M(n)\m} β_{m'→n}
//! L̃_n     = L_ch,n + Σ_{m∈M(n)} w̃_{m→n} β_{m→n}
//! ```
//!
//! Weights are tied across iterations, one `w` and one `w̃` per edge in
//! canonical edge order. With all weights equal to one the decoder is plain
//! sum-product BP. The kernels here are shared with the training forward
//! pass so that training and testing run the exact same arithmetic.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tanner::TannerGraph;

/// Bound applied to every edge message.
pub const MESSAGE_CLAMP: f64 = 30.0;
/// Bound applied to the tanh product before `atanh`.
pub const TANH_PRODUCT_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("weight set has {got} edges, graph has {expected}")]
    EdgeCountMismatch { got: usize, expected: usize },
    #[error("non-finite weight at edge {0}")]
    NonFinite(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("weight file is for a {file_n}x{file_m} graph with {file_e} edges, graph is {n}x{m} with {e}")]
    GraphMismatch {
        file_n: usize,
        file_m: usize,
        file_e: usize,
        n: usize,
        m: usize,
        e: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Trained BP-RNN weights, indexed by canonical edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub w_data: Vec<f64>,
    pub w_apost: Vec<f64>,
}

impl WeightSet {
    /// The plain BP weights.
    pub fn ones(n_edges: usize) -> Self {
        Self {
            w_data: vec![1.0; n_edges],
            w_apost: vec![1.0; n_edges],
        }
    }

    pub fn n_edges(&self) -> usize {
        self.w_data.len()
    }

    pub fn validate(&self, graph: &TannerGraph) -> Result<(), WeightError> {
        let e = graph.n_edges();
        for len in [self.w_data.len(), self.w_apost.len()] {
            if len != e {
                return Err(WeightError::EdgeCountMismatch {
                    got: len,
                    expected: e,
                });
            }
        }
        for (i, (a, b)) in self.w_data.iter().zip(&self.w_apost).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(WeightError::NonFinite(i));
            }
        }
        Ok(())
    }

    /// Text form: `N M E` header, then one `n m w_data w_apost` line per
    /// edge (1-based indices, 17 significant digits).
    pub fn to_text(&self, graph: &TannerGraph) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            graph.n_vars(),
            graph.n_checks(),
            graph.n_edges()
        );
        for e in 0..graph.n_edges() {
            let _ = writeln!(
                out,
                "{} {} {:.16e} {:.16e}",
                graph.edge_var(e) + 1,
                graph.edge_check(e) + 1,
                self.w_data[e],
                self.w_apost[e]
            );
        }
        out
    }

    pub fn from_text(text: &str, graph: &TannerGraph) -> Result<Self, WeightError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, msg: &str| WeightError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (no, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(no, "expected \"N M E\""))?;
        let [n, m, e] = dims[..] else {
            return Err(parse_err(no, "expected \"N M E\""));
        };
        if (n, m, e) != (graph.n_vars(), graph.n_checks(), graph.n_edges()) {
            return Err(WeightError::GraphMismatch {
                file_n: n,
                file_m: m,
                file_e: e,
                n: graph.n_vars(),
                m: graph.n_checks(),
                e: graph.n_edges(),
            });
        }
        let mut w = Self {
            w_data: Vec::with_capacity(e),
            w_apost: Vec::with_capacity(e),
        };
        for edge in 0..e {
            let (no, l) = lines
                .next()
                .ok_or_else(|| parse_err(no + edge + 1, "missing edge line"))?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(parse_err(no, "expected \"n m w_data w_apost\""));
            }
            let var: usize = toks[0]
                .parse()
                .map_err(|_| parse_err(no, "bad variable index"))?;
            let check: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(no, "bad check index"))?;
            if var == 0 || check == 0 || graph.edge_index(var - 1, check - 1) != Some(edge) {
                return Err(parse_err(no, "edge out of canonical order"));
            }
            let wd: f64 = toks[2].parse().map_err(|_| parse_err(no, "bad weight"))?;
            let wa: f64 = toks[3].parse().map_err(|_| parse_err(no, "bad weight"))?;
            w.w_data.push(wd);
            w.w_apost.push(wa);
        }
        w.validate(graph)?;
        Ok(w)
    }

    pub fn save(&self, graph: &TannerGraph, path: &std::path::Path) -> Result<(), WeightError> {
        std::fs::write(path, self.to_text(graph))?;
        Ok(())
    }

    pub fn load(graph: &TannerGraph, path: &std::path::Path) -> Result<Self, WeightError> {
        Self::from_text(&std::fs::read_to_string(path)?, graph)
    }
}

#[inline]
pub fn clamp_message(x: f64) -> f64 {
    x.clamp(-MESSAGE_CLAMP, MESSAGE_CLAMP)
}

/// Extrinsic tanh rule for a single check-node: `beta_out[k]` combines every
/// input except `alpha_in[k]`.
pub fn check_pass(alpha_in: &[f64], beta_out: &mut [f64]) {
    debug_assert_eq!(alpha_in.len(), beta_out.len());
    let mut t = [0.0f64; 64];
    let t = if alpha_in.len() <= 64 {
        &mut t[..alpha_in.len()]
    } else {
        // unusually dense rows fall back to the heap
        return check_pass_heap(alpha_in, beta_out);
    };
    for (ti, &a) in t.iter_mut().zip(alpha_in) {
        *ti = (0.5 * a).tanh();
    }
    for (k, out) in beta_out.iter_mut().enumerate() {
        *out = extrinsic_beta(t, k);
    }
}

fn check_pass_heap(alpha_in: &[f64], beta_out: &mut [f64]) {
    let t: Vec<f64> = alpha_in.iter().map(|&a| (0.5 * a).tanh()).collect();
    for (k, out) in beta_out.iter_mut().enumerate() {
        *out = extrinsic_beta(&t, k);
    }
}

/// Product of `t` over all indices except `skip`, in index order.
#[inline]
pub(crate) fn extrinsic_product(t: &[f64], skip: usize) -> f64 {
    let mut p = 1.0;
    for (j, &tj) in t.iter().enumerate() {
        if j != skip {
            p *= tj;
        }
    }
    p
}

#[inline]
fn extrinsic_beta(t: &[f64], skip: usize) -> f64 {
    let p = extrinsic_product(t, skip).clamp(-TANH_PRODUCT_LIMIT, TANH_PRODUCT_LIMIT);
    // std's atanh loses accuracy as its argument approaches −1, so the odd
    // symmetry is restored explicitly
    clamp_message((2.0 * p.abs().atanh()).copysign(p))
}

/// Check pass over the whole graph: `beta[e]` from `alpha[e]`, per edge id.
pub fn check_pass_all(graph: &TannerGraph, alpha: &[f64], beta: &mut [f64]) {
    let mut a_in = Vec::with_capacity(16);
    let mut b_out = Vec::with_capacity(16);
    for m in 0..graph.n_checks() {
        let edges = graph.check_edges(m);
        a_in.clear();
        a_in.extend(edges.iter().map(|&e| alpha[e]));
        b_out.clear();
        b_out.resize(edges.len(), 0.0);
        check_pass(&a_in, &mut b_out);
        for (&e, &b) in edges.iter().zip(&b_out) {
            beta[e] = b;
        }
    }
}

/// Sum of `beta` over the edges of a variable except `skip`, in edge order.
#[inline]
pub(crate) fn extrinsic_sum(beta: &[f64], skip: usize) -> f64 {
    let mut s = 0.0;
    for (j, &b) in beta.iter().enumerate() {
        if j != skip {
            s += b;
        }
    }
    s
}

/// Simplified weighted data pass over the whole graph.
pub fn data_pass(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    beta: &[f64],
    alpha: &mut [f64],
) {
    for (n, &l) in llr_ch.iter().enumerate().take(graph.n_vars()) {
        let r = graph.var_edges(n);
        let start = r.start;
        let b = &beta[r.clone()];
        for e in r {
            let s = extrinsic_sum(b, e - start);
            alpha[e] = clamp_message(l + weights.w_data[e] * s);
        }
    }
}

/// A-posteriori LLRs `L̃`.
pub fn aposteriori(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    beta: &[f64],
    out: &mut [f64],
) {
    for (n, o) in out.iter_mut().enumerate().take(graph.n_vars()) {
        let mut s = 0.0;
        for e in graph.var_edges(n) {
            s += weights.w_apost[e] * beta[e];
        }
        *o = llr_ch[n] + s;
    }
}

/// Bit 1 iff the LLR is not positive.
pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l <= 0.0)).collect()
}

fn hard_decision_into(llr: &[f64], out: &mut [u8]) {
    for (o, &l) in out.iter_mut().zip(llr) {
        *o = u8::from(l <= 0.0);
    }
}

/// Initial variable-to-check messages: the channel LLR on every edge.
pub fn initial_alpha(graph: &TannerGraph, llr_ch: &[f64], alpha: &mut [f64]) {
    for (e, a) in alpha.iter_mut().enumerate() {
        *a = clamp_message(llr_ch[graph.edge_var(e)]);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard: Vec<u8>,
    /// `L̃` at the stopping iteration.
    pub llr_final: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Check-node updates, `E × iterations`.
    pub cn_updates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    pub max_iterations: usize,
    pub early_stop: bool,
    /// Record `L̃` every this many iterations (periodic OSD).
    pub snapshot_every: Option<usize>,
}

impl DecodeOptions {
    pub fn testing(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            early_stop: true,
            snapshot_every: None,
        }
    }
}

/// Decodes with early stopping on a zero syndrome.
pub fn decode(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    max_iterations: usize,
) -> DecodeResult {
    decode_with(
        graph,
        weights,
        llr_ch,
        DecodeOptions::testing(max_iterations),
    )
    .0
}

/// Decodes and returns the `L̃` snapshots requested by `opts`.
pub fn decode_with(
    graph: &TannerGraph,
    weights: &WeightSet,
    llr_ch: &[f64],
    opts: DecodeOptions,
) -> (DecodeResult, Vec<Vec<f64>>) {
    assert!(opts.max_iterations >= 1, "at least one iteration must run");
    assert_eq!(llr_ch.len(), graph.n_vars(), "channel LLR length");
    let e = graph.n_edges();
    let mut alpha = vec![0.0; e];
    let mut beta = vec![0.0; e];
    let mut post = vec![0.0; graph.n_vars()];
    let mut hard = vec![0u8; graph.n_vars()];
    let mut snapshots = Vec::new();

    initial_alpha(graph, llr_ch, &mut alpha);
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iterations {
        check_pass_all(graph, &alpha, &mut beta);
        data_pass(graph, weights, llr_ch, &beta, &mut alpha);
        aposteriori(graph, weights, llr_ch, &beta, &mut post);
        hard_decision_into(&post, &mut hard);
        iterations = it;
        converged = graph.is_codeword(&hard);
        if let Some(k) = opts.snapshot_every {
            if it % k == 0 {
                snapshots.push(post.clone());
            }
        }
        if converged && opts.early_stop {
            break;
        }
    }
    let result = DecodeResult {
        hard,
        llr_final: post,
        iterations,
        converged,
        cn_updates: (e * iterations) as u64,
    };
    (result, snapshots)
}

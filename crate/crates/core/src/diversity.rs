//! Decoder diversity: greedy selection of complementary decoders, parallel
//! and serial architectures, and ML selection among their outputs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bp::{self, DecodeOptions, WeightError, WeightSet};
use crate::tanner::TannerGraph;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("duplicate decoder id {0:?}")]
    DuplicateId(String),
    #[error("decoder {id:?}: {source}")]
    Weights {
        id: String,
        #[source]
        source: WeightError,
    },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("requested {requested} decoders from a pool of {available}")]
    TooFew { requested: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolDecoder {
    pub id: String,
    /// Extended type of the training class, or `unspecialized`.
    pub class: String,
    pub weights: WeightSet,
}

/// Ordered list of decoders sharing one graph and iteration cap.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderPool {
    pub decoders: Vec<PoolDecoder>,
    pub i_test: usize,
}

/// One entry of a pool manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub class: String,
    /// Weight file, relative to the manifest's directory unless absolute.
    pub weights: PathBuf,
    pub snr_db: f64,
}

impl DecoderPool {
    pub fn new(
        decoders: Vec<PoolDecoder>,
        i_test: usize,
        g: &TannerGraph,
    ) -> Result<Self, PoolError> {
        let mut ids: Vec<&str> = decoders.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(PoolError::DuplicateId(w[0].to_string()));
        }
        for d in &decoders {
            d.weights.validate(g).map_err(|source| PoolError::Weights {
                id: d.id.clone(),
                source,
            })?;
        }
        Ok(Self { decoders, i_test })
    }

    pub fn len(&self) -> usize {
        self.decoders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decoders.is_empty()
    }

    pub fn weights(&self) -> Vec<&WeightSet> {
        self.decoders.iter().map(|d| &d.weights).collect()
    }

    /// Loads a JSON manifest (a list of [`ManifestEntry`]).
    pub fn load_manifest(path: &Path, g: &TannerGraph, i_test: usize) -> Result<Self, PoolError> {
        let io = |source| PoolError::Io {
            path: path.to_path_buf(),
            source,
        };
        let text = std::fs::read_to_string(path).map_err(io)?;
        let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let decoders = entries
            .into_iter()
            .map(|e| {
                let wpath = base.join(&e.weights);
                let weights = WeightSet::load(g, &wpath).map_err(|source| PoolError::Weights {
                    id: e.id.clone(),
                    source,
                })?;
                Ok(PoolDecoder {
                    id: e.id,
                    class: e.class,
                    weights,
                })
            })
            .collect::<Result<Vec<_>, PoolError>>()?;
        Self::new(decoders, i_test, g)
    }
}

/// Correlation score `Σ_{n : c_n = 1} y_n`, summed in index order. Lower
/// means closer to `y` in Euclidean distance.
pub fn ml_score(codeword: &[u8], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&c, &v) in codeword.iter().zip(y) {
        if c == 1 {
            s += v;
        }
    }
    s
}

/// Index of the candidate with the lowest [`ml_score`], ties to the first.
pub fn ml_select(candidates: &[&[u8]], y: &[f64]) -> usize {
    assert!(!candidates.is_empty());
    let mut best = 0;
    let mut best_score = ml_score(candidates[0], y);
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let s = ml_score(c, y);
        if s < best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// For every decoder, the sorted indices of the words it does not decode
/// to the all-zero codeword within `i_test` iterations.
pub fn failure_sets(
    g: &TannerGraph,
    decoders: &[&WeightSet],
    words: &[Vec<f64>],
    i_test: usize,
) -> Vec<Vec<usize>> {
    decoders
        .iter()
        .map(|w| {
            words
                .par_iter()
                .enumerate()
                .filter_map(|(i, llr)| {
                    let r = bp::decode(g, w, llr, i_test);
                    r.hard.contains(&1).then_some(i)
                })
                .collect()
        })
        .collect()
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .copied()
        .filter(|x| b.binary_search(x).is_ok())
        .collect()
}

/// Greedy ordering: first the decoder with the fewest failures, then at
/// each step the one whose failures overlap least with the words every
/// chosen decoder fails on. Ties go to the smallest index.
pub fn select_order(failures: &[Vec<usize>]) -> Vec<usize> {
    let j = failures.len();
    let mut order = Vec::with_capacity(j);
    let mut used = vec![false; j];
    let mut common: Option<Vec<usize>> = None;
    for _ in 0..j {
        let mut best: Option<(usize, usize)> = None;
        for (d, f) in failures.iter().enumerate() {
            if used[d] {
                continue;
            }
            let cost = match &common {
                None => f.len(),
                Some(c) => intersection_size(c, f),
            };
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((d, cost));
            }
        }
        let (d, _) = best.unwrap();
        used[d] = true;
        order.push(d);
        common = Some(match common {
            None => failures[d].clone(),
            Some(c) => intersect(&c, &failures[d]),
        });
    }
    order
}

/// The first `z` decoders of `pool` in `order`.
pub fn take_diversity(
    pool: &DecoderPool,
    order: &[usize],
    z: usize,
) -> Result<DecoderPool, PoolError> {
    if z > order.len() {
        return Err(PoolError::TooFew {
            requested: z,
            available: order.len(),
        });
    }
    Ok(DecoderPool {
        decoders: order[..z]
            .iter()
            .map(|&i| pool.decoders[i].clone())
            .collect(),
        i_test: pool.i_test,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderRun {
    /// Zero for decoders that were never started.
    pub iterations: usize,
    pub converged: bool,
    pub cn_updates: u64,
    pub llr_final: Vec<f64>,
    pub hard: Vec<u8>,
    /// A-posteriori LLRs recorded every `snapshot_every` iterations.
    pub snapshots: Vec<Vec<f64>>,
}

impl DecoderRun {
    fn not_run() -> Self {
        Self {
            iterations: 0,
            converged: false,
            cn_updates: 0,
            llr_final: Vec::new(),
            hard: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn was_run(&self) -> bool {
        self.iterations > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityOutcome {
    /// ML choice among the zero-syndrome outputs.
    pub chosen: Option<Vec<u8>>,
    pub chosen_decoder: Option<usize>,
    pub per_decoder: Vec<DecoderRun>,
    pub serial: bool,
}

impl DiversityOutcome {
    /// Output of the architecture: the chosen codeword, or the hard
    /// decision of the last decoder that ran.
    pub fn output(&self) -> &[u8] {
        if let Some(c) = &self.chosen {
            return c;
        }
        let last = self.per_decoder.iter().rev().find(|r| r.was_run()).unwrap();
        &last.hard
    }

    /// True when the output is the all-zero codeword.
    pub fn success(&self) -> bool {
        self.chosen
            .as_ref()
            .is_some_and(|c| c.iter().all(|&b| b == 0))
    }

    pub fn total_iterations(&self) -> usize {
        self.per_decoder.iter().map(|r| r.iterations).sum()
    }

    /// Sum for the serial architecture, max for the parallel one.
    pub fn latency(&self) -> usize {
        if self.serial {
            self.total_iterations()
        } else {
            self.per_decoder
                .iter()
                .map(|r| r.iterations)
                .max()
                .unwrap_or(0)
        }
    }

    pub fn cn_updates(&self) -> u64 {
        self.per_decoder.iter().map(|r| r.cn_updates).sum()
    }

    /// Final LLRs of every decoder that ran.
    pub fn soft_outputs(&self) -> Vec<Vec<f64>> {
        self.per_decoder
            .iter()
            .filter(|r| r.was_run())
            .map(|r| r.llr_final.clone())
            .collect()
    }
}

fn run_one(
    g: &TannerGraph,
    w: &WeightSet,
    llr: &[f64],
    i_test: usize,
    snapshot_every: Option<usize>,
) -> DecoderRun {
    let opts = DecodeOptions {
        max_iterations: i_test,
        early_stop: true,
        snapshot_every,
    };
    let (r, snapshots) = bp::decode_with(g, w, llr, opts);
    DecoderRun {
        iterations: r.iterations,
        converged: r.converged,
        cn_updates: r.cn_updates,
        llr_final: r.llr_final,
        hard: r.hard,
        snapshots,
    }
}

/// Runs every decoder, then picks the ML codeword among the converged
/// outputs.
pub fn decode_parallel(
    g: &TannerGraph,
    decoders: &[&WeightSet],
    i_test: usize,
    llr: &[f64],
    y: &[f64],
    snapshot_every: Option<usize>,
) -> DiversityOutcome {
    let per_decoder: Vec<DecoderRun> = decoders
        .iter()
        .map(|w| run_one(g, w, llr, i_test, snapshot_every))
        .collect();
    let converged: Vec<usize> = (0..per_decoder.len())
        .filter(|&i| per_decoder[i].converged)
        .collect();
    let (chosen, chosen_decoder) = if converged.is_empty() {
        (None, None)
    } else {
        let cands: Vec<&[u8]> = converged
            .iter()
            .map(|&i| per_decoder[i].hard.as_slice())
            .collect();
        let pick = converged[ml_select(&cands, y)];
        (Some(per_decoder[pick].hard.clone()), Some(pick))
    };
    DiversityOutcome {
        chosen,
        chosen_decoder,
        per_decoder,
        serial: false,
    }
}

/// Runs the decoders in order and stops at the first converged output.
pub fn decode_serial(
    g: &TannerGraph,
    decoders: &[&WeightSet],
    i_test: usize,
    llr: &[f64],
    snapshot_every: Option<usize>,
) -> DiversityOutcome {
    let mut per_decoder = Vec::with_capacity(decoders.len());
    let mut chosen = None;
    let mut chosen_decoder = None;
    for (i, w) in decoders.iter().enumerate() {
        if chosen.is_some() {
            per_decoder.push(DecoderRun::not_run());
            continue;
        }
        let r = run_one(g, w, llr, i_test, snapshot_every);
        if r.converged {
            chosen = Some(r.hard.clone());
            chosen_decoder = Some(i);
        }
        per_decoder.push(r);
    }
    DiversityOutcome {
        chosen,
        chosen_decoder,
        per_decoder,
        serial: true,
    }
}

/// Running averages over decoded words.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub words: u64,
    pub total_iterations: u64,
    pub total_latency: u64,
    pub total_cn_updates: u64,
}

impl Metrics {
    pub fn record(&mut self, outcome: &DiversityOutcome) {
        self.record_counts(
            outcome.total_iterations() as u64,
            outcome.latency() as u64,
            outcome.cn_updates(),
        );
    }

    pub fn record_counts(&mut self, iterations: u64, latency: u64, cn_updates: u64) {
        self.words += 1;
        self.total_iterations += iterations;
        self.total_latency += latency;
        self.total_cn_updates += cn_updates;
    }

    pub fn merge(&mut self, other: &Metrics) {
        self.words += other.words;
        self.total_iterations += other.total_iterations;
        self.total_latency += other.total_latency;
        self.total_cn_updates += other.total_cn_updates;
    }

    /// Mean over words of the summed per-decoder iterations.
    pub fn avg_iterations(&self) -> f64 {
        self.total_iterations as f64 / self.words as f64
    }

    pub fn avg_latency(&self) -> f64 {
        self.total_latency as f64 / self.words as f64
    }

    pub fn avg_cn_updates(&self) -> f64 {
        self.total_cn_updates as f64 / self.words as f64
    }
}

/// Worst-case check-node updates of a pool of `z` decoders.
pub fn worst_case_cn_updates(g: &TannerGraph, z: usize, i_test: usize) -> u64 {
    (z * g.n_edges() * i_test) as u64
}

/// Trainable parameters of a pool of `z` decoders.
pub fn weight_count(g: &TannerGraph, z: usize) -> usize {
    2 * g.n_edges() * z
}

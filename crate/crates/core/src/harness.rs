//! Monte Carlo FER simulation, experiment configuration and the
//! enumerate → train → select → simulate pipeline.
//!
//! Frame `i` of an SNR point draws its noise from the substream
//! `(point_seed(seed, snr), i)`. Frames are decoded in parallel blocks and
//! scanned in order, and the run stops at the exact frame where the stop
//! rule triggers, so a row depends only on the seed and never on the
//! number of workers.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorbing::{self, AbsorbingSet, EnumerateOptions, ExtendedType};
use crate::bp::{WeightError, WeightSet};
use crate::channel::{self, ChannelParams, ReceivedWord};
use crate::diversity::{self, DecoderPool, DiversityOutcome, Metrics, PoolDecoder, PoolError};
use crate::osd::{self, OsdError};
use crate::stats;
use crate::tanner::TannerGraph;
use crate::training::{self, TrainConfig, TrainError, TrainingClass};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Osd(#[from] OsdError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("config line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoderKind {
    Bp,
    BprnnSingle,
    DiversityParallel,
    DiversitySerial,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Bp => "bp",
            DecoderKind::BprnnSingle => "bprnn-single",
            DecoderKind::DiversityParallel => "diversity-parallel",
            DecoderKind::DiversitySerial => "diversity-serial",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bp" => Ok(DecoderKind::Bp),
            "bprnn-single" => Ok(DecoderKind::BprnnSingle),
            "diversity-parallel" => Ok(DecoderKind::DiversityParallel),
            "diversity-serial" => Ok(DecoderKind::DiversitySerial),
            _ => Err(HarnessError::Config(format!("unknown decoder {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OsdMode {
    Off,
    /// OSD on the final soft output of every decoder that ran.
    Postprocess,
    /// OSD on the soft output recorded every `n` iterations.
    Periodic(usize),
}

impl fmt::Display for OsdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OsdMode::Off => f.write_str("off"),
            OsdMode::Postprocess => f.write_str("postprocess"),
            OsdMode::Periodic(n) => write!(f, "periodic-{n}"),
        }
    }
}

impl FromStr for OsdMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(OsdMode::Off),
            "postprocess" => Ok(OsdMode::Postprocess),
            _ => s
                .strip_prefix("periodic-")
                .and_then(|n| n.parse().ok())
                .filter(|&n: &usize| n > 0)
                .map(OsdMode::Periodic)
                .ok_or_else(|| HarnessError::Config(format!("unknown osd mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_frames: 10_000_000,
        }
    }
}

/// Everything that defines one simulated decoder configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub decoder: DecoderKind,
    pub i_test: usize,
    pub osd_mode: OsdMode,
    pub osd_order: usize,
    pub stop: StopRule,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.i_test == 0 {
            return Err(HarnessError::Config("i_test must be at least 1".into()));
        }
        if self.stop.min_errors == 0 {
            return Err(HarnessError::Config(
                "min frame errors must be at least 1".into(),
            ));
        }
        if self.osd_order > 2 {
            return Err(HarnessError::Config("osd order must be 0, 1 or 2".into()));
        }
        Ok(())
    }
}

/// A full experiment: a graph, a decoder configuration and an SNR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alist: std::path::PathBuf,
    pub sim: SimSpec,
    pub snr_db: Vec<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.snr_db.is_empty() {
            return Err(HarnessError::Config("SNR list is empty".into()));
        }
        self.sim.validate()
    }
}

/// Per-frame record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameRecord {
    pub error: bool,
    pub iterations: u64,
    pub latency: u64,
    pub cn_updates: u64,
    pub osd_invoked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub decoder: String,
    pub osd_mode: String,
    pub osd_order: usize,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub fer_lo: f64,
    pub fer_hi: f64,
    pub avg_iters: f64,
    pub avg_latency: f64,
    pub avg_cn_updates: f64,
    pub osd_invocations: u64,
    pub seed: u64,
    /// The frame cap ended the run before enough errors were seen.
    pub capped: bool,
}

pub const RESULT_CSV_HEADER: &str = "snr_db,decoder,osd_mode,osd_order,frames,frame_errors,fer,fer_lo,fer_hi,avg_iters,avg_latency,avg_cn_updates,osd_invocations,seed";

impl ResultRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:e},{:e},{:e},{},{},{},{},{}",
            self.snr_db,
            self.decoder,
            self.osd_mode,
            self.osd_order,
            self.frames,
            self.frame_errors,
            self.fer,
            self.fer_lo,
            self.fer_hi,
            self.avg_iters,
            self.avg_latency,
            self.avg_cn_updates,
            self.osd_invocations,
            self.seed
        )
    }

    pub fn ci(&self) -> (f64, f64) {
        (self.fer_lo, self.fer_hi)
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the frame streams at one SNR point.
pub fn point_seed(seed: u64, snr_db: f64) -> u64 {
    mix(seed, snr_db.to_bits())
}

/// Seed derived from a master seed and a label index.
pub fn derived_seed(seed: u64, index: u64) -> u64 {
    mix(seed, index ^ 0xa5a5_a5a5_0000_0000)
}

/// Decodes one word with `decoders` under `spec` and reports the outcome
/// against the all-zero codeword.
pub fn simulate_frame(
    g: &TannerGraph,
    decoders: &[&WeightSet],
    spec: &SimSpec,
    word: &ReceivedWord,
) -> Result<FrameRecord, OsdError> {
    let snapshot_every = match spec.osd_mode {
        OsdMode::Periodic(k) => Some(k),
        _ => None,
    };
    let outcome: DiversityOutcome = match spec.decoder {
        DecoderKind::DiversitySerial => {
            diversity::decode_serial(g, decoders, spec.i_test, &word.llr, snapshot_every)
        }
        _ => {
            diversity::decode_parallel(g, decoders, spec.i_test, &word.llr, &word.y, snapshot_every)
        }
    };
    let mut rec = FrameRecord {
        error: !outcome.success(),
        iterations: outcome.total_iterations() as u64,
        latency: outcome.latency() as u64,
        cn_updates: outcome.cn_updates(),
        osd_invoked: false,
    };
    if outcome.chosen.is_none() && spec.osd_mode != OsdMode::Off {
        let soft: Vec<Vec<f64>> = match spec.osd_mode {
            OsdMode::Periodic(_) => {
                let mut s: Vec<Vec<f64>> = outcome
                    .per_decoder
                    .iter()
                    .flat_map(|r| r.snapshots.iter().cloned())
                    .collect();
                if s.is_empty() {
                    s = outcome.soft_outputs();
                }
                s
            }
            _ => outcome.soft_outputs(),
        };
        let (cand, _) = osd::postprocess(g, &soft, &word.y, spec.osd_order)?;
        rec.osd_invoked = true;
        rec.error = cand.codeword.contains(&1);
    }
    Ok(rec)
}

// Frames decoded per parallel block.
const BLOCK: u64 = 512;

/// Simulates one SNR point until the stop rule triggers.
///
/// `decoders` is ignored for [`DecoderKind::Bp`], which always uses
/// all-ones weights; [`DecoderKind::BprnnSingle`] uses the first entry.
pub fn run_point(
    g: &TannerGraph,
    decoders: &[WeightSet],
    spec: &SimSpec,
    snr_db: f64,
) -> Result<ResultRow, HarnessError> {
    spec.validate()?;
    let ones = [WeightSet::ones(g.n_edges())];
    let active: Vec<&WeightSet> = match spec.decoder {
        DecoderKind::Bp => vec![&ones[0]],
        DecoderKind::BprnnSingle => decoders.first().into_iter().collect(),
        _ => decoders.iter().collect(),
    };
    if active.is_empty() {
        return Err(HarnessError::Config(format!(
            "{} needs at least one weight set",
            spec.decoder
        )));
    }
    for w in &active {
        w.validate(g)?;
    }
    let params = ChannelParams::from_snr_db(snr_db);
    let pseed = point_seed(spec.seed, snr_db);

    let body = || -> Result<ResultRow, HarnessError> {
        let mut frames = 0u64;
        let mut errors = 0u64;
        let mut osd_invocations = 0u64;
        let mut metrics = Metrics::default();
        'outer: while frames < spec.stop.max_frames {
            let end = (frames + BLOCK).min(spec.stop.max_frames);
            let block: Vec<FrameRecord> = (frames..end)
                .into_par_iter()
                .map(|i| {
                    let mut rng = channel::substream(pseed, i);
                    let word = channel::sample_awgn(&params, g.n_vars(), &mut rng);
                    simulate_frame(g, &active, spec, &word)
                })
                .collect::<Result<_, _>>()?;
            for r in block {
                frames += 1;
                errors += u64::from(r.error);
                osd_invocations += u64::from(r.osd_invoked);
                metrics.record_counts(r.iterations, r.latency, r.cn_updates);
                if errors >= spec.stop.min_errors {
                    break 'outer;
                }
            }
        }
        let (fer_lo, fer_hi) = stats::wilson95(errors, frames);
        Ok(ResultRow {
            snr_db,
            decoder: spec.decoder.to_string(),
            osd_mode: spec.osd_mode.to_string(),
            osd_order: spec.osd_order,
            frames,
            frame_errors: errors,
            fer: errors as f64 / frames.max(1) as f64,
            fer_lo,
            fer_hi,
            avg_iters: metrics.avg_iterations(),
            avg_latency: metrics.avg_latency(),
            avg_cn_updates: metrics.avg_cn_updates(),
            osd_invocations,
            seed: spec.seed,
            capped: errors < spec.stop.min_errors,
        })
    };

    if spec.workers == 0 {
        body()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(body)
    }
}

/// Runs every SNR point of `cfg`, asking `decoders_for` for the weights of
/// each point (per-SNR retraining or reuse is the caller's choice).
pub fn run_sweep<F>(
    g: &TannerGraph,
    cfg: &ExperimentConfig,
    mut decoders_for: F,
) -> Result<Vec<ResultRow>, HarnessError>
where
    F: FnMut(f64) -> Result<Vec<WeightSet>, HarnessError>,
{
    cfg.validate()?;
    cfg.snr_db
        .iter()
        .map(|&snr| run_point(g, &decoders_for(snr)?, &cfg.sim, snr))
        .collect()
}

/// Sorted weight vectors as CSV `rank,w_data,w_apost`.
pub fn dump_weight_profile(weights: &WeightSet) -> String {
    let (d, a) = training::weight_profile(weights);
    let mut out = String::from("rank,w_data,w_apost\n");
    for (i, (x, y)) in d.iter().zip(&a).enumerate() {
        out.push_str(&format!("{i},{x},{y}\n"));
    }
    out
}

/// A-posteriori LLRs collected over failed frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCdf {
    /// Sorted ascending.
    pub values: Vec<f64>,
    pub frames: u64,
    pub failures: u64,
}

impl FailureCdf {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of values `≤ x`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        let k = self.values.partition_point(|&v| v <= x);
        k as f64 / self.values.len() as f64
    }

    /// `(llr, cdf)` rows, one per distinct value.
    pub fn table(&self) -> Vec<(f64, f64)> {
        let n = self.values.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            let c = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = c,
                _ => out.push((v, c)),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("llr,cdf\n");
        for (v, c) in self.table() {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }
}

/// Decodes channel words until `n_failures` frames fail (or `max_frames`
/// are spent) and collects their final a-posteriori LLRs.
pub fn dump_failure_cdf(
    g: &TannerGraph,
    weights: &WeightSet,
    i_test: usize,
    snr_db: f64,
    n_failures: u64,
    max_frames: u64,
    seed: u64,
) -> FailureCdf {
    let params = ChannelParams::from_snr_db(snr_db);
    let pseed = point_seed(seed, snr_db);
    let mut values = Vec::new();
    let mut frames = 0u64;
    let mut failures = 0u64;
    'outer: while frames < max_frames && failures < n_failures {
        let end = (frames + BLOCK).min(max_frames);
        let block: Vec<Option<Vec<f64>>> = (frames..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = channel::substream(pseed, i);
                let word = channel::sample_awgn(&params, g.n_vars(), &mut rng);
                let r = crate::bp::decode(g, weights, &word.llr, i_test);
                r.hard.contains(&1).then_some(r.llr_final)
            })
            .collect();
        for r in block {
            frames += 1;
            if let Some(llr) = r {
                failures += 1;
                values.extend(llr);
                if failures >= n_failures {
                    break 'outer;
                }
            }
        }
    }
    values.sort_by(f64::total_cmp);
    FailureCdf {
        values,
        frames,
        failures,
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::ConfigSyntax {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(HarnessError::ConfigSyntax {
                line: i + 1,
                msg: "empty key".into(),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Settings of the enumerate → train → select pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Absorbing-set sizes whose classes become training classes.
    pub nu: Vec<usize>,
    /// Upper bound on the number of trained decoders.
    pub max_classes: usize,
    /// Sets kept per class for drawing training words.
    pub sets_per_class: usize,
    pub train: TrainConfig,
    pub select_words: usize,
    pub select_snr_db: f64,
    pub z: usize,
    pub i_test: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            nu: vec![3, 4, 5],
            max_classes: 64,
            sets_per_class: 4096,
            train: TrainConfig::default(),
            select_words: 1_000_000,
            select_snr_db: 5.0,
            z: 10,
            i_test: 25,
            seed: 1,
        }
    }
}

/// Training classes: every non-codeword extended type of the requested
/// sizes, in size then type order, truncated to `max_classes`.
pub fn training_classes(
    g: &TannerGraph,
    cfg: &PipelineConfig,
) -> Vec<(ExtendedType, Vec<AbsorbingSet>)> {
    let mut out = Vec::new();
    for &nu in &cfg.nu {
        let opts = EnumerateOptions {
            sample_limit: Some(cfg.sets_per_class),
            ..Default::default()
        };
        let c = absorbing::enumerate_all(g, nu, &opts);
        for (et, entry) in c.trainable() {
            out.push((et.clone(), entry.sets()));
        }
    }
    out.truncate(cfg.max_classes);
    out
}

/// Trains one decoder per class at `snr_db`.
pub fn train_pool(
    g: &TannerGraph,
    classes: &[(ExtendedType, Vec<AbsorbingSet>)],
    cfg: &PipelineConfig,
    snr_db: f64,
) -> Result<DecoderPool, HarnessError> {
    let mut decoders = Vec::with_capacity(classes.len());
    for (i, (et, sets)) in classes.iter().enumerate() {
        let tc = TrainConfig {
            snr_db,
            class: TrainingClass::Specialized(et.to_string()),
            ..cfg.train.clone()
        };
        let seed = derived_seed(point_seed(cfg.seed, snr_db), i as u64);
        let (weights, _) = training::train(g, &tc, sets, seed)?;
        decoders.push(PoolDecoder {
            id: format!("d{i}"),
            class: et.to_string(),
            weights,
        });
    }
    Ok(DecoderPool::new(decoders, cfg.i_test, g)?)
}

/// Greedy order of `pool` from failures on fresh channel words.
pub fn select_pool_order(
    g: &TannerGraph,
    pool: &DecoderPool,
    n_words: usize,
    snr_db: f64,
    seed: u64,
) -> Vec<usize> {
    let params = ChannelParams::from_snr_db(snr_db);
    let mut master = channel::substream(point_seed(seed, snr_db), u64::MAX);
    let word_seeds: Vec<u64> = (0..n_words).map(|_| master.next_u64()).collect();
    let words: Vec<Vec<f64>> = word_seeds
        .par_iter()
        .map(|&s| channel::sample_awgn(&params, g.n_vars(), &mut channel::substream(s, 0)).llr)
        .collect();
    let failures = diversity::failure_sets(g, &pool.weights(), &words, pool.i_test);
    diversity::select_order(&failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TannerGraph {
        TannerGraph::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 1]]).unwrap()
    }

    fn spec() -> SimSpec {
        SimSpec {
            decoder: DecoderKind::Bp,
            i_test: 5,
            osd_mode: OsdMode::Off,
            osd_order: 0,
            stop: StopRule {
                min_errors: 20,
                max_frames: 5000,
            },
            seed: 3,
            workers: 0,
        }
    }

    #[test]
    fn names_round_trip() {
        for k in [
            "bp",
            "bprnn-single",
            "diversity-parallel",
            "diversity-serial",
        ] {
            assert_eq!(k.parse::<DecoderKind>().unwrap().to_string(), k);
        }
        for m in ["off", "postprocess", "periodic-25"] {
            assert_eq!(m.parse::<OsdMode>().unwrap().to_string(), m);
        }
        assert!("periodic-0".parse::<OsdMode>().is_err());
    }

    #[test]
    fn csv_header_has_fourteen_columns() {
        assert_eq!(RESULT_CSV_HEADER.split(',').count(), 14);
        let row = run_point(&toy(), &[], &spec(), 2.0).unwrap();
        assert_eq!(row.to_csv_row().split(',').count(), 14);
    }

    #[test]
    fn stop_rule_is_exact() {
        let row = run_point(&toy(), &[], &spec(), 0.0).unwrap();
        assert_eq!(row.frame_errors, 20);
        assert!(!row.capped);
        assert!(row.fer_lo <= row.fer && row.fer <= row.fer_hi);
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut s = spec();
        s.stop.max_frames = 300;
        let row = run_point(&toy(), &[], &s, 300.0).unwrap();
        assert_eq!((row.frames, row.frame_errors), (300, 0));
        assert!(row.capped);
        assert_eq!(row.avg_iters, 1.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut a = spec();
        a.workers = 1;
        let mut b = spec();
        b.workers = 3;
        let ra = run_point(&toy(), &[], &a, 1.0).unwrap();
        let rb = run_point(&toy(), &[], &b, 1.0).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn config_text() {
        let kv = parse_config_text("# comment\nsnr-db = 3\n\nseed=5 # trailing\n").unwrap();
        assert_eq!(
            kv,
            vec![("snr-db".into(), "3".into()), ("seed".into(), "5".into())]
        );
        let err = parse_config_text("a = 1\nbroken\n").unwrap_err();
        assert!(matches!(err, HarnessError::ConfigSyntax { line: 2, .. }));
    }

    #[test]
    fn failure_cdf_table() {
        let c = FailureCdf {
            values: vec![-1.0, 0.5, 0.5, 2.0],
            frames: 10,
            failures: 1,
        };
        assert_eq!(c.table(), vec![(-1.0, 0.25), (0.5, 0.75), (2.0, 1.0)]);
        assert_eq!(c.cdf_at(0.0), 0.25);
        let empty = dump_failure_cdf(&toy(), &WeightSet::ones(6), 5, 300.0, 3, 100, 1);
        assert!(empty.is_empty());
        assert_eq!(empty.to_csv(), "llr,cdf\n");
    }

    #[test]
    fn flat_profile_for_ones() {
        let p = dump_weight_profile(&WeightSet::ones(3));
        assert_eq!(p, "rank,w_data,w_apost\n0,1,1\n1,1,1\n2,1,1\n");
    }
}

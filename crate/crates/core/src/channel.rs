//! Binary-input AWGN channel under the all-zero codeword assumption.
//!
//! The all-zero codeword maps to the +1 BPSK symbol on every position, so a
//! received sample is `y_n = 1 + z_n` with `z_n ~ N(0, σ²)`. Besides plain
//! channel sampling, this module draws *error-class* words whose error set
//! `{n : y_n ≤ 0}` equals a prescribed variable-node set, by sampling each
//! noise value from the appropriate half of a truncated Gaussian.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

/// Noise level of the channel. `sigma2 = 10^(-snr_db / 10)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub snr_db: f64,
    pub sigma: f64,
    pub sigma2: f64,
}

impl ChannelParams {
    pub fn from_snr_db(snr_db: f64) -> Self {
        let sigma2 = 10f64.powf(-snr_db / 10.0);
        Self {
            snr_db,
            sigma: sigma2.sqrt(),
            sigma2,
        }
    }

    /// Raw bit error probability of the channel, `Q(1/σ)`.
    pub fn error_probability(&self) -> f64 {
        q_function(1.0 / self.sigma)
    }
}

/// Shorthand for [`ChannelParams::from_snr_db`].
pub fn snr_to_sigma(snr_db: f64) -> ChannelParams {
    ChannelParams::from_snr_db(snr_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedWord {
    /// Channel output.
    pub y: Vec<f64>,
    /// Channel LLRs, `2 y_n / σ²`.
    pub llr: Vec<f64>,
}

impl ReceivedWord {
    pub fn from_channel_output(y: Vec<f64>, params: &ChannelParams) -> Self {
        let llr = y.iter().map(|&v| channel_llr(v, params.sigma2)).collect();
        Self { y, llr }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

pub fn channel_llr(y: f64, sigma2: f64) -> f64 {
    2.0 * y / sigma2
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`std_normal_cdf`] for `p` in (0, 1).
pub fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Gaussian tail probability `Q(x) = P(X > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Independent generator for `(master_seed, stream)`. Streams of the same
/// seed never overlap.
pub fn substream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// `n_bits` channel outputs for the all-zero codeword.
pub fn sample_awgn<R: Rng + ?Sized>(
    params: &ChannelParams,
    n_bits: usize,
    rng: &mut R,
) -> ReceivedWord {
    let y = (0..n_bits)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            1.0 + params.sigma * z
        })
        .collect();
    ReceivedWord::from_channel_output(y, params)
}

/// A word whose error set is exactly `error_positions`.
///
/// Noise on `error_positions` follows N(0, σ²) truncated to (−∞, −1), every
/// other position follows N(0, σ²) truncated to (−1, ∞).
pub fn sample_error_class<R: Rng + ?Sized>(
    params: &ChannelParams,
    error_positions: &[usize],
    n_bits: usize,
    rng: &mut R,
) -> ReceivedWord {
    let mut in_error = vec![false; n_bits];
    for &n in error_positions {
        in_error[n] = true;
    }
    let y = in_error
        .iter()
        .map(|&err| {
            let z = if err {
                sample_below(params.sigma, -1.0, rng)
            } else {
                sample_above(params.sigma, -1.0, rng)
            };
            1.0 + z
        })
        .collect();
    ReceivedWord::from_channel_output(y, params)
}

/// Positions with `y_n ≤ 0`, ascending.
pub fn error_set(y: &[f64]) -> Vec<usize> {
    y.iter()
        .enumerate()
        .filter(|(_, &v)| v <= 0.0)
        .map(|(n, _)| n)
        .collect()
}

// Below this tail mass the inverse-CDF route loses precision and the
// exponential rejection sampler takes over.
const MIN_TAIL_MASS: f64 = 1e-200;

/// z ~ N(0, σ²) conditioned on z < bound, strictly.
pub fn sample_below<R: Rng + ?Sized>(sigma: f64, bound: f64, rng: &mut R) -> f64 {
    -sample_above(sigma, -bound, rng)
}

/// z ~ N(0, σ²) conditioned on z > bound, strictly.
pub fn sample_above<R: Rng + ?Sized>(sigma: f64, bound: f64, rng: &mut R) -> f64 {
    let a = bound / sigma;
    let mass = q_function(a);
    loop {
        let x = if mass >= MIN_TAIL_MASS {
            let u: f64 = rng.sample(Open01);
            // P(X > x) = u·Q(a)  ⇔  x = −Φ⁻¹(u·Q(a))
            -std_normal_quantile(u * mass)
        } else {
            exponential_tail(a, rng)
        };
        let z = sigma * x;
        if z > bound && z.is_finite() {
            return z;
        }
    }
}

// Robert (1995) exponential proposal for X ~ N(0,1) | X > a, with a > 0.
fn exponential_tail<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u: f64 = rng.sample(Open01);
        let x = a - u.ln() / lambda;
        let v: f64 = rng.sample(Open01);
        if v.ln() <= -0.5 * (x - lambda) * (x - lambda) {
            return x;
        }
    }
}

/// Metadata written next to a binary word dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpSidecar {
    pub sigma: f64,
    pub snr_db: f64,
    pub class: String,
    pub count: usize,
    pub n: usize,
}

/// Writes the channel outputs as little-endian f32 records (N per word) and
/// a JSON sidecar at `<path>.json`.
pub fn write_word_dump(
    path: &Path,
    words: &[ReceivedWord],
    params: &ChannelParams,
    class: &str,
) -> std::io::Result<()> {
    let n = words.first().map_or(0, ReceivedWord::len);
    let mut out = BufWriter::new(File::create(path)?);
    for w in words {
        for &v in &w.y {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    out.flush()?;
    let sidecar = DumpSidecar {
        sigma: params.sigma,
        snr_db: params.snr_db,
        class: class.to_string(),
        count: words.len(),
        n,
    };
    let mut side_path = path.as_os_str().to_owned();
    side_path.push(".json");
    std::fs::write(side_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

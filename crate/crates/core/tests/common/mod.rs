//! Shared fixtures and independent reference implementations for the
//! integration tests. Nothing here calls into the library's decoding or
//! enumeration code.
#![allow(dead_code)]

use bprnn::tanner::TannerGraph;

pub fn ccsds128() -> TannerGraph {
    TannerGraph::parse_alist(include_str!("../../data/ccsds_128_64.alist")).unwrap()
}

pub fn peg64() -> TannerGraph {
    TannerGraph::parse_alist(include_str!("../../data/peg_64_32.alist")).unwrap()
}

/// Hamming (7,4) in the column order used throughout the tests.
pub fn hamming7() -> TannerGraph {
    TannerGraph::from_dense(&[
        vec![1, 1, 0, 1, 1, 0, 0],
        vec![1, 0, 1, 1, 0, 1, 0],
        vec![0, 1, 1, 1, 0, 0, 1],
    ])
    .unwrap()
}

/// A sparse length-16 code with eight checks.
pub fn small16() -> TannerGraph {
    let rows = [
        "1100100010000001",
        "0110010001000010",
        "0011001000100100",
        "1001000100011000",
        "1000110000100010",
        "0100011000010001",
        "0010001110001000",
        "0001000011100100",
    ];
    let dense: Vec<Vec<u8>> = rows
        .iter()
        .map(|r| r.bytes().map(|b| b - b'0').collect())
        .collect();
    TannerGraph::from_dense(&dense).unwrap()
}

/// Every codeword of a code with at most 20 variables, by exhaustive
/// parity checks on the dense matrix.
pub fn codebook(g: &TannerGraph) -> Vec<Vec<u8>> {
    let n = g.n_vars();
    assert!(n <= 20);
    let h = g.to_dense();
    (0u32..1 << n)
        .map(|x| (0..n).map(|i| ((x >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|c| {
            h.iter()
                .all(|row| row.iter().zip(c).map(|(a, b)| a & b).sum::<u8>() % 2 == 0)
        })
        .collect()
}

pub struct ReferenceOutcome {
    pub hard: Vec<u8>,
    pub llr_final: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Reference sum-product decoder on the dense matrix with per-(check, var)
/// message tables. Same clamps as the library and the natural accumulation
/// order: ascending variable inside a check, ascending check inside a
/// variable.
pub fn reference_bp(h: &[Vec<u8>], llr: &[f64], max_iterations: usize) -> ReferenceOutcome {
    const CLAMP: f64 = 30.0;
    const LIMIT: f64 = 1.0 - 1e-12;
    let m = h.len();
    let n = llr.len();
    let rows: Vec<Vec<usize>> = h
        .iter()
        .map(|r| (0..n).filter(|&j| r[j] == 1).collect())
        .collect();
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..m).filter(|&i| h[i][j] == 1).collect())
        .collect();
    let mut v2c = vec![vec![0.0f64; n]; m];
    let mut c2v = vec![vec![0.0f64; n]; m];
    for (i, row) in rows.iter().enumerate() {
        for &j in row {
            v2c[i][j] = llr[j].clamp(-CLAMP, CLAMP);
        }
    }
    let mut post = vec![0.0; n];
    let mut hard = vec![0u8; n];
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=max_iterations {
        for (i, row) in rows.iter().enumerate() {
            let t: Vec<f64> = row.iter().map(|&j| (0.5 * v2c[i][j]).tanh()).collect();
            for (k, &j) in row.iter().enumerate() {
                let mut p = 1.0;
                for (q, &tq) in t.iter().enumerate() {
                    if q != k {
                        p *= tq;
                    }
                }
                let p = p.clamp(-LIMIT, LIMIT);
                c2v[i][j] = (2.0 * p.abs().atanh()).copysign(p).clamp(-CLAMP, CLAMP);
            }
        }
        for (j, col) in cols.iter().enumerate() {
            for &i in col {
                let mut s = 0.0;
                for &i2 in col {
                    if i2 != i {
                        s += c2v[i2][j];
                    }
                }
                v2c[i][j] = (llr[j] + s).clamp(-CLAMP, CLAMP);
            }
            let mut s = 0.0;
            for &i in col {
                s += c2v[i][j];
            }
            post[j] = llr[j] + s;
            hard[j] = u8::from(post[j] <= 0.0);
        }
        iterations = it;
        converged = rows
            .iter()
            .all(|row| row.iter().map(|&j| hard[j]).sum::<u8>() % 2 == 0);
        if converged {
            break;
        }
    }
    ReferenceOutcome {
        hard,
        llr_final: post,
        iterations,
        converged,
    }
}

/// Absorbing-set test straight from the definition on the dense matrix.
pub fn is_absorbing_dense(h: &[Vec<u8>], set: &[usize]) -> bool {
    if set.is_empty() {
        return false;
    }
    set.iter().all(|&v| {
        let (mut odd, mut even) = (0, 0);
        for row in h {
            if row[v] == 0 {
                continue;
            }
            let d: usize = set.iter().map(|&u| row[u] as usize).sum();
            if d % 2 == 1 {
                odd += 1;
            } else {
                even += 1;
            }
        }
        even > odd
    })
}

/// Connectivity of the induced subgraph by flood fill over shared checks.
pub fn is_connected_dense(h: &[Vec<u8>], set: &[usize]) -> bool {
    let mut seen = vec![false; set.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..set.len() {
            if !seen[b] && h.iter().any(|row| row[set[a]] == 1 && row[set[b]] == 1) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// All `k`-subsets of `0..n` passing `keep`, in lexicographic order.
pub fn subsets_where(
    n: usize,
    k: usize,
    mut keep: impl FnMut(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        if keep(&idx) {
            out.push(idx.clone());
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Outcome of comparing one reverse-mode partial derivative with a central
/// finite difference.
pub struct Probe {
    pub analytic: f64,
    pub numeric: f64,
}

impl Probe {
    pub fn relative_error(&self) -> f64 {
        let scale = self.analytic.abs().max(self.numeric.abs());
        (self.analytic - self.numeric).abs() / scale
    }
}

/// Draws random (weights, word, edge) probes on `g` and returns the first
/// `count` whose unrolled forward pass stays clear of every clamp and whose
/// derivative is not negligible.
pub fn gradient_probes(g: &TannerGraph, count: usize, i_train: usize, seed: u64) -> Vec<Probe> {
    use bprnn::bp::WeightSet;
    use bprnn::channel::{sample_awgn, substream, ChannelParams};
    use bprnn::training::{forward_unrolled, loss, loss_and_gradient, Trace};
    use rand::Rng;

    let clear = |t: &Trace| {
        t.alphas.iter().flatten().all(|a| a.abs() < 29.0)
            && t.betas.iter().flatten().all(|b| b.abs() < 28.0)
    };
    let params = ChannelParams::from_snr_db(1.0);
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(count);
    let mut attempt = 0u64;
    while out.len() < count {
        attempt += 1;
        assert!(attempt < 100 * count as u64, "too few clamp-free probes");
        let mut w = WeightSet::ones(g.n_edges());
        for x in w.w_data.iter_mut().chain(w.w_apost.iter_mut()) {
            *x = rng.random_range(0.6..1.2);
        }
        let llr = sample_awgn(&params, g.n_vars(), &mut substream(seed, attempt)).llr;
        if !clear(&forward_unrolled(g, &w, &llr, i_train)) {
            continue;
        }
        let (_, grad) = loss_and_gradient(g, &w, &llr, i_train);
        let e = rng.random_range(0..g.n_edges());
        let apost = rng.random_bool(0.5);
        let analytic = if apost {
            grad.w_apost[e]
        } else {
            grad.w_data[e]
        };
        let h = 1e-5;
        let eval = |delta: f64| {
            let mut w2 = w.clone();
            if apost {
                w2.w_apost[e] += delta;
            } else {
                w2.w_data[e] += delta;
            }
            loss(&forward_unrolled(g, &w2, &llr, i_train).llr_final)
        };
        let numeric = (eval(h) - eval(-h)) / (2.0 * h);
        if analytic.abs().max(numeric.abs()) < 1e-6 {
            continue;
        }
        out.push(Probe { analytic, numeric });
    }
    out
}

//! Ordered statistics decoding.
//!
//! Positions are ranked by reliability `|llr|`. Gaussian elimination over
//! GF(2) pivots on the least reliable columns first, so the remaining `K`
//! columns form the most-reliable basis (MRB). Candidates flip up to `w`
//! hard-decided MRB bits, re-encode the parity positions, and are ranked by
//! the correlation score `Σ_{n : c_n = 1} y_n` (lower is more likely).

use thiserror::Error;

use crate::diversity::{ml_score, ml_select};
use crate::tanner::TannerGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OsdError {
    #[error("parity-check matrix has no non-zero entry")]
    ZeroMatrix,
    #[error("permutation has length {found}, expected {expected}")]
    BadPermutation { expected: usize, found: usize },
}

/// Positions ordered by `|llr|` descending, ties by lower index.
pub fn sort_reliability(llr: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..llr.len()).collect();
    order.sort_by(|&a, &b| llr[b].abs().total_cmp(&llr[a].abs()).then(a.cmp(&b)));
    order
}

type Row = Vec<u64>;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
fn get(row: &[u64], i: usize) -> bool {
    (row[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
fn flip(row: &mut [u64], i: usize) {
    row[i / 64] ^= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Parity-check matrix reduced to `[A | I]` over a reliability order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Systematized {
    n: usize,
    /// Column order after swaps: `perm[..k]` is the MRB, most reliable
    /// first; `perm[k + i]` is the pivot column of row `i`.
    pub perm: Vec<usize>,
    pub rank: usize,
    pub k: usize,
    // reduced rows over original column indices, one per pivot
    rows: Vec<Row>,
    // codeword contribution of each MRB position, over original columns
    generators: Vec<Row>,
}

impl Systematized {
    /// Eliminates `g` with pivots chosen from the end of `perm` (least
    /// reliable) backwards. A column that is dependent on the pivots
    /// already chosen joins the MRB instead, which pulls the next less
    /// reliable unused column into the parity set. Dependent rows are
    /// dropped.
    pub fn new(g: &TannerGraph, perm: &[usize]) -> Result<Self, OsdError> {
        let n = g.n_vars();
        if perm.len() != n {
            return Err(OsdError::BadPermutation {
                expected: n,
                found: perm.len(),
            });
        }
        if g.n_edges() == 0 {
            return Err(OsdError::ZeroMatrix);
        }
        let w = words(n);
        let mut rows: Vec<Row> = (0..g.n_checks())
            .map(|m| {
                let mut r = vec![0u64; w];
                for &v in g.check_neighbors(m) {
                    flip(&mut r, v);
                }
                r
            })
            .collect();

        let mut next_row = 0;
        let mut pivots: Vec<usize> = Vec::new();
        let mut mrb_rev: Vec<usize> = Vec::new();
        for &col in perm.iter().rev() {
            if next_row == rows.len() {
                mrb_rev.push(col);
                continue;
            }
            let Some(p) = (next_row..rows.len()).find(|&r| get(&rows[r], col)) else {
                mrb_rev.push(col);
                continue;
            };
            rows.swap(next_row, p);
            let pivot = rows[next_row].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next_row && get(row, col) {
                    xor_into(row, &pivot);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        rows.truncate(next_row);
        let rank = next_row;
        let k = n - rank;

        let mut new_perm: Vec<usize> = mrb_rev.into_iter().rev().collect();
        new_perm.extend_from_slice(&pivots);

        let generators = new_perm[..k]
            .iter()
            .map(|&j| {
                let mut gen = vec![0u64; w];
                flip(&mut gen, j);
                for (row, &pc) in rows.iter().zip(&pivots) {
                    if get(row, j) {
                        flip(&mut gen, pc);
                    }
                }
                gen
            })
            .collect();

        Ok(Self {
            n,
            perm: new_perm,
            rank,
            k,
            rows,
            generators,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `[A | I]` as dense rows over the column order `perm`.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|r| self.perm.iter().map(|&c| u8::from(get(r, c))).collect())
            .collect()
    }

    /// Codeword whose MRB positions (in `perm[..k]` order) carry `mrb`.
    pub fn reencode(&self, mrb: &[u8]) -> Vec<u8> {
        assert_eq!(mrb.len(), self.k);
        let mut cw = vec![0u64; words(self.n)];
        for (gen, &b) in self.generators.iter().zip(mrb) {
            if b & 1 == 1 {
                xor_into(&mut cw, gen);
            }
        }
        unpack(&cw, self.n)
    }
}

fn unpack(bits: &[u64], n: usize) -> Vec<u8> {
    (0..n).map(|i| u8::from(get(bits, i))).collect()
}

/// Best candidate of one OSD run.
#[derive(Debug, Clone, PartialEq)]
pub struct OsdCandidate {
    pub codeword: Vec<u8>,
    /// Flipped MRB positions, as original variable indices.
    pub flips: Vec<usize>,
    pub score: f64,
}

/// Number of candidates examined by OSD of order `w` with `k` MRB bits.
pub fn candidate_count(k: usize, w: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for i in 0..=w.min(k) {
        total += c;
        c = c * (k - i) as u128 / (i + 1) as u128;
    }
    total
}

/// OSD of order `w`: reliabilities from `llr`, scores from the channel
/// output `y`. Ties keep the candidate with fewer flips, then the
/// lexicographically first flip set.
pub fn osd(g: &TannerGraph, llr: &[f64], y: &[f64], w: usize) -> Result<OsdCandidate, OsdError> {
    let sys = Systematized::new(g, &sort_reliability(llr))?;
    Ok(osd_with(&sys, llr, y, w))
}

/// [`osd`] with a precomputed systematization.
pub fn osd_with(sys: &Systematized, llr: &[f64], y: &[f64], w: usize) -> OsdCandidate {
    let n = sys.n;
    let nw = words(n);
    let k = sys.k;
    let mut base = vec![0u64; nw];
    for (j, gen) in sys.generators.iter().enumerate() {
        if llr[sys.perm[j]] <= 0.0 {
            xor_into(&mut base, gen);
        }
    }
    let score_of = |bits: &[u64]| -> f64 {
        let mut s = 0.0;
        for (i, &yi) in y.iter().enumerate().take(n) {
            if get(bits, i) {
                s += yi;
            }
        }
        s
    };

    let mut best_bits = base.clone();
    let mut best_flips: Vec<usize> = Vec::new();
    let mut best_score = score_of(&base);

    let mut cand = vec![0u64; nw];
    for size in 1..=w.min(k) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            cand.copy_from_slice(&base);
            for &j in &idx {
                xor_into(&mut cand, &sys.generators[j]);
            }
            let s = score_of(&cand);
            if s < best_score {
                best_score = s;
                best_bits.copy_from_slice(&cand);
                best_flips = idx.clone();
            }
            let mut i = size;
            while i > 0 && idx[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for t in i..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }

    OsdCandidate {
        codeword: unpack(&best_bits, n),
        flips: best_flips.iter().map(|&j| sys.perm[j]).collect(),
        score: best_score,
    }
}

/// One OSD per soft output, then the most likely of the winners. Returns
/// the chosen candidate and the index of the soft output it came from.
pub fn postprocess(
    g: &TannerGraph,
    soft_outputs: &[Vec<f64>],
    y: &[f64],
    w: usize,
) -> Result<(OsdCandidate, usize), OsdError> {
    assert!(!soft_outputs.is_empty());
    let winners = soft_outputs
        .iter()
        .map(|llr| osd(g, llr, y, w))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&[u8]> = winners.iter().map(|c| c.codeword.as_slice()).collect();
    let pick = ml_select(&refs, y);
    debug_assert_eq!(ml_score(&winners[pick].codeword, y), winners[pick].score);
    Ok((winners.into_iter().nth(pick).unwrap(), pick))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TannerGraph {
        TannerGraph::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 1]]).unwrap()
    }

    #[test]
    fn reliability_order() {
        assert_eq!(sort_reliability(&[3.0, -5.0, 1.0]), vec![1, 0, 2]);
        assert_eq!(sort_reliability(&[2.0, -2.0, 2.0]), vec![0, 1, 2]);
    }

    #[test]
    fn toy_systematic_form() {
        // pivots on columns 3 then 2; row ops: r0 = [1101], r1 = [0111]
        // col 3: pivot r0, r1 ^= r0 → [1010]; col 2: pivot r1, r0 unchanged
        let sys = Systematized::new(&toy(), &[0, 1, 2, 3]).unwrap();
        assert_eq!((sys.rank, sys.k), (2, 2));
        assert_eq!(sys.perm, vec![0, 1, 3, 2]);
        assert_eq!(sys.to_dense(), vec![vec![1, 1, 1, 0], vec![1, 0, 0, 1]]);
    }

    #[test]
    fn dependent_column_is_swapped() {
        // columns 2 and 3 are equal, so only one of them can be a pivot
        let g = TannerGraph::from_dense(&[vec![1, 0, 1, 1], vec![0, 1, 1, 1]]).unwrap();
        let sys = Systematized::new(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(sys.rank, 2);
        assert_eq!(sys.perm, vec![0, 2, 3, 1]);
        for row in sys.to_dense() {
            assert_eq!(row.len(), 4);
        }
    }

    #[test]
    fn rank_deficient_rows_are_dropped() {
        let g = TannerGraph::from_dense(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        let sys = Systematized::new(&g, &[0, 1, 2]).unwrap();
        assert_eq!((sys.rank, sys.k), (2, 1));
        assert_eq!(sys.reencode(&[1]), vec![1, 1, 1]);
    }

    #[test]
    fn reencode_gives_codewords() {
        let g = toy();
        let sys = Systematized::new(&g, &[2, 0, 3, 1]).unwrap();
        for a in 0..2u8 {
            for b in 0..2u8 {
                assert!(g.is_codeword(&sys.reencode(&[a, b])));
            }
        }
        assert_eq!(sys.reencode(&[0, 0]), vec![0; 4]);
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_count(64, 0), 1);
        assert_eq!(candidate_count(64, 1), 65);
        assert_eq!(candidate_count(64, 2), 2081);
        assert_eq!(candidate_count(3, 5), 8);
    }

    #[test]
    fn noiseless_osd_returns_zero() {
        let g = toy();
        let y = [1.0; 4];
        let c = osd(&g, &y, &y, 2).unwrap();
        assert_eq!(c.codeword, vec![0; 4]);
        assert_eq!(c.score, 0.0);
        assert!(c.flips.is_empty());
    }

    #[test]
    fn identical_soft_outputs_match_single_osd() {
        let g = toy();
        let y = [0.3, -0.2, -0.9, 0.5];
        let single = osd(&g, &y, &y, 1).unwrap();
        let (multi, idx) = postprocess(&g, &[y.to_vec(), y.to_vec(), y.to_vec()], &y, 1).unwrap();
        assert_eq!(single, multi);
        assert_eq!(idx, 0);
    }
}

mod common;

use bprnn::channel::{sample_awgn, substream, ChannelParams};
use bprnn::diversity::ml_score;
use bprnn::osd::{candidate_count, osd, sort_reliability, Systematized};
use bprnn::tanner::TannerGraph;
use proptest::prelude::*;

fn ml_oracle(book: &[Vec<u8>], y: &[f64]) -> f64 {
    book.iter()
        .map(|c| {
            c.iter()
                .zip(y)
                .filter(|(&b, _)| b == 1)
                .map(|(_, &v)| v)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn dimension_matches_codebook() {
    for g in [common::hamming7(), common::small16(), common::peg64()] {
        let sys = Systematized::new(&g, &(0..g.n_vars()).collect::<Vec<_>>()).unwrap();
        assert_eq!(sys.rank + sys.k, g.n_vars());
        if g.n_vars() <= 16 {
            assert_eq!(common::codebook(&g).len(), 1 << sys.k);
        }
    }
}

#[test]
fn full_order_osd_is_maximum_likelihood() {
    for (g, snr) in [(common::hamming7(), 1.0), (common::small16(), 2.0)] {
        let book = common::codebook(&g);
        let k = book.len().trailing_zeros() as usize;
        let p = ChannelParams::from_snr_db(snr);
        for frame in 0..2000 {
            let w = sample_awgn(&p, g.n_vars(), &mut substream(31, frame));
            let c = osd(&g, &w.llr, &w.y, k).unwrap();
            assert!(g.is_codeword(&c.codeword));
            assert_eq!(c.score, ml_oracle(&book, &w.y), "frame {frame}");
            assert_eq!(c.score, ml_score(&c.codeword, &w.y));
        }
    }
}

#[test]
fn candidate_counts() {
    assert_eq!(candidate_count(64, 1), 65);
    assert_eq!(candidate_count(64, 2), 2081);
    assert_eq!(candidate_count(8, 8), 256);
    assert_eq!(candidate_count(5, 9), 32);
}

fn arb_word(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.5f64..2.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn osd_outputs_codewords_and_improves_with_order(y in arb_word(64)) {
        let g = common::peg64();
        let llr: Vec<f64> = y.iter().map(|v| 2.0 * v / 0.5).collect();
        let mut last = f64::INFINITY;
        for w in 0..3 {
            let c = osd(&g, &llr, &y, w).unwrap();
            prop_assert!(g.is_codeword(&c.codeword));
            prop_assert!(c.score <= last);
            prop_assert!(c.flips.len() <= w);
            last = c.score;
        }
    }

    #[test]
    fn systematization_spans_the_code(y in arb_word(16), mrb in proptest::collection::vec(0u8..2, 8)) {
        let g: TannerGraph = common::small16();
        let sys = Systematized::new(&g, &sort_reliability(&y)).unwrap();
        let c = sys.reencode(&mrb[..sys.k]);
        prop_assert!(g.is_codeword(&c));
        // the MRB positions carry the information bits verbatim
        for (j, &bit) in mrb[..sys.k].iter().enumerate() {
            prop_assert_eq!(c[sys.perm[j]], bit);
        }
    }
}

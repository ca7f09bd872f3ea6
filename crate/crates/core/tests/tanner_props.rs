use bprnn::tanner::{AlistError, TannerGraph};
use proptest::prelude::*;

/// Random sparse graph given as per-variable check lists.
fn arb_graph(max_vars: usize, max_checks: usize) -> impl Strategy<Value = TannerGraph> {
    (2..=max_vars, 2..=max_checks).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::btree_set(0..m, 1..=m.min(3)), n).prop_map(
            move |cols| {
                let cols = cols.into_iter().map(|s| s.into_iter().collect()).collect();
                TannerGraph::from_var_neighbors(m, cols).unwrap()
            },
        )
    })
}

// Shortest cycle length and count by enumerating simple cycles.
fn girth_oracle(g: &TannerGraph) -> Option<(usize, u64)> {
    let nv = g.n_vars();
    let total = nv + g.n_checks();
    let adj: Vec<Vec<usize>> = (0..total)
        .map(|u| {
            if u < nv {
                g.var_neighbors(u).iter().map(|&m| m + nv).collect()
            } else {
                g.check_neighbors(u - nv).to_vec()
            }
        })
        .collect();
    let mut counts = std::collections::BTreeMap::<usize, u64>::new();
    // cycles rooted at their smallest node, each found once per direction
    fn walk(
        adj: &[Vec<usize>],
        start: usize,
        u: usize,
        on_path: &mut Vec<bool>,
        len: usize,
        counts: &mut std::collections::BTreeMap<usize, u64>,
    ) {
        for &w in &adj[u] {
            if w == start && len >= 3 {
                *counts.entry(len + 1).or_insert(0) += 1;
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                walk(adj, start, w, on_path, len + 1, counts);
                on_path[w] = false;
            }
        }
    }
    for s in 0..total {
        let mut on_path = vec![false; total];
        on_path[s] = true;
        walk(&adj, s, s, &mut on_path, 0, &mut counts);
    }
    counts.into_iter().next().map(|(len, c)| (len, c / 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn alist_round_trip(g in arb_graph(12, 8)) {
        let back = TannerGraph::parse_alist(&g.to_alist()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn edge_index_is_a_bijection(g in arb_graph(12, 8)) {
        for e in 0..g.n_edges() {
            prop_assert_eq!(g.edge_index(g.edge_var(e), g.edge_check(e)), Some(e));
        }
        for n in 0..g.n_vars() {
            for m in 0..g.n_checks() {
                let listed = g.var_neighbors(n).contains(&m);
                prop_assert_eq!(listed, g.check_neighbors(m).contains(&n));
                prop_assert_eq!(listed, g.edge_index(n, m).is_some());
            }
        }
        // canonical order: variable, then check
        for e in 1..g.n_edges() {
            prop_assert!((g.edge_var(e - 1), g.edge_check(e - 1)) < (g.edge_var(e), g.edge_check(e)));
        }
    }

    #[test]
    fn syndrome_is_linear(g in arb_graph(12, 8), a in any::<u64>(), b in any::<u64>()) {
        let n = g.n_vars();
        let x: Vec<u8> = (0..n).map(|i| ((a >> i) & 1) as u8).collect();
        let y: Vec<u8> = (0..n).map(|i| ((b >> i) & 1) as u8).collect();
        let xy: Vec<u8> = x.iter().zip(&y).map(|(p, q)| p ^ q).collect();
        let sx = g.syndrome(&x).unwrap().bits;
        let sy = g.syndrome(&y).unwrap().bits;
        let sxy = g.syndrome(&xy).unwrap().bits;
        let sum: Vec<u8> = sx.iter().zip(&sy).map(|(p, q)| p ^ q).collect();
        prop_assert_eq!(sxy, sum);
    }

    #[test]
    fn girth_matches_cycle_enumeration(g in arb_graph(7, 5)) {
        prop_assert_eq!(g.girth_and_multiplicity(), girth_oracle(&g));
    }
}

#[test]
fn shipped_codes_parse_and_have_girth_six() {
    let ccsds = TannerGraph::parse_alist(include_str!("../data/ccsds_128_64.alist")).unwrap();
    assert_eq!(
        (ccsds.n_vars(), ccsds.n_checks(), ccsds.n_edges()),
        (128, 64, 512)
    );
    assert_eq!(ccsds.girth_and_multiplicity(), Some((6, 2336)));
    let peg = TannerGraph::parse_alist(include_str!("../data/peg_64_32.alist")).unwrap();
    assert_eq!((peg.n_vars(), peg.n_checks(), peg.n_edges()), (64, 32, 192));
    assert_eq!(peg.girth_and_multiplicity().unwrap().0, 6);
    assert_eq!(peg.count_weights(), 384);
}

#[test]
fn malformed_alist_reports_line() {
    let err = TannerGraph::parse_alist("2 1\n2 2\n1 1\n2\n1\n3\n1 2\n").unwrap_err();
    assert!(
        matches!(err, AlistError::IndexOutOfRange { line: 6, .. }),
        "{err:?}"
    );
    let err = TannerGraph::parse_alist("2 1\n").unwrap_err();
    assert!(matches!(err, AlistError::Truncated { .. }), "{err:?}");
}

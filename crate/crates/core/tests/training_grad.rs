mod common;

use bprnn::absorbing::{enumerate_all, EnumerateOptions};
use bprnn::bp::WeightSet;
use bprnn::channel::{substream, ChannelParams};
use bprnn::tanner::TannerGraph;
use bprnn::training::{
    draw_training_word, loss_and_gradient, mean_loss, train, TrainConfig, TrainingClass,
};

#[test]
fn reverse_mode_matches_finite_differences() {
    let g = common::peg64();
    let probes = common::gradient_probes(&g, 40, 5, 21);
    let worst = probes
        .iter()
        .map(common::Probe::relative_error)
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

#[test]
fn gradient_is_equivariant_under_variable_relabeling() {
    let g = common::peg64();
    let n = g.n_vars();
    // reverse the variable order
    let pi = |v: usize| n - 1 - v;
    let cols: Vec<Vec<usize>> = (0..n).map(|v| g.var_neighbors(pi(v)).to_vec()).collect();
    let h = TannerGraph::from_var_neighbors(g.n_checks(), cols).unwrap();
    let mut w = WeightSet::ones(g.n_edges());
    for e in 0..g.n_edges() {
        w.w_data[e] = 0.8 + 0.001 * e as f64;
        w.w_apost[e] = 1.1 - 0.0005 * e as f64;
    }
    let mut wh = WeightSet::ones(h.n_edges());
    for e in 0..g.n_edges() {
        let f = h.edge_index(pi(g.edge_var(e)), g.edge_check(e)).unwrap();
        wh.w_data[f] = w.w_data[e];
        wh.w_apost[f] = w.w_apost[e];
    }
    let p = ChannelParams::from_snr_db(2.0);
    let llr = bprnn::channel::sample_awgn(&p, n, &mut substream(5, 0)).llr;
    let llr_h: Vec<f64> = (0..n).map(|v| llr[pi(v)]).collect();
    let (lg, gg) = loss_and_gradient(&g, &w, &llr, 6);
    let (lh, gh) = loss_and_gradient(&h, &wh, &llr_h, 6);
    assert!((lg - lh).abs() < 1e-12);
    for e in 0..g.n_edges() {
        let f = h.edge_index(pi(g.edge_var(e)), g.edge_check(e)).unwrap();
        assert!((gg.w_data[e] - gh.w_data[f]).abs() < 1e-10);
        assert!((gg.w_apost[e] - gh.w_apost[f]).abs() < 1e-10);
    }
}

fn small_class_config() -> (
    TannerGraph,
    TrainConfig,
    Vec<bprnn::absorbing::AbsorbingSet>,
) {
    let g = common::peg64();
    let c = enumerate_all(&g, 4, &EnumerateOptions::default());
    let (et, entry) = c.trainable().max_by_key(|(_, e)| e.count).unwrap();
    let cfg = TrainConfig {
        i_train: 5,
        batch_size: 64,
        n_batches: 40,
        epochs: 1,
        learning_rate: 1e-2,
        class: TrainingClass::Specialized(et.to_string()),
        ..Default::default()
    };
    (g, cfg, entry.sets())
}

#[test]
fn training_lowers_held_out_loss() {
    let (g, cfg, sets) = small_class_config();
    let (w, report) = train(&g, &cfg, &sets, 3).unwrap();
    assert_eq!(report.history.len(), 40);
    let p = ChannelParams::from_snr_db(cfg.snr_db);
    let held_out: Vec<Vec<f64>> = (0..256)
        .map(|i| draw_training_word(&p, &sets, g.n_vars(), &mut substream(1234, i)))
        .collect();
    let before = mean_loss(&g, &WeightSet::ones(g.n_edges()), &held_out, cfg.i_train);
    let after = mean_loss(&g, &w, &held_out, cfg.i_train);
    assert!(after < before, "{after} !< {before}");
}

#[test]
fn trained_weights_do_not_depend_on_thread_count() {
    let (g, mut cfg, sets) = small_class_config();
    cfg.n_batches = 3;
    cfg.batch_size = 200;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train(&g, &cfg, &sets, 8).unwrap().0)
    };
    assert_eq!(run(1), run(3));
}

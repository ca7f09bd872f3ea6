//! Command-line front end.
//!
//! Every subcommand also accepts `--config FILE`, a text file of
//! `key = value` lines. Each line becomes `--key value` (or just `--key`
//! for `true`), placed before the flags given on the command line so the
//! latter win.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bprnn::absorbing::{self, Coverage, EnumerateOptions, ExtendedType, Layering};
use bprnn::bp::WeightSet;
use bprnn::diversity::{self, DecoderPool, ManifestEntry};
use bprnn::harness::{
    self, DecoderKind, ExperimentConfig, OsdMode, PipelineConfig, SimSpec, StopRule,
};
use bprnn::tanner::{TannerGraph, SUMMARY_CSV_HEADER};
use bprnn::training::{self, TrainConfig, TrainingClass};

#[derive(Parser, Debug)]
#[command(
    name = "bprnn",
    version,
    about = "BP-RNN decoding workbench for short LDPC codes"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print size, girth and girth multiplicity of a code.
    GraphInfo(GraphInfoArgs),
    /// Enumerate and classify absorbing sets of one size.
    AsEnum(AsEnumArgs),
    /// Train one decoder on an error class or on plain channel noise.
    Train(TrainArgs),
    /// Order a decoder pool by complementarity of failures.
    Select(SelectArgs),
    /// Monte Carlo FER simulation over an SNR grid.
    Simulate(SimulateArgs),
    /// Write the sorted weight vectors of a weight file.
    DumpProfile(DumpProfileArgs),
    /// Write the CDF of a-posteriori LLRs over failed frames.
    DumpCdf(DumpCdfArgs),
    /// Enumerate classes, train one decoder per class and select a pool.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct GraphInfoArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Print a CSV header and row instead of text.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct AsEnumArgs {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long)]
    nu: usize,
    /// Write every retained set as `ET: n1 n2 ...` (1-based).
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Summary CSV path; printed to stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Compare against exhaustive subset enumeration.
    #[arg(long)]
    brute_force_verify: bool,
    /// Keep at most this many sets per class (0 keeps all).
    #[arg(long, default_value_t = 4096)]
    sample_limit: usize,
    /// Expansion rule: `induced` or `graph-bfs`.
    #[arg(long, default_value = "induced")]
    layering: String,
    /// Also count unions of check-disjoint smaller sets.
    #[arg(long)]
    include_disconnected: bool,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TrainArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Extended type such as `4-(4,6,(4,6))`, or `unspecialized`.
    #[arg(long)]
    class: String,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 10)]
    i_train: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 8192)]
    batch_size: usize,
    #[arg(long, default_value_t = 64)]
    n_batches: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV; defaults to `<out>.loss.csv`.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SelectArgs {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    test_words: usize,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 25)]
    i_test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[arg(long)]
    alist: PathBuf,
    /// bp, bprnn-single, diversity-parallel or diversity-serial.
    #[arg(long, default_value = "bp")]
    decoder: String,
    /// Weight file for bprnn-single.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Pool manifest for the diversity decoders.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Order file written by `select`; the manifest order is used otherwise.
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    z: usize,
    /// Comma-separated SNR points in dB.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 25)]
    i_test: usize,
    /// off, postprocess or periodic-N.
    #[arg(long, default_value = "off")]
    osd_mode: String,
    #[arg(long, default_value_t = 1)]
    osd_order: usize,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct DumpProfileArgs {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct DumpCdfArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Weight file; plain BP when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1000)]
    failures: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 25)]
    i_test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct PipelineArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Absorbing-set sizes used as training classes.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    nu: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    max_classes: usize,
    #[arg(long, default_value_t = 4096)]
    sets_per_class: usize,
    /// SNR points to train for, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    snr_db: Vec<f64>,
    /// Train once at the selection SNR and reuse the weights everywhere.
    #[arg(long)]
    reuse_weights: bool,
    #[arg(long, default_value_t = 10)]
    i_train: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 8192)]
    batch_size: usize,
    #[arg(long, default_value_t = 64)]
    n_batches: usize,
    #[arg(long, default_value_t = 1_000_000)]
    test_words: usize,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    select_snr_db: f64,
    #[arg(long, default_value_t = 10)]
    z: usize,
    #[arg(long, default_value_t = 25)]
    i_test: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for weights, manifests and the order file.
    #[arg(long)]
    out_dir: PathBuf,
}

fn load_graph(path: &Path) -> Result<TannerGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TannerGraph::parse_alist(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn graph_info(a: GraphInfoArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    if a.csv {
        println!("{SUMMARY_CSV_HEADER}");
        println!("{}", g.summary_csv_row());
        return Ok(());
    }
    println!(
        "N = {}, M = {}, E = {}",
        g.n_vars(),
        g.n_checks(),
        g.n_edges()
    );
    match g.girth_and_multiplicity() {
        Some((girth, mult)) => println!("girth = {girth}, cycles of that length = {mult}"),
        None => println!("graph is acyclic"),
    }
    Ok(())
}

fn as_enum(a: AsEnumArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    ensure!(
        a.nu >= 1 && a.nu <= g.n_vars(),
        "--nu must be in 1..={}",
        g.n_vars()
    );
    let layering = match a.layering.as_str() {
        "induced" => Layering::Induced,
        "graph-bfs" => Layering::GraphBfs,
        other => bail!("unknown layering {other:?}"),
    };
    let opts = EnumerateOptions {
        layering,
        coverage: if a.include_disconnected {
            Coverage::All
        } else {
            Coverage::Connected
        },
        sample_limit: (a.sample_limit > 0).then_some(a.sample_limit),
    };
    let start = std::time::Instant::now();
    let c = absorbing::enumerate_all(&g, a.nu, &opts);
    eprintln!(
        "nu = {}: {} extended types, {} absorbing sets ({} codeword supports) in {:.2?}",
        a.nu,
        c.n_types(),
        c.total(),
        c.codeword_supports(),
        start.elapsed()
    );
    match &a.summary {
        Some(p) => write_file(p, &c.summary_csv())?,
        None => print!("{}", c.summary_csv()),
    }
    if let Some(p) = &a.dump {
        let mut f = std::io::BufWriter::new(fs::File::create(p)?);
        c.write_dump(&mut f)?;
        f.flush()?;
        if opts.sample_limit.is_some() && c.classes.values().any(|e| !e.is_complete()) {
            eprintln!("note: dump holds a sample of each class; use --sample-limit 0 for all sets");
        }
    }
    if a.brute_force_verify {
        let full = EnumerateOptions {
            sample_limit: None,
            ..opts
        };
        let mut got = absorbing::enumerate_all(&g, a.nu, &full).all_sets();
        let mut want = absorbing::brute_force(&g, a.nu);
        if opts.coverage == Coverage::Connected {
            want.retain(|s| absorbing::is_connected(&g, &s.members));
        }
        got.sort();
        want.sort();
        ensure!(
            got == want,
            "brute-force mismatch: search found {}, exhaustive check found {}",
            got.len(),
            want.len()
        );
        eprintln!("brute-force verification passed ({} sets)", want.len());
    }
    Ok(())
}

fn class_sets(
    g: &TannerGraph,
    class: &str,
) -> Result<(TrainingClass, Vec<absorbing::AbsorbingSet>)> {
    if class == "unspecialized" {
        return Ok((TrainingClass::Unspecialized, Vec::new()));
    }
    let et: ExtendedType = class.parse()?;
    let c = absorbing::enumerate_all(g, et.nu, &EnumerateOptions::default());
    let sets = c.classes.get(&et).map(|e| e.sets()).unwrap_or_default();
    ensure!(
        !sets.is_empty(),
        "no absorbing set of type {et} in this code"
    );
    if et.is_codeword_support() {
        eprintln!("warning: {et} is a codeword support class");
    }
    Ok((TrainingClass::Specialized(et.to_string()), sets))
}

fn train(a: TrainArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    let (class, sets) = class_sets(&g, &a.class)?;
    let cfg = TrainConfig {
        i_train: a.i_train,
        snr_db: a.snr_db,
        batch_size: a.batch_size,
        n_batches: a.n_batches,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        class,
        ..TrainConfig::default()
    };
    let (weights, report) = training::train(&g, &cfg, &sets, a.seed)?;
    weights.save(&g, &a.out)?;
    let loss_path = a
        .loss_csv
        .unwrap_or_else(|| with_suffix(&a.out, ".loss.csv"));
    write_file(&loss_path, &report.to_csv())?;
    eprintln!(
        "trained on {} sets, final batch loss {:.6}",
        sets.len(),
        report.final_loss
    );
    Ok(())
}

fn select(a: SelectArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    let pool = DecoderPool::load_manifest(&a.pool, &g, a.i_test)?;
    ensure!(!pool.is_empty(), "pool manifest is empty");
    let order = harness::select_pool_order(&g, &pool, a.test_words, a.snr_db, a.seed);
    let ids: Vec<&str> = order
        .iter()
        .map(|&i| pool.decoders[i].id.as_str())
        .collect();
    let out = json!({
        "order": ids,
        "snr_db": a.snr_db,
        "test_words": a.test_words,
        "seed": a.seed,
    });
    write_file(&a.out, &serde_json::to_string_pretty(&out)?)?;
    println!("{}", ids.join(" "));
    Ok(())
}

fn read_order(path: &Path, pool: &DecoderPool) -> Result<Vec<usize>> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let ids = v["order"]
        .as_array()
        .context("order file has no \"order\" list")?;
    ids.iter()
        .map(|id| {
            let id = id.as_str().context("order entries must be strings")?;
            pool.decoders
                .iter()
                .position(|d| d.id == id)
                .with_context(|| format!("decoder {id:?} not in pool"))
        })
        .collect()
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    let kind: DecoderKind = a.decoder.parse()?;
    let osd_mode: OsdMode = a.osd_mode.parse()?;
    let weights: Vec<WeightSet> = match kind {
        DecoderKind::Bp => Vec::new(),
        DecoderKind::BprnnSingle => {
            let p = a.weights.as_ref().context("bprnn-single needs --weights")?;
            vec![WeightSet::load(&g, p)?]
        }
        DecoderKind::DiversityParallel | DecoderKind::DiversitySerial => {
            let p = a.pool.as_ref().context("diversity decoders need --pool")?;
            let pool = DecoderPool::load_manifest(p, &g, a.i_test)?;
            let order = match &a.order {
                Some(o) => read_order(o, &pool)?,
                None => (0..pool.len()).collect(),
            };
            let z = a.z.min(order.len());
            diversity::take_diversity(&pool, &order, z)?
                .decoders
                .into_iter()
                .map(|d| d.weights)
                .collect()
        }
    };
    let cfg = ExperimentConfig {
        alist: a.alist.clone(),
        sim: SimSpec {
            decoder: kind,
            i_test: a.i_test,
            osd_mode,
            osd_order: a.osd_order,
            stop: StopRule {
                min_errors: a.min_errors,
                max_frames: a.max_frames,
            },
            seed: a.seed,
            workers: a.workers,
        },
        snr_db: a.snr_db.clone(),
    };
    let rows = harness::run_sweep(&g, &cfg, |_| Ok(weights.clone()))?;
    write_file(&a.out, &harness::results_csv(&rows))?;

    let mut log = format!("{cfg:#?}\n");
    for r in &rows {
        log.push_str(&format!(
            "snr {} dB: {} errors / {} frames, FER {:.3e} [{:.3e}, {:.3e}]{}\n",
            r.snr_db,
            r.frame_errors,
            r.frames,
            r.fer,
            r.fer_lo,
            r.fer_hi,
            if r.capped { " (frame cap reached)" } else { "" }
        ));
    }
    write_file(&with_suffix(&a.out, ".log"), &log)?;
    eprint!("{log}");
    Ok(())
}

fn dump_profile(a: DumpProfileArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    let w = WeightSet::load(&g, &a.weights)?;
    write_file(&a.out, &harness::dump_weight_profile(&w))
}

fn dump_cdf(a: DumpCdfArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    let w = match &a.weights {
        Some(p) => WeightSet::load(&g, p)?,
        None => WeightSet::ones(g.n_edges()),
    };
    let cdf =
        harness::dump_failure_cdf(&g, &w, a.i_test, a.snr_db, a.failures, a.max_frames, a.seed);
    if cdf.is_empty() {
        eprintln!(
            "warning: no failed frame in {} frames; table is empty",
            cdf.frames
        );
    } else {
        eprintln!("{} failures in {} frames", cdf.failures, cdf.frames);
    }
    write_file(&a.out, &cdf.to_csv())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let g = load_graph(&a.alist)?;
    fs::create_dir_all(&a.out_dir)?;
    let cfg = PipelineConfig {
        nu: a.nu.clone(),
        max_classes: a.max_classes,
        sets_per_class: a.sets_per_class,
        train: TrainConfig {
            i_train: a.i_train,
            epochs: a.epochs,
            batch_size: a.batch_size,
            n_batches: a.n_batches,
            ..TrainConfig::default()
        },
        select_words: a.test_words,
        select_snr_db: a.select_snr_db,
        z: a.z,
        i_test: a.i_test,
        seed: a.seed,
    };
    let classes = harness::training_classes(&g, &cfg);
    ensure!(
        !classes.is_empty(),
        "no trainable absorbing-set class for nu = {:?}",
        a.nu
    );
    eprintln!("{} training classes", classes.len());

    let anchor = harness::train_pool(&g, &classes, &cfg, cfg.select_snr_db)?;
    let order =
        harness::select_pool_order(&g, &anchor, cfg.select_words, cfg.select_snr_db, cfg.seed);
    let ids: Vec<&str> = order
        .iter()
        .map(|&i| anchor.decoders[i].id.as_str())
        .collect();
    write_file(
        &a.out_dir.join("order.json"),
        &serde_json::to_string_pretty(&json!({ "order": ids, "snr_db": cfg.select_snr_db }))?,
    )?;

    for &snr in &a.snr_db {
        let pool = if a.reuse_weights || snr == cfg.select_snr_db {
            anchor.clone()
        } else {
            harness::train_pool(&g, &classes, &cfg, snr)?
        };
        let dir = a.out_dir.join(format!("snr_{snr}"));
        fs::create_dir_all(&dir)?;
        let mut manifest = Vec::new();
        for d in &pool.decoders {
            let file = format!("{}.weights", d.id);
            d.weights.save(&g, &dir.join(&file))?;
            manifest.push(ManifestEntry {
                id: d.id.clone(),
                class: d.class.clone(),
                weights: PathBuf::from(file),
                snr_db: if a.reuse_weights {
                    cfg.select_snr_db
                } else {
                    snr
                },
            });
        }
        write_file(
            &dir.join("manifest.json"),
            &serde_json::to_string_pretty(&manifest)?,
        )?;
        eprintln!("wrote {} decoders to {}", manifest.len(), dir.display());
    }
    Ok(())
}

/// Splices the `--config FILE` entries into the argument list right after
/// the subcommand name.
fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().context("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let mut extra = Vec::new();
    for (k, v) in harness::parse_config_text(&text)? {
        let flag = format!("--{}", k.replace('_', "-"));
        match v.as_str() {
            "true" => extra.push(flag),
            "false" => {}
            _ => {
                extra.push(flag);
                extra.push(v);
            }
        }
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    rest.splice(at..at, extra);
    Ok(rest)
}

fn main() -> Result<()> {
    let args = expand_config(std::env::args().collect())?;
    let cli = Cli::parse_from(args);
    match cli.command {
        Command::GraphInfo(a) => graph_info(a),
        Command::AsEnum(a) => as_enum(a),
        Command::Train(a) => train(a),
        Command::Select(a) => select(a),
        Command::Simulate(a) => simulate(a),
        Command::DumpProfile(a) => dump_profile(a),
        Command::DumpCdf(a) => dump_cdf(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

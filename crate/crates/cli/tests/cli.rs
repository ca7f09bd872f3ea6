use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bprnn"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{cmd:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn graph_info_reports_girth() {
    let out = run(bin()
        .args(["graph-info", "--alist"])
        .arg(data("ccsds_128_64.alist")));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("N = 128, M = 64, E = 512"), "{text}");
    assert!(
        text.contains("girth = 6, cycles of that length = 2336"),
        "{text}"
    );
}

#[test]
fn as_enum_summary_and_dump() {
    let dir = scratch("as_enum");
    let dump = dir.join("sets.txt");
    let out = run(bin()
        .args(["as-enum", "--nu", "3", "--brute-force-verify", "--alist"])
        .arg(data("ccsds_128_64.alist"))
        .arg("--dump")
        .arg(&dump));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv,
        "nu,et_string,count,is_codeword_support\n3,\"3-(3,3,(3,3))\",32,false\n"
    );
    let lines: Vec<String> = std::fs::read_to_string(&dump)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(lines.len(), 32);
    assert!(lines.iter().all(|l| l.starts_with("3-(3,3,(3,3)): ")));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# enumeration\nnu = 4\nsample_limit = 0\n").unwrap();
    let out = run(bin()
        .args(["as-enum", "--alist"])
        .arg(data("ccsds_128_64.alist"))
        .arg("--config")
        .arg(&cfg));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 7, "{csv}");
    let out = run(bin()
        .args(["as-enum", "--nu", "3", "--alist"])
        .arg(data("ccsds_128_64.alist"))
        .arg("--config")
        .arg(&cfg));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn bad_alist_is_reported() {
    let dir = scratch("bad");
    let p = dir.join("bad.alist");
    std::fs::write(&p, "2 1\n").unwrap();
    let out = bin()
        .args(["graph-info", "--alist"])
        .arg(&p)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.alist"));
}

#[test]
fn train_profile_and_simulate_single_decoder() {
    let dir = scratch("train");
    let w = dir.join("d.weights");
    run(bin()
        .args([
            "train",
            "--class",
            "4-(4,4,(4,4))",
            "--snr-db",
            "4",
            "--batch-size",
            "32",
        ])
        .args(["--n-batches", "3", "--epochs", "1", "--alist"])
        .arg(data("peg_64_32.alist"))
        .arg("--out")
        .arg(&w));
    let loss = std::fs::read_to_string(dir.join("d.weights.loss.csv")).unwrap();
    assert_eq!(loss.lines().next(), Some("epoch,batch,loss"));
    assert_eq!(loss.lines().count(), 4);

    let prof = dir.join("profile.csv");
    run(bin()
        .args(["dump-profile", "--alist"])
        .arg(data("peg_64_32.alist"))
        .arg("--weights")
        .arg(&w)
        .arg("--out")
        .arg(&prof));
    let prof = std::fs::read_to_string(prof).unwrap();
    assert_eq!(prof.lines().next(), Some("rank,w_data,w_apost"));
    assert_eq!(prof.lines().count(), 1 + 192);

    let csv = dir.join("fer.csv");
    run(bin()
        .args([
            "simulate",
            "--decoder",
            "bprnn-single",
            "--snr-db",
            "-1,2",
            "--min-errors",
            "5",
        ])
        .args(["--max-frames", "2000", "--alist"])
        .arg(data("peg_64_32.alist"))
        .arg("--weights")
        .arg(&w)
        .arg("--out")
        .arg(&csv));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,decoder,osd_mode,osd_order,frames,frame_errors,fer,fer_lo,fer_hi,avg_iters,avg_latency,avg_cn_updates,osd_invocations,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("-1,bprnn-single,off,1,"));
    assert!(dir.join("fer.csv.log").exists());

    let cdf = dir.join("cdf.csv");
    run(bin()
        .args(["dump-cdf", "--snr-db", "1", "--failures", "5", "--alist"])
        .arg(data("peg_64_32.alist"))
        .arg("--weights")
        .arg(&w)
        .arg("--out")
        .arg(&cdf));
    let cdf = std::fs::read_to_string(cdf).unwrap();
    assert_eq!(cdf.lines().next(), Some("llr,cdf"));
    assert!(cdf.lines().last().unwrap().ends_with(",1"));
}

#[test]
fn pipeline_select_and_diversity_simulation() {
    let dir = scratch("pipeline");
    let out = dir.join("pool");
    run(bin()
        .args([
            "pipeline",
            "--nu",
            "3,4",
            "--snr-db",
            "3",
            "--select-snr-db",
            "3",
            "--batch-size",
            "16",
        ])
        .args([
            "--n-batches",
            "2",
            "--epochs",
            "1",
            "--test-words",
            "300",
            "--z",
            "2",
            "--alist",
        ])
        .arg(data("peg_64_32.alist"))
        .arg("--out-dir")
        .arg(&out));
    let manifest = out.join("snr_3/manifest.json");
    let entries: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let n = entries.as_array().unwrap().len();
    assert!(n >= 2);

    let order = dir.join("order.json");
    run(bin()
        .args(["select", "--test-words", "300", "--snr-db", "3", "--alist"])
        .arg(data("peg_64_32.alist"))
        .arg("--pool")
        .arg(&manifest)
        .arg("--out")
        .arg(&order));
    let sel: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&order).unwrap()).unwrap();
    assert_eq!(sel["order"].as_array().unwrap().len(), n);

    for decoder in ["diversity-parallel", "diversity-serial"] {
        let csv = dir.join(format!("{decoder}.csv"));
        run(bin()
            .args([
                "simulate",
                "--decoder",
                decoder,
                "--z",
                "2",
                "--snr-db",
                "2",
                "--osd-mode",
                "postprocess",
            ])
            .args(["--min-errors", "3", "--max-frames", "3000", "--alist"])
            .arg(data("peg_64_32.alist"))
            .arg("--pool")
            .arg(&manifest)
            .arg("--order")
            .arg(&order)
            .arg("--out")
            .arg(&csv));
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with(&format!("2,{decoder},postprocess,1,")));
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sparsefwd_core::model::io::load_dataset;

fn sparsefwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsefwd")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sparsefwd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    sparsefwd(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workdir {
    dir: tempfile::TempDir,
}

impl Workdir {
    fn new() -> Self {
        Workdir { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn preset_means_and_determinism() {
    let w = Workdir::new();
    for (preset, lo, hi) in [("splade-like", 113.0, 125.0), ("lilsr-like", 368.0, 406.0)] {
        let a = w.path(&format!("{preset}-a.spf"));
        let b = w.path(&format!("{preset}-b.spf"));
        for out in [&a, &b] {
            ok(&["gen", "--preset", preset, "--docs", "10000", "--seed", "42", "-o", s(out)]);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let ds = load_dataset(&a).unwrap();
        let mean = ds.total_nnz() as f64 / ds.len() as f64;
        assert!((lo..=hi).contains(&mean), "{preset}: {mean}");
    }
}

#[test]
fn exit_codes() {
    let w = Workdir::new();
    let data = w.path("d.spf");
    ok(&["gen", "--docs", "50", "-o", s(&data)]);
    let idx = w.path("i.dvf");

    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["build", "-i", s(&data), "--codec", "lzma", "-o", s(&idx)]), 1);
    assert_eq!(code(&["gen", "--preset", "custom", "-o", s(&data)]), 1);
    assert_eq!(code(&["--help"]), 0);

    assert_eq!(code(&["build", "-i", s(&w.path("nope.spf")), "--codec", "raw", "-o", s(&idx)]), 2);
    assert_eq!(code(&["gen", "--docs", "5", "--preset", "custom", "--dim", "10", "--nnz-mean", "10", "-o", s(&idx)]), 2);

    ok(&["build", "-i", s(&data), "--codec", "raw", "-o", s(&idx)]);
    assert_eq!(code(&["topk", "-i", s(&idx), "-q", s(&data), "--k", "0", "-o", s(&w.path("r.json"))]), 1);
    // a dataset handed over where an index is expected
    assert_eq!(code(&["stats", "-i", s(&data)]), 2);

    let other = w.path("other.spf");
    ok(&["gen", "--docs", "50", "--seed", "1", "-o", s(&other)]);
    assert_eq!(code(&["verify", "-i", s(&other), "--index", s(&idx), "--pairs", "20", "--no-rgb"]), 3);
}

#[test]
fn stats_report_sizes() {
    let w = Workdir::new();
    let data = w.path("d.spf");
    ok(&["gen", "--docs", "300", "-o", s(&data)]);
    let raw = w.path("raw.dvf");
    let dvb = w.path("dvb.dvf");
    ok(&["build", "-i", s(&data), "--codec", "raw", "-o", s(&raw)]);
    ok(&["build", "-i", s(&data), "--codec", "dotvbyte", "--values", "fixedu8", "-o", s(&dvb)]);

    let one: Value = serde_json::from_str(&ok(&["stats", "-i", s(&raw), "--json"])).unwrap();
    assert_eq!(one["bits_per_component"], 16.0);
    assert_eq!(one["schema_version"], 1);

    let both: Value = serde_json::from_str(&ok(&["stats", "-i", s(&raw), s(&dvb), "--json"])).unwrap();
    let r = &both["reports"][1];
    assert_eq!(r["codec"], "dotvbyte");
    let parts = ["control_bits", "data_bits", "tail_bits"].map(|k| r[k].as_u64().unwrap());
    let total = r["bits_per_component"].as_f64().unwrap() * r["total_nnz"].as_f64().unwrap();
    assert!((parts.iter().sum::<u64>() as f64 - total).abs() < 1e-6);

    let table = ok(&["stats", "-i", s(&raw), s(&dvb)]);
    assert!(table.contains("raw") && table.contains("dotvbyte"));
}

#[test]
fn reorder_build_scan_topk() {
    let w = Workdir::new();
    let (data, queries, perm) = (w.path("d.spf"), w.path("q.spf"), w.path("p.prm"));
    ok(&["gen", "--docs", "1500", "--seed", "3", "-o", s(&data), "--queries", "20", "--queries-output", s(&queries)]);
    ok(&["reorder", "-i", s(&data), "--iters", "10", "-o", s(&perm)]);

    let mut runs = Vec::new();
    for codec in ["raw", "svb", "dotvbyte"] {
        let idx = w.path(&format!("{codec}.dvf"));
        ok(&["build", "-i", s(&data), "--codec", codec, "--permutation", s(&perm), "-o", s(&idx)]);
        ok(&["verify", "-i", s(&data), "--codecs", codec, "--index", s(&idx), "--permutation", s(&perm), "--pairs", "50", "--no-rgb"]);

        let report = w.path(&format!("{codec}.json"));
        let args = ["scan", "-i", s(&idx), "-q", s(&queries), "--permutation", s(&perm), "--runs", "2", "--warmup", "0", "-o", s(&report)];
        ok(&args);
        let scan: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
        assert_eq!(scan["queries"], 20);
        assert!(scan["mean_ms"].as_f64().unwrap() > 0.0);

        let run = w.path(&format!("{codec}.run.json"));
        ok(&["topk", "-i", s(&idx), "-q", s(&queries), "--k", "10", "--permutation", s(&perm), "-o", s(&run)]);
        let run: Value = serde_json::from_slice(&std::fs::read(&run).unwrap()).unwrap();
        assert_eq!(run["results"].as_array().unwrap().len(), 200);
        runs.push((scan["topk_checksum"].clone(), run["results"].clone()));
    }
    // the raw and dotvbyte kernels sum in the same order, so their runs match exactly
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn convert_jsonl() {
    let w = Workdir::new();
    let src = w.path("docs.jsonl");
    std::fs::write(&src, "{\"coords\": [1, 5, 9], \"values\": [0.5, 1.0, 2.0]}\n{\"coords\": [], \"values\": []}\n").unwrap();
    let out = w.path("docs.spf");
    ok(&["convert", "-i", s(&src), "--dim", "10", "-o", s(&out)]);
    let ds = load_dataset(&out).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(ds[0].components(), &[1, 5, 9]);
    assert_eq!(code(&["convert", "-i", s(&src), "--dim", "9", "-o", s(&out)]), 2);
}

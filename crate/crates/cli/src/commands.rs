use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde_json::json;
use sparsefwd_core::dotvbyte::Kernel;
use sparsefwd_core::model::io::{load_dataset, read_jsonl, save_dataset};
use sparsefwd_core::report::{measure_scan, scan_table, size_table, RunFile, ScanOptions, SizeReport};
use sparsefwd_core::rgb::rgb_reorder_traced;
use sparsefwd_core::synth::{IdDist, NnzDist};
use sparsefwd_core::verify::{check_index_matches, verify_dataset, VerifyOptions};
use sparsefwd_core::{
    build_index, generate, BisectionConfig, Codec, CompressedForwardIndex, GenSpec, Permutation, Preset,
    ValueFormat,
};

use crate::{
    BuildArgs, ConvertArgs, Failure, GenArgs, IdDistArg, KernelArg, NnzDistArg, PresetArg, ReorderArgs, ScanArgs,
    StatsArgs, TopkArgs, ValuesArg, VerifyArgs,
};

type CmdResult = Result<(), Failure>;

fn write_json(path: &Path, value: &impl serde::Serialize) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Validation(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn load_permutation(path: Option<&Path>, dim: u32) -> Result<Option<Permutation>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let p = Permutation::load(path)?;
    if p.dim() != dim {
        return Err(Failure::Validation(format!(
            "permutation covers {} IDs but the data has dimension {dim}",
            p.dim()
        )));
    }
    Ok(Some(p))
}

pub fn gen(a: GenArgs) -> CmdResult {
    let (mut spec, query_mean) = match a.preset {
        PresetArg::SpladeLike | PresetArg::LilsrLike => {
            let preset = if a.preset == PresetArg::SpladeLike {
                Preset::SpladeLike
            } else {
                Preset::LilsrLike
            };
            (preset.docs(a.docs, a.seed), preset.nnz_means().1)
        }
        PresetArg::Custom => {
            let (Some(_), Some(m)) = (a.dim, a.nnz_mean) else {
                return Err(Failure::Usage("--preset custom needs --dim and --nnz-mean".into()));
            };
            (Preset::SpladeLike.docs(a.docs, a.seed), m)
        }
    };
    if let Some(d) = a.dim {
        spec.dim = d;
    }
    if let Some(m) = a.nnz_mean {
        spec.nnz_mean = m;
    }
    if let Some(d) = a.nnz_dist {
        spec.nnz_dist = match d {
            NnzDistArg::Constant => NnzDist::Constant,
            NnzDistArg::Poisson => NnzDist::Poisson,
            NnzDistArg::Lognormal => NnzDist::LogNormal { sigma: 0.4 },
        };
    }
    if let Some(d) = a.id_dist {
        spec.id_dist = match d {
            IdDistArg::Uniform => IdDist::Uniform,
            IdDistArg::Zipf => IdDist::Zipf { s: a.zipf_s },
            IdDistArg::TwoCluster => IdDist::TwoCluster,
        };
    } else if let IdDist::Zipf { .. } = spec.id_dist {
        spec.id_dist = IdDist::Zipf { s: a.zipf_s };
    }
    let ds = generate(&spec)?;
    save_dataset(&ds, &a.output)?;
    println!(
        "wrote {} documents, dimension {}, mean nnz {:.2} to {}",
        ds.len(),
        ds.dim(),
        ds.total_nnz() as f64 / ds.len().max(1) as f64,
        a.output.display()
    );
    if let (Some(n), Some(path)) = (a.queries, a.queries_output) {
        let qspec = GenSpec {
            docs: n,
            nnz_mean: a.query_nnz_mean.unwrap_or(query_mean),
            stream: 1,
            ..spec
        };
        let qs = generate(&qspec)?;
        save_dataset(&qs, &path)?;
        println!("wrote {} queries to {}", qs.len(), path.display());
    }
    Ok(())
}

pub fn convert(a: ConvertArgs) -> CmdResult {
    let file = File::open(&a.input).map_err(|e| Failure::Validation(format!("{}: {e}", a.input.display())))?;
    let ds = read_jsonl(BufReader::new(file), a.dim)?;
    save_dataset(&ds, &a.output)?;
    println!("wrote {} documents to {}", ds.len(), a.output.display());
    Ok(())
}

pub fn reorder(a: ReorderArgs) -> CmdResult {
    let ds = load_dataset(&a.input)?;
    let cfg = BisectionConfig {
        max_iters_per_level: a.iters,
        min_partition_size: a.min_part,
        max_depth: a.max_depth,
        shuffle: a.shuffle,
        seed: a.seed,
    };
    let (perm, trace) = rgb_reorder_traced(&ds, &cfg)?;
    if !trace.is_monotone() {
        return Err(Failure::Verification("bisection cost increased within a level".into()));
    }
    perm.save(&a.output)?;
    match trace.root_costs() {
        Some((before, after)) => println!(
            "{} bisections; root cost {before:.1} -> {after:.1}; wrote {}",
            trace.levels.len(),
            a.output.display()
        ),
        None => println!("nothing to bisect; wrote identity-ordered {}", a.output.display()),
    }
    Ok(())
}

pub fn build(a: BuildArgs) -> CmdResult {
    let ds = load_dataset(&a.input)?;
    let mut codec = parse_codec(&a.codec)?;
    match (codec, a.zeta_k) {
        (Codec::Zeta { .. }, Some(k)) => codec = Codec::Zeta { k },
        (_, Some(_)) => return Err(Failure::Usage("--zeta-k applies only to --codec zeta".into())),
        _ => {}
    }
    let fmt = match (a.values, a.frac_bits) {
        (ValuesArg::F32, None) => ValueFormat::F32,
        (ValuesArg::F16, None) => ValueFormat::F16,
        (ValuesArg::Fixedu8, Some(f)) if f <= 8 => ValueFormat::FixedU8 { frac_bits: f },
        (ValuesArg::Fixedu8, Some(f)) => return Err(Failure::Usage(format!("--frac-bits {f} exceeds 8"))),
        (ValuesArg::Fixedu8, None) => ValueFormat::fixed_u8_for(ds.max_value())?,
        (_, Some(_)) => return Err(Failure::Usage("--frac-bits applies only to --values fixedu8".into())),
    };
    let perm = load_permutation(a.permutation.as_deref(), ds.dim())?;
    let idx = build_index(&ds, codec, fmt, perm.as_ref())?;
    idx.save(&a.output)?;
    println!(
        "{codec} / {fmt}: {} documents, {:.3} bits per component, wrote {}",
        idx.len(),
        idx.bits_per_component(),
        a.output.display()
    );
    Ok(())
}

pub fn stats(a: StatsArgs) -> CmdResult {
    let mut reports = Vec::with_capacity(a.input.len());
    for path in &a.input {
        let idx = CompressedForwardIndex::load(path)?;
        let reordered = load_permutation(a.permutation.as_deref(), idx.dim())?.is_some();
        reports.push(SizeReport::of(&idx, reordered)?);
    }
    if a.json {
        let text = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(&json!({
                "schema_version": sparsefwd_core::report::REPORT_SCHEMA_VERSION,
                "reports": reports,
            }))
        };
        println!("{}", text.map_err(|e| Failure::Validation(e.to_string()))?);
    } else {
        print!("{}", size_table(&reports));
    }
    Ok(())
}

fn kernel(k: KernelArg) -> Kernel {
    match k {
        KernelArg::Auto => Kernel::detect(),
        KernelArg::Scalar => Kernel::Scalar,
        KernelArg::Ssse3 => Kernel::Ssse3,
        KernelArg::Avx2 => Kernel::Avx2,
    }
}

fn check_k(k: usize) -> CmdResult {
    if k < 1 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    Ok(())
}

pub fn scan(a: ScanArgs) -> CmdResult {
    check_k(a.k)?;
    let idx = CompressedForwardIndex::load(&a.input)?;
    let queries = load_dataset(&a.queries)?;
    let perm = load_permutation(a.permutation.as_deref(), idx.dim())?;
    let opts = ScanOptions {
        k: a.k,
        runs: a.runs,
        warmup: a.warmup,
        kernel: kernel(a.kernel),
    };
    let (report, _) = measure_scan(&idx, &queries, perm.as_ref(), &opts)?;
    print!("{}", scan_table(std::slice::from_ref(&report)));
    if let Some(path) = &a.output {
        write_json(path, &report)?;
    }
    Ok(())
}

pub fn topk(a: TopkArgs) -> CmdResult {
    check_k(a.k)?;
    let idx = CompressedForwardIndex::load(&a.input)?;
    let queries = load_dataset(&a.queries)?;
    let perm = load_permutation(a.permutation.as_deref(), idx.dim())?;
    let opts = ScanOptions {
        k: a.k,
        runs: 1,
        warmup: 0,
        kernel: Kernel::detect(),
    };
    let (report, lists) = measure_scan(&idx, &queries, perm.as_ref(), &opts)?;
    write_json(&a.output, &RunFile::new(idx.codec(), a.k, &lists))?;
    println!(
        "{} queries, top-{} checksum {}, wrote {}",
        lists.len(),
        a.k,
        report.topk_checksum,
        a.output.display()
    );
    Ok(())
}

fn parse_codec(s: &str) -> Result<Codec, Failure> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("zeta").filter(|k| !k.is_empty()) {
        let k = k.parse().map_err(|_| Failure::Usage(format!("bad zeta parameter in '{s}'")))?;
        return Ok(Codec::Zeta { k });
    }
    s.parse()
        .map_err(|_| Failure::Usage(format!("unknown codec '{s}'")))
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let ds = load_dataset(&a.input)?;
    let mut opts = VerifyOptions {
        oracle_pairs: a.pairs,
        rgb: !a.no_rgb,
        seed: a.seed,
        ..Default::default()
    };
    if let Some(list) = &a.codecs {
        opts.codecs = list.iter().map(|s| parse_codec(s)).collect::<Result<_, _>>()?;
    }
    let perm = load_permutation(a.permutation.as_deref(), ds.dim())?;
    let mut report = verify_dataset(&ds, &opts)?;
    if let Some(path) = &a.index {
        let idx = CompressedForwardIndex::load(path)?;
        report.checks.push(check_index_matches(&ds, &idx, perm.as_ref())?);
    }
    if a.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| Failure::Validation(e.to_string()))?
        );
    } else {
        print!("{}", report.table());
    }
    if report.passed() {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Verification(format!("{failed} check(s) failed")))
    }
}

//! Subcommand implementations.

// `!(x > 0.0)` guards reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use tide_core::estimators::{
    load_model, save_model, tide_train, Activation, FeatureLayout, SampleSet, TrainConfig,
    TrainMeta,
};
use tide_core::mechanism::{calibrate_lambda, leakage_bound, MechanismConfig};
use tide_core::pipelines::{
    self, gen_gaussian_pairs, gen_planted_corpus, load_tabular_csv, read_image, synthetic_bench,
    synthetic_face_gen, term_scores_csv, tokenize_bow, tokenize_with_vocab, train_corpus_model,
    train_patch_model, write_image, write_tabular_csv, PatchSpec, SyntheticSpec,
};
use tide_core::rng::SeedStream;

use crate::manifest::{derive_seed, Manifest};
use crate::rundir;
use crate::CliError;

const LN_2: f64 = std::f64::consts::LN_2;

fn parse_eps(raw: &str) -> Result<f64, String> {
    if raw.eq_ignore_ascii_case("inf") || raw.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    let v: f64 = raw.parse().map_err(|_| format!("not a number: {raw:?}"))?;
    if v < 0.0 || v.is_nan() {
        return Err(format!("eps must be >= 0, got {v}"));
    }
    Ok(v)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0) {
        return Err(CliError::usage(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------- gen-synthetic

#[derive(Args, Serialize)]
pub struct GenSyntheticArgs {
    /// Dimension of the attribute/feature vectors
    #[arg(long)]
    pub d: usize,
    /// Per-coordinate correlation in (-1, 1)
    #[arg(long)]
    pub rho: f64,
    /// Number of samples
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn gen_synthetic(args: GenSyntheticArgs) -> Result<(), CliError> {
    if args.rho.abs() >= 1.0 || !args.rho.is_finite() {
        return Err(CliError::usage(format!(
            "rho must lie in (-1, 1), got {}",
            args.rho
        )));
    }
    if args.d == 0 || args.n == 0 {
        return Err(CliError::usage("d and n must be positive"));
    }
    if !(0.0..=1.0).contains(&args.train_fraction) {
        return Err(CliError::usage(format!(
            "train-fraction must lie in [0, 1], got {}",
            args.train_fraction
        )));
    }
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("gen-synthetic", serde_json::to_value(&args)?, args.seed);
    let (data, _) = gen_gaussian_pairs(
        args.d,
        args.rho,
        args.n,
        args.train_fraction,
        manifest.derived_seed,
    )?;
    let csv_path = run.join("data.csv");
    write_tabular_csv(&csv_path, &data.s, &data.x)?;
    manifest.record(&csv_path)?;
    manifest.write(run.path())?;
    println!(
        "wrote {} ({} rows, d = {})",
        csv_path.display(),
        args.n,
        args.d
    );
    Ok(())
}

// -------------------------------------------------------------------- gen-faces

#[derive(Args, Serialize)]
pub struct GenFacesArgs {
    /// Corpus size (at least 100)
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn gen_faces(args: GenFacesArgs) -> Result<(), CliError> {
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("gen-faces", serde_json::to_value(&args)?, args.seed);
    let corpus = synthetic_face_gen(args.n, manifest.derived_seed)?;
    let faces_dir = run.join("faces");
    std::fs::create_dir_all(&faces_dir)?;
    let mut labels = String::from("filename,label\n");
    for (i, (img, &label)) in corpus.images.iter().zip(&corpus.labels).enumerate() {
        let name = format!("{i:04}.pgm");
        write_image(&faces_dir.join(&name), img)?;
        labels.push_str(&format!("{name},{label}\n"));
    }
    let labels_path = run.join("labels.csv");
    std::fs::write(&labels_path, labels)?;
    let region_path = run.join("signal_region.json");
    std::fs::write(&region_path, serde_json::to_string_pretty(&corpus.region)?)?;
    manifest.record(&labels_path)?;
    manifest.record(&region_path)?;
    manifest.write(run.path())?;
    println!(
        "wrote {} faces under {} (signal region in signal_region.json)",
        args.n,
        faces_dir.display()
    );
    Ok(())
}

// --------------------------------------------------------------------- gen-docs

#[derive(Args, Serialize)]
pub struct GenDocsArgs {
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn gen_docs(args: GenDocsArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::usage("n must be positive"));
    }
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("gen-docs", serde_json::to_value(&args)?, args.seed);
    let docs = gen_planted_corpus(args.n, manifest.derived_seed);
    let mut body = String::new();
    for (label, text) in &docs {
        body.push_str(&format!("{label}\t{text}\n"));
    }
    let path = run.join("docs.tsv");
    std::fs::write(&path, body)?;
    manifest.record(&path)?;
    manifest.write(run.path())?;
    println!("wrote {} documents to {}", args.n, path.display());
    Ok(())
}

// ------------------------------------------------------------------------ train

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// Tabular CSV: d_s attribute columns then feature columns
    SyntheticCsv,
    /// Directory with labels.csv and PGM images
    Faces,
    /// Tab-separated documents: label TAB text
    Docs,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: DataKind,
    /// Attribute columns (synthetic-csv only)
    #[arg(long, default_value_t = 1)]
    pub d_s: usize,
    /// Vocabulary size (docs only)
    #[arg(long, default_value_t = 100)]
    pub vocab_size: usize,
    /// Patch side in pixels (faces only)
    #[arg(long, default_value_t = 16)]
    pub patch: usize,
    /// Pooled blocks per patch side (faces only)
    #[arg(long, default_value_t = 2)]
    pub pool: usize,
    /// Trim bound M
    #[arg(long, default_value_t = 5.0)]
    pub m_bound: f64,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Stop when a validation holdout's objective plateaus
    #[arg(long, default_value_t = false)]
    pub early_stop: bool,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl TrainArgs {
    fn config(&self, derived_seed: u64) -> Result<TrainConfig, CliError> {
        positive("lr", self.lr)?;
        positive("m-bound", self.m_bound)?;
        if self.epochs == 0 || self.batch == 0 {
            return Err(CliError::usage("epochs and batch must be positive"));
        }
        Ok(TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            seed: derived_seed,
            activation: Activation::Tanh,
            early_stop: if self.early_stop {
                Some(Default::default())
            } else {
                None
            },
            ..TrainConfig::default()
        })
    }
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("train", serde_json::to_value(&args)?, args.seed);
    let config = args.config(manifest.derived_seed)?;
    let model_path = run.join("model.json");

    let final_objective = match args.kind {
        DataKind::SyntheticCsv => {
            let (s, x) = load_tabular_csv(&args.input, args.d_s)?;
            let mut split_stream = SeedStream::derive(config.seed, 0x5011);
            let d_x = x.cols();
            let data = SampleSet::with_random_split(s, x, args.train_fraction, &mut split_stream)?;
            let (model, report) = tide_train(
                &data,
                FeatureLayout::flat(d_x),
                &[100, 50, 50],
                args.m_bound,
                &config,
            )?;
            let meta = TrainMeta {
                seed: args.seed,
                epochs: config.epochs,
                batch_size: config.batch_size,
                learning_rate: config.learning_rate,
                final_objective_nats: report.final_objective,
                train_rows: data.train_indices().len(),
                ..Default::default()
            };
            save_model(&model_path, &model, meta)?;
            report.final_objective
        }
        DataKind::Faces => {
            let (images, labels) = load_face_corpus(&args.input)?;
            let spec = PatchSpec { side: args.patch };
            let pm = train_patch_model(&images, &labels, &spec, args.pool, args.m_bound, &config)?;
            let meta = TrainMeta {
                seed: args.seed,
                epochs: config.epochs,
                batch_size: config.batch_size,
                learning_rate: config.learning_rate,
                final_objective_nats: pm.report.final_objective,
                train_rows: pm.data.train_indices().len(),
                feature_radius: Some(pm.empirical_k),
                patch_side: Some(args.patch),
                pool: Some(args.pool),
            };
            save_model(&model_path, &pm.model, meta)?;
            println!("empirical feature radius K = {:.4}", pm.empirical_k);
            pm.report.final_objective
        }
        DataKind::Docs => {
            let docs = load_docs(&args.input)?;
            let corpus = tokenize_bow(&docs, args.vocab_size)?;
            let (model, report, data) = train_corpus_model(&corpus, args.m_bound, &config)?;
            let meta = TrainMeta {
                seed: args.seed,
                epochs: config.epochs,
                batch_size: config.batch_size,
                learning_rate: config.learning_rate,
                final_objective_nats: report.final_objective,
                train_rows: data.train_indices().len(),
                ..Default::default()
            };
            save_model(&model_path, &model, meta)?;
            let vocab_path = run.join("vocab.json");
            std::fs::write(&vocab_path, serde_json::to_string_pretty(&corpus.vocabulary)?)?;
            manifest.record(&vocab_path)?;
            report.final_objective
        }
    };

    manifest.record(&model_path)?;
    manifest.write(run.path())?;
    println!(
        "final objective: {:.4} nats ({:.4} bits)",
        final_objective,
        final_objective / LN_2
    );
    println!("model written to {}", model_path.display());
    Ok(())
}

fn load_face_corpus(dir: &std::path::Path) -> Result<(Vec<pipelines::RasterImage>, Vec<u8>), CliError> {
    let labels_path = dir.join("labels.csv");
    let raw = std::fs::read_to_string(&labels_path)
        .map_err(|e| CliError::io(format!("{}: {e}", labels_path.display())))?;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in raw.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (name, label) = line.split_once(',').ok_or_else(|| {
            CliError::io(format!("labels.csv row {}: expected filename,label", idx + 1))
        })?;
        let label: u8 = label.trim().parse().map_err(|_| {
            CliError::io(format!("labels.csv row {}: bad label {label:?}", idx + 1))
        })?;
        images.push(read_image(&dir.join("faces").join(name.trim()))?);
        labels.push(label);
    }
    if images.is_empty() {
        return Err(CliError::io("labels.csv lists no images".to_string()));
    }
    Ok((images, labels))
}

fn load_docs(path: &std::path::Path) -> Result<Vec<(u8, String)>, CliError> {
    let raw = std::fs::read_to_string(path)?;
    let mut docs = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line.split_once('\t').ok_or_else(|| {
            CliError::io(format!("line {}: expected 'label<TAB>text'", idx + 1))
        })?;
        let label: u8 = label.trim().parse().map_err(|_| {
            CliError::io(format!("line {}: bad label {label:?}", idx + 1))
        })?;
        docs.push((label, text.to_string()));
    }
    if docs.is_empty() {
        return Err(CliError::io("no documents in input".to_string()));
    }
    Ok(docs)
}

// -------------------------------------------------------------- bench-synthetic

#[derive(Args, Serialize)]
pub struct BenchArgs {
    /// Dimensions, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    /// Correlations, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 5.0)]
    pub m_bound: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn bench_synthetic(args: BenchArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::usage("repeats must be >= 1"));
    }
    for &rho in &args.rho {
        if rho.abs() >= 1.0 {
            return Err(CliError::usage(format!("rho must lie in (-1, 1), got {rho}")));
        }
    }
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("bench-synthetic", serde_json::to_value(&args)?, args.seed);
    let mut specs = Vec::new();
    for &d in &args.d {
        for &rho in &args.rho {
            specs.push(SyntheticSpec {
                d,
                rho,
                n: args.n,
                train_fraction: args.train_fraction,
                trim_bound: args.m_bound,
                repeats: args.repeats,
                seed: manifest.derived_seed,
            });
        }
    }
    let table = synthetic_bench(&specs)?;
    let detail_path = run.join("bench_detail.csv");
    std::fs::write(&detail_path, table.detail_csv())?;
    let summary_path = run.join("bench_summary.csv");
    std::fs::write(&summary_path, table.summary_csv())?;
    manifest.record(&detail_path)?;
    manifest.record(&summary_path)?;
    manifest.write(run.path())?;
    print!("{}", table.summary_csv());
    Ok(())
}

// -------------------------------------------------------------------- calibrate

#[derive(Args, Serialize)]
pub struct CalibrateArgs {
    /// Leakage threshold (or "inf")
    #[arg(long, value_parser = parse_eps)]
    pub eps: f64,
    /// Total divergence budget delta
    #[arg(long)]
    pub delta: f64,
    /// Feature count m
    #[arg(long)]
    pub m: usize,
    /// Feature-domain radius K
    #[arg(long)]
    pub k_radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    if args.m == 0 {
        return Err(CliError::usage("m must be >= 1"));
    }
    let per_feature = args.delta / args.m as f64;
    if per_feature >= 1.0 {
        return Err(CliError::usage(format!(
            "delta/m = {per_feature} >= 1: the divergence bound is vacuous at this budget"
        )));
    }
    if per_feature <= 0.0 {
        return Err(CliError::usage("delta must be positive"));
    }
    positive("k-radius", args.k_radius)?;
    if args.eps.is_infinite() {
        return Err(CliError::usage(
            "eps = inf flags nothing; there is no noise scale to calibrate",
        ));
    }
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("calibrate", serde_json::to_value(&args)?, args.seed);
    let calibration = calibrate_lambda(args.eps, args.delta, args.m, args.k_radius)?;
    if let Some(warning) = &calibration.warning {
        eprintln!("warning: {warning}");
    }
    let certificate = leakage_bound(args.eps, calibration.lambda, args.k_radius, args.m)?;
    println!("lambda = {:.9}", calibration.lambda);
    print!("{}", certificate.render_text());
    let cert_path = run.join("certificate.json");
    std::fs::write(&cert_path, serde_json::to_string_pretty(&certificate)?)?;
    manifest.record(&cert_path)?;
    manifest.write(run.path())?;
    Ok(())
}

// --------------------------------------------------------------- obfuscate-image

#[derive(Args, Serialize)]
pub struct ObfuscateImageArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Leakage threshold (or "inf")
    #[arg(long, value_parser = parse_eps)]
    pub eps: f64,
    /// Total budget; used to calibrate lambda when --lambda is absent
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Noise scale; calibrated from (eps, delta, m, K) when omitted
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Feature radius K; defaults to the model's recorded empirical radius
    #[arg(long)]
    pub k_radius: Option<f64>,
    /// Clamp the output back into [0, 1]
    #[arg(long, default_value_t = false)]
    pub clamp: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn obfuscate_image(args: ObfuscateImageArgs) -> Result<(), CliError> {
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("obfuscate-image", serde_json::to_value(&args)?, args.seed);
    let (model, meta) = load_model(&args.model)?;
    let patch = meta.patch_side.ok_or_else(|| {
        CliError::shape("model metadata lacks patch_side; train with --kind faces".to_string())
    })?;
    let pool = meta.pool.ok_or_else(|| {
        CliError::shape("model metadata lacks pool; train with --kind faces".to_string())
    })?;
    let k_radius = match args.k_radius.or(meta.feature_radius) {
        Some(k) if k > 0.0 => k,
        _ => {
            return Err(CliError::usage(
                "no feature radius available; pass --k-radius",
            ))
        }
    };
    let img = read_image(&args.image)?;
    let spec = PatchSpec { side: patch };
    spec.validate(&img).map_err(CliError::from)?;
    let m = spec.num_patches(&img);

    let lambda = match args.lambda {
        Some(l) => {
            positive("lambda", l)?;
            l
        }
        None => {
            if args.eps.is_infinite() {
                1.0 // never used: nothing is flagged
            } else {
                let calibration = calibrate_lambda(args.eps, args.delta, m, k_radius)?;
                if let Some(w) = &calibration.warning {
                    eprintln!("warning: {w}");
                }
                calibration.lambda
            }
        }
    };
    if args.eps >= 2.0 * model.clip_bound() {
        eprintln!(
            "warning: eps = {} is at least twice the trim bound M = {}; estimates never exceed 2M, so nothing can be flagged",
            args.eps,
            model.clip_bound()
        );
    }

    let mech = MechanismConfig {
        eps: args.eps,
        delta: args.delta,
        m,
        k_radius,
        lambda,
        trim_bound: model.clip_bound(),
        clamp_output: args.clamp,
    };
    let alphabet = vec![vec![0.0], vec![1.0]];
    let out = pipelines::obfuscate_image(
        &img,
        &model,
        &mech,
        &spec,
        pool,
        &alphabet,
        manifest.derived_seed,
    )?;

    let obf_path = run.join("obfuscated.pgm");
    write_image(&obf_path, &out.clamped)?;
    let heat_path = run.join("heatmap.pgm");
    write_image(&heat_path, &out.heatmap)?;
    let raw_path = run.join("obfuscated_raw.csv");
    let raw_csv: String = out
        .raw_features
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    std::fs::write(&raw_path, raw_csv + "\n")?;
    let report_path = run.join("report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&out.report)?)?;
    let cert_path = run.join("certificate.json");
    std::fs::write(&cert_path, serde_json::to_string_pretty(&out.certificate)?)?;
    for p in [&obf_path, &heat_path, &raw_path, &report_path, &cert_path] {
        manifest.record(p)?;
    }
    manifest.write(run.path())?;
    println!(
        "{} of {} patches flagged at eps = {}; lambda = {:.4}",
        out.report.num_leaking(),
        m,
        args.eps,
        lambda
    );
    print!("{}", out.certificate.render_text());
    Ok(())
}

// ------------------------------------------------------------------ score-terms

#[derive(Args, Serialize)]
pub struct ScoreTermsArgs {
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// vocab.json written by `train --kind docs`
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn score_terms(args: ScoreTermsArgs) -> Result<(), CliError> {
    let run = rundir::prepare(&args.out)?;
    let mut manifest = Manifest::new("score-terms", serde_json::to_value(&args)?, args.seed);
    let (model, _) = load_model(&args.model)?;
    let vocab: Vec<String> = serde_json::from_str(&std::fs::read_to_string(&args.vocab)?)?;
    let docs = load_docs(&args.docs)?;
    let corpus = tokenize_with_vocab(&docs, &vocab)?;
    if model.feature_count() != corpus.vocab_size() {
        return Err(CliError::shape(format!(
            "model expects {} terms, vocabulary has {}",
            model.feature_count(),
            corpus.vocab_size()
        )));
    }
    let rows: Vec<usize> = (0..corpus.num_docs()).collect();
    let scores = pipelines::score_terms(&model, &corpus, &rows)?;
    let csv = term_scores_csv(&scores);
    let path = run.join("term_scores.csv");
    std::fs::write(&path, &csv)?;
    manifest.record(&path)?;
    manifest.write(run.path())?;
    for line in csv.lines().take(11) {
        println!("{line}");
    }
    println!("full ranking in {}", path.display());
    Ok(())
}

// ----------------------------------------------------------------------- verify

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Egamma,
    Mechanism,
    All,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let seed = derive_seed("verify", args.seed);
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("PASS {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            failures += 1;
        }
    };

    if matches!(args.suite, Suite::Egamma | Suite::All) {
        run_egamma_suite(seed, &mut check)?;
    }
    if matches!(args.suite, Suite::Mechanism | Suite::All) {
        run_mechanism_suite(seed, &mut check)?;
    }
    if failures > 0 {
        return Err(CliError::numeric(format!("{failures} properties failed")));
    }
    println!("all properties hold");
    Ok(())
}

fn random_prob(stream: &mut SeedStream, n: usize) -> tide_core::divergence::ProbVector {
    let w: Vec<f64> = (0..n).map(|_| -stream.uniform().max(1e-12).ln()).collect();
    tide_core::divergence::ProbVector::from_weights(&w).expect("positive weights")
}

fn run_egamma_suite(
    seed: u64,
    check: &mut impl FnMut(&str, bool, String),
) -> Result<(), CliError> {
    use tide_core::divergence::{
        egamma_discrete, egamma_gaussian, egamma_sup_bruteforce, egamma_tail_integral, q_function,
        Channel,
    };
    let mut stream = SeedStream::new(seed);

    let mut max_gap = 0.0f64;
    for _ in 0..1000 {
        let n = 2 + stream.below(11);
        let p = random_prob(&mut stream, n);
        let q = random_prob(&mut stream, n);
        let gamma = 1.0 + 4.0 * stream.uniform();
        let a = egamma_discrete(&p, &q, gamma)?;
        let b = egamma_sup_bruteforce(&p, &q, gamma)?;
        max_gap = max_gap.max((a - b).abs());
    }
    check(
        "egamma sum form == subset supremum",
        max_gap < 1e-12,
        format!("max gap {max_gap:.2e} over 1000 instances"),
    );

    let mut dpi_ok = true;
    for _ in 0..300 {
        let n = 2 + stream.below(5);
        let m = 2 + stream.below(5);
        let p = random_prob(&mut stream, n);
        let q = random_prob(&mut stream, n);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| random_prob(&mut stream, m).masses().to_vec())
            .collect();
        let w = Channel::new(rows)?;
        let gamma = 1.0 + 3.0 * stream.uniform();
        let before = egamma_discrete(&p, &q, gamma)?;
        let after = egamma_discrete(&w.apply(&p)?, &w.apply(&q)?, gamma)?;
        if after > before + 1e-12 {
            dpi_ok = false;
        }
    }
    check(
        "egamma data-processing inequality",
        dpi_ok,
        "300 random channels".to_string(),
    );

    let mut tail_err = 0.0f64;
    for _ in 0..20 {
        let gap = stream.uniform_in(0.2, 3.0);
        let lambda = stream.uniform_in(0.3, 2.5);
        let eps = stream.uniform_in(0.0, 1.5);
        let beta = gap / lambda;
        let tail = move |t: f64| q_function((t - beta * beta / 2.0) / beta);
        let via_integral = egamma_tail_integral(tail, eps)?;
        let closed = egamma_gaussian(gap, lambda, eps.exp())?;
        tail_err = tail_err.max((via_integral - closed).abs());
    }
    check(
        "tail-integral identity (Gaussian)",
        tail_err < 1e-3,
        format!("max abs error {tail_err:.2e}"),
    );

    let mut q_sym = 0.0f64;
    let mut v = -8.0;
    while v <= 8.0 {
        q_sym = q_sym.max((q_function(v) + q_function(-v) - 1.0).abs());
        v += 0.25;
    }
    check(
        "q-function symmetry",
        q_sym < 1e-12,
        format!("max deviation {q_sym:.2e}"),
    );
    Ok(())
}

fn run_mechanism_suite(
    seed: u64,
    check: &mut impl FnMut(&str, bool, String),
) -> Result<(), CliError> {
    use tide_core::mechanism::{composition_bruteforce_check, verify_feature_guarantee};

    let checks = composition_bruteforce_check(100, 0.4, seed)?;
    let worst = checks
        .iter()
        .map(|c| c.violation)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        "composition over two features",
        worst <= 1e-10,
        format!("worst violation {worst:.2e} over 100 instances"),
    );

    let rows = verify_feature_guarantee(0.5, 1.0, 1.0, 100_000, seed ^ 0xfeed)?;
    let all_ok = rows.iter().all(|r| r.within_bound);
    let boundary = rows.last().expect("grid non-empty");
    let boundary_ok =
        (boundary.mc_estimate - boundary.theta_at_k).abs() <= 4.0 * boundary.std_err;
    check(
        "feature guarantee worst case at the boundary",
        all_ok && boundary_ok,
        format!(
            "boundary estimate {:.4} vs theta {:.4}",
            boundary.mc_estimate, boundary.theta_at_k
        ),
    );

    let cal = tide_core::mechanism::calibrate_lambda(0.5, 0.238, 1, 1.0)?;
    let minimal = tide_core::divergence::egamma_gaussian(1.0, 0.999 * cal.lambda, 0.5f64.exp())?
        > 0.238;
    check(
        "calibration minimality",
        minimal && (cal.lambda - 1.0).abs() < 0.01,
        format!("lambda = {:.6}", cal.lambda),
    );
    Ok(())
}

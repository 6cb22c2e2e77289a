//! Command-line front end: extract features from a corpus, train and apply
//! classifiers, and run the cross-validation benchmarks.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use accent_core::audio::{load_manifest, load_wav};
use accent_core::classify::{
    load_model, save_model, train, ClassifierChoice, ClassifierKind, Metric, Ridge,
};
use accent_core::dsp::{compute_mfcc, summarize_mean, MfccConfig};
use accent_core::eval::{benchmark_grid, run_cv, EvalReport, EvalRow, SplitSpec};
use accent_core::features::{FeatureTable, FeatureVector};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (model/feature format v1)"
);

const DEFAULT_Q_LEVELS: [usize; 5] = [12, 19, 26, 33, 39];

#[derive(Parser)]
#[command(
    name = "accent",
    version = LONG_VERSION,
    about = "Speaker accent recognition: MFCC features, classifiers, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one mean-MFCC feature vector per manifest entry
    Extract(ExtractArgs),
    /// Train a classifier on a labeled feature CSV and save the model
    Train(TrainArgs),
    /// Apply a saved model to a feature CSV
    Predict(PredictArgs),
    /// Cross-validate one classifier (or a full grid with --grid)
    Evaluate(EvaluateArgs),
    /// Run the coefficient-count x classifier benchmark grid
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct MfccArgs {
    /// Read pipeline parameters from a key=value text file
    #[arg(long, value_name = "FILE")]
    mfcc_config: Option<PathBuf>,
    /// Pre-emphasis coefficient in [0, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Frame length in milliseconds
    #[arg(long)]
    frame_ms: Option<f64>,
    /// Hop between frames in milliseconds
    #[arg(long)]
    hop_ms: Option<f64>,
    /// Number of mel filters
    #[arg(long)]
    filters: Option<usize>,
    /// Number of cepstral coefficients to keep
    #[arg(long)]
    coeffs: Option<usize>,
    /// Lower filterbank edge in Hz
    #[arg(long)]
    f_low: Option<f64>,
    /// Upper filterbank edge in Hz (defaults to Nyquist)
    #[arg(long)]
    f_high: Option<f64>,
    /// Include the zeroth cepstral coefficient
    #[arg(long)]
    include_c0: Option<bool>,
}

impl MfccArgs {
    fn resolve(&self) -> anyhow::Result<MfccConfig> {
        let mut cfg = match &self.mfcc_config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                MfccConfig::from_kv_text(&text)?
            }
            None => MfccConfig::default(),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.frame_ms {
            cfg.frame_ms = v;
        }
        if let Some(v) = self.hop_ms {
            cfg.hop_ms = v;
        }
        if let Some(v) = self.filters {
            cfg.num_filters = v;
        }
        if let Some(v) = self.coeffs {
            cfg.num_coeffs = v;
        }
        if let Some(v) = self.f_low {
            cfg.f_low = v;
        }
        if let Some(v) = self.f_high {
            cfg.f_high = Some(v);
        }
        if let Some(v) = self.include_c0 {
            cfg.include_c0 = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ClassifierArgs {
    /// One of lda, qda, svm-rbf, svm-poly, knn
    #[arg(long, default_value = "knn")]
    classifier: String,
    /// SVM box constraint
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    /// RBF kernel width (defaults to 1/p)
    #[arg(long)]
    gamma: Option<f64>,
    /// Polynomial kernel degree
    #[arg(long)]
    degree: Option<u32>,
    /// Polynomial kernel offset
    #[arg(long)]
    coef0: Option<f64>,
    /// Neighbor count for k-NN (odd)
    #[arg(long)]
    k: Option<usize>,
    /// k-NN distance: euclidean or manhattan
    #[arg(long)]
    metric: Option<String>,
    /// Covariance ridge for LDA/QDA (defaults to 1e-6 trace(S)/p)
    #[arg(long)]
    ridge: Option<f64>,
    /// SMO KKT tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// SMO pass cap before reporting non-convergence
    #[arg(long)]
    max_passes: Option<usize>,
}

impl ClassifierArgs {
    fn choice_for(&self, kind: ClassifierKind) -> anyhow::Result<ClassifierChoice> {
        let mut choice = ClassifierChoice::new(kind);
        if let Some(v) = self.c {
            choice.c = v;
        }
        choice.gamma = self.gamma;
        if let Some(v) = self.degree {
            choice.degree = v;
        }
        if let Some(v) = self.coef0 {
            choice.coef0 = v;
        }
        if let Some(v) = self.k {
            choice.k = v;
        }
        if let Some(m) = &self.metric {
            choice.metric = Metric::parse(m)?;
        }
        if let Some(r) = self.ridge {
            choice.ridge = Ridge::Value(r);
        }
        if let Some(v) = self.tol {
            choice.tol = v;
        }
        if let Some(v) = self.max_passes {
            choice.max_passes = v;
        }
        Ok(choice)
    }

    fn to_choice(&self) -> anyhow::Result<ClassifierChoice> {
        self.choice_for(ClassifierKind::parse(&self.classifier)?)
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// Corpus manifest (path,label per line); clip paths resolve relative
    /// to the manifest's directory
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,
    /// Output feature CSV
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    #[command(flatten)]
    mfcc: MfccArgs,
    /// Worker threads (1 = serial)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature CSV
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Output model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Seed for the SVM working-pair order
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Feature CSV to classify
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Output prediction CSV (source_id,predicted_label)
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled feature CSV
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Output report CSV (a .json twin is written alongside)
    #[arg(long, value_name = "CSV")]
    report: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Master seed; required so runs are reproducible by construction
    #[arg(long)]
    seed: u64,
    /// Holdout repetitions m
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Fraction of each class used for training
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Run the full q-level x classifier grid instead of a single cell
    #[arg(long)]
    grid: bool,
    /// Comma-separated coefficient counts for --grid
    #[arg(long, value_delimiter = ',')]
    q_levels: Option<Vec<usize>>,
    /// Write plot tables to <PREFIX>-accuracy.csv and <PREFIX>-time.csv
    #[arg(long, value_name = "PREFIX")]
    plot_data: Option<PathBuf>,
    /// Worker threads (1 = serial; keep 1 for timing comparisons)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Labeled feature CSV (needs at least max(q-levels) coefficients)
    #[arg(long, value_name = "CSV")]
    features: PathBuf,
    /// Output report CSV (a .json twin is written alongside)
    #[arg(long, value_name = "CSV")]
    report: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Master seed; required so runs are reproducible by construction
    #[arg(long)]
    seed: u64,
    /// Holdout repetitions m per cell
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Fraction of each class used for training
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Comma-separated coefficient counts
    #[arg(long, value_delimiter = ',')]
    q_levels: Option<Vec<usize>>,
    /// Comma-separated classifier names
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<String>>,
    /// Write plot tables to <PREFIX>-accuracy.csv and <PREFIX>-time.csv
    #[arg(long, value_name = "PREFIX")]
    plot_data: Option<PathBuf>,
    /// Worker threads (1 = serial; keep 1 for timing comparisons)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Extract(args) => cmd_extract(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Predict(args) => cmd_predict(args),
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Benchmark(args) => cmd_benchmark(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// Standard header lines for every output artifact: tool version, format
/// version, subcommand, and the fully resolved settings.
fn config_meta(subcommand: &str, settings: &[(String, String)]) -> Vec<String> {
    let mut meta = vec![format!(" accent {LONG_VERSION}")];
    meta.push(format!(" subcommand={subcommand}"));
    for (k, v) in settings {
        meta.push(format!(" {k}={v}"));
    }
    meta
}

fn mfcc_settings(cfg: &MfccConfig) -> Vec<(String, String)> {
    cfg.to_kv_text()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (format!("mfcc.{k}"), v.to_string()))
        .collect()
}

fn cmd_extract(args: ExtractArgs) -> anyhow::Result<()> {
    let cfg = args.mfcc.resolve()?;
    let manifest = load_manifest(&args.manifest)?;
    let base = args
        .manifest
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();

    let extract_one = |entry: &accent_core::audio::ManifestEntry| -> Result<FeatureVector, String> {
        let path = {
            let p = Path::new(&entry.path);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let run = || -> accent_core::Result<FeatureVector> {
            let mut clip = load_wav(&path)?;
            clip.source_id = entry.path.clone();
            let mut fv = summarize_mean(&compute_mfcc(&clip, &cfg)?)?;
            fv.label = Some(entry.label);
            Ok(fv)
        };
        run().map_err(|e| format!("{}: {e}", entry.path))
    };

    let results: Vec<Result<FeatureVector, String>> = if args.threads <= 1 {
        manifest.entries.iter().map(extract_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()?;
        pool.install(|| manifest.entries.par_iter().map(extract_one).collect())
    };

    let mut vectors = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(fv) => vectors.push(fv),
            Err(msg) => failures.push(msg),
        }
    }
    if !failures.is_empty() {
        for msg in &failures {
            eprintln!("error: {msg}");
        }
        bail!(
            "{} of {} clips failed; no output written",
            failures.len(),
            manifest.len()
        );
    }

    let mut table = FeatureTable::from_vectors(vectors, cfg.include_c0)?;
    let mut settings = vec![("manifest".to_string(), args.manifest.display().to_string())];
    settings.extend(mfcc_settings(&cfg));
    settings.push(("threads".to_string(), args.threads.to_string()));
    table.meta = config_meta("extract", &settings);
    table.write_csv(&args.out)?;
    eprintln!(
        "extracted {} x {} features -> {}",
        table.len(),
        table.dim,
        args.out.display()
    );
    Ok(())
}

fn classifier_settings(choice: &ClassifierChoice, p: usize, seed: u64) -> Vec<(String, String)> {
    vec![
        ("classifier".to_string(), choice.describe(p)),
        ("seed".to_string(), seed.to_string()),
    ]
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let table = FeatureTable::read_csv(&args.features)?;
    let dataset = table.to_dataset()?;
    let choice = args.classifier.to_choice()?;
    let model = train(&choice, &dataset, args.seed)?;

    let mut settings = vec![("features".to_string(), args.features.display().to_string())];
    settings.extend(classifier_settings(&choice, dataset.p(), args.seed));
    save_model(&args.model, &model, &config_meta("train", &settings))?;
    eprintln!(
        "trained {} on {} x {} -> {}",
        choice.kind.name(),
        dataset.n(),
        dataset.p(),
        args.model.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let table = FeatureTable::read_csv(&args.features)?;
    if table.dim != model.dim() {
        bail!(
            "feature dimension {} does not match model dimension {}",
            table.dim,
            model.dim()
        );
    }
    let mut out = String::new();
    let settings = vec![
        ("model".to_string(), args.model.display().to_string()),
        ("features".to_string(), args.features.display().to_string()),
        ("kind".to_string(), model.kind().name().to_string()),
    ];
    for line in config_meta("predict", &settings) {
        out.push_str(&format!("#{line}\n"));
    }
    out.push_str("source_id,predicted_label\n");
    for i in 0..table.len() {
        let label = model.predict(table.row(i))?;
        out.push_str(&format!("{},{}\n", table.source_ids[i], label));
    }
    std::fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("predicted {} rows -> {}", table.len(), args.out.display());
    Ok(())
}

fn write_reports(
    report: &EvalReport,
    report_path: &Path,
    plot_prefix: Option<&Path>,
    meta: &[String],
) -> anyhow::Result<()> {
    report.write_csv(report_path, meta)?;
    report.write_json(report_path.with_extension("json"), meta)?;
    if let Some(prefix) = plot_prefix {
        let (acc, time) = report.plot_data();
        let acc_path = plot_suffix(prefix, "accuracy");
        let time_path = plot_suffix(prefix, "time");
        std::fs::write(&acc_path, acc)
            .with_context(|| format!("writing {}", acc_path.display()))?;
        std::fs::write(&time_path, time)
            .with_context(|| format!("writing {}", time_path.display()))?;
    }
    Ok(())
}

fn plot_suffix(prefix: &Path, what: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!("-{what}.csv"));
    prefix.with_file_name(name)
}

/// On failure the report file still carries the config echo, so failed runs
/// are diagnosable from their artifacts.
fn write_config_echo_on_failure(report_path: &Path, meta: &[String]) {
    let _ = EvalReport::default().write_csv(report_path, meta);
}

fn grid_classifiers(
    args: &ClassifierArgs,
    names: Option<&[String]>,
) -> anyhow::Result<Vec<ClassifierChoice>> {
    match names {
        None => ClassifierKind::ALL
            .iter()
            .map(|&k| args.choice_for(k))
            .collect(),
        Some(list) => list
            .iter()
            .map(|name| args.choice_for(ClassifierKind::parse(name)?))
            .collect(),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let table = FeatureTable::read_csv(&args.features)?;
    let spec = SplitSpec::new(args.train_fraction, args.reps, args.seed)?;

    let mut settings = vec![
        ("features".to_string(), args.features.display().to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("reps".to_string(), args.reps.to_string()),
        ("train_fraction".to_string(), args.train_fraction.to_string()),
        ("threads".to_string(), args.threads.to_string()),
    ];

    if args.grid {
        let q_levels = args
            .q_levels
            .clone()
            .unwrap_or_else(|| DEFAULT_Q_LEVELS.to_vec());
        let classifiers = grid_classifiers(&args.classifier, None)?;
        settings.push((
            "q_levels".to_string(),
            q_levels.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        ));
        let meta = config_meta("evaluate --grid", &settings);
        let report = match benchmark_grid(&table, &q_levels, &classifiers, &spec, args.threads) {
            Ok(r) => r,
            Err(e) => {
                write_config_echo_on_failure(&args.report, &meta);
                return Err(e.into());
            }
        };
        write_reports(&report, &args.report, args.plot_data.as_deref(), &meta)?;
    } else {
        let choice = args.classifier.to_choice()?;
        let dataset = table.to_dataset()?;
        settings.extend(classifier_settings(&choice, dataset.p(), args.seed));
        let meta = config_meta("evaluate", &settings);
        let outcome = match run_cv(&dataset, &choice, &spec, args.threads) {
            Ok(o) => o,
            Err(e) => {
                write_config_echo_on_failure(&args.report, &meta);
                return Err(e.into());
            }
        };
        let report = EvalReport {
            rows: vec![EvalRow {
                classifier: choice.kind.name().to_string(),
                q: dataset.p(),
                mean_accuracy: outcome.mean_accuracy,
                std_accuracy: outcome.std_accuracy,
                train_seconds: outcome.train_seconds,
                predict_seconds: outcome.predict_seconds,
                repetitions: args.reps,
            }],
        };
        write_reports(&report, &args.report, args.plot_data.as_deref(), &meta)?;
    }
    eprintln!("report -> {}", args.report.display());
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> anyhow::Result<()> {
    let table = FeatureTable::read_csv(&args.features)?;
    let spec = SplitSpec::new(args.train_fraction, args.reps, args.seed)?;
    let q_levels = args
        .q_levels
        .clone()
        .unwrap_or_else(|| DEFAULT_Q_LEVELS.to_vec());
    let classifiers = grid_classifiers(&args.classifier, args.classifiers.as_deref())?;

    let settings = vec![
        ("features".to_string(), args.features.display().to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("reps".to_string(), args.reps.to_string()),
        ("train_fraction".to_string(), args.train_fraction.to_string()),
        (
            "q_levels".to_string(),
            q_levels.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        ),
        (
            "classifiers".to_string(),
            classifiers
                .iter()
                .map(|c| c.kind.name().to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("threads".to_string(), args.threads.to_string()),
    ];
    let meta = config_meta("benchmark", &settings);
    let report = match benchmark_grid(&table, &q_levels, &classifiers, &spec, args.threads) {
        Ok(r) => r,
        Err(e) => {
            write_config_echo_on_failure(&args.report, &meta);
            return Err(e.into());
        }
    };
    write_reports(&report, &args.report, args.plot_data.as_deref(), &meta)?;
    eprintln!(
        "benchmark grid {} x {} -> {}",
        q_levels.len(),
        classifiers.len(),
        args.report.display()
    );
    Ok(())
}

//! Repeated stratified-holdout cross-validation with accuracy and
//! wall-clock timing, and the q-level x classifier benchmark grid.
//!
//! Each repetition is keyed by a seed derived from (master_seed, rep_index)
//! only, so repetitions are independent of execution order and of which
//! grid cell they belong to, and the accuracy columns of a run reproduce
//! bit-for-bit. Timings are wall-clock and excluded from reproducibility;
//! for meaningful timing comparisons run with one thread.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{self, ClassifierChoice};
use crate::features::{Dataset, FeatureTable};
use crate::rng::{rep_seed, SplitMix64};
use crate::{Error, Result};

/// Holdout-split plan: train fraction, repetition count m, master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, repetitions: usize, master_seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::Config("need at least one repetition".into()));
        }
        Ok(Self {
            train_fraction,
            repetitions,
            master_seed,
        })
    }
}

/// The 2x2 tally with label 1 (non-US) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.true_neg += other.true_neg;
        self.false_pos += other.false_pos;
        self.false_neg += other.false_neg;
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(preds: &[u8], truth: &[u8]) -> Result<ConfusionCounts> {
    if preds.len() != truth.len() {
        return Err(Error::Eval(format!(
            "{} predictions vs {} truth labels",
            preds.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in preds.iter().zip(truth) {
        if p > 1 || t > 1 {
            return Err(Error::Eval("labels must be 0 or 1".into()));
        }
        match (p, t) {
            (1, 1) => c.true_pos += 1,
            (0, 0) => c.true_neg += 1,
            (1, 0) => c.false_pos += 1,
            (0, 1) => c.false_neg += 1,
            _ => unreachable!(),
        }
    }
    Ok(c)
}

/// (TP + TN) / N.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    let n = c.total();
    if n == 0 {
        return Err(Error::Eval("confusion table is empty".into()));
    }
    Ok((c.true_pos + c.true_neg) as f64 / n as f64)
}

/// Deterministic stratified holdout split for one repetition: within each
/// class the points are shuffled by a generator seeded from
/// (master_seed, rep_index) and the first floor(train_fraction * n_k) go to
/// the training partition.
pub fn stratified_split(
    data: &Dataset,
    spec: &SplitSpec,
    rep_index: usize,
) -> Result<(Dataset, Dataset)> {
    if rep_index >= spec.repetitions {
        return Err(Error::Eval(format!(
            "rep_index {rep_index} outside 0..{}",
            spec.repetitions
        )));
    }
    let mut rng = SplitMix64::new(rep_seed(spec.master_seed, rep_index as u64));
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for mut class in data.class_indices() {
        let n_k = class.len();
        let n_train = (spec.train_fraction * n_k as f64).floor() as usize;
        if n_train == 0 || n_train == n_k {
            return Err(Error::Eval(format!(
                "class of {n_k} points yields an empty partition at train fraction {}",
                spec.train_fraction
            )));
        }
        rng.shuffle(&mut class);
        train_idx.extend_from_slice(&class[..n_train]);
        test_idx.extend_from_slice(&class[n_train..]);
    }
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}

/// Everything run_cv measures across the repetitions.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Confusion counts summed over all repetitions.
    pub confusion: ConfusionCounts,
    pub train_seconds: f64,
    pub predict_seconds: f64,
    pub per_rep_accuracies: Vec<f64>,
}

fn mean_and_sample_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_one_rep(
    data: &Dataset,
    choice: &ClassifierChoice,
    spec: &SplitSpec,
    rep: usize,
) -> Result<(f64, ConfusionCounts, f64, f64)> {
    let tag = |e: Error| Error::Eval(format!("rep {rep}: {e}"));
    let (train_set, test_set) = stratified_split(data, spec, rep)?;

    let t0 = Instant::now();
    let model =
        classify::train(choice, &train_set, rep_seed(spec.master_seed, rep as u64)).map_err(tag)?;
    let train_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut preds = Vec::with_capacity(test_set.n());
    for i in 0..test_set.n() {
        preds.push(model.predict(test_set.row(i)).map_err(tag)?);
    }
    let predict_s = t1.elapsed().as_secs_f64();

    let c = confusion(&preds, test_set.labels())?;
    Ok((accuracy(&c)?, c, train_s, predict_s))
}

/// Runs `spec.repetitions` train/test repetitions of one classifier.
/// `threads = 1` runs serially (use that for timing comparisons);
/// larger values fan the repetitions out over a thread pool without
/// changing any accuracy output.
pub fn run_cv(
    data: &Dataset,
    choice: &ClassifierChoice,
    spec: &SplitSpec,
    threads: usize,
) -> Result<CvOutcome> {
    data.require_both_classes(2)?;
    let reps = spec.repetitions;
    let results: Vec<Result<(f64, ConfusionCounts, f64, f64)>> = if threads <= 1 {
        (0..reps)
            .map(|rep| run_one_rep(data, choice, spec, rep))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Eval(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| run_one_rep(data, choice, spec, rep))
                .collect()
        })
    };

    // aggregate in rep-index order so the output is independent of
    // execution interleaving
    let mut per_rep_accuracies = Vec::with_capacity(reps);
    let mut total = ConfusionCounts::default();
    let mut train_seconds = 0.0;
    let mut predict_seconds = 0.0;
    for r in results {
        let (acc, c, train_s, predict_s) = r?;
        per_rep_accuracies.push(acc);
        total.add(&c);
        train_seconds += train_s;
        predict_seconds += predict_s;
    }
    let (mean_accuracy, std_accuracy) = mean_and_sample_std(&per_rep_accuracies);
    Ok(CvOutcome {
        mean_accuracy,
        std_accuracy,
        confusion: total,
        train_seconds,
        predict_seconds,
        per_rep_accuracies,
    })
}

/// One row of the benchmark report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub classifier: String,
    pub q: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub train_seconds: f64,
    pub predict_seconds: f64,
    pub repetitions: usize,
}

impl EvalRow {
    pub fn total_seconds(&self) -> f64 {
        self.train_seconds + self.predict_seconds
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

/// Runs the cross product of coefficient counts and classifiers, reusing
/// one feature extraction: the q-level views are prefixes of the widest
/// feature matrix. Rows come out in grid order (q outer, classifier inner).
pub fn benchmark_grid(
    features: &FeatureTable,
    q_levels: &[usize],
    classifiers: &[ClassifierChoice],
    spec: &SplitSpec,
    threads: usize,
) -> Result<EvalReport> {
    if q_levels.is_empty() || classifiers.is_empty() {
        return Err(Error::Config("benchmark grid is empty".into()));
    }
    let max_q = *q_levels.iter().max().unwrap();
    if max_q > features.dim {
        return Err(Error::Config(format!(
            "grid needs q={max_q} coefficients but the feature table has {}; \
             re-extract with --coeffs >= {max_q}",
            features.dim
        )));
    }
    let mut rows = Vec::with_capacity(q_levels.len() * classifiers.len());
    for &q in q_levels {
        let dataset = features.truncated(q)?.to_dataset()?;
        for choice in classifiers {
            let outcome = run_cv(&dataset, choice, spec, threads)
                .map_err(|e| Error::Eval(format!("{} at q={q}: {e}", choice.kind.name())))?;
            rows.push(EvalRow {
                classifier: choice.kind.name().to_string(),
                q,
                mean_accuracy: outcome.mean_accuracy,
                std_accuracy: outcome.std_accuracy,
                train_seconds: outcome.train_seconds,
                predict_seconds: outcome.predict_seconds,
                repetitions: spec.repetitions,
            });
        }
    }
    Ok(EvalReport { rows })
}

impl EvalReport {
    /// CSV with the fixed column set; `meta` lines are echoed as `#`
    /// comments. Accuracy fields print with full precision so identical
    /// runs produce identical bytes.
    pub fn to_csv(&self, meta: &[String]) -> String {
        let mut out = String::new();
        for m in meta {
            out.push_str(&format!("#{m}\n"));
        }
        out.push_str("classifier,q,mean_acc,std_acc,train_s,predict_s,reps\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{}\n",
                r.classifier,
                r.q,
                crate::features::fmt_f64(r.mean_accuracy),
                crate::features::fmt_f64(r.std_accuracy),
                r.train_seconds,
                r.predict_seconds,
                r.repetitions
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, meta: &[String]) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv(meta)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// JSON document with the config echo embedded.
    pub fn write_json(&self, path: impl AsRef<Path>, meta: &[String]) -> Result<()> {
        let path = path.as_ref();
        #[derive(Serialize)]
        struct Doc<'a> {
            format_version: u32,
            config: &'a [String],
            rows: &'a [EvalRow],
        }
        let doc = Doc {
            format_version: crate::FORMAT_VERSION,
            config: meta,
            rows: &self.rows,
        };
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Eval(format!("json encoding: {e}")))?;
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// The two tall tables for redrawing the accuracy and timing figures:
    /// `classifier,q,mean_acc` and `classifier,q,total_s`.
    pub fn plot_data(&self) -> (String, String) {
        let mut acc = String::from("classifier,q,mean_acc\n");
        let mut time = String::from("classifier,q,total_s\n");
        for r in &self.rows {
            acc.push_str(&format!(
                "{},{},{}\n",
                r.classifier,
                r.q,
                crate::features::fmt_f64(r.mean_accuracy)
            ));
            time.push_str(&format!(
                "{},{},{:.6}\n",
                r.classifier,
                r.q,
                r.total_seconds()
            ));
        }
        (acc, time)
    }
}

//! Evaluation runs: pair predicted masks with gold masks by file stem, pool
//! the raw confusion counts over every pair, and score the pooled matrix.
//!
//! Pooling sums pixel tallies across the test set before any metric is
//! computed; it never averages per-image scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_items, Execution};
use crate::metrics::{
    auroc, format_confusion, ConfusionCounts, MetricsError, MetricsReport, RawConfusion,
};
use crate::raster::{is_image_path, load_mask, BinaryMask, PositiveClass, RasterError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("files without a counterpart: {}", .0.join(", "))]
    UnmatchedFiles(Vec<String>),
    #[error("no usable prediction/truth pairs")]
    NoPairs,
    #[error("pair {name}: {source}")]
    Pair {
        name: String,
        #[source]
        source: MetricsError,
    },
    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub name: String,
    pub pred: String,
    pub truth: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<RawConfusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    /// Why the pair was left out of the pooled counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub method_name: String,
    pub pairs: Vec<PairResult>,
    pub aggregate: ConfusionCounts,
    pub report: MetricsReport,
    /// AUROC from error rates quoted alongside a replayed matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auroc_from_published_rates: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched: Vec<String>,
}

impl EvalRun {
    pub fn from_counts(method_name: impl Into<String>, aggregate: ConfusionCounts) -> Self {
        Self {
            method_name: method_name.into(),
            pairs: Vec::new(),
            report: MetricsReport::compute(&aggregate),
            aggregate,
            auroc_from_published_rates: None,
            unmatched: Vec::new(),
        }
    }

    pub fn skipped_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.error.is_some()).count()
    }
}

/// Evaluates in-memory `(name, pred, truth)` triples and pools them.
pub fn evaluate_masks(
    method_name: &str,
    pairs: &[(String, BinaryMask, BinaryMask)],
    strict: bool,
    exec: Execution,
) -> Result<EvalRun> {
    let counted = map_items(pairs, exec, |(_, pred, truth)| {
        RawConfusion::from_masks(pred, truth)
    });
    let mut results = Vec::with_capacity(pairs.len());
    let mut pooled = RawConfusion::default();
    let mut used = 0;
    for ((name, _, _), counts) in pairs.iter().zip(counted) {
        results.push(pair_result(name, name, name, counts, strict, &mut pooled, &mut used)?);
    }
    finish(method_name, results, pooled, used, Vec::new())
}

fn pair_result(
    name: &str,
    pred: &str,
    truth: &str,
    counts: std::result::Result<RawConfusion, MetricsError>,
    strict: bool,
    pooled: &mut RawConfusion,
    used: &mut usize,
) -> Result<PairResult> {
    match counts {
        Ok(raw) => {
            *pooled += raw;
            *used += 1;
            let report = ConfusionCounts::from_raw(raw)
                .map(|c| MetricsReport::compute(&c))
                .ok();
            Ok(PairResult {
                name: name.to_string(),
                pred: pred.to_string(),
                truth: truth.to_string(),
                counts: Some(raw),
                report,
                error: None,
            })
        }
        Err(source) if strict => Err(EvalError::Pair {
            name: name.to_string(),
            source,
        }),
        Err(e) => {
            log::warn!("pair {name} skipped: {e}");
            Ok(PairResult {
                name: name.to_string(),
                pred: pred.to_string(),
                truth: truth.to_string(),
                counts: None,
                report: None,
                error: Some(e.to_string()),
            })
        }
    }
}

fn finish(
    method_name: &str,
    pairs: Vec<PairResult>,
    pooled: RawConfusion,
    used: usize,
    unmatched: Vec<String>,
) -> Result<EvalRun> {
    if used == 0 {
        return Err(EvalError::NoPairs);
    }
    let aggregate = ConfusionCounts::from_raw(pooled)?;
    let mut run = EvalRun::from_counts(method_name, aggregate);
    run.pairs = pairs;
    run.unmatched = unmatched;
    Ok(run)
}

fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let io_err = |source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && is_image_path(&path) {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.insert(stem, path);
        }
    }
    Ok(out)
}

/// `(stem, pred, truth)` for files sharing a stem.
pub type StemPair = (String, PathBuf, PathBuf);

/// Pairs sharing a file stem, plus the file names that have no counterpart.
pub fn match_pairs(pred_dir: &Path, truth_dir: &Path) -> Result<(Vec<StemPair>, Vec<String>)> {
    let preds = images_by_stem(pred_dir)?;
    let mut truths = images_by_stem(truth_dir)?;
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for (stem, pred) in preds {
        match truths.remove(&stem) {
            Some(truth) => pairs.push((stem, pred, truth)),
            None => unmatched.push(pred.display().to_string()),
        }
    }
    unmatched.extend(truths.into_values().map(|p| p.display().to_string()));
    Ok((pairs, unmatched))
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub method_name: String,
    pub strict: bool,
    pub exec: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            method_name: "external-prediction".into(),
            strict: false,
            exec: Execution::available(),
        }
    }
}

/// Loads and pools every stem-matched pair of masks. Masks are read as
/// 8-bit images with intensities ≥ 128 marking neuron pixels.
pub fn evaluate_dirs(
    pred_dir: impl AsRef<Path>,
    truth_dir: impl AsRef<Path>,
    opts: &EvalOptions,
) -> Result<EvalRun> {
    let (pairs, unmatched) = match_pairs(pred_dir.as_ref(), truth_dir.as_ref())?;
    if !unmatched.is_empty() {
        if opts.strict || pairs.is_empty() {
            return Err(EvalError::UnmatchedFiles(unmatched));
        }
        log::warn!("{} file(s) without a counterpart", unmatched.len());
    }
    let counted = map_items(&pairs, opts.exec, |(_, pred, truth)| -> Result<_> {
        let pred = load_mask(pred, PositiveClass::Neuron)?;
        let truth = load_mask(truth, PositiveClass::Neuron)?;
        Ok(RawConfusion::from_masks(&pred, &truth))
    });
    let mut results = Vec::with_capacity(pairs.len());
    let mut pooled = RawConfusion::default();
    let mut used = 0;
    for ((stem, pred, truth), counts) in pairs.iter().zip(counted) {
        results.push(pair_result(
            stem,
            &pred.display().to_string(),
            &truth.display().to_string(),
            counts?,
            opts.strict,
            &mut pooled,
            &mut used,
        )?);
    }
    finish(&opts.method_name, results, pooled, used, unmatched)
}

/// A published confusion matrix: rows actual (background, neuron), columns
/// predicted (background, neuron), optionally with the error rates quoted
/// next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedMatrix {
    pub method: String,
    pub matrix: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fnr: Option<f64>,
}

impl PublishedMatrix {
    pub fn to_run(&self) -> std::result::Result<EvalRun, MetricsError> {
        let counts = ConfusionCounts::from_published_matrix(self.matrix)?;
        let mut run = EvalRun::from_counts(self.method.clone(), counts);
        run.auroc_from_published_rates = self.fpr.zip(self.fnr).map(|(p, n)| auroc(p, n));
        Ok(run)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a JSON array of [`PublishedMatrix`] entries (a single object is
/// also accepted).
pub fn load_published(path: impl AsRef<Path>) -> Result<Vec<PublishedMatrix>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<PublishedMatrix>),
        One(PublishedMatrix),
    }
    match serde_json::from_str::<OneOrMany>(&text) {
        Ok(OneOrMany::Many(v)) => Ok(v),
        Ok(OneOrMany::One(m)) => Ok(vec![m]),
        Err(e) => Err(EvalError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
    }
}

pub fn replay_published(path: impl AsRef<Path>) -> Result<Vec<EvalRun>> {
    let path = path.as_ref();
    load_published(path)?
        .iter()
        .map(|m| {
            m.to_run().map_err(|e| EvalError::Malformed {
                path: path.to_path_buf(),
                reason: format!("{}: {e}", m.method),
            })
        })
        .collect()
}

/// Reads one run or an array of runs from a JSON file.
pub fn load_runs(path: impl AsRef<Path>) -> Result<Vec<EvalRun>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<EvalRun>),
        One(Box<EvalRun>),
    }
    match serde_json::from_str::<OneOrMany>(&text) {
        Ok(OneOrMany::Many(v)) => Ok(v),
        Ok(OneOrMany::One(r)) => Ok(vec![*r]),
        Err(e) => Err(EvalError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt6(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
}

const CSV_HEADER: [&str; 14] = [
    "name",
    "tp",
    "tn",
    "fp",
    "fn",
    "acc",
    "jac",
    "dice",
    "kap",
    "fpr",
    "fnr",
    "auroc",
    "kappa_label",
    "auroc_label",
];

fn csv_row(name: &str, c: &ConfusionCounts, r: &MetricsReport) -> Vec<String> {
    vec![
        name.to_string(),
        c.tp.to_string(),
        c.tn.to_string(),
        c.fp.to_string(),
        c.fn_.to_string(),
        r.acc.to_string(),
        opt(r.jac),
        opt(r.dice),
        opt(r.kap),
        opt(r.fpr),
        opt(r.fnr),
        opt(r.auroc),
        r.kappa_label.clone().unwrap_or_default(),
        r.auroc_label.clone().unwrap_or_default(),
    ]
}

/// One CSV row per evaluated pair followed by the pooled row.
pub fn run_to_csv(run: &EvalRun) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for pair in &run.pairs {
        if let (Some(raw), Some(report)) = (pair.counts, &pair.report) {
            if let Ok(c) = ConfusionCounts::from_raw(raw) {
                w.write_record(csv_row(&pair.name, &c, report))
                    .expect("in-memory write");
            }
        }
    }
    w.write_record(csv_row("POOLED", &run.aggregate, &run.report))
        .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn sorted_runs(runs: &[EvalRun]) -> Vec<&EvalRun> {
    let mut sorted: Vec<&EvalRun> = runs.iter().collect();
    sorted.sort_by(|a, b| a.method_name.cmp(&b.method_name));
    sorted
}

/// Side-by-side table of kappa and AUROC per method, rows ordered by
/// method name, followed by each method's confusion matrix.
pub fn comparison_table(runs: &[EvalRun]) -> String {
    let runs = sorted_runs(runs);
    let width = runs
        .iter()
        .map(|r| r.method_name.len())
        .max()
        .unwrap_or(0)
        .max("Method".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>10}  {:>10}  {:<26}  AUROC agreement",
        "Method", "Kappa", "AUROC", "Kappa agreement"
    );
    for r in &runs {
        let _ = writeln!(
            out,
            "{:<width$}  {:>10}  {:>10}  {:<26}  {}",
            r.method_name,
            opt6(r.report.kap),
            opt6(r.report.auroc),
            r.report.kappa_label.as_deref().unwrap_or("n/a"),
            r.report.auroc_label.as_deref().unwrap_or("n/a"),
        );
    }
    for r in &runs {
        let _ = write!(out, "\n{}\n{}", r.method_name, format_confusion(&r.aggregate));
    }
    out
}

pub fn comparison_csv(runs: &[EvalRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "kappa", "auroc", "kappa_label", "auroc_label"])
        .expect("in-memory write");
    for r in sorted_runs(runs) {
        w.write_record([
            r.method_name.clone(),
            opt(r.report.kap),
            opt(r.report.auroc),
            r.report.kappa_label.clone().unwrap_or_default(),
            r.report.auroc_label.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

//! Segmentation scores over a 2×2 confusion matrix.
//!
//! Counts are fractions of all pixels, so the total `N` is 1. The neuron is
//! the positive class; background is negative. When counts come from masks
//! the raw integer tallies are kept alongside the fractions and the ratio
//! metrics are evaluated from the integers, which keeps degenerate cases
//! exact (a constant predictor has kappa exactly 0).
//!
//! `auroc` is the area under the ROC polygon of a single operating point,
//! `1 − (FPR + FNR) / 2`, i.e. balanced accuracy. It is not an integral over
//! score thresholds; the inputs here are hard masks.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{BinaryMask, PositiveClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("prediction is {0}x{1} but truth is {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("masks must both mark the neuron class (got {pred:?} and {truth:?})")]
    ClassMismatch {
        pred: PositiveClass,
        truth: PositiveClass,
    },
    #[error("invalid confusion counts: {0}")]
    InvalidCounts(String),
    #[error("no positives in either mask; overlap scores are undefined")]
    EmptyUnion,
    #[error("all mass in one cell; chance agreement is 1 and kappa is undefined")]
    DegenerateAgreement,
    #[error("no actual negatives; false-positive rate is undefined")]
    NoNegatives,
    #[error("no actual positives; false-negative rate is undefined")]
    NoPositives,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Integer pixel tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct RawConfusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl RawConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn from_masks(pred: &BinaryMask, truth: &BinaryMask) -> Result<Self> {
        if pred.dims() != truth.dims() {
            let (pw, ph) = pred.dims();
            let (tw, th) = truth.dims();
            return Err(MetricsError::DimensionMismatch(pw, ph, tw, th));
        }
        if pred.positive_class() != PositiveClass::Neuron
            || truth.positive_class() != PositiveClass::Neuron
        {
            return Err(MetricsError::ClassMismatch {
                pred: pred.positive_class(),
                truth: truth.positive_class(),
            });
        }
        let mut raw = RawConfusion::default();
        for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
            match (p, t) {
                (true, true) => raw.tp += 1,
                (false, false) => raw.tn += 1,
                (true, false) => raw.fp += 1,
                (false, true) => raw.fn_ += 1,
            }
        }
        Ok(raw)
    }
}

impl Add for RawConfusion {
    type Output = RawConfusion;

    fn add(self, rhs: Self) -> Self {
        RawConfusion {
            tp: self.tp + rhs.tp,
            tn: self.tn + rhs.tn,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

impl AddAssign for RawConfusion {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for RawConfusion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(RawConfusion::default(), Add::add)
    }
}

/// Confusion fractions with `tp + tn + fp + fn ≈ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawConfusion>,
}

impl ConfusionCounts {
    /// Tolerance on the total for exact fractions.
    pub const SUM_TOLERANCE: f64 = 1e-9;
    /// Tolerance on the total for matrices published to four decimals.
    pub const PUBLISHED_SUM_TOLERANCE: f64 = 5e-4;

    pub fn new(tp: f64, tn: f64, fp: f64, fn_: f64) -> Result<Self> {
        Self::with_tolerance(tp, tn, fp, fn_, Self::SUM_TOLERANCE)
    }

    pub fn with_tolerance(tp: f64, tn: f64, fp: f64, fn_: f64, tol: f64) -> Result<Self> {
        for (name, v) in [("tp", tp), ("tn", tn), ("fp", fp), ("fn", fn_)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(MetricsError::InvalidCounts(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        let total = tp + tn + fp + fn_;
        if (total - 1.0).abs() > tol {
            return Err(MetricsError::InvalidCounts(format!(
                "fractions sum to {total}, not 1 (tolerance {tol})"
            )));
        }
        Ok(Self {
            tp,
            tn,
            fp,
            fn_,
            raw: None,
        })
    }

    /// From a matrix laid out as rows = actual (background, neuron) and
    /// columns = predicted (background, neuron), rounded to four decimals.
    pub fn from_published_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        let [[tn, fp], [fn_, tp]] = m;
        Self::with_tolerance(tp, tn, fp, fn_, Self::PUBLISHED_SUM_TOLERANCE)
    }

    pub fn from_raw(raw: RawConfusion) -> Result<Self> {
        let n = raw.total();
        if n == 0 {
            return Err(MetricsError::InvalidCounts("no pixels".into()));
        }
        let n = n as f64;
        Ok(Self {
            tp: raw.tp as f64 / n,
            tn: raw.tn as f64 / n,
            fp: raw.fp as f64 / n,
            fn_: raw.fn_ as f64 / n,
            raw: Some(raw),
        })
    }

    /// 2×2 layout: rows actual, columns predicted.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }
}

pub fn confusion_from_masks(pred: &BinaryMask, truth: &BinaryMask) -> Result<ConfusionCounts> {
    ConfusionCounts::from_raw(RawConfusion::from_masks(pred, truth)?)
}

/// `(a / b)` evaluated from integers when raw tallies are present.
fn ratio(c: &ConfusionCounts, num: impl Fn(&RawConfusion) -> u64, den: impl Fn(&RawConfusion) -> u64, f: (f64, f64)) -> f64 {
    match &c.raw {
        Some(raw) => num(raw) as f64 / den(raw) as f64,
        None => f.0 / f.1,
    }
}

/// Fraction of pixels classified correctly.
pub fn accuracy(c: &ConfusionCounts) -> f64 {
    ratio(
        c,
        |r| r.tp + r.tn,
        RawConfusion::total,
        (c.tp + c.tn, c.tp + c.tn + c.fp + c.fn_),
    )
}

/// Intersection over union of the positive class.
pub fn jaccard(c: &ConfusionCounts) -> Result<f64> {
    let den = c.tp + c.fp + c.fn_;
    if den <= 0.0 {
        return Err(MetricsError::EmptyUnion);
    }
    Ok(ratio(c, |r| r.tp, |r| r.tp + r.fp + r.fn_, (c.tp, den)))
}

pub fn dice(c: &ConfusionCounts) -> Result<f64> {
    let den = 2.0 * c.tp + c.fp + c.fn_;
    if den <= 0.0 {
        return Err(MetricsError::EmptyUnion);
    }
    Ok(ratio(c, |r| 2 * r.tp, |r| 2 * r.tp + r.fp + r.fn_, (2.0 * c.tp, den)))
}

/// Dice expressed through the Jaccard index, `2J / (1 + J)`.
pub fn dice_from_jaccard(jac: f64) -> f64 {
    2.0 * jac / (1.0 + jac)
}

/// Cohen's kappa together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kap: f64,
    /// Observed agreement probability (`fa / N`).
    pub pa: f64,
    /// Chance agreement probability (`fc / N`).
    pub pc: f64,
    /// Observed agreement, `tp + tn`.
    pub fa: f64,
    /// Agreement expected by chance from the marginals.
    pub fc: f64,
}

/// Observed and chance agreement for the matrix, as `(fa, fc)` with `N = 1`.
pub fn agreement(c: &ConfusionCounts) -> (f64, f64) {
    let fa = c.tp + c.tn;
    let fc = (c.tn + c.fn_) * (c.tn + c.fp) + (c.fp + c.tp) * (c.fn_ + c.tp);
    (fa, fc)
}

pub fn kappa(c: &ConfusionCounts) -> Result<Kappa> {
    let (fa, fc) = agreement(c);
    let kap = match &c.raw {
        Some(r) => {
            let n = r.total() as i128;
            let (tp, tn, fp, fn_) = (r.tp as i128, r.tn as i128, r.fp as i128, r.fn_ as i128);
            let chance = (tn + fn_) * (tn + fp) + (fp + tp) * (fn_ + tp);
            let num = n * (tp + tn) - chance;
            let den = n * n - chance;
            if den == 0 {
                return Err(MetricsError::DegenerateAgreement);
            }
            num as f64 / den as f64
        }
        None => {
            if 1.0 - fc <= 1e-12 {
                return Err(MetricsError::DegenerateAgreement);
            }
            (fa - fc) / (1.0 - fc)
        }
    };
    Ok(Kappa {
        kap,
        pa: fa,
        pc: fc,
        fa,
        fc,
    })
}

/// `(fpr, fnr)`.
pub fn error_rates(c: &ConfusionCounts) -> (Result<f64>, Result<f64>) {
    let fpr = if c.fp + c.tn > 0.0 {
        Ok(ratio(c, |r| r.fp, |r| r.fp + r.tn, (c.fp, c.fp + c.tn)))
    } else {
        Err(MetricsError::NoNegatives)
    };
    let fnr = if c.fn_ + c.tp > 0.0 {
        Ok(ratio(c, |r| r.fn_, |r| r.fn_ + r.tp, (c.fn_, c.fn_ + c.tp)))
    } else {
        Err(MetricsError::NoPositives)
    };
    (fpr, fnr)
}

/// Single-operating-point AUROC, `1 − (fpr + fnr) / 2`.
pub fn auroc(fpr: f64, fnr: f64) -> f64 {
    1.0 - (fpr + fnr) / 2.0
}

/// Landis–Koch agreement bands for kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaBand {
    None,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl KappaBand {
    pub fn label(self) -> &'static str {
        match self {
            KappaBand::None => "no agreement",
            KappaBand::Slight => "slight agreement",
            KappaBand::Fair => "fair agreement",
            KappaBand::Moderate => "moderate agreement",
            KappaBand::Substantial => "substantial agreement",
            KappaBand::AlmostPerfect => "almost perfect agreement",
        }
    }
}

impl fmt::Display for KappaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bands: `(−∞, 0)`, `[0, .2]`, `(.2, .4]`, `(.4, .6]`, `(.6, .8]`, `(.8, 1]`.
pub fn classify_kappa(kap: f64) -> KappaBand {
    if kap < 0.0 {
        KappaBand::None
    } else if kap <= 0.20 {
        KappaBand::Slight
    } else if kap <= 0.40 {
        KappaBand::Fair
    } else if kap <= 0.60 {
        KappaBand::Moderate
    } else if kap <= 0.80 {
        KappaBand::Substantial
    } else {
        KappaBand::AlmostPerfect
    }
}

/// Academic-grade bands for AUROC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AurocBand {
    WorseThanChance,
    F,
    D,
    C,
    B,
    A,
}

impl AurocBand {
    pub fn label(self) -> &'static str {
        match self {
            AurocBand::WorseThanChance => "worse than chance",
            AurocBand::F => "no agreement (F)",
            AurocBand::D => "poor agreement (D)",
            AurocBand::C => "fair agreement (C)",
            AurocBand::B => "good agreement (B)",
            AurocBand::A => "excellent agreement (A)",
        }
    }
}

impl fmt::Display for AurocBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lower-inclusive bands of width 0.1 from 0.5; below 0.5 is worse than chance.
pub fn classify_auroc(a: f64) -> AurocBand {
    if a < 0.5 {
        AurocBand::WorseThanChance
    } else if a < 0.6 {
        AurocBand::F
    } else if a < 0.7 {
        AurocBand::D
    } else if a < 0.8 {
        AurocBand::C
    } else if a < 0.9 {
        AurocBand::B
    } else {
        AurocBand::A
    }
}

/// Every score for one confusion matrix. Undefined scores are `None` and
/// the reason is listed in `undefined`; nothing is ever NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub jac: Option<f64>,
    pub dice: Option<f64>,
    pub kap: Option<f64>,
    pub pa: f64,
    pub pc: f64,
    pub fa: f64,
    pub fc: f64,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub auroc: Option<f64>,
    pub kappa_label: Option<String>,
    pub auroc_label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl MetricsReport {
    pub fn compute(c: &ConfusionCounts) -> Self {
        let mut undefined = Vec::new();
        let mut keep = |r: Result<f64>| match r {
            Ok(v) => Some(v),
            Err(e) => {
                let msg = e.to_string();
                if !undefined.contains(&msg) {
                    undefined.push(msg);
                }
                None
            }
        };
        let jac = keep(jaccard(c));
        let dice = keep(dice(c));
        let (fa, fc) = agreement(c);
        let kap = keep(kappa(c).map(|k| k.kap));
        let (fpr, fnr) = error_rates(c);
        let (fpr, fnr) = (keep(fpr), keep(fnr));
        let auroc = fpr.zip(fnr).map(|(p, n)| auroc(p, n));
        Self {
            acc: accuracy(c),
            jac,
            dice,
            kap,
            pa: fa,
            pc: fc,
            fa,
            fc,
            fpr,
            fnr,
            auroc,
            kappa_label: kap.map(|k| classify_kappa(k).label().to_string()),
            auroc_label: auroc.map(|a| classify_auroc(a).label().to_string()),
            undefined,
        }
    }
}

/// Renders the matrix as a 2×2 table (rows actual, columns predicted)
/// followed by the two error rates.
pub fn format_confusion(c: &ConfusionCounts) -> String {
    let (fpr, fnr) = error_rates(c);
    let rate = |r: Result<f64>| r.map(|v| format!("{v:.6}")).unwrap_or_else(|_| "n/a".into());
    format!(
        "{:<18}  {:>20}  {:>16}\n{:<18}  {:>20.4}  {:>16.4}\n{:<18}  {:>20.4}  {:>16.4}\nFNR = {}, FPR = {}\n",
        "",
        "Predicted Background",
        "Predicted Neuron",
        "Actual Background",
        c.tn,
        c.fp,
        "Actual Neuron",
        c.fn_,
        c.tp,
        rate(fnr),
        rate(fpr),
    )
}

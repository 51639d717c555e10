use super::EvalError;
use crate::audio_io::{Label, Priors};

/// Binary classification metrics in percent, depressed as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// Set when no recording was predicted depressed; precision is then 0.
    pub precision_undefined: bool,
    /// Set when no recording is depressed; recall is then 0.
    pub recall_undefined: bool,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let n = tp + fp + tn + fn_;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        let accuracy = ratio(tp + tn, n);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            accuracy,
            precision,
            recall,
            f1,
            tp,
            fp,
            tn,
            fn_,
            precision_undefined: tp + fp == 0,
            recall_undefined: tp + fn_ == 0,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn get(&self, metric: MetricName) -> f64 {
        match metric {
            MetricName::Accuracy => self.accuracy,
            MetricName::Precision => self.precision,
            MetricName::Recall => self.recall,
            MetricName::F1 => self.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [Self::Accuracy, Self::Precision, Self::Recall, Self::F1];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Accuracy => "accuracy",
            Self::Precision => "precision",
            Self::Recall => "recall",
            Self::F1 => "f1",
        }
    }
}

pub fn compute_metrics(preds: &[Label], truth: &[Label]) -> Result<Metrics, EvalError> {
    if preds.len() != truth.len() || preds.is_empty() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, t) in preds.iter().zip(truth) {
        match (p, t) {
            (Label::Depressed, Label::Depressed) => tp += 1,
            (Label::Depressed, Label::Control) => fp += 1,
            (Label::Control, Label::Control) => tn += 1,
            (Label::Control, Label::Depressed) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}

/// Expected metrics of a classifier that guesses each class with its prior
/// probability: accuracy `p(c)² + p(d)²`, precision = recall = F1 = `p(d)`.
pub fn random_baseline(priors: Priors) -> Result<Metrics, EvalError> {
    let (c, d) = (priors.control, priors.depressed);
    let valid = (0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&d) && ((c + d) - 1.0).abs() < 1e-9;
    if !valid {
        return Err(EvalError::InvalidPriors { control: c, depressed: d });
    }
    Ok(Metrics {
        accuracy: 100.0 * (c * c + d * d),
        precision: 100.0 * d,
        recall: 100.0 * d,
        f1: 100.0 * d,
        ..Metrics::default()
    })
}

/// Percentage by which the error rate `100 - accuracy` shrinks from `base`
/// to `improved`.
pub fn relative_error_reduction(base_accuracy: f64, improved_accuracy: f64) -> Result<f64, EvalError> {
    if !(base_accuracy > 0.0 && base_accuracy <= 100.0) || !(0.0..=100.0).contains(&improved_accuracy) {
        return Err(EvalError::InvalidAccuracy(base_accuracy.min(improved_accuracy)));
    }
    let base_err = 100.0 - base_accuracy;
    if base_err == 0.0 {
        return Err(EvalError::PerfectBaseline);
    }
    Ok(100.0 * (base_err - (100.0 - improved_accuracy)) / base_err)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, n }
    }

    /// Standard error of the mean, `std / √n`.
    pub fn sem(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std / (self.n as f64).sqrt()
        }
    }
}

//! L1-loss (hinge) linear SVM trained by dual coordinate descent.
//!
//! The bias is learned as the weight of a constant unit feature appended to
//! every standardized input, so it is regularized together with `w`.

use super::{ModelError, Standardizer};
use crate::audio_io::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop when the spread of projected gradients falls below this.
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-6,
            max_passes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub standardizer: Standardizer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmPrediction {
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: LinearSvm,
    /// Dual objective `½‖w‖² − Σα` after each pass.
    pub dual_objective: Vec<f64>,
    pub converged: bool,
}

impl LinearSvm {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let z = self.standardizer.transform(x);
        Ok(self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Label is depressed when the score is non-negative.
    pub fn predict(&self, x: &[f64]) -> Result<SvmPrediction, ModelError> {
        let score = self.decision(x)?;
        let label = if score >= 0.0 {
            Label::Depressed
        } else {
            Label::Control
        };
        Ok(SvmPrediction { label, score })
    }

    pub fn predict_batch<R: AsRef<[f64]>>(&self, xs: &[R]) -> Result<Vec<SvmPrediction>, ModelError> {
        xs.iter().map(|x| self.predict(x.as_ref())).collect()
    }
}

/// Fits a soft-margin linear SVM minimizing `½‖w‖² + C·Σ hinge` on z-scored inputs.
///
/// Coordinates are visited in index order every pass, so the result depends
/// only on `(xs, labels, config)`.
pub fn svm_train<R: AsRef<[f64]>>(xs: &[R], labels: &[Label], config: &SvmConfig) -> Result<SvmFit, ModelError> {
    if xs.len() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: xs.len(),
            found: labels.len(),
        });
    }
    if config.c <= 0.0 || !config.c.is_finite() {
        return Err(ModelError::InvalidConfig(format!("C = {}", config.c)));
    }
    let first = labels.first().ok_or(ModelError::SingleClass)?;
    if labels.iter().all(|l| l == first) {
        return Err(ModelError::SingleClass);
    }
    let d = xs[0].as_ref().len();
    if let Some(bad) = xs.iter().find(|x| x.as_ref().len() != d) {
        return Err(ModelError::DimensionMismatch {
            expected: d,
            found: bad.as_ref().len(),
        });
    }

    let standardizer = Standardizer::fit(xs.iter().map(|x| x.as_ref()), d);
    // Augmented rows [z, 1].
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mut z = standardizer.transform(x.as_ref());
            z.push(1.0);
            z
        })
        .collect();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let qii: Vec<f64> = rows.iter().map(|r| r.iter().map(|v| v * v).sum()).collect();
    let c = config.c;

    let mut alpha = vec![0.0; rows.len()];
    let mut w = vec![0.0; d + 1];
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_passes {
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for i in 0..rows.len() {
            let xi = &rows[i];
            let g = y[i] * xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                let new = (old - g / qii[i]).clamp(0.0, c);
                let step = (new - old) * y[i];
                if step != 0.0 {
                    for (wj, xj) in w.iter_mut().zip(xi) {
                        *wj += step * xj;
                    }
                }
                alpha[i] = new;
            }
        }
        let half_norm = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        trace.push(half_norm - alpha.iter().sum::<f64>());
        if pg_max - pg_min < config.tol {
            converged = true;
            break;
        }
    }
    let bias = w.pop().unwrap_or(0.0);
    Ok(SvmFit {
        model: LinearSvm {
            weights: w,
            bias,
            c,
            standardizer,
        },
        dual_objective: trace,
        converged,
    })
}

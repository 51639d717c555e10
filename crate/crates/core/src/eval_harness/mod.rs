//! Speaker-disjoint k-fold evaluation of the four approaches, repeated with
//! seeded training, plus the random baseline, window-length sweeps and
//! training-time measurement.

mod approaches;
mod config;
mod dataset;
mod metrics;
mod protocol;
mod report;
mod timing;

use std::fmt;
use std::str::FromStr;

pub use approaches::{AveragedMatrixSvm, Classifier, FrameSequenceLstm, MatrixSequenceLstm, MeanVectorSvm, StandardizedLstm};
pub use config::{parse_grid, RunConfig};
pub use dataset::{cache_path, load_dataset, Dataset, FEATURE_CACHE_EXT};
pub use metrics::{compute_metrics, random_baseline, relative_error_reduction, MetricName, Metrics, Summary};
pub use protocol::{
    best_by_accuracy, fold_partition, run_approach, run_protocol, sweep_l, MetricsReport, Pooling, ProtocolConfig,
};
pub use report::{baseline_text, plot_tsv, repetitions_tsv, report_tsv, PLOT_HEADER, REPORT_HEADER};
pub use timing::{hardware_descriptor, time_folds, timing_report, TimingReport};

use crate::audio_io::AudioError;
use crate::corr_repr::CorrError;
use crate::dsp_features::FeatureError;
use crate::models::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproachId {
    /// SVM on the mean feature vector.
    Bl1,
    /// SVM on the averaged correlation matrix.
    App1,
    /// LSTM on 128-frame blocks with majority voting.
    Bl2,
    /// LSTM on the correlation-matrix sequence.
    App2,
}

impl ApproachId {
    pub const ALL: [ApproachId; 4] = [Self::Bl1, Self::App1, Self::Bl2, Self::App2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bl1 => "bl1",
            Self::App1 => "app1",
            Self::Bl2 => "bl2",
            Self::App2 => "app2",
        }
    }

    /// Whether the approach is parameterized by the window length L.
    pub fn uses_l(self) -> bool {
        matches!(self, Self::App1 | Self::App2)
    }
}

impl fmt::Display for ApproachId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ApproachId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown approach {s:?} (expected bl1, app1, bl2 or app2)"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{preds} predictions for {truth} labels")]
    LengthMismatch { preds: usize, truth: usize },
    #[error("priors ({control}, {depressed}) do not form a distribution")]
    InvalidPriors { control: f64, depressed: f64 },
    #[error("accuracy {0} outside the valid range")]
    InvalidAccuracy(f64),
    #[error("baseline accuracy is 100; error reduction undefined")]
    PerfectBaseline,
    #[error("fold {0} leaves an empty training or test partition")]
    FoldEmpty(usize),
    #[error("speaker {speaker} is in both partitions of fold {fold}")]
    SpeakerLeak { speaker: String, fold: usize },
    #[error("window length {0} must be even and at least 2")]
    InvalidL(usize),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Data(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approach_names_round_trip() {
        for a in ApproachId::ALL {
            assert_eq!(a.as_str().parse::<ApproachId>().unwrap(), a);
        }
        assert!("svm".parse::<ApproachId>().is_err());
        assert!(ApproachId::App1.uses_l() && !ApproachId::Bl2.uses_l());
    }
}

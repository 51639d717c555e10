//! Classifiers: a soft-margin linear SVM and an LSTM sequence classifier.

mod artifact;
mod lstm;
mod rmsprop;
mod sequence;
mod standardize;
mod svm;

pub use artifact::{decode_artifact, encode_artifact, read_artifact, write_artifact, ConfigEcho, ModelArtifact, ModelKind};
pub use lstm::{lstm_train, softmax2, LstmArch, LstmModel, TrainConfig, TrainExample, TrainOutcome, DEFAULT_HIDDEN};
pub use rmsprop::{rmsprop_step, RmsProp};
pub use sequence::{majority_vote, split_subsequences, SUBSEQUENCE_LEN};
pub use standardize::Standardizer;
pub use svm::{svm_train, LinearSvm, SvmConfig, SvmFit, SvmPrediction};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("expected input dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input sequence is empty")]
    EmptySequence,
    #[error("sequence of {frames} frames is shorter than {len}")]
    SequenceTooShort { frames: usize, len: usize },
    #[error("majority vote over no predictions")]
    EmptyVote,
    #[error("training loss became non-finite at epoch {epoch}")]
    DivergenceDetected { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model artifact: {0}")]
    Artifact(String),
}

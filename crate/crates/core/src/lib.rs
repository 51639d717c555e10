//! Speech depression detection from sliding-window feature-correlation matrices.
//!
//! The pipeline turns a recording into a sequence of 32-dimensional frame
//! descriptors ([`dsp_features`]), slices that sequence into half-overlapping
//! windows and summarizes each window by its Fisher-transformed feature
//! correlation matrix ([`corr_repr`]), then classifies recordings with a
//! linear SVM or an LSTM ([`models`]) under a speaker-disjoint k-fold protocol
//! ([`eval_harness`]). [`marker_analysis`] measures how stable the correlation
//! structure is from one window to the next, and [`synth_corpus`] generates
//! corpora whose classes differ only in that stability.

pub mod audio_io;
mod binfmt;
pub mod corr_repr;
pub mod dsp_features;
pub mod eval_harness;
pub mod marker_analysis;
pub mod synth_corpus;
pub mod models;

pub use audio_io::{CorpusManifest, Label, Priors, RecordingEntry, Waveform};
pub use dsp_features::{FeatureConfig, FeatureSequence};

//! Audio ingestion: WAV decoding, sample-rate conversion and corpus manifests.

mod manifest;
mod resample;
mod wav;

use std::path::PathBuf;

pub use manifest::{
    load_manifest, parse_manifest, CorpusManifest, Label, Priors, RecordingEntry,
};
pub use resample::{resample, MIN_TARGET_RATE, RESAMPLER_TAPS};
pub use wav::{load_wav, write_wav_pcm16};

/// Rate every recording is converted to on ingest.
pub const CANONICAL_RATE: u32 = 16_000;

/// Mono audio signal with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no frames")]
    EmptyAudio,
    #[error("target rate {0} Hz is below the {MIN_TARGET_RATE} Hz minimum")]
    RateTooLow(u32),
    #[error("manifest line {line}: {message}")]
    ManifestFormat { line: usize, message: String },
    #[error("manifest line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("speaker {speaker} appears in folds {first} and {second}")]
    SpeakerFoldViolation {
        speaker: String,
        first: usize,
        second: usize,
    },
    #[error("duplicate recording id {0}")]
    DuplicateId(String),
    #[error("fold {fold} has no {label} recording")]
    FoldMissingClass { fold: usize, label: Label },
    #[error("audio file {0} does not exist")]
    MissingAudio(PathBuf),
}

/// Loads a WAV file and converts it to the canonical rate.
pub fn load_canonical(path: impl AsRef<std::path::Path>) -> Result<Waveform, AudioError> {
    let w = load_wav(path)?;
    resample(&w, CANONICAL_RATE)
}

//! Per-frame low-level descriptors and their first differences.
//!
//! Every 25 ms analysis window (10 ms hop) yields 16 descriptors in the fixed
//! order `[energy, mfcc1..mfcc12, f0, zcr, vp]`. [`append_deltas`] doubles that
//! to 32 by appending frame-to-frame differences.

mod cache;
mod framing;
mod mfcc;
mod pitch;

pub use cache::{decode_feature_cache, encode_feature_cache, read_feature_cache, write_feature_cache};
pub use framing::{frame_count, frame_signal, Frame};
pub use mfcc::{mfcc, MfccExtractor, FFT_SIZE, LOG_FLOOR, MEL_FILTERS, NUM_CEPS, PRE_EMPHASIS};
pub use pitch::{f0_and_voicing, Pitch, F0_MAX_HZ, F0_MIN_HZ};

use crate::audio_io::Waveform;

/// Number of base descriptors per frame.
pub const LLD_DIM: usize = 16;
/// Descriptors plus deltas.
pub const FEATURE_DIM: usize = 2 * LLD_DIM;

pub const LLD_NAMES: [&str; LLD_DIM] = [
    "energy", "mfcc1", "mfcc2", "mfcc3", "mfcc4", "mfcc5", "mfcc6", "mfcc7", "mfcc8", "mfcc9",
    "mfcc10", "mfcc11", "mfcc12", "f0", "zcr", "vp",
];

pub const DEFAULT_VOICING_THRESHOLD: f64 = 0.45;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureError {
    #[error("waveform has {samples} samples, shorter than one {window}-sample window")]
    TooShort { samples: usize, window: usize },
    #[error("feature sequence is empty")]
    EmptySequence,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub window_ms: u32,
    pub hop_ms: u32,
    pub voicing_threshold: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            window_ms: 25,
            hop_ms: 10,
            voicing_threshold: DEFAULT_VOICING_THRESHOLD,
        }
    }
}

/// Frames × dimensions matrix of per-frame feature values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    recording_id: String,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(recording_id: impl Into<String>, dim: usize, values: Vec<f64>) -> Result<Self, FeatureError> {
        if dim == 0 || values.is_empty() {
            return Err(FeatureError::EmptySequence);
        }
        if !values.len().is_multiple_of(dim) {
            return Err(FeatureError::DimensionMismatch {
                expected: dim,
                found: values.len() % dim,
            });
        }
        Ok(Self {
            recording_id: recording_id.into(),
            dim,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(recording_id: impl Into<String>, rows: &[R]) -> Result<Self, FeatureError> {
        let dim = rows.first().ok_or(FeatureError::EmptySequence)?.as_ref().len();
        let mut values = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(FeatureError::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(recording_id, dim, values)
    }

    pub fn recording_id(&self) -> &str {
        &self.recording_id
    }

    pub fn set_recording_id(&mut self, id: impl Into<String>) {
        self.recording_id = id.into();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    /// Contiguous block of frames `start..end`, row-major.
    pub fn block(&self, start: usize, end: usize) -> &[f64] {
        &self.values[start * self.dim..end * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Root mean square amplitude of a frame.
pub fn rms_energy(frame: &[f64]) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    (frame.iter().map(|v| v * v).sum::<f64>() / frame.len() as f64).sqrt()
}

/// Strict sign changes between consecutive samples per millisecond of frame.
/// Zero-valued samples never count as a crossing.
pub fn zcr(frame: &[f64], rate: u32) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    let crossings = frame.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let duration_ms = frame.len() as f64 * 1000.0 / rate as f64;
    crossings as f64 / duration_ms
}

/// Stateful extractor that reuses the MFCC filterbank and FFT plan across frames.
pub struct FeatureExtractor {
    config: FeatureConfig,
    rate: u32,
    mfcc: MfccExtractor,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig, rate: u32) -> Self {
        let window = (rate as u64 * config.window_ms as u64 / 1000) as usize;
        Self {
            config,
            rate,
            mfcc: MfccExtractor::new(rate, window),
        }
    }

    /// The 16 descriptors of one frame.
    pub fn frame_llds(&self, frame: &[f64]) -> [f64; LLD_DIM] {
        let mut out = [0.0; LLD_DIM];
        out[0] = rms_energy(frame);
        out[1..13].copy_from_slice(&self.mfcc.compute(frame));
        let p = f0_and_voicing(frame, self.rate, self.config.voicing_threshold);
        out[13] = p.f0;
        out[14] = zcr(frame, self.rate);
        out[15] = p.vp;
        out
    }

    pub fn llds(&self, w: &Waveform, recording_id: &str) -> Result<FeatureSequence, FeatureError> {
        debug_assert_eq!(w.sample_rate, self.rate);
        let frames = frame_signal(w, self.config.window_ms, self.config.hop_ms)?;
        let mut values = Vec::with_capacity(frames.len() * LLD_DIM);
        for f in &frames {
            values.extend_from_slice(&self.frame_llds(f.samples));
        }
        FeatureSequence::new(recording_id, LLD_DIM, values)
    }

    /// Full 32-dimensional sequence.
    pub fn extract(&self, w: &Waveform, recording_id: &str) -> Result<FeatureSequence, FeatureError> {
        append_deltas(&self.llds(w, recording_id)?)
    }
}

/// 16-dimensional descriptor sequence of a waveform.
pub fn extract_llds(w: &Waveform, config: &FeatureConfig) -> Result<FeatureSequence, FeatureError> {
    FeatureExtractor::new(*config, w.sample_rate).llds(w, "")
}

/// 32-dimensional descriptor + delta sequence of a waveform.
pub fn extract_features(w: &Waveform, config: &FeatureConfig, recording_id: &str) -> Result<FeatureSequence, FeatureError> {
    FeatureExtractor::new(*config, w.sample_rate).extract(w, recording_id)
}

/// Appends first differences `x_t - x_{t-1}`; the first frame gets a zero delta.
pub fn append_deltas(s: &FeatureSequence) -> Result<FeatureSequence, FeatureError> {
    if s.dim() != LLD_DIM {
        return Err(FeatureError::DimensionMismatch {
            expected: LLD_DIM,
            found: s.dim(),
        });
    }
    let mut values = Vec::with_capacity(s.frames() * FEATURE_DIM);
    let mut prev: Option<&[f64]> = None;
    for row in s.rows() {
        values.extend_from_slice(row);
        match prev {
            None => values.extend_from_slice(&[0.0; LLD_DIM]),
            Some(p) => values.extend(row.iter().zip(p).map(|(a, b)| a - b)),
        }
        prev = Some(row);
    }
    FeatureSequence::new(s.recording_id(), FEATURE_DIM, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / 16_000.0).sin())
            .collect()
    }

    #[test]
    fn rms_cases() {
        assert_eq!(rms_energy(&[0.0; 400]), 0.0);
        assert!((rms_energy(&[-0.3; 400]) - 0.3).abs() < 1e-15);
        // 200 Hz over 400 samples is exactly 5 periods.
        let a = 0.7;
        let r = rms_energy(&sine(200.0, a, 400));
        assert!((r - a / 2f64.sqrt()).abs() / (a / 2f64.sqrt()) < 1e-3);
    }

    #[test]
    fn zcr_cases() {
        assert_eq!(zcr(&[0.5; 400], 16_000), 0.0);
        assert_eq!(zcr(&[0.0; 400], 16_000), 0.0);
        let alt: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((zcr(&alt, 16_000) - 15.96).abs() < 1e-12);
        // A zero between opposite signs breaks the run and is not counted.
        assert_eq!(zcr(&[1.0, 0.0, -1.0], 16_000), 0.0);
    }

    #[test]
    fn silence_llds() {
        let w = Waveform::new(vec![0.0; 16_000], 16_000);
        let s = extract_llds(&w, &FeatureConfig::default()).unwrap();
        assert_eq!(s.frames(), 98);
        for row in s.rows() {
            assert_eq!(row[0], 0.0);
            assert!(row[1..13].iter().all(|v| v.abs() < 1e-9));
            assert_eq!(&row[13..], &[0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn sine_llds() {
        let a = 0.5;
        let w = Waveform::new(sine(200.0, a, 16_000), 16_000);
        let s = extract_llds(&w, &FeatureConfig::default()).unwrap();
        for row in s.rows() {
            assert!((row[13] - 200.0).abs() <= 4.0, "f0 {}", row[13]);
            assert!(row[15] >= 0.9);
            assert!((row[0] - a / 2f64.sqrt()).abs() < 1e-3 * a);
        }
    }

    #[test]
    fn framing_is_local() {
        let a: Vec<f64> = (0..8_000).map(|i| ((i * 31 % 97) as f64 / 97.0) - 0.5).collect();
        let b: Vec<f64> = sine(180.0, 0.4, 9_000);
        let cfg = FeatureConfig::default();
        let fa = extract_llds(&Waveform::new(a.clone(), 16_000), &cfg).unwrap();
        let fb = extract_llds(&Waveform::new(b.clone(), 16_000), &cfg).unwrap();
        let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
        let fj = extract_llds(&Waveform::new(joined, 16_000), &cfg).unwrap();
        // Frames entirely inside `a` are unchanged.
        for t in 0..fa.frames() {
            assert_eq!(fj.row(t), fa.row(t));
        }
        // Frames entirely inside `b` start at hop-aligned offsets; 8000 = 50 hops.
        for t in 0..fb.frames() {
            assert_eq!(fj.row(50 + t), fb.row(t));
        }
    }

    #[test]
    fn deltas() {
        let v: Vec<f64> = (1..=16).map(|i| i as f64).collect();
        let rows = vec![v.clone(), v.iter().map(|x| 2.0 * x).collect(), v.iter().map(|x| 4.0 * x).collect()];
        let s = FeatureSequence::from_rows("x", &rows).unwrap();
        let d = append_deltas(&s).unwrap();
        assert_eq!(d.dim(), 32);
        assert_eq!(&d.row(0)[16..], &[0.0; 16]);
        assert_eq!(&d.row(1)[16..], v.as_slice());
        let two_v: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert_eq!(&d.row(2)[16..], two_v.as_slice());

        let constant = FeatureSequence::from_rows("c", &vec![v.clone(); 5]).unwrap();
        assert!(append_deltas(&constant).unwrap().rows().all(|r| r[16..].iter().all(|&x| x == 0.0)));

        let single = FeatureSequence::from_rows("s", &[v.clone()]).unwrap();
        let d = append_deltas(&single).unwrap();
        assert_eq!(d.frames(), 1);
        assert_eq!(&d.row(0)[..16], v.as_slice());
        assert_eq!(&d.row(0)[16..], &[0.0; 16]);
    }

    #[test]
    fn deltas_need_sixteen_dims() {
        let s = FeatureSequence::new("x", 4, vec![0.0; 8]).unwrap();
        assert!(matches!(append_deltas(&s), Err(FeatureError::DimensionMismatch { .. })));
    }

    #[test]
    fn extraction_is_deterministic() {
        let w = Waveform::new(sine(140.0, 0.3, 12_000), 16_000);
        let cfg = FeatureConfig::default();
        assert_eq!(
            extract_features(&w, &cfg, "r").unwrap(),
            extract_features(&w, &cfg, "r").unwrap()
        );
    }
}

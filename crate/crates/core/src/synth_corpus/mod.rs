//! Seeded synthetic corpora whose two classes differ only in how stable
//! their feature-correlation structure is over time.
//!
//! Feature-level frames are `x = √(1-ν)·F·g + √ν·e` with `g ~ N(0, I_m)`,
//! `e ~ N(0, I_32)` and unit-norm rows in `F`, so every feature has mean 0
//! and variance 1 in both classes. The stable class keeps the corpus-wide
//! factor `F` fixed; the drifting class turns each row of `F` by a small
//! random angle every `drift_period` frames.

mod wave;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub use wave::generate_wave_recording;

use crate::audio_io::{write_wav_pcm16, AudioError, CorpusManifest, Label, RecordingEntry};
use crate::dsp_features::{frame_count, write_feature_cache, FeatureSequence, FEATURE_DIM};
use crate::eval_harness::Dataset;

/// Class of a synthetic recording. Stable recordings are labeled control,
/// drifting ones depressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthClass {
    Stable,
    Drifting,
}

impl SynthClass {
    pub fn label(self) -> Label {
        match self {
            Self::Stable => Label::Control,
            Self::Drifting => Label::Depressed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMode {
    Features,
    Wave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_per_class: usize,
    pub k: usize,
    /// Mean and standard deviation of stable-class durations, seconds.
    pub stable_duration_s: (f64, f64),
    pub drifting_duration_s: (f64, f64),
    /// Durations are clamped from below to this many seconds.
    pub min_duration_s: f64,
    /// Number of latent factors behind the 32 features.
    pub latent_dim: usize,
    /// Share of each feature's variance that is independent noise.
    pub noise_fraction: f64,
    /// Per-step perturbation size of the drifting class's factor rows.
    pub drift_rate: f64,
    /// Frames between drift steps.
    pub drift_period: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_per_class: 20,
            k: 5,
            stable_duration_s: (52.9, 5.0),
            drifting_duration_s: (47.4, 5.0),
            min_duration_s: 10.0,
            latent_dim: 4,
            noise_fraction: 0.3,
            drift_rate: 0.15,
            drift_period: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const FRAME_WINDOW: usize = 400;
const FRAME_HOP: usize = 160;
const SAMPLE_RATE: u32 = 16_000;

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        if self.k < 2 || self.n_per_class < self.k {
            return bad(format!("need k ≥ 2 and at least k recordings per class (k = {}, n = {})", self.k, self.n_per_class));
        }
        if !(self.drift_rate >= 0.0 && self.drift_rate.is_finite()) {
            return bad(format!("drift rate {}", self.drift_rate));
        }
        if self.drift_period == 0 {
            return bad("drift period must be positive".into());
        }
        if self.latent_dim == 0 || self.latent_dim > FEATURE_DIM {
            return bad(format!("latent dimension {}", self.latent_dim));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return bad(format!("noise fraction {}", self.noise_fraction));
        }
        let (m1, s1) = self.stable_duration_s;
        let (m2, s2) = self.drifting_duration_s;
        if !(m1 > 0.0 && m2 > 0.0 && s1 >= 0.0 && s2 >= 0.0) {
            return bad("durations must be positive".into());
        }
        if self.min_duration_s.is_nan() || self.min_duration_s * 1000.0 < 25.0 {
            return bad(format!("minimum duration {} s is shorter than one frame", self.min_duration_s));
        }
        Ok(())
    }

    /// Smallest duration that still yields `windows` windows of `l` frames.
    pub fn duration_for(l: usize, windows: usize) -> f64 {
        let frames = l + (windows.max(1) - 1) * l / 2;
        ((frames - 1) * FRAME_HOP + FRAME_WINDOW) as f64 / SAMPLE_RATE as f64
    }
}

/// FNV-1a hash of a recording id, used to pick its random stream.
pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// The random stream of one recording: corpus seed plus a stream derived from its id.
pub fn recording_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(id) | 1);
    rng
}

fn normalize(row: &mut [f64]) {
    let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    row.iter_mut().for_each(|v| *v /= n);
}

/// Corpus-wide `32 × m` factor with unit-norm rows, from stream 0 of the seed.
pub fn base_factor(p: &SynthParams) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(0);
    let m = p.latent_dim;
    let mut f: Vec<f64> = (0..FEATURE_DIM * m).map(|_| rng.sample(StandardNormal)).collect();
    f.chunks_exact_mut(m).for_each(normalize);
    f
}

fn duration(class: SynthClass, p: &SynthParams, rng: &mut ChaCha8Rng) -> f64 {
    let (mean, sd) = match class {
        SynthClass::Stable => p.stable_duration_s,
        SynthClass::Drifting => p.drifting_duration_s,
    };
    let d = if sd > 0.0 {
        Normal::new(mean, sd).expect("valid normal").sample(rng)
    } else {
        mean
    };
    d.max(p.min_duration_s)
}

fn frames_for(seconds: f64) -> usize {
    let samples = (seconds * SAMPLE_RATE as f64).round() as usize;
    frame_count(samples, FRAME_WINDOW, FRAME_HOP).unwrap_or(1)
}

/// 32-dimensional frames for one recording. Uses the recording's own random
/// stream, so the result depends only on `(class, params, id)`.
pub fn generate_feature_recording(class: SynthClass, p: &SynthParams, id: &str) -> Result<FeatureSequence, SynthError> {
    p.validate()?;
    let mut f = base_factor(p);
    let mut rng = recording_rng(p.seed, id);
    let n = frames_for(duration(class, p, &mut rng));
    let m = p.latent_dim;
    let signal = (1.0 - p.noise_fraction).sqrt();
    let noise = p.noise_fraction.sqrt();
    let drift = match class {
        SynthClass::Stable => 0.0,
        SynthClass::Drifting => p.drift_rate,
    };

    let mut values = Vec::with_capacity(n * FEATURE_DIM);
    let mut g = vec![0.0; m];
    for t in 0..n {
        if drift > 0.0 && t > 0 && t % p.drift_period == 0 {
            for row in f.chunks_exact_mut(m) {
                for v in row.iter_mut() {
                    *v += drift * rng.sample::<f64, _>(StandardNormal);
                }
                normalize(row);
            }
        }
        g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for row in f.chunks_exact(m) {
            let s: f64 = row.iter().zip(&g).map(|(a, b)| a * b).sum();
            values.push(signal * s + noise * rng.sample::<f64, _>(StandardNormal));
        }
    }
    FeatureSequence::new(id, FEATURE_DIM, values).map_err(|e| SynthError::InvalidParams(e.to_string()))
}

/// Manifest entries: stable recordings `c000…`, then drifting `d000…`; the
/// i-th recording of each class goes to fold `i mod k`; one speaker each.
pub fn corpus_entries(p: &SynthParams, ext: &str) -> Vec<(RecordingEntry, SynthClass)> {
    let mut out = Vec::with_capacity(2 * p.n_per_class);
    for (class, prefix) in [(SynthClass::Stable, 'c'), (SynthClass::Drifting, 'd')] {
        for i in 0..p.n_per_class {
            let id = format!("{prefix}{i:03}");
            out.push((
                RecordingEntry {
                    speaker_id: format!("spk-{id}"),
                    audio_path: format!("{id}.{ext}").into(),
                    id,
                    label: class.label(),
                    fold: i % p.k,
                },
                class,
            ));
        }
    }
    out
}

/// Feature-level corpus held in memory.
pub fn generate_dataset(p: &SynthParams) -> Result<Dataset, SynthError> {
    use rayon::prelude::*;
    p.validate()?;
    let entries = corpus_entries(p, "andrf");
    let features = entries
        .par_iter()
        .map(|(e, class)| generate_feature_recording(*class, p, &e.id))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = CorpusManifest::new(entries.into_iter().map(|(e, _)| e).collect())?;
    Dataset::new(manifest, features).map_err(|e| SynthError::InvalidParams(e.to_string()))
}

/// Writes `manifest.csv` plus one feature cache or WAV per recording into
/// `out_dir`, and returns the manifest with absolute audio paths.
pub fn generate_corpus(p: &SynthParams, mode: SynthMode, out_dir: &Path) -> Result<CorpusManifest, SynthError> {
    use rayon::prelude::*;
    p.validate()?;
    let io = |path: &Path, source| SynthError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let ext = match mode {
        SynthMode::Features => "andrf",
        SynthMode::Wave => "wav",
    };
    let entries = corpus_entries(p, ext);
    entries.par_iter().try_for_each(|(e, class)| -> Result<(), SynthError> {
        let path = out_dir.join(&e.audio_path);
        match mode {
            SynthMode::Features => {
                let s = generate_feature_recording(*class, p, &e.id)?;
                write_feature_cache(&path, &s).map_err(|err| io(&path, err))
            }
            SynthMode::Wave => Ok(write_wav_pcm16(&path, &generate_wave_recording(*class, p, &e.id)?)?),
        }
    })?;
    let mut manifest = CorpusManifest::new(entries.into_iter().map(|(e, _)| e).collect())?;
    let manifest_path = out_dir.join("manifest.csv");
    std::fs::write(&manifest_path, manifest.to_csv()).map_err(|e| io(&manifest_path, e))?;
    for e in &mut manifest.entries {
        e.audio_path = out_dir.join(&e.audio_path);
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr_repr::corr_flats;
    use crate::marker_analysis::consecutive_stability;

    fn small() -> SynthParams {
        SynthParams {
            stable_duration_s: (12.0, 1.0),
            drifting_duration_s: (12.0, 1.0),
            ..SynthParams::default()
        }
    }

    #[test]
    fn marginals_match_across_classes() {
        let p = SynthParams {
            noise_fraction: 0.3,
            drift_rate: 0.3,
            ..small()
        };
        let a = generate_feature_recording(SynthClass::Stable, &p, "a").unwrap();
        let b = generate_feature_recording(SynthClass::Drifting, &p, "b").unwrap();
        for s in [&a, &b] {
            let n = s.frames() as f64;
            for d in 0..FEATURE_DIM {
                let col: Vec<f64> = s.rows().map(|r| r[d]).collect();
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                // Unit-variance features: the mean has standard error 1/√n.
                assert!(mean.abs() < 4.0 / n.sqrt(), "dim {d} mean {mean}");
                assert!((var - 1.0).abs() < 0.15, "dim {d} var {var}");
            }
        }
    }

    #[test]
    fn stable_windows_are_stable() {
        let p = small();
        let s = generate_feature_recording(SynthClass::Stable, &p, "s").unwrap();
        let rho = consecutive_stability(&corr_flats(&s, 100).unwrap()).unwrap();
        assert!(rho > 0.8, "{rho}");
        let d = generate_feature_recording(SynthClass::Drifting, &p, "d").unwrap();
        let rho_d = consecutive_stability(&corr_flats(&d, 100).unwrap()).unwrap();
        assert!(rho_d < rho);
    }

    #[test]
    fn regeneration_is_identical() {
        let p = small();
        let a = generate_feature_recording(SynthClass::Drifting, &p, "x").unwrap();
        let b = generate_feature_recording(SynthClass::Drifting, &p, "x").unwrap();
        assert_eq!(a, b);
        let c = generate_feature_recording(SynthClass::Drifting, &p, "y").unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn corpus_layout() {
        let p = small();
        let entries = corpus_entries(&p, "andrf");
        assert_eq!(entries.len(), 40);
        for f in 0..5 {
            let in_fold: Vec<_> = entries.iter().filter(|(e, _)| e.fold == f).collect();
            assert_eq!(in_fold.len(), 8);
            assert_eq!(in_fold.iter().filter(|(e, _)| e.label == Label::Depressed).count(), 4);
        }
    }

    #[test]
    fn durations_respect_minimum() {
        let p = SynthParams {
            stable_duration_s: (1.0, 0.0),
            min_duration_s: 8.0,
            ..small()
        };
        let s = generate_feature_recording(SynthClass::Stable, &p, "short").unwrap();
        assert_eq!(s.frames(), frames_for(8.0));
        assert!(SynthParams::duration_for(500, 2) <= 8.0);
    }

    #[test]
    fn invalid_params() {
        for p in [
            SynthParams { n_per_class: 3, ..small() },
            SynthParams { drift_rate: -0.1, ..small() },
            SynthParams { latent_dim: 0, ..small() },
            SynthParams { noise_fraction: 1.0, ..small() },
        ] {
            assert!(matches!(p.validate(), Err(SynthError::InvalidParams(_))));
        }
    }
}

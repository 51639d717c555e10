use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{duration, recording_rng, SynthClass, SynthError, SynthParams, SAMPLE_RATE};
use crate::audio_io::Waveform;

const F0_LOW: f64 = 100.0;
const F0_HIGH: f64 = 250.0;
const F0_SWEEP_S: f64 = 3.0;
const HARMONICS: usize = 4;
const STABLE_COUPLING: f64 = 0.6;

/// Voiced harmonic signal whose F0 sweeps 100–250 Hz, plus low-passed
/// noise. Amplitude follows pitch through a coupling coefficient that is
/// constant for the stable class and random-walks for the drifting class.
pub fn generate_wave_recording(class: SynthClass, p: &SynthParams, id: &str) -> Result<Waveform, SynthError> {
    p.validate()?;
    let mut rng = recording_rng(p.seed, id);
    let n = (duration(class, p, &mut rng) * SAMPLE_RATE as f64).round() as usize;
    let rate = SAMPLE_RATE as f64;
    let sweep_phase: f64 = rng.random_range(0.0..1.0);
    let slow_rate: f64 = rng.random_range(0.4..0.9);
    let step_samples = p.drift_period * 160;
    let harmonic_norm: f64 = (1..=HARMONICS).map(|h| 1.0 / h as f64).sum();

    let mut coupling = STABLE_COUPLING;
    let mut phase = 0.0f64;
    let mut noise_state = 0.0f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        if class == SynthClass::Drifting && i > 0 && i % step_samples == 0 {
            let step: f64 = rng.sample(StandardNormal);
            coupling = (coupling + p.drift_rate * step).clamp(-1.0, 1.0);
        }
        let t = i as f64 / rate;
        // Triangle sweep in [0, 1].
        let u = (t / F0_SWEEP_S + sweep_phase).fract();
        let tri = 1.0 - (2.0 * u - 1.0).abs();
        let f0 = F0_LOW + (F0_HIGH - F0_LOW) * tri;
        phase = (phase + 2.0 * PI * f0 / rate) % (2.0 * PI * HARMONICS as f64);
        let pitch_dev = 2.0 * tri - 1.0;
        let amp = 0.25 * (1.0 + 0.5 * coupling * pitch_dev + 0.2 * (2.0 * PI * slow_rate * t).sin());
        let voiced: f64 = (1..=HARMONICS).map(|h| (h as f64 * phase).sin() / h as f64).sum::<f64>() / harmonic_norm;
        let white: f64 = rng.sample(StandardNormal);
        noise_state = 0.9 * noise_state + 0.1 * white;
        samples.push((amp * voiced + 0.02 * noise_state).clamp(-1.0, 1.0));
    }
    Ok(Waveform::new(samples, SAMPLE_RATE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::{load_wav, write_wav_pcm16};
    use crate::dsp_features::{extract_llds, FeatureConfig, DEFAULT_VOICING_THRESHOLD};

    fn params() -> SynthParams {
        SynthParams {
            stable_duration_s: (4.0, 0.0),
            drifting_duration_s: (4.0, 0.0),
            min_duration_s: 3.0,
            drift_rate: 0.3,
            ..SynthParams::default()
        }
    }

    #[test]
    fn round_trips_and_is_voiced() {
        let p = params();
        let w = generate_wave_recording(SynthClass::Drifting, &p, "w1").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w1.wav");
        write_wav_pcm16(&path, &w).unwrap();
        let back = load_wav(&path).unwrap();
        assert_eq!(back.len(), w.len());
        let s = extract_llds(&back, &FeatureConfig::default()).unwrap();
        let min_frames = ((w.duration_s() - 0.025) / 0.010).floor() as usize;
        assert!(s.frames() >= min_frames);
        let voiced = s.rows().filter(|r| r[15] > DEFAULT_VOICING_THRESHOLD).count();
        assert!(voiced as f64 >= 0.8 * s.frames() as f64, "{voiced}/{}", s.frames());
    }

    #[test]
    fn deterministic_per_id() {
        let p = params();
        let a = generate_wave_recording(SynthClass::Stable, &p, "same").unwrap();
        let b = generate_wave_recording(SynthClass::Stable, &p, "same").unwrap();
        assert_eq!(a, b);
        assert!(a.samples.iter().all(|s| s.abs() <= 1.0));
    }
}

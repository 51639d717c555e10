//! Mel-frequency cepstral coefficients 1–12.
//!
//! Pipeline: pre-emphasis, Hamming window, 512-point power spectrum,
//! 26 triangular mel filters over 0 Hz–Nyquist, floored natural log,
//! orthonormal DCT-II. Coefficient 0 is dropped.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub const PRE_EMPHASIS: f64 = 0.97;
pub const FFT_SIZE: usize = 512;
pub const MEL_FILTERS: usize = 26;
pub const NUM_CEPS: usize = 12;
pub const LOG_FLOOR: f64 = 1e-10;

pub(crate) fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub(crate) fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

pub struct MfccExtractor {
    fft_size: usize,
    window: Vec<f64>,
    filters: Vec<MelFilter>,
    // Rows 1..=12 of the orthonormal DCT-II matrix.
    dct: Vec<[f64; MEL_FILTERS]>,
    fft: Arc<dyn Fft<f64>>,
}

impl MfccExtractor {
    pub fn new(rate: u32, frame_len: usize) -> Self {
        let fft_size = FFT_SIZE.max(frame_len.next_power_of_two());
        let window = (0..frame_len)
            .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (frame_len.max(2) - 1) as f64).cos())
            .collect();

        let nyquist = rate as f64 / 2.0;
        let mel_max = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..MEL_FILTERS + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (MEL_FILTERS + 1) as f64))
            .collect();
        let bins = fft_size / 2 + 1;
        let bin_hz = rate as f64 / fft_size as f64;
        let filters = (0..MEL_FILTERS)
            .map(|m| {
                let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                let weight = |k: usize| {
                    let f = k as f64 * bin_hz;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                };
                let first_bin = (0..bins).find(|&k| weight(k) > 0.0).unwrap_or(0);
                let weights: Vec<f64> = (first_bin..bins)
                    .map(weight)
                    .take_while(|&w| w > 0.0)
                    .collect();
                MelFilter { first_bin, weights }
            })
            .collect();

        let norm = (2.0 / MEL_FILTERS as f64).sqrt();
        let dct = (1..=NUM_CEPS)
            .map(|k| {
                let mut row = [0.0; MEL_FILTERS];
                for (m, c) in row.iter_mut().enumerate() {
                    *c = norm * (PI * k as f64 * (m as f64 + 0.5) / MEL_FILTERS as f64).cos();
                }
                row
            })
            .collect();

        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        Self {
            fft_size,
            window,
            filters,
            dct,
            fft,
        }
    }

    pub fn compute(&self, frame: &[f64]) -> [f64; NUM_CEPS] {
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_size];
        let mut prev = 0.0;
        for (i, (&x, slot)) in frame.iter().zip(buf.iter_mut()).enumerate() {
            let emph = if i == 0 { x } else { x - PRE_EMPHASIS * prev };
            prev = x;
            let w = self.window.get(i).copied().unwrap_or(1.0);
            *slot = Complex::new(emph * w, 0.0);
        }
        self.fft.process(&mut buf);
        let power: Vec<f64> = buf[..self.fft_size / 2 + 1].iter().map(|c| c.norm_sqr()).collect();

        let mut log_mel = [0.0; MEL_FILTERS];
        for (out, f) in log_mel.iter_mut().zip(&self.filters) {
            let e: f64 = f
                .weights
                .iter()
                .zip(&power[f.first_bin..])
                .map(|(w, p)| w * p)
                .sum();
            *out = e.max(LOG_FLOOR).ln();
        }
        let mut ceps = [0.0; NUM_CEPS];
        for (c, row) in ceps.iter_mut().zip(&self.dct) {
            *c = row.iter().zip(&log_mel).map(|(a, b)| a * b).sum();
        }
        ceps
    }
}

/// One-shot MFCC of a single frame; builds the filterbank each call.
pub fn mfcc(frame: &[f64], rate: u32) -> [f64; NUM_CEPS] {
    MfccExtractor::new(rate, frame.len()).compute(frame)
}

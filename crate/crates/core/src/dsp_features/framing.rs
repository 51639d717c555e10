use super::FeatureError;
use crate::audio_io::Waveform;

/// A fixed-length analysis window borrowed from a waveform.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub samples: &'a [f64],
    pub index: usize,
    pub start_sample: usize,
}

/// Number of full windows of `window` samples advancing by `hop`, or `None`
/// when the signal is shorter than one window.
pub fn frame_count(n_samples: usize, window: usize, hop: usize) -> Option<usize> {
    (window > 0 && hop > 0 && n_samples >= window).then(|| (n_samples - window) / hop + 1)
}

/// Splits a waveform into overlapping frames; trailing samples that do not
/// fill a window are dropped.
pub fn frame_signal(w: &Waveform, window_ms: u32, hop_ms: u32) -> Result<Vec<Frame<'_>>, FeatureError> {
    let window = (w.sample_rate as u64 * window_ms as u64 / 1000) as usize;
    let hop = (w.sample_rate as u64 * hop_ms as u64 / 1000) as usize;
    let count = frame_count(w.len(), window, hop).ok_or(FeatureError::TooShort {
        samples: w.len(),
        window,
    })?;
    Ok((0..count)
        .map(|index| {
            let start_sample = index * hop;
            Frame {
                samples: &w.samples[start_sample..start_sample + window],
                index,
                start_sample,
            }
        })
        .collect())
}

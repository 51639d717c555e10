use std::ops::Range;

use super::ModelError;
use crate::audio_io::Label;

/// Frames per LSTM input block for frame-level sequences.
pub const SUBSEQUENCE_LEN: usize = 128;

/// Consecutive non-overlapping blocks of `len` frames; the remainder is dropped.
pub fn split_subsequences(n_frames: usize, len: usize) -> Result<Vec<Range<usize>>, ModelError> {
    if len == 0 || n_frames < len {
        return Err(ModelError::SequenceTooShort { frames: n_frames, len });
    }
    Ok((0..n_frames / len).map(|b| b * len..(b + 1) * len).collect())
}

/// Most frequent label. Ties go to depressed when the mean positive-class
/// probability is at least 0.5, otherwise to control.
pub fn majority_vote(labels: &[Label], depressed_probs: &[f64]) -> Result<Label, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptyVote);
    }
    if labels.len() != depressed_probs.len() {
        return Err(ModelError::DimensionMismatch {
            expected: labels.len(),
            found: depressed_probs.len(),
        });
    }
    let d = labels.iter().filter(|&&l| l == Label::Depressed).count();
    let c = labels.len() - d;
    Ok(match d.cmp(&c) {
        std::cmp::Ordering::Greater => Label::Depressed,
        std::cmp::Ordering::Less => Label::Control,
        std::cmp::Ordering::Equal => {
            let mean = depressed_probs.iter().sum::<f64>() / depressed_probs.len() as f64;
            if mean >= 0.5 {
                Label::Depressed
            } else {
                Label::Control
            }
        }
    })
}

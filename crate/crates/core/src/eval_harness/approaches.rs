//! The four recording classifiers: mean-vector SVM, averaged-matrix SVM,
//! frame-sequence LSTM with voting, and matrix-sequence LSTM.

use rayon::prelude::*;

use super::{Dataset, EvalError};
use crate::audio_io::Label;
use crate::corr_repr::{average_flats, corr_flats, flat_dim, mean_feature_vector};
use crate::dsp_features::FEATURE_DIM;
use crate::models::{
    lstm_train, majority_vote, split_subsequences, svm_train, LinearSvm, LstmArch, LstmModel, Standardizer, SvmConfig,
    TrainConfig, TrainExample,
};

/// A recording classifier split into a data-only preparation step and a
/// seeded fit, so representations are computed once per protocol run and
/// fit time can be measured on its own.
pub trait Classifier: Sync {
    type Prepared: Sync;
    type Model: Send;

    fn prepare(&self, data: &Dataset) -> Result<Self::Prepared, EvalError>;

    fn fit(&self, prepared: &Self::Prepared, labels: &[Label], train: &[usize], seed: u64) -> Result<Self::Model, EvalError>;

    fn predict(&self, model: &Self::Model, prepared: &Self::Prepared, test: &[usize]) -> Result<Vec<Label>, EvalError>;
}

fn fit_svm(rows: &[Vec<f64>], labels: &[Label], train: &[usize], config: &SvmConfig) -> Result<LinearSvm, EvalError> {
    let xs: Vec<&[f64]> = train.iter().map(|&i| rows[i].as_slice()).collect();
    let ys: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
    Ok(svm_train(&xs, &ys, config)?.model)
}

fn predict_svm(model: &LinearSvm, rows: &[Vec<f64>], test: &[usize]) -> Result<Vec<Label>, EvalError> {
    test.iter()
        .map(|&i| Ok(model.predict(&rows[i])?.label))
        .collect()
}

/// Linear SVM on the per-recording mean feature vector.
#[derive(Debug, Clone, Default)]
pub struct MeanVectorSvm {
    pub svm: SvmConfig,
}

impl Classifier for MeanVectorSvm {
    type Prepared = Vec<Vec<f64>>;
    type Model = LinearSvm;

    fn prepare(&self, data: &Dataset) -> Result<Self::Prepared, EvalError> {
        Ok(data.features.iter().map(mean_feature_vector).collect())
    }

    fn fit(&self, prepared: &Self::Prepared, labels: &[Label], train: &[usize], _seed: u64) -> Result<LinearSvm, EvalError> {
        fit_svm(prepared, labels, train, &self.svm)
    }

    fn predict(&self, model: &LinearSvm, prepared: &Self::Prepared, test: &[usize]) -> Result<Vec<Label>, EvalError> {
        predict_svm(model, prepared, test)
    }
}

/// Linear SVM on the z-space average of a recording's windowed correlation
/// matrices.
#[derive(Debug, Clone)]
pub struct AveragedMatrixSvm {
    pub l: usize,
    pub svm: SvmConfig,
}

impl Classifier for AveragedMatrixSvm {
    type Prepared = Vec<Vec<f64>>;
    type Model = LinearSvm;

    fn prepare(&self, data: &Dataset) -> Result<Self::Prepared, EvalError> {
        data.features
            .par_iter()
            .map(|s| Ok(average_flats(&corr_flats(s, self.l)?)?))
            .collect()
    }

    fn fit(&self, prepared: &Self::Prepared, labels: &[Label], train: &[usize], _seed: u64) -> Result<LinearSvm, EvalError> {
        fit_svm(prepared, labels, train, &self.svm)
    }

    fn predict(&self, model: &LinearSvm, prepared: &Self::Prepared, test: &[usize]) -> Result<Vec<Label>, EvalError> {
        predict_svm(model, prepared, test)
    }
}

/// A trained LSTM with the standardizer fit on its training recordings.
#[derive(Debug, Clone)]
pub struct StandardizedLstm {
    pub model: LstmModel,
    pub standardizer: Standardizer,
}

fn fit_lstm(
    config: &TrainConfig,
    arch: LstmArch,
    blocks: &[&[f64]],
    labels: &[Label],
    seed: u64,
) -> Result<StandardizedLstm, EvalError> {
    let standardizer = Standardizer::fit(blocks.iter().copied(), arch.input_dim);
    let scaled: Vec<Vec<f64>> = blocks.iter().map(|b| standardizer.transform(b)).collect();
    let examples: Vec<TrainExample> = scaled
        .iter()
        .zip(labels)
        .map(|(seq, &label)| TrainExample { seq, label })
        .collect();
    let cfg = TrainConfig { seed, ..*config };
    let model = lstm_train(&cfg, &examples, arch)?.model;
    Ok(StandardizedLstm { model, standardizer })
}

/// LSTM over non-overlapping fixed-length blocks of frames; the recording
/// label is the majority vote of its blocks.
#[derive(Debug, Clone)]
pub struct FrameSequenceLstm {
    pub train: TrainConfig,
    pub block_len: usize,
}

impl Classifier for FrameSequenceLstm {
    /// Frames of each recording truncated to a whole number of blocks.
    type Prepared = Vec<Vec<f64>>;
    type Model = StandardizedLstm;

    fn prepare(&self, data: &Dataset) -> Result<Self::Prepared, EvalError> {
        data.features
            .iter()
            .map(|s| {
                let blocks = split_subsequences(s.frames(), self.block_len)?;
                let end = blocks.last().map_or(0, |b| b.end);
                Ok(s.block(0, end).to_vec())
            })
            .collect()
    }

    fn fit(&self, prepared: &Self::Prepared, labels: &[Label], train: &[usize], seed: u64) -> Result<StandardizedLstm, EvalError> {
        let width = self.block_len * FEATURE_DIM;
        let mut blocks = Vec::new();
        let mut ys = Vec::new();
        for &i in train {
            for b in prepared[i].chunks_exact(width) {
                blocks.push(b);
                ys.push(labels[i]);
            }
        }
        fit_lstm(&self.train, LstmArch::frames(FEATURE_DIM), &blocks, &ys, seed)
    }

    fn predict(&self, model: &StandardizedLstm, prepared: &Self::Prepared, test: &[usize]) -> Result<Vec<Label>, EvalError> {
        let width = self.block_len * FEATURE_DIM;
        test.iter()
            .map(|&i| {
                let mut labels = Vec::new();
                let mut probs = Vec::new();
                for b in prepared[i].chunks_exact(width) {
                    let p = model.model.predict_proba(&model.standardizer.transform(b))?;
                    labels.push(if p[1] >= 0.5 { Label::Depressed } else { Label::Control });
                    probs.push(p[1]);
                }
                Ok(majority_vote(&labels, &probs)?)
            })
            .collect()
    }
}

/// LSTM over the sequence of flattened windowed correlation matrices, each
/// projected to the cell width by a learned linear layer.
#[derive(Debug, Clone)]
pub struct MatrixSequenceLstm {
    pub l: usize,
    pub train: TrainConfig,
}

impl MatrixSequenceLstm {
    pub const PROJECTION: usize = 32;
}

impl Classifier for MatrixSequenceLstm {
    /// Row-major `T × 496` matrix sequence per recording.
    type Prepared = Vec<Vec<f64>>;
    type Model = StandardizedLstm;

    fn prepare(&self, data: &Dataset) -> Result<Self::Prepared, EvalError> {
        data.features
            .par_iter()
            .map(|s| Ok(corr_flats(s, self.l)?.concat()))
            .collect()
    }

    fn fit(&self, prepared: &Self::Prepared, labels: &[Label], train: &[usize], seed: u64) -> Result<StandardizedLstm, EvalError> {
        let blocks: Vec<&[f64]> = train.iter().map(|&i| prepared[i].as_slice()).collect();
        let ys: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        let arch = LstmArch::projected(flat_dim(FEATURE_DIM), Self::PROJECTION);
        fit_lstm(&self.train, arch, &blocks, &ys, seed)
    }

    fn predict(&self, model: &StandardizedLstm, prepared: &Self::Prepared, test: &[usize]) -> Result<Vec<Label>, EvalError> {
        test.iter()
            .map(|&i| {
                let p = model.model.predict_proba(&model.standardizer.transform(&prepared[i]))?;
                Ok(if p[1] >= 0.5 { Label::Depressed } else { Label::Control })
            })
            .collect()
    }
}

use std::collections::HashSet;

use rayon::prelude::*;

use super::{
    compute_metrics, ApproachId, AveragedMatrixSvm, Classifier, Dataset, EvalError, FrameSequenceLstm,
    MatrixSequenceLstm, MeanVectorSvm, MetricName, Metrics, Summary,
};
use crate::audio_io::{CorpusManifest, Label};
use crate::models::{SvmConfig, TrainConfig, SUBSEQUENCE_LEN};

/// How the folds of one repetition are combined into one [`Metrics`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// One confusion table over all test predictions of the repetition.
    #[default]
    PerRepetition,
    /// Unweighted mean of the per-fold percentages; counts are still summed.
    PerFoldMacro,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub reps: usize,
    pub seed_base: u64,
    pub pooling: Pooling,
    pub train: TrainConfig,
    pub svm: SvmConfig,
    pub block_len: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            reps: 10,
            seed_base: 0,
            pooling: Pooling::PerRepetition,
            train: TrainConfig::default(),
            svm: SvmConfig::default(),
            block_len: SUBSEQUENCE_LEN,
        }
    }
}

/// Per-repetition metrics of one approach with their mean and sample std.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub approach: ApproachId,
    pub l: Option<usize>,
    pub repetitions: Vec<Metrics>,
}

impl MetricsReport {
    pub fn summary(&self, metric: MetricName) -> Summary {
        let v: Vec<f64> = self.repetitions.iter().map(|m| m.get(metric)).collect();
        Summary::of(&v)
    }

    pub fn accuracy(&self) -> Summary {
        self.summary(MetricName::Accuracy)
    }

    pub fn f1(&self) -> Summary {
        self.summary(MetricName::F1)
    }
}

/// Train and test indices for `fold`, checking that no speaker is on both sides.
pub fn fold_partition(manifest: &CorpusManifest, fold: usize) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let (test, train): (Vec<usize>, Vec<usize>) = (0..manifest.entries.len()).partition(|&i| manifest.entries[i].fold == fold);
    if test.is_empty() || train.is_empty() {
        return Err(EvalError::FoldEmpty(fold));
    }
    let train_speakers: HashSet<&str> = train.iter().map(|&i| manifest.entries[i].speaker_id.as_str()).collect();
    if let Some(&i) = test.iter().find(|&&i| train_speakers.contains(manifest.entries[i].speaker_id.as_str())) {
        return Err(EvalError::SpeakerLeak {
            speaker: manifest.entries[i].speaker_id.clone(),
            fold,
        });
    }
    Ok((train, test))
}

fn macro_average(folds: &[Metrics]) -> Metrics {
    let n = folds.len() as f64;
    let mean = |f: fn(&Metrics) -> f64| folds.iter().map(f).sum::<f64>() / n;
    Metrics {
        accuracy: mean(|m| m.accuracy),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        tp: folds.iter().map(|m| m.tp).sum(),
        fp: folds.iter().map(|m| m.fp).sum(),
        tn: folds.iter().map(|m| m.tn).sum(),
        fn_: folds.iter().map(|m| m.fn_).sum(),
        precision_undefined: folds.iter().any(|m| m.precision_undefined),
        recall_undefined: folds.iter().any(|m| m.recall_undefined),
    }
}

/// k-fold evaluation repeated `config.reps` times. Repetition `r` trains every
/// fold's model with seed `seed_base + r`. Cells run in parallel on the
/// current rayon pool; the result does not depend on the worker count.
pub fn run_protocol<C: Classifier>(
    classifier: &C,
    approach: ApproachId,
    l: Option<usize>,
    data: &Dataset,
    config: &ProtocolConfig,
) -> Result<MetricsReport, EvalError> {
    let manifest = &data.manifest;
    let labels = data.labels();
    let partitions = (0..manifest.k)
        .map(|f| fold_partition(manifest, f))
        .collect::<Result<Vec<_>, _>>()?;
    let prepared = classifier.prepare(data)?;

    let cells: Vec<(usize, usize)> = (0..config.reps).flat_map(|r| (0..manifest.k).map(move |f| (r, f))).collect();
    let outcomes = cells
        .into_par_iter()
        .map(|(r, f)| {
            let (train, test) = &partitions[f];
            let model = classifier.fit(&prepared, &labels, train, config.seed_base + r as u64)?;
            let preds = classifier.predict(&model, &prepared, test)?;
            let truth: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
            Ok((preds, truth))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let repetitions = outcomes
        .chunks(manifest.k)
        .map(|folds| match config.pooling {
            Pooling::PerRepetition => {
                let preds: Vec<Label> = folds.iter().flat_map(|(p, _)| p.iter().copied()).collect();
                let truth: Vec<Label> = folds.iter().flat_map(|(_, t)| t.iter().copied()).collect();
                compute_metrics(&preds, &truth)
            }
            Pooling::PerFoldMacro => {
                let per_fold = folds
                    .iter()
                    .map(|(p, t)| compute_metrics(p, t))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(macro_average(&per_fold))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MetricsReport {
        approach,
        l,
        repetitions,
    })
}

fn require_l(approach: ApproachId, l: Option<usize>) -> Result<usize, EvalError> {
    match l {
        Some(l) if l >= 2 && l % 2 == 0 => Ok(l),
        Some(l) => Err(EvalError::InvalidL(l)),
        None => Err(EvalError::Data(format!("{approach} needs a window length L"))),
    }
}

/// Runs the protocol for one of the four approaches. `l` is ignored by the
/// frame-level approaches.
pub fn run_approach(approach: ApproachId, l: Option<usize>, data: &Dataset, config: &ProtocolConfig) -> Result<MetricsReport, EvalError> {
    match approach {
        ApproachId::Bl1 => run_protocol(&MeanVectorSvm { svm: config.svm }, approach, None, data, config),
        ApproachId::App1 => {
            let l = require_l(approach, l)?;
            run_protocol(&AveragedMatrixSvm { l, svm: config.svm }, approach, Some(l), data, config)
        }
        ApproachId::Bl2 => {
            let c = FrameSequenceLstm {
                train: config.train,
                block_len: config.block_len,
            };
            run_protocol(&c, approach, None, data, config)
        }
        ApproachId::App2 => {
            let l = require_l(approach, l)?;
            run_protocol(&MatrixSequenceLstm { l, train: config.train }, approach, Some(l), data, config)
        }
    }
}

/// One report per grid value for a window-based approach.
pub fn sweep_l(approach: ApproachId, data: &Dataset, grid: &[usize], config: &ProtocolConfig) -> Result<Vec<MetricsReport>, EvalError> {
    if !approach.uses_l() {
        return Err(EvalError::Data(format!("{approach} does not take a window length")));
    }
    if grid.is_empty() {
        return Err(EvalError::Data("empty L grid".into()));
    }
    grid.iter().map(|&l| run_approach(approach, Some(l), data, config)).collect()
}

/// Index of the report with the highest mean accuracy; the first wins ties.
pub fn best_by_accuracy(reports: &[MetricsReport]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reports.iter().enumerate() {
        let acc = r.accuracy().mean;
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((i, acc));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::RecordingEntry;
    use crate::dsp_features::FeatureSequence;

    /// Predicts with a fixed rule; ignores training data.
    struct Stub(fn(usize, Label) -> Label);

    impl Classifier for Stub {
        type Prepared = Vec<Label>;
        type Model = ();

        fn prepare(&self, data: &Dataset) -> Result<Vec<Label>, EvalError> {
            Ok(data.labels())
        }

        fn fit(&self, _: &Vec<Label>, _: &[Label], _: &[usize], _: u64) -> Result<(), EvalError> {
            Ok(())
        }

        fn predict(&self, _: &(), prepared: &Vec<Label>, test: &[usize]) -> Result<Vec<Label>, EvalError> {
            Ok(test.iter().map(|&i| (self.0)(i, prepared[i])).collect())
        }
    }

    fn corpus(control: usize, depressed: usize, k: usize) -> Dataset {
        let mut entries = Vec::new();
        for (label, n) in [(Label::Control, control), (Label::Depressed, depressed)] {
            for i in 0..n {
                let id = format!("{}{i}", label.as_str());
                entries.push(RecordingEntry {
                    id: id.clone(),
                    speaker_id: id,
                    label,
                    fold: i % k,
                    audio_path: "x.wav".into(),
                });
            }
        }
        let manifest = CorpusManifest::new(entries).unwrap();
        let features = manifest
            .entries
            .iter()
            .map(|e| FeatureSequence::new(e.id.clone(), 32, vec![0.0; 32]).unwrap())
            .collect();
        Dataset::new(manifest, features).unwrap()
    }

    #[test]
    fn oracle_stub_is_perfect() {
        let data = corpus(10, 10, 5);
        let r = run_protocol(&Stub(|_, l| l), ApproachId::Bl1, None, &data, &ProtocolConfig::default()).unwrap();
        assert_eq!(r.repetitions.len(), 10);
        assert_eq!(r.accuracy().mean, 100.0);
        assert_eq!(r.accuracy().std, 0.0);
        assert!(r.repetitions.iter().all(|m| m.total() == 20));
    }

    #[test]
    fn constant_depressed_stub() {
        let data = corpus(54, 58, 5);
        let r = run_protocol(&Stub(|_, _| Label::Depressed), ApproachId::Bl1, None, &data, &ProtocolConfig::default()).unwrap();
        let m = r.repetitions[0];
        assert_eq!((m.tp, m.fp), (58, 54));
        assert_eq!(((m.accuracy * 10.0).round() / 10.0), 51.8);
        assert_eq!(m.recall, 100.0);
        assert_eq!(((m.precision * 10.0).round() / 10.0), 51.8);
    }

    #[test]
    fn macro_pooling_differs_only_in_averaging() {
        let data = corpus(6, 9, 3);
        let cfg = ProtocolConfig {
            pooling: Pooling::PerFoldMacro,
            reps: 2,
            ..ProtocolConfig::default()
        };
        let r = run_protocol(&Stub(|i, _| if i % 2 == 0 { Label::Depressed } else { Label::Control }), ApproachId::Bl1, None, &data, &cfg).unwrap();
        assert_eq!(r.repetitions[0].total(), 15);
    }

    #[test]
    fn speaker_leak_is_caught() {
        let mut data = corpus(4, 4, 2);
        // Bypass manifest validation to plant a cross-fold speaker.
        data.manifest.entries[1].speaker_id = data.manifest.entries[0].speaker_id.clone();
        assert!(matches!(fold_partition(&data.manifest, 0), Err(EvalError::SpeakerLeak { .. })));
    }

    #[test]
    fn best_l_selection() {
        let mk = |l, acc| MetricsReport {
            approach: ApproachId::App1,
            l: Some(l),
            repetitions: vec![Metrics { accuracy: acc, ..Metrics::default() }],
        };
        let rs = [mk(100, 70.0), mk(200, 80.0), mk(300, 80.0)];
        assert_eq!(best_by_accuracy(&rs), Some(1));
        assert_eq!(best_by_accuracy(&[]), None);
    }

    #[test]
    fn window_approaches_need_even_l() {
        let data = corpus(2, 2, 2);
        let cfg = ProtocolConfig::default();
        assert!(matches!(run_approach(ApproachId::App1, Some(101), &data, &cfg), Err(EvalError::InvalidL(101))));
        assert!(sweep_l(ApproachId::Bl1, &data, &[100], &cfg).is_err());
    }
}

use std::time::Instant;

use super::{
    fold_partition, ApproachId, AveragedMatrixSvm, Classifier, Dataset, EvalError, FrameSequenceLstm,
    MatrixSequenceLstm, MeanVectorSvm, ProtocolConfig,
};

/// Wall-clock training time of each fold's model.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub approach: ApproachId,
    pub l: Option<usize>,
    pub fold_seconds: Vec<f64>,
    pub hardware: String,
}

impl TimingReport {
    pub fn mean_seconds(&self) -> f64 {
        self.fold_seconds.iter().sum::<f64>() / self.fold_seconds.len().max(1) as f64
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# hardware: {}\napproach\tL\tfold\tseconds\n", self.hardware);
        let l = self.l.map_or("-".to_string(), |l| l.to_string());
        for (f, s) in self.fold_seconds.iter().enumerate() {
            out.push_str(&format!("{}\t{l}\t{f}\t{s:.6}\n", self.approach));
        }
        out
    }
}

/// CPU model, logical core count, OS and architecture.
pub fn hardware_descriptor() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|v| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{cpu}; {cores} logical cores; {}-{}", std::env::consts::OS, std::env::consts::ARCH)
}

/// Times `fit` alone for every fold, one fold after another, with the
/// repetition-0 seed. Preparation is done once beforehand and not timed.
pub fn time_folds<C: Classifier>(
    classifier: &C,
    approach: ApproachId,
    l: Option<usize>,
    data: &Dataset,
    seed: u64,
) -> Result<TimingReport, EvalError> {
    let labels = data.labels();
    let prepared = classifier.prepare(data)?;
    let mut fold_seconds = Vec::with_capacity(data.manifest.k);
    for f in 0..data.manifest.k {
        let (train, _) = fold_partition(&data.manifest, f)?;
        let start = Instant::now();
        let model = classifier.fit(&prepared, &labels, &train, seed)?;
        fold_seconds.push(start.elapsed().as_secs_f64());
        drop(model);
    }
    Ok(TimingReport {
        approach,
        l,
        fold_seconds,
        hardware: hardware_descriptor(),
    })
}

pub fn timing_report(approach: ApproachId, l: Option<usize>, data: &Dataset, config: &ProtocolConfig) -> Result<TimingReport, EvalError> {
    let seed = config.seed_base;
    match (approach, l) {
        (ApproachId::Bl1, _) => time_folds(&MeanVectorSvm { svm: config.svm }, approach, None, data, seed),
        (ApproachId::App1, Some(l)) => time_folds(&AveragedMatrixSvm { l, svm: config.svm }, approach, Some(l), data, seed),
        (ApproachId::Bl2, _) => {
            let c = FrameSequenceLstm {
                train: config.train,
                block_len: config.block_len,
            };
            time_folds(&c, approach, None, data, seed)
        }
        (ApproachId::App2, Some(l)) => time_folds(&MatrixSequenceLstm { l, train: config.train }, approach, Some(l), data, seed),
        (_, None) => Err(EvalError::Data(format!("{approach} needs a window length L"))),
    }
}

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::AudioError;

/// Recording class. Depressed is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Control,
    Depressed,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Control => "control",
            Label::Depressed => "depressed",
        }
    }

    /// Signed target used by the margin classifiers.
    pub fn sign(self) -> f64 {
        match self {
            Label::Control => -1.0,
            Label::Depressed => 1.0,
        }
    }

    /// Class index used by the softmax head.
    pub fn index(self) -> usize {
        match self {
            Label::Control => 0,
            Label::Depressed => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Label::Control
        } else {
            Label::Depressed
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(Label::Control),
            "depressed" => Ok(Label::Depressed),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingEntry {
    pub id: String,
    pub speaker_id: String,
    pub label: Label,
    pub fold: usize,
    pub audio_path: PathBuf,
}

/// Class priors estimated from label counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub control: f64,
    pub depressed: f64,
}

impl Priors {
    pub fn from_counts(control: usize, depressed: usize) -> Self {
        let n = (control + depressed) as f64;
        Self {
            control: control as f64 / n,
            depressed: depressed as f64 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub entries: Vec<RecordingEntry>,
    pub k: usize,
    pub priors: Priors,
}

pub const MANIFEST_HEADER: &str = "id,speaker_id,label,fold,audio_path";

impl CorpusManifest {
    /// Validates the fold partition and computes priors.
    pub fn new(entries: Vec<RecordingEntry>) -> Result<Self, AudioError> {
        if entries.is_empty() {
            return Err(AudioError::ManifestFormat {
                line: 0,
                message: "manifest has no entries".into(),
            });
        }
        let mut ids = HashSet::new();
        let mut speaker_fold: HashMap<&str, usize> = HashMap::new();
        for e in &entries {
            if !ids.insert(e.id.as_str()) {
                return Err(AudioError::DuplicateId(e.id.clone()));
            }
            match speaker_fold.get(e.speaker_id.as_str()) {
                Some(&f) if f != e.fold => {
                    return Err(AudioError::SpeakerFoldViolation {
                        speaker: e.speaker_id.clone(),
                        first: f.min(e.fold),
                        second: f.max(e.fold),
                    })
                }
                Some(_) => {}
                None => {
                    speaker_fold.insert(&e.speaker_id, e.fold);
                }
            }
        }
        let k = entries.iter().map(|e| e.fold).max().unwrap_or(0) + 1;
        let present: BTreeSet<(usize, Label)> =
            entries.iter().map(|e| (e.fold, e.label)).collect();
        for fold in 0..k {
            for label in [Label::Control, Label::Depressed] {
                if !present.contains(&(fold, label)) {
                    return Err(AudioError::FoldMissingClass { fold, label });
                }
            }
        }
        let depressed = entries
            .iter()
            .filter(|e| e.label == Label::Depressed)
            .count();
        let priors = Priors::from_counts(entries.len() - depressed, depressed);
        Ok(Self { entries, k, priors })
    }

    pub fn fold_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| self.entries[i].fold == fold)
            .collect()
    }

    /// CSV text in the manifest format. Paths are written as stored.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.id,
                e.speaker_id,
                e.label,
                e.fold,
                e.audio_path.display()
            ));
        }
        out
    }
}

/// Parses manifest CSV text. Relative audio paths are resolved against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<CorpusManifest, AudioError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
        _ => {
            return Err(AudioError::ManifestFormat {
                line: 1,
                message: format!("expected header `{MANIFEST_HEADER}`"),
            })
        }
    }
    let mut entries = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(AudioError::ManifestFormat {
                line,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(AudioError::ManifestFormat {
                line,
                message: "empty id or speaker_id".into(),
            });
        }
        let label = fields[2].parse::<Label>().map_err(|label| AudioError::UnknownLabel {
            line,
            label,
        })?;
        let fold = fields[3].parse::<usize>().map_err(|_| AudioError::ManifestFormat {
            line,
            message: format!("fold {:?} is not a non-negative integer", fields[3]),
        })?;
        let path = PathBuf::from(fields[4]);
        let audio_path = if path.is_relative() {
            base_dir.join(path)
        } else {
            path
        };
        entries.push(RecordingEntry {
            id: fields[0].to_string(),
            speaker_id: fields[1].to_string(),
            label,
            fold,
            audio_path,
        });
    }
    CorpusManifest::new(entries)
}

/// Reads and validates a manifest file. With `check_audio`, every audio path must exist.
pub fn load_manifest(path: impl AsRef<Path>, check_audio: bool) -> Result<CorpusManifest, AudioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let manifest = parse_manifest(&text, base)?;
    if check_audio {
        if let Some(e) = manifest.entries.iter().find(|e| !e.audio_path.exists()) {
            return Err(AudioError::MissingAudio(e.audio_path.clone()));
        }
    }
    Ok(manifest)
}

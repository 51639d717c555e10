use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::EvalError;
use crate::audio_io::{load_canonical, CorpusManifest, Label};
use crate::dsp_features::{
    append_deltas, read_feature_cache, write_feature_cache, FeatureConfig, FeatureExtractor, FeatureSequence,
    FEATURE_DIM, LLD_DIM,
};

/// Extension of feature cache files.
pub const FEATURE_CACHE_EXT: &str = "andrf";

/// A manifest with the 32-dimensional feature sequence of every entry, in
/// manifest order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: CorpusManifest,
    pub features: Vec<FeatureSequence>,
}

impl Dataset {
    pub fn new(manifest: CorpusManifest, features: Vec<FeatureSequence>) -> Result<Self, EvalError> {
        if manifest.entries.len() != features.len() {
            return Err(EvalError::LengthMismatch {
                preds: features.len(),
                truth: manifest.entries.len(),
            });
        }
        if let Some(bad) = features.iter().find(|f| f.dim() != FEATURE_DIM) {
            return Err(EvalError::Data(format!(
                "recording {} has dimension {}, expected {FEATURE_DIM}",
                bad.recording_id(),
                bad.dim()
            )));
        }
        Ok(Self { manifest, features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.manifest.entries.iter().map(|e| e.label).collect()
    }
}

pub fn cache_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.{FEATURE_CACHE_EXT}"))
}

fn complete(s: FeatureSequence) -> Result<FeatureSequence, EvalError> {
    match s.dim() {
        FEATURE_DIM => Ok(s),
        LLD_DIM => Ok(append_deltas(&s)?),
        d => Err(EvalError::Data(format!("feature cache dimension {d}"))),
    }
}

/// Features for every manifest entry. Entries whose path is itself a feature
/// cache are read directly; otherwise `cache_dir/<id>.andrf` is used when
/// present, and audio is decoded and extracted (and cached) when it is not.
/// Extracted values are rounded to `f32`, the precision of the cache.
pub fn load_dataset(manifest: CorpusManifest, cache_dir: Option<&Path>, config: &FeatureConfig) -> Result<Dataset, EvalError> {
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| EvalError::Data(format!("{}: {e}", dir.display())))?;
    }
    let features = manifest
        .entries
        .par_iter()
        .map(|e| {
            let is_cache = e.audio_path.extension().is_some_and(|x| x == FEATURE_CACHE_EXT);
            if is_cache {
                let mut s = complete(read_feature_cache(&e.audio_path)?)?;
                s.set_recording_id(e.id.clone());
                return Ok(s);
            }
            if let Some(dir) = cache_dir {
                let p = cache_path(dir, &e.id);
                if p.exists() {
                    return complete(read_feature_cache(&p)?);
                }
            }
            let w = load_canonical(&e.audio_path)?;
            let s = FeatureExtractor::new(*config, w.sample_rate).extract(&w, &e.id)?;
            // Round to the cache's precision so results do not depend on cache state.
            let s = FeatureSequence::new(e.id.clone(), s.dim(), s.values().iter().map(|&v| v as f32 as f64).collect())?;
            if let Some(dir) = cache_dir {
                write_feature_cache(cache_path(dir, &e.id), &s)
                    .map_err(|err| EvalError::Data(format!("writing cache for {}: {err}", e.id)))?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Dataset::new(manifest, features)
}

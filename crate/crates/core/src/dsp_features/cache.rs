//! `ANDRF001` feature cache: u32 frame count, u32 dim, row-major f32 values,
//! then the u32-length-prefixed UTF-8 recording id. All little-endian.

use std::path::Path;

use super::{FeatureError, FeatureSequence};
use crate::binfmt::{put_f32s, put_string, put_u32, Reader};

const MAGIC: &[u8; 8] = b"ANDRF001";

pub fn encode_feature_cache(s: &FeatureSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * s.values().len() + s.recording_id().len() + 4);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, s.frames() as u32);
    put_u32(&mut out, s.dim() as u32);
    put_f32s(&mut out, s.values());
    put_string(&mut out, s.recording_id());
    out
}

pub fn decode_feature_cache(bytes: &[u8]) -> Result<FeatureSequence, FeatureError> {
    let parse = || -> Result<FeatureSequence, String> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        let frames = r.u32()? as usize;
        let dim = r.u32()? as usize;
        if dim != 16 && dim != 32 {
            return Err(format!("unsupported dim {dim}"));
        }
        let values = r.f32_vec(frames * dim)?;
        let id = r.string()?;
        r.finish()?;
        FeatureSequence::new(id, dim, values).map_err(|e| e.to_string())
    };
    parse().map_err(FeatureError::Cache)
}

pub fn write_feature_cache(path: impl AsRef<Path>, s: &FeatureSequence) -> std::io::Result<()> {
    std::fs::write(path, encode_feature_cache(s))
}

pub fn read_feature_cache(path: impl AsRef<Path>) -> Result<FeatureSequence, FeatureError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| FeatureError::Cache(format!("{}: {e}", path.display())))?;
    decode_feature_cache(&bytes)
}

//! `ANDRC001` correlation cache: u32 T, u32 flat_dim, u32 L, then T·flat_dim
//! f32 values, then the length-prefixed recording id. All little-endian.

use std::path::Path;

use super::{CorrError, CorrFlat};
use crate::binfmt::{put_f32s, put_string, put_u32, Reader};

const MAGIC: &[u8; 8] = b"ANDRC001";

#[derive(Debug, Clone, PartialEq)]
pub struct CorrCache {
    pub recording_id: String,
    pub l: usize,
    pub flats: Vec<CorrFlat>,
}

pub fn encode_corr_cache(c: &CorrCache) -> Vec<u8> {
    let flat_dim = c.flats.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, c.flats.len() as u32);
    put_u32(&mut out, flat_dim as u32);
    put_u32(&mut out, c.l as u32);
    for f in &c.flats {
        put_f32s(&mut out, f);
    }
    put_string(&mut out, &c.recording_id);
    out
}

pub fn decode_corr_cache(bytes: &[u8]) -> Result<CorrCache, CorrError> {
    let parse = || -> Result<CorrCache, String> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        let t = r.u32()? as usize;
        let flat_dim = r.u32()? as usize;
        let l = r.u32()? as usize;
        let values = r.f32_vec(t * flat_dim)?;
        let recording_id = r.string()?;
        r.finish()?;
        let flats = if flat_dim == 0 {
            Vec::new()
        } else {
            values.chunks_exact(flat_dim).map(<[f64]>::to_vec).collect()
        };
        Ok(CorrCache { recording_id, l, flats })
    };
    parse().map_err(CorrError::Cache)
}

pub fn write_corr_cache(path: impl AsRef<Path>, c: &CorrCache) -> std::io::Result<()> {
    std::fs::write(path, encode_corr_cache(c))
}

pub fn read_corr_cache(path: impl AsRef<Path>) -> Result<CorrCache, CorrError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| CorrError::Cache(format!("{}: {e}", path.display())))?;
    decode_corr_cache(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_round_trip() {
        let c = CorrCache {
            recording_id: "rec".into(),
            l: 100,
            flats: vec![vec![0.25; 496], vec![-1.5; 496]],
        };
        let b = encode_corr_cache(&c);
        assert_eq!(&b[..8], b"ANDRC001");
        assert_eq!(&b[8..12], &2u32.to_le_bytes());
        assert_eq!(&b[12..16], &496u32.to_le_bytes());
        assert_eq!(&b[16..20], &100u32.to_le_bytes());
        assert_eq!(b.len(), 20 + 2 * 496 * 4 + 4 + 3);
        assert_eq!(decode_corr_cache(&b).unwrap(), c);
        assert_eq!(encode_corr_cache(&c), b);
    }
}

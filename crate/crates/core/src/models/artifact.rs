//! Model artifact file (`ANDRM001`), little-endian.
//!
//! Layout: magic, u8 kind tag (1 = SVM, 2 = LSTM), the architecture dims,
//! float64 parameters in declared order, the input standardizer, then the
//! config echo (u32 epochs, f64 learning rate, u64 seed).

use std::path::Path;

use super::{LinearSvm, LstmArch, LstmModel, ModelError, Standardizer};
use crate::binfmt::{put_f64, put_u32, put_u64, Reader};

const MAGIC: &[u8; 8] = b"ANDRM001";
const TAG_SVM: u8 = 1;
const TAG_LSTM: u8 = 2;

/// Training settings recorded alongside the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigEcho {
    pub epochs: u32,
    pub learning_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Svm(LinearSvm),
    Lstm {
        model: LstmModel,
        standardizer: Standardizer,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub model: ModelKind,
    pub config: ConfigEcho,
}

fn put_f64s(out: &mut Vec<u8>, v: &[f64]) {
    for &x in v {
        put_f64(out, x);
    }
}

fn put_standardizer(out: &mut Vec<u8>, s: &Standardizer) {
    put_u32(out, s.dim() as u32);
    put_f64s(out, &s.mean);
    put_f64s(out, &s.scale);
}

fn read_standardizer(r: &mut Reader) -> Result<Standardizer, String> {
    let d = r.u32()? as usize;
    Ok(Standardizer {
        mean: r.f64_vec(d)?,
        scale: r.f64_vec(d)?,
    })
}

pub fn encode_artifact(a: &ModelArtifact) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    match &a.model {
        ModelKind::Svm(m) => {
            out.push(TAG_SVM);
            put_u32(&mut out, m.dim() as u32);
            put_f64(&mut out, m.c);
            put_f64s(&mut out, &m.weights);
            put_f64(&mut out, m.bias);
            put_standardizer(&mut out, &m.standardizer);
        }
        ModelKind::Lstm { model, standardizer } => {
            out.push(TAG_LSTM);
            put_u32(&mut out, model.arch.input_dim as u32);
            put_u32(&mut out, model.arch.projection.unwrap_or(0) as u32);
            put_u32(&mut out, model.arch.hidden as u32);
            put_u64(&mut out, model.seed);
            put_f64s(&mut out, &model.params);
            put_standardizer(&mut out, standardizer);
        }
    }
    put_u32(&mut out, a.config.epochs);
    put_f64(&mut out, a.config.learning_rate);
    put_u64(&mut out, a.config.seed);
    out
}

pub fn decode_artifact(bytes: &[u8]) -> Result<ModelArtifact, ModelError> {
    decode(bytes).map_err(ModelError::Artifact)
}

fn decode(bytes: &[u8]) -> Result<ModelArtifact, String> {
    let mut r = Reader::new(bytes);
    r.magic(MAGIC)?;
    let model = match r.u8()? {
        TAG_SVM => {
            let d = r.u32()? as usize;
            let c = r.f64()?;
            let weights = r.f64_vec(d)?;
            let bias = r.f64()?;
            let standardizer = read_standardizer(&mut r)?;
            if standardizer.dim() != d {
                return Err(format!("standardizer dim {} for {d} weights", standardizer.dim()));
            }
            ModelKind::Svm(LinearSvm {
                weights,
                bias,
                c,
                standardizer,
            })
        }
        TAG_LSTM => {
            let input_dim = r.u32()? as usize;
            let proj = r.u32()? as usize;
            let hidden = r.u32()? as usize;
            if input_dim == 0 || hidden == 0 {
                return Err("zero architecture dimension".into());
            }
            let arch = LstmArch {
                input_dim,
                projection: (proj > 0).then_some(proj),
                hidden,
            };
            let seed = r.u64()?;
            let params = r.f64_vec(arch.n_params())?;
            let standardizer = read_standardizer(&mut r)?;
            ModelKind::Lstm {
                model: LstmModel { arch, params, seed },
                standardizer,
            }
        }
        t => return Err(format!("unknown model kind tag {t}")),
    };
    let config = ConfigEcho {
        epochs: r.u32()?,
        learning_rate: r.f64()?,
        seed: r.u64()?,
    };
    r.finish()?;
    Ok(ModelArtifact { model, config })
}

pub fn write_artifact(path: &Path, a: &ModelArtifact) -> Result<(), ModelError> {
    std::fs::write(path, encode_artifact(a)).map_err(|e| ModelError::Artifact(format!("{}: {e}", path.display())))
}

pub fn read_artifact(path: &Path) -> Result<ModelArtifact, ModelError> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::Artifact(format!("{}: {e}", path.display())))?;
    decode_artifact(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo() -> ConfigEcho {
        ConfigEcho {
            epochs: 100,
            learning_rate: 0.0005,
            seed: 42,
        }
    }

    #[test]
    fn svm_round_trip() {
        let a = ModelArtifact {
            model: ModelKind::Svm(LinearSvm {
                weights: vec![0.25, -1.5, 3.0],
                bias: -0.125,
                c: 1.0,
                standardizer: Standardizer {
                    mean: vec![1.0, 2.0, 3.0],
                    scale: vec![0.5, 1.0, 2.0],
                },
            }),
            config: echo(),
        };
        let bytes = encode_artifact(&a);
        assert_eq!(&bytes[..8], b"ANDRM001");
        assert_eq!(bytes[8], 1);
        assert_eq!(decode_artifact(&bytes).unwrap(), a);
    }

    #[test]
    fn lstm_round_trip_through_file() {
        let arch = LstmArch::projected(10, 4);
        let a = ModelArtifact {
            model: ModelKind::Lstm {
                model: LstmModel::new(arch, 9),
                standardizer: Standardizer {
                    mean: vec![0.1; 10],
                    scale: vec![2.0; 10],
                },
            },
            config: echo(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.andrm");
        write_artifact(&path, &a).unwrap();
        assert_eq!(read_artifact(&path).unwrap(), a);
    }

    #[test]
    fn rejects_damage() {
        let a = ModelArtifact {
            model: ModelKind::Lstm {
                model: LstmModel::new(LstmArch::frames(3), 1),
                standardizer: Standardizer {
                    mean: vec![0.0; 3],
                    scale: vec![1.0; 3],
                },
            },
            config: echo(),
        };
        let mut bytes = encode_artifact(&a);
        assert!(decode_artifact(&bytes[..bytes.len() - 1]).is_err());
        bytes[8] = 7;
        assert!(matches!(decode_artifact(&bytes), Err(ModelError::Artifact(_))));
        bytes[0] = b'X';
        assert!(decode_artifact(&bytes).is_err());
    }
}

//! Local feature-correlation matrices over half-overlapping windows.
//!
//! A sequence of `N` frames is cut into windows of `L` frames starting every
//! `L/2` frames. Each window becomes a Pearson correlation matrix of its
//! columns, mapped through Fisher's `atanh`. Downstream consumers only see the
//! strict lower triangle, flattened row by row.

mod cache;

use std::ops::Range;

pub use cache::{decode_corr_cache, encode_corr_cache, read_corr_cache, write_corr_cache, CorrCache};

use crate::dsp_features::FeatureSequence;

/// Correlation values are clipped to `±(1 - FISHER_EPS)` before `atanh`.
pub const FISHER_EPS: f64 = 1e-6;

/// Default window grid for length sweeps.
pub const DEFAULT_GRID: [usize; 5] = [100, 200, 300, 400, 500];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CorrError {
    #[error("sequence of {frames} frames is shorter than window length {l}")]
    SequenceTooShort { frames: usize, l: usize },
    #[error("window length {0} must be even and at least 2")]
    OddL(usize),
    #[error("flattened length {found} does not match dimension {dim}")]
    FlatLength { dim: usize, found: usize },
    #[error("correlation sequence is empty")]
    Empty,
    #[error("correlation cache: {0}")]
    Cache(String),
}

/// Length of the strict lower triangle of a `dim × dim` matrix.
pub const fn flat_dim(dim: usize) -> usize {
    dim * (dim - 1) / 2
}

/// Fisher-transformed correlation matrix of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ZCorrMatrix {
    dim: usize,
    z: Vec<f64>,
    pub window_index: usize,
    pub start_frame: usize,
}

impl ZCorrMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }
}

/// Strict lower triangle in `(1,0), (2,0), (2,1), (3,0), …` order.
pub type CorrFlat = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrSequence {
    pub l: usize,
    pub matrices: Vec<ZCorrMatrix>,
}

impl CorrSequence {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn flats(&self) -> Vec<CorrFlat> {
        self.matrices.iter().map(lower_triangle).collect()
    }
}

/// Number of windows for `n` frames, or `None` when `n < l`.
pub fn window_count(n: usize, l: usize) -> Option<usize> {
    (l >= 2 && n >= l).then(|| (n - l) / (l / 2) + 1)
}

/// Frame ranges of the half-overlapping windows; trailing frames that do not
/// fill a window are dropped.
pub fn segment(n_frames: usize, l: usize) -> Result<Vec<Range<usize>>, CorrError> {
    if l < 2 || !l.is_multiple_of(2) {
        return Err(CorrError::OddL(l));
    }
    let count = window_count(n_frames, l).ok_or(CorrError::SequenceTooShort { frames: n_frames, l })?;
    let hop = l / 2;
    Ok((0..count).map(|n| n * hop..n * hop + l).collect())
}

/// Pearson correlation matrix of the columns of a row-major `rows × dim` block.
///
/// Diagonal entries are 1. Pairs involving a zero-variance column are 0.
pub fn pearson_matrix(block: &[f64], dim: usize) -> Vec<f64> {
    let rows = block.len() / dim;
    let mut mean = vec![0.0; dim];
    for row in block.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);

    // Upper-triangular accumulation of centered cross products.
    let mut cov = vec![0.0; dim * dim];
    let mut centered = vec![0.0; dim];
    for row in block.chunks_exact(dim) {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for i in 0..dim {
            let ci = centered[i];
            let dst = &mut cov[i * dim + i..(i + 1) * dim];
            for (d, cj) in dst.iter_mut().zip(&centered[i..]) {
                *d += ci * cj;
            }
        }
    }

    let sd: Vec<f64> = (0..dim).map(|i| cov[i * dim + i].sqrt()).collect();
    let mut r = vec![0.0; dim * dim];
    for i in 0..dim {
        r[i * dim + i] = 1.0;
        for j in i + 1..dim {
            let den = sd[i] * sd[j];
            let v = if den > 0.0 {
                (cov[i * dim + j] / den).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            r[i * dim + j] = v;
            r[j * dim + i] = v;
        }
    }
    r
}

/// Fisher's z of one coefficient with the `±(1 - ε)` clip.
pub fn fisher_z(r: f64) -> f64 {
    // Evaluated on |r| so the result is exactly odd; libm's atanh is not near -1.
    let a = r.abs().min(1.0 - FISHER_EPS).atanh();
    if r < 0.0 {
        -a
    } else {
        a
    }
}

pub fn fisher_z_matrix(r: &[f64], dim: usize, window_index: usize, start_frame: usize) -> ZCorrMatrix {
    ZCorrMatrix {
        dim,
        z: r.iter().map(|&v| fisher_z(v)).collect(),
        window_index,
        start_frame,
    }
}

pub fn lower_triangle(m: &ZCorrMatrix) -> CorrFlat {
    let d = m.dim;
    let mut out = Vec::with_capacity(flat_dim(d));
    for i in 1..d {
        out.extend_from_slice(&m.z[i * d..i * d + i]);
    }
    out
}

/// Rebuilds a symmetric matrix from its strict lower triangle. The diagonal
/// holds the clipped z of a perfect correlation.
pub fn unflatten(flat: &[f64], dim: usize) -> Result<ZCorrMatrix, CorrError> {
    if dim < 2 || flat.len() != flat_dim(dim) {
        return Err(CorrError::FlatLength { dim, found: flat.len() });
    }
    let mut z = vec![fisher_z(1.0); dim * dim];
    let mut k = 0;
    for i in 1..dim {
        for j in 0..i {
            z[i * dim + j] = flat[k];
            z[j * dim + i] = flat[k];
            k += 1;
        }
    }
    Ok(ZCorrMatrix {
        dim,
        z,
        window_index: 0,
        start_frame: 0,
    })
}

/// Windowed z-correlation matrices of a feature sequence.
pub fn corr_sequence(s: &FeatureSequence, l: usize) -> Result<CorrSequence, CorrError> {
    let dim = s.dim();
    let matrices = segment(s.frames(), l)?
        .into_iter()
        .enumerate()
        .map(|(n, w)| {
            let r = pearson_matrix(s.block(w.start, w.end), dim);
            fisher_z_matrix(&r, dim, n, w.start)
        })
        .collect();
    Ok(CorrSequence { l, matrices })
}

/// Flattened lower triangles of every window, skipping the full matrix.
pub fn corr_flats(s: &FeatureSequence, l: usize) -> Result<Vec<CorrFlat>, CorrError> {
    let dim = s.dim();
    Ok(segment(s.frames(), l)?
        .into_iter()
        .map(|w| {
            let r = pearson_matrix(s.block(w.start, w.end), dim);
            let mut out = Vec::with_capacity(flat_dim(dim));
            for i in 1..dim {
                out.extend(r[i * dim..i * dim + i].iter().map(|&v| fisher_z(v)));
            }
            out
        })
        .collect())
}

/// Element-wise mean of the flattened matrices, in z-space.
pub fn average_matrix(cs: &CorrSequence) -> Result<CorrFlat, CorrError> {
    average_flats(&cs.flats())
}

pub fn average_flats(flats: &[CorrFlat]) -> Result<CorrFlat, CorrError> {
    let first = flats.first().ok_or(CorrError::Empty)?;
    let mut acc = vec![0.0; first.len()];
    for f in flats {
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
    }
    let n = flats.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Per-dimension mean over all frames.
pub fn mean_feature_vector(s: &FeatureSequence) -> Vec<f64> {
    let mut acc = vec![0.0; s.dim()];
    for row in s.rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = s.frames() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(rows: Vec<Vec<f64>>) -> FeatureSequence {
        FeatureSequence::from_rows("t", &rows).unwrap()
    }

    fn random_seq(n: usize, dim: usize, seed: u64) -> FeatureSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureSequence::new("r", dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn segment_cases() {
        let w = segment(1000, 100).unwrap();
        assert_eq!(w.len(), 19);
        assert_eq!(w.iter().map(|r| r.start).collect::<Vec<_>>(), (0..19).map(|n| n * 50).collect::<Vec<_>>());
        assert_eq!(w.last().unwrap().end, 1000);
        assert_eq!(segment(100, 100).unwrap(), vec![0..100]);
        assert_eq!(segment(99, 100), Err(CorrError::SequenceTooShort { frames: 99, l: 100 }));
        assert_eq!(segment(1000, 101), Err(CorrError::OddL(101)));
        assert_eq!(segment(1000, 0), Err(CorrError::OddL(0)));
    }

    #[test]
    fn pearson_special_columns() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|t| {
                let x = (t as f64 * 0.37).sin() + t as f64 * 0.1;
                vec![x, 2.0 * x + 3.0, -x, 5.0]
            })
            .collect();
        let s = seq(rows);
        let r = pearson_matrix(s.values(), 4);
        assert!((r[1] - 1.0).abs() < 1e-12);
        assert!((r[2] + 1.0).abs() < 1e-12);
        for j in 0..4 {
            assert_eq!(r[3 * 4 + j], if j == 3 { 1.0 } else { 0.0 });
            assert_eq!(r[j * 4 + 3], if j == 3 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn fisher_values() {
        assert_eq!(fisher_z(0.0), 0.0);
        assert!((fisher_z(0.9) - 1.472_219_489_583_220).abs() < 1e-12);
        assert!((fisher_z(1.0) - 7.254_328_619_247_669).abs() < 1e-12);
        assert!((fisher_z(-0.3) + 0.309_519_604_203_111_7).abs() < 1e-12);
        assert_eq!(fisher_z(-1.0), -fisher_z(1.0));
        assert!(fisher_z(1.0).is_finite());
    }

    #[test]
    fn lower_triangle_order() {
        let dim = 32;
        let mut z = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                z[i * dim + j] = (i.max(j) * 100 + i.min(j)) as f64;
            }
        }
        let m = ZCorrMatrix { dim, z, window_index: 0, start_frame: 0 };
        let flat = lower_triangle(&m);
        assert_eq!(flat.len(), 496);
        assert_eq!(&flat[..3], &[100.0, 200.0, 201.0]);
        let back = unflatten(&flat, dim).unwrap();
        assert_eq!(lower_triangle(&back), flat);
        for i in 0..dim {
            for j in 0..i {
                assert_eq!(back.get(i, j), m.get(i, j));
                assert_eq!(back.get(j, i), m.get(i, j));
            }
        }
    }

    #[test]
    fn identity_correlation_flattens_to_zero() {
        let m = fisher_z_matrix(&{
            let mut r = vec![0.0; 32 * 32];
            (0..32).for_each(|i| r[i * 33] = 1.0);
            r
        }, 32, 0, 0);
        assert_eq!(lower_triangle(&m), vec![0.0; 496]);
    }

    #[test]
    fn corr_sequence_shapes() {
        let s = random_seq(1000, 32, 3);
        let cs = corr_sequence(&s, 100).unwrap();
        assert_eq!(cs.len(), 19);
        assert_eq!(cs.matrices[3].start_frame, 150);
        assert_eq!(cs.flats(), corr_flats(&s, 100).unwrap());
        let one = corr_sequence(&random_seq(100, 32, 4), 100).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn white_noise_z_is_small() {
        // z of independent columns is ~N(0, 1/sqrt(L-3)): |z| < 0.35 is ~3.4 sd.
        let mut small = 0usize;
        let mut total = 0usize;
        for seed in 0..5 {
            let s = random_seq(1000, 32, 100 + seed);
            for f in corr_flats(&s, 100).unwrap() {
                total += f.len();
                small += f.iter().filter(|z| z.abs() < 0.35).count();
            }
        }
        assert!(small as f64 / total as f64 > 0.99);
    }

    #[test]
    fn periodic_windows_repeat() {
        let base = random_seq(50, 32, 9);
        let rows: Vec<Vec<f64>> = (0..400).map(|t| base.row(t % 50).to_vec()).collect();
        let cs = corr_sequence(&seq(rows), 100).unwrap();
        assert_eq!(cs.matrices[0].as_slice(), cs.matrices[2].as_slice());
    }

    #[test]
    fn averages() {
        let s = random_seq(100, 32, 5);
        let cs = corr_sequence(&s, 100).unwrap();
        assert_eq!(average_matrix(&cs).unwrap(), cs.flats()[0]);

        let v: Vec<f64> = (0..496).map(|i| i as f64 * 0.01).collect();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert_eq!(average_flats(&[v, neg]).unwrap(), vec![0.0; 496]);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mats: Vec<Vec<f64>> = (0..3).map(|_| (0..496).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let avg = average_flats(&mats).unwrap();
        for k in 0..496 {
            let direct = (mats[0][k] + mats[1][k] + mats[2][k]) / 3.0;
            assert!((avg[k] - direct).abs() < 1e-12);
        }
        assert_eq!(average_flats(&[]), Err(CorrError::Empty));
    }

    #[test]
    fn mean_vectors() {
        let v: Vec<f64> = (0..32).map(|i| i as f64 - 7.5).collect();
        assert_eq!(mean_feature_vector(&seq(vec![v.clone(); 4])), v);
        let two_v: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert_eq!(mean_feature_vector(&seq(vec![vec![0.0; 32], two_v])), v);

        let s = random_seq(257, 32, 8);
        let m = mean_feature_vector(&s);
        for d in 0..32 {
            let mut acc = 0.0;
            for t in 0..257 {
                acc += s.values()[t * 32 + d];
            }
            assert!((m[d] - acc / 257.0).abs() < 1e-12);
        }
    }
}

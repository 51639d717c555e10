/// Per-dimension z-scoring fit on training data only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance dimensions get 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fits on the rows of one or more row-major blocks of width `dim`.
    pub fn fit<'a>(blocks: impl IntoIterator<Item = &'a [f64]> + Clone, dim: usize) -> Self {
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for b in blocks.clone() {
            for row in b.chunks_exact(dim) {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
                n += 1;
            }
        }
        let n = n.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for b in blocks {
            for row in b.chunks_exact(dim) {
                for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                    let d = v - m;
                    *s += d * d;
                }
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for row in x.chunks_exact(self.mean.len()) {
            out.extend(
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.scale)
                    .map(|((v, m), s)| (v - m) / s),
            );
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.apply(x, &mut out);
        out
    }
}

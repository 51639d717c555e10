//! Single-layer LSTM sequence classifier with an optional linear input
//! projection, trained by backpropagation through time.
//!
//! All parameters live in one flat vector, in this order:
//!
//! | block     | shape                 | notes                                   |
//! |-----------|-----------------------|-----------------------------------------|
//! | `proj_w`  | `input × proj`        | only with a projection, input-major     |
//! | `proj_b`  | `proj`                |                                         |
//! | `gate_w`  | `(x + hidden) × 4h`   | input-major; gate order i, f, g, o      |
//! | `gate_b`  | `4h`                  |                                         |
//! | `head_w`  | `2 × hidden`          | class-major                             |
//! | `head_b`  | `2`                   |                                         |
//!
//! Classification reads the hidden state after the last step.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelError, RmsProp};
use crate::audio_io::Label;

pub const DEFAULT_HIDDEN: usize = 32;
const CLASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmArch {
    pub input_dim: usize,
    /// Output width of the linear input projection, if one is used.
    pub projection: Option<usize>,
    pub hidden: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    proj_w: Range<usize>,
    proj_b: Range<usize>,
    gate_w: Range<usize>,
    gate_b: Range<usize>,
    head_w: Range<usize>,
    head_b: Range<usize>,
}

impl LstmArch {
    pub fn frames(input_dim: usize) -> Self {
        Self {
            input_dim,
            projection: None,
            hidden: DEFAULT_HIDDEN,
        }
    }

    pub fn projected(input_dim: usize, projection: usize) -> Self {
        Self {
            input_dim,
            projection: Some(projection),
            hidden: DEFAULT_HIDDEN,
        }
    }

    /// Width of the vector entering the cell at each step.
    pub fn cell_input(&self) -> usize {
        self.projection.unwrap_or(self.input_dim)
    }

    fn layout(&self) -> Layout {
        let p = self.projection.unwrap_or(0);
        let x = self.cell_input();
        let h = self.hidden;
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let proj_w = take(if p > 0 { self.input_dim * p } else { 0 });
        let proj_b = take(p);
        let gate_w = take((x + h) * 4 * h);
        let gate_b = take(4 * h);
        let head_w = take(CLASSES * h);
        let head_b = take(CLASSES);
        Layout {
            proj_w,
            proj_b,
            gate_w,
            gate_b,
            head_w,
            head_b,
        }
    }

    pub fn n_params(&self) -> usize {
        self.layout().head_b.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub arch: LstmArch,
    pub params: Vec<f64>,
    pub seed: u64,
}

/// Numerically stable two-class softmax.
pub fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `c = beta·c + a·b` for an `m × k` by `k × n` product, with explicit
/// row/column strides so transposed views need no copies.
#[allow(clippy::too_many_arguments)]
fn gemm(
    (m, k, n): (usize, usize, usize),
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    assert!(k == 0 || (a.len() > last(m, k, rsa, csa) && b.len() > last(k, n, rsb, csb)));
    assert!(c.len() > last(m, n, rsc, 1));
    // SAFETY: the asserts above bound every index the kernel touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

/// Per-sequence activations kept for the backward pass.
#[derive(Default)]
struct Workspace {
    // Projected inputs, steps × x (projection only).
    xp: Vec<f64>,
    // h_{t-1} per step.
    hprev: Vec<f64>,
    // Post-activation gates i, f, g, o per step.
    gates: Vec<f64>,
    // Cell states c_0 (zeros) .. c_T.
    c: Vec<f64>,
    // tanh(c_t) per step.
    tc: Vec<f64>,
    h: Vec<f64>,
    dz: Vec<f64>,
    dx: Vec<f64>,
    dh: Vec<f64>,
    dc: Vec<f64>,
}

impl LstmModel {
    /// Seeded initialization: gate and head weights uniform in ±1/√hidden,
    /// projection weights uniform in ±1/√input, forget-gate bias 1, other biases 0.
    pub fn new(arch: LstmArch, seed: u64) -> Self {
        let lay = arch.layout();
        let mut params = vec![0.0; arch.n_params()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |r: Range<usize>, bound: f64, rng: &mut ChaCha8Rng| {
            for p in &mut params[r] {
                *p = rng.random_range(-bound..bound);
            }
        };
        let k = 1.0 / (arch.hidden as f64).sqrt();
        if arch.projection.is_some() {
            fill(lay.proj_w.clone(), 1.0 / (arch.input_dim as f64).sqrt(), &mut rng);
        }
        fill(lay.gate_w.clone(), k, &mut rng);
        fill(lay.head_w.clone(), k, &mut rng);
        let h = arch.hidden;
        params[lay.gate_b.start + h..lay.gate_b.start + 2 * h].fill(1.0);
        Self { arch, params, seed }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn steps(&self, seq: &[f64]) -> Result<usize, ModelError> {
        let d = self.arch.input_dim;
        if seq.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        if !seq.len().is_multiple_of(d) {
            return Err(ModelError::DimensionMismatch {
                expected: d,
                found: seq.len() % d,
            });
        }
        Ok(seq.len() / d)
    }

    fn forward(&self, seq: &[f64], ws: &mut Workspace) -> Result<[f64; 2], ModelError> {
        let steps = self.steps(seq)?;
        let arch = self.arch;
        let lay = arch.layout();
        let (d, x, h) = (arch.input_dim, arch.cell_input(), arch.hidden);
        let g4 = 4 * h;
        let p = &self.params;

        let inputs: &[f64] = if arch.projection.is_some() {
            ws.xp.clear();
            for _ in 0..steps {
                ws.xp.extend_from_slice(&p[lay.proj_b.clone()]);
            }
            gemm((steps, d, x), seq, (d, 1), &p[lay.proj_w.clone()], (x, 1), 1.0, &mut ws.xp, x);
            &ws.xp
        } else {
            seq
        };

        // Input contribution to every step's gates in one product.
        ws.gates.clear();
        for _ in 0..steps {
            ws.gates.extend_from_slice(&p[lay.gate_b.clone()]);
        }
        let gw = &p[lay.gate_w.clone()];
        let (wx, wh) = gw.split_at(x * g4);
        gemm((steps, x, g4), inputs, (x, 1), wx, (g4, 1), 1.0, &mut ws.gates, g4);

        ws.hprev.resize(steps * h, 0.0);
        ws.c.resize((steps + 1) * h, 0.0);
        ws.tc.resize(steps * h, 0.0);
        ws.h.clear();
        ws.h.resize(h, 0.0);
        ws.c[..h].fill(0.0);

        for t in 0..steps {
            ws.hprev[t * h..(t + 1) * h].copy_from_slice(&ws.h);
            let z = &mut ws.gates[t * g4..(t + 1) * g4];
            if t > 0 {
                for (j, &hj) in ws.h.iter().enumerate() {
                    axpy(z, hj, &wh[j * g4..(j + 1) * g4]);
                }
            }
            for k in 0..h {
                z[k] = sigmoid(z[k]);
                z[h + k] = sigmoid(z[h + k]);
                z[2 * h + k] = z[2 * h + k].tanh();
                z[3 * h + k] = sigmoid(z[3 * h + k]);
            }
            let (c_prev, c_next) = ws.c[t * h..(t + 2) * h].split_at_mut(h);
            let tc = &mut ws.tc[t * h..(t + 1) * h];
            for k in 0..h {
                let c = z[h + k] * c_prev[k] + z[k] * z[2 * h + k];
                c_next[k] = c;
                tc[k] = c.tanh();
                ws.h[k] = z[3 * h + k] * tc[k];
            }
        }

        let hw = &p[lay.head_w.clone()];
        let hb = &p[lay.head_b.clone()];
        let logits = [hb[0] + dot(&hw[..h], &ws.h), hb[1] + dot(&hw[h..], &ws.h)];
        Ok(softmax2(logits))
    }

    /// Accumulates the cross-entropy gradient into `grad`.
    fn backward(&self, seq: &[f64], label: Label, probs: [f64; 2], ws: &mut Workspace, grad: &mut [f64]) {
        let arch = self.arch;
        let lay = arch.layout();
        let (d, x, h) = (arch.input_dim, arch.cell_input(), arch.hidden);
        let g4 = 4 * h;
        let steps = seq.len() / d;
        let p = &self.params;

        let mut dlogits = probs;
        dlogits[label.index()] -= 1.0;
        let hw = &p[lay.head_w.clone()];
        {
            let g = &mut grad[lay.head_w.clone()];
            axpy(&mut g[..h], dlogits[0], &ws.h);
            axpy(&mut g[h..], dlogits[1], &ws.h);
        }
        grad[lay.head_b.start] += dlogits[0];
        grad[lay.head_b.start + 1] += dlogits[1];

        ws.dh.clear();
        ws.dh.extend((0..h).map(|k| dlogits[0] * hw[k] + dlogits[1] * hw[h + k]));
        ws.dc.clear();
        ws.dc.resize(h, 0.0);
        ws.dz.resize(steps * g4, 0.0);

        let wh = &p[lay.gate_w.start + x * g4..lay.gate_w.end];
        for t in (0..steps).rev() {
            let gates = &ws.gates[t * g4..(t + 1) * g4];
            let c_prev = &ws.c[t * h..(t + 1) * h];
            let tc = &ws.tc[t * h..(t + 1) * h];
            let dz = &mut ws.dz[t * g4..(t + 1) * g4];
            for k in 0..h {
                let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                let dh = ws.dh[k];
                let dc = ws.dc[k] + dh * o * (1.0 - tc[k] * tc[k]);
                dz[k] = dc * g * i * (1.0 - i);
                dz[h + k] = dc * c_prev[k] * f * (1.0 - f);
                dz[2 * h + k] = dc * i * (1.0 - g * g);
                dz[3 * h + k] = dh * tc[k] * o * (1.0 - o);
                ws.dc[k] = dc * f;
            }
            if t > 0 {
                for (j, dh) in ws.dh.iter_mut().enumerate() {
                    *dh = dot(&wh[j * g4..(j + 1) * g4], dz);
                }
            }
        }

        let gb = &mut grad[lay.gate_b.clone()];
        for dz in ws.dz.chunks_exact(g4) {
            axpy(gb, 1.0, dz);
        }
        let inputs: &[f64] = if arch.projection.is_some() { &ws.xp } else { seq };
        {
            let (gwx, gwh) = grad[lay.gate_w.clone()].split_at_mut(x * g4);
            // dW_x += Xᵀ·dZ and dW_h += H_prevᵀ·dZ.
            gemm((x, steps, g4), inputs, (1, x), &ws.dz, (g4, 1), 1.0, gwx, g4);
            gemm((h, steps, g4), &ws.hprev, (1, h), &ws.dz, (g4, 1), 1.0, gwh, g4);
        }

        if arch.projection.is_some() {
            let wx = &p[lay.gate_w.start..lay.gate_w.start + x * g4];
            ws.dx.clear();
            ws.dx.resize(steps * x, 0.0);
            gemm((steps, g4, x), &ws.dz, (g4, 1), wx, (1, g4), 0.0, &mut ws.dx, x);
            let pb = &mut grad[lay.proj_b.clone()];
            for dx in ws.dx.chunks_exact(x) {
                axpy(pb, 1.0, dx);
            }
            gemm((d, steps, x), seq, (1, d), &ws.dx, (x, 1), 1.0, &mut grad[lay.proj_w.clone()], x);
        }
    }

    /// Class probabilities `[control, depressed]` for one sequence of
    /// `input_dim`-wide steps, row-major.
    pub fn predict_proba(&self, seq: &[f64]) -> Result<[f64; 2], ModelError> {
        self.forward(seq, &mut Workspace::default())
    }

    pub fn predict(&self, seq: &[f64]) -> Result<Label, ModelError> {
        let p = self.predict_proba(seq)?;
        Ok(if p[1] >= 0.5 {
            Label::Depressed
        } else {
            Label::Control
        })
    }

    /// Cross-entropy of one labeled sequence.
    pub fn loss(&self, seq: &[f64], label: Label) -> Result<f64, ModelError> {
        let p = self.predict_proba(seq)?;
        Ok(-p[label.index()].ln())
    }

    /// Cross-entropy of one labeled sequence; its gradient is added to `grad`.
    pub fn loss_and_grad(&self, seq: &[f64], label: Label, grad: &mut [f64]) -> Result<f64, ModelError> {
        let mut ws = Workspace::default();
        self.loss_and_grad_with(seq, label, grad, &mut ws)
    }

    fn loss_and_grad_with(&self, seq: &[f64], label: Label, grad: &mut [f64], ws: &mut Workspace) -> Result<f64, ModelError> {
        if grad.len() != self.params.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.params.len(),
                found: grad.len(),
            });
        }
        let probs = self.forward(seq, ws)?;
        self.backward(seq, label, probs, ws, grad);
        Ok(-probs[label.index()].ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.0005,
            decay: 0.99,
            epsilon: 1e-8,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidConfig(format!("learning rate {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.decay) {
            return Err(ModelError::InvalidConfig(format!("decay {}", self.decay)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainExample<'a> {
    /// Row-major steps of `input_dim` values.
    pub seq: &'a [f64],
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LstmModel,
    /// Mean training cross-entropy per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Mini-batch RMSProp on mean cross-entropy. Returns the final-epoch model.
///
/// Initialization and per-epoch shuffling both derive from `config.seed`, so
/// a run is bit-reproducible.
pub fn lstm_train(config: &TrainConfig, data: &[TrainExample<'_>], arch: LstmArch) -> Result<TrainOutcome, ModelError> {
    config.validate()?;
    let first = data.first().ok_or(ModelError::SingleClass)?.label;
    if data.iter().all(|e| e.label == first) {
        return Err(ModelError::SingleClass);
    }
    let mut model = LstmModel::new(arch, config.seed);
    for e in data {
        model.steps(e.seq)?;
    }
    let mut opt = RmsProp::new(model.n_params(), config.learning_rate, config.decay, config.epsilon);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = vec![0.0; model.n_params()];
    let mut ws = Workspace::default();
    let mut epoch_loss = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.fill(0.0);
            for &i in batch {
                total += model.loss_and_grad_with(data[i].seq, data[i].label, &mut grad, &mut ws)?;
            }
            let inv = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            opt.step(&mut model.params, &grad);
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() || !model.params.iter().all(|p| p.is_finite()) {
            return Err(ModelError::DivergenceDetected { epoch });
        }
        epoch_loss.push(mean);
    }
    Ok(TrainOutcome { model, epoch_loss })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(arch: LstmArch, seed: u64) -> LstmModel {
        let mut m = LstmModel::new(arch, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for p in &mut m.params {
            *p = rng.random_range(-0.8..0.8);
        }
        m
    }

    #[test]
    fn zero_parameters_give_even_odds() {
        let arch = LstmArch::projected(7, 3);
        let mut m = LstmModel::new(arch, 1);
        m.params.fill(0.0);
        let seq: Vec<f64> = (0..21).map(|i| i as f64 * 0.3 - 2.0).collect();
        assert_eq!(m.predict_proba(&seq).unwrap(), [0.5, 0.5]);
    }

    #[test]
    fn softmax_properties() {
        let p = softmax2([2.0, -1.0]);
        let q = softmax2([2.0 + 37.5, -1.0 + 37.5]);
        assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        let big = softmax2([800.0, -800.0]);
        assert!(big[0].is_finite() && big[1] >= 0.0);
    }

    #[test]
    fn closed_forget_gate_forgets() {
        let arch = LstmArch {
            input_dim: 2,
            projection: None,
            hidden: 3,
        };
        let mut m = toy(arch, 4);
        let lay = arch.layout();
        let h = 3;
        // No recurrence and a shut forget gate: step 2 cannot see step 1.
        for j in 2..5 {
            m.params[lay.gate_w.start + j * 4 * h..lay.gate_w.start + (j + 1) * 4 * h].fill(0.0);
        }
        for k in 0..h {
            m.params[lay.gate_b.start + h + k] = -1e3;
        }
        let x = [0.4, -0.9];
        let twice = [0.4, -0.9, 0.4, -0.9];
        let one = m.predict_proba(&x).unwrap();
        let two = m.predict_proba(&twice).unwrap();
        assert_eq!(one, two);

        // Hand evaluation of the cell equations for the single step.
        let p = &m.params;
        let gate = |g: usize, k: usize| {
            let r = g * h + k;
            p[lay.gate_b.start + r] + x[0] * p[lay.gate_w.start + r] + x[1] * p[lay.gate_w.start + 4 * h + r]
        };
        let hs: Vec<f64> = (0..h)
            .map(|k| {
                let i = sigmoid(gate(0, k));
                let g = gate(2, k).tanh();
                let o = sigmoid(gate(3, k));
                o * (i * g).tanh()
            })
            .collect();
        let l0 = p[lay.head_b.start] + (0..h).map(|k| p[lay.head_w.start + k] * hs[k]).sum::<f64>();
        let l1 = p[lay.head_b.start + 1] + (0..h).map(|k| p[lay.head_w.start + h + k] * hs[k]).sum::<f64>();
        let want = softmax2([l0, l1]);
        assert!((want[0] - one[0]).abs() < 1e-12);
    }

    fn grad_check(arch: LstmArch, seed: u64) -> f64 {
        let m = toy(arch, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let steps = 6;
        let seq: Vec<f64> = (0..steps * arch.input_dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let label = Label::from_index((seed % 2) as usize);
        let mut grad = vec![0.0; m.n_params()];
        m.loss_and_grad(&seq, label, &mut grad).unwrap();
        let step = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..m.n_params() {
            let mut plus = m.clone();
            plus.params[i] += step;
            let mut minus = m.clone();
            minus.params[i] -= step;
            let numeric = (plus.loss(&seq, label).unwrap() - minus.loss(&seq, label).unwrap()) / (2.0 * step);
            let err = (numeric - grad[i]).abs() / numeric.abs().max(grad[i].abs()).max(1e-6);
            worst = worst.max(err);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..3 {
            let e = grad_check(LstmArch { input_dim: 3, projection: None, hidden: 4 }, seed);
            assert!(e < 1e-4, "seed {seed}: {e}");
            let e = grad_check(LstmArch { input_dim: 6, projection: Some(3), hidden: 4 }, seed);
            assert!(e < 1e-4, "projected seed {seed}: {e}");
        }
    }

    fn sign_data(seed: u64) -> Vec<(Vec<f64>, Label)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..20)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Depressed } else { Label::Control };
                let shift = if label == Label::Depressed { 0.5 } else { -0.5 };
                let seq = (0..10 * 4)
                    .map(|k| {
                        let noise = rng.random_range(-0.5..0.5);
                        if k % 4 == 0 { shift + noise } else { noise }
                    })
                    .collect();
                (seq, label)
            })
            .collect()
    }

    #[test]
    fn learns_sign_of_mean() {
        let data = sign_data(9);
        let examples: Vec<TrainExample> = data.iter().map(|(s, l)| TrainExample { seq: s, label: *l }).collect();
        let cfg = TrainConfig { seed: 3, ..TrainConfig::default() };
        let out = lstm_train(&cfg, &examples, LstmArch::frames(4)).unwrap();
        let correct = data.iter().filter(|(s, l)| out.model.predict(s).unwrap() == *l).count();
        assert_eq!(correct, 20);
        assert!(out.epoch_loss.last().unwrap() < out.epoch_loss.first().unwrap());
    }

    #[test]
    fn training_is_bit_reproducible() {
        let data = sign_data(2);
        let examples: Vec<TrainExample> = data.iter().map(|(s, l)| TrainExample { seq: s, label: *l }).collect();
        let cfg = TrainConfig { epochs: 5, seed: 77, ..TrainConfig::default() };
        let a = lstm_train(&cfg, &examples, LstmArch::frames(4)).unwrap().model;
        let b = lstm_train(&cfg, &examples, LstmArch::frames(4)).unwrap().model;
        assert_eq!(a.params, b.params);
        let c = lstm_train(&TrainConfig { seed: 78, ..cfg }, &examples, LstmArch::frames(4)).unwrap().model;
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn training_errors() {
        let seq = vec![0.0; 8];
        let same = [TrainExample { seq: &seq, label: Label::Control }, TrainExample { seq: &seq, label: Label::Control }];
        assert_eq!(
            lstm_train(&TrainConfig::default(), &same, LstmArch::frames(4)).unwrap_err(),
            ModelError::SingleClass
        );
        let m = LstmModel::new(LstmArch::frames(4), 0);
        assert_eq!(m.predict_proba(&[]).unwrap_err(), ModelError::EmptySequence);
        let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidConfig(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let data = sign_data(4);
        let examples: Vec<TrainExample> = data.iter().map(|(s, l)| TrainExample { seq: s, label: *l }).collect();
        let cfg = TrainConfig { epochs: 3, learning_rate: f64::MAX, ..TrainConfig::default() };
        assert!(matches!(
            lstm_train(&cfg, &examples, LstmArch::frames(4)),
            Err(ModelError::DivergenceDetected { .. })
        ));
    }

    #[test]
    fn initialization_rules() {
        let arch = LstmArch::projected(496, 32);
        let m = LstmModel::new(arch, 12);
        let lay = arch.layout();
        assert_eq!(m.n_params(), 496 * 32 + 32 + 64 * 128 + 128 + 64 + 2);
        let k = 1.0 / 32f64.sqrt();
        assert!(m.params[lay.gate_w.clone()].iter().all(|v| v.abs() < k));
        assert!(m.params[lay.proj_w.clone()].iter().all(|v| v.abs() < 1.0 / 496f64.sqrt()));
        let gb = &m.params[lay.gate_b.clone()];
        assert!(gb[..32].iter().all(|&v| v == 0.0));
        assert!(gb[32..64].iter().all(|&v| v == 1.0));
        assert!(gb[64..].iter().all(|&v| v == 0.0));
        assert!(m.params[lay.head_b.clone()].iter().all(|&v| v == 0.0));
    }
}

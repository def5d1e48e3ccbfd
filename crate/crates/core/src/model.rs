//! Linear and two-hidden-layer rectifier predictors with an output squashed
//! to `(-1, 1)` by `t = 2 sigmoid(z) - 1`, trained by minibatch SGD with
//! classic momentum on any per-example loss of `(t, q)`.
//!
//! Parameters live in one flat vector. For the MLP the layout is
//! `W1 (d x 100), b1, W2 (100 x 100), b2, w3 (100), b3`, each weight matrix
//! row-major with input index first; the linear model is `w (d), b`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::correction::{BaseLoss, CorrectedLoss};
use crate::data::{PointwiseSDPoint, Sign};
use crate::error::{Error, Result};
use crate::rng;
use crate::weighted::WeightedLoss;

pub const HIDDEN: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    Linear,
    Mlp,
}

impl Arch {
    pub fn param_count(self, d: usize) -> usize {
        match self {
            Arch::Linear => d + 1,
            Arch::Mlp => d * HIDDEN + HIDDEN + HIDDEN * HIDDEN + HIDDEN + HIDDEN + 1,
        }
    }
}

/// A loss on the squashed score `t` and a binary tag.
pub trait PerExampleLoss {
    fn value(&self, t: f64, q: Sign) -> f64;
    fn derivative(&self, t: f64, q: Sign) -> f64;
}

impl PerExampleLoss for CorrectedLoss {
    fn value(&self, t: f64, q: Sign) -> f64 {
        CorrectedLoss::value(self, t, q)
    }
    fn derivative(&self, t: f64, q: Sign) -> f64 {
        CorrectedLoss::derivative(self, t, q)
    }
}

impl PerExampleLoss for WeightedLoss {
    fn value(&self, t: f64, q: Sign) -> f64 {
        WeightedLoss::value(self, t, q)
    }
    fn derivative(&self, t: f64, q: Sign) -> f64 {
        WeightedLoss::derivative(self, t, q)
    }
}

/// Plain supervised loss, with the tag read as the class label.
impl PerExampleLoss for BaseLoss {
    fn value(&self, t: f64, y: Sign) -> f64 {
        BaseLoss::value(*self, t, y)
    }
    fn derivative(&self, t: f64, y: Sign) -> f64 {
        BaseLoss::derivative(*self, t, y)
    }
}

impl<L: PerExampleLoss + ?Sized> PerExampleLoss for &L {
    fn value(&self, t: f64, q: Sign) -> f64 {
        (**self).value(t, q)
    }
    fn derivative(&self, t: f64, q: Sign) -> f64 {
        (**self).derivative(t, q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Predictor {
    arch: Arch,
    d: usize,
    params: Vec<f64>,
}

struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
}

fn mlp_offsets(d: usize) -> Offsets {
    let w1 = 0;
    let b1 = w1 + d * HIDDEN;
    let w2 = b1 + HIDDEN;
    let b2 = w2 + HIDDEN * HIDDEN;
    let w3 = b2 + HIDDEN;
    let b3 = w3 + HIDDEN;
    Offsets { w1, b1, w2, b2, w3, b3 }
}

fn squash(z: f64) -> f64 {
    libm::tanh(0.5 * z)
}

impl Predictor {
    /// Weights uniform on `[-1, 1] / sqrt(fan_in)`, biases zero.
    pub fn init(arch: Arch, d: usize, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(arch, d)?;
        let mut r = rng::from_seed(seed);
        let mut fill = |slice: &mut [f64], fan_in: usize| {
            let scale = 1.0 / libm::sqrt(fan_in as f64);
            for w in slice {
                *w = scale * r.random_range(-1.0..=1.0);
            }
        };
        match arch {
            Arch::Linear => fill(&mut p.params[..d], d),
            Arch::Mlp => {
                let o = mlp_offsets(d);
                fill(&mut p.params[o.w1..o.b1], d);
                fill(&mut p.params[o.w2..o.b2], HIDDEN);
                fill(&mut p.params[o.w3..o.b3], HIDDEN);
            }
        }
        Ok(p)
    }

    pub fn zeros(arch: Arch, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "must be at least 1"));
        }
        Ok(Predictor { arch, d, params: vec![0.0; arch.param_count(d)] })
    }

    pub fn from_params(arch: Arch, d: usize, params: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "must be at least 1"));
        }
        let expected = arch.param_count(d);
        if params.len() != expected {
            return Err(Error::LengthMismatch { left: expected, right: params.len() });
        }
        Ok(Predictor { arch, d, params })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: len });
        }
        Ok(())
    }

    /// Pre-activation output `z` computed sample by sample with plain loops.
    fn raw_output(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        match self.arch {
            Arch::Linear => x.iter().zip(p).map(|(a, w)| a * w).sum::<f64>() + p[self.d],
            Arch::Mlp => {
                let (_, h2) = self.hidden(x);
                let o = mlp_offsets(self.d);
                h2.iter().zip(&p[o.w3..o.b3]).map(|(h, w)| h.max(0.0) * w).sum::<f64>() + p[o.b3]
            }
        }
    }

    /// Hidden-layer pre-activations of the MLP for one sample.
    fn hidden(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let o = mlp_offsets(self.d);
        let mut a1 = p[o.b1..o.w2].to_vec();
        for (i, xi) in x.iter().enumerate() {
            let row = &p[o.w1 + i * HIDDEN..o.w1 + (i + 1) * HIDDEN];
            for (a, w) in a1.iter_mut().zip(row) {
                *a += xi * w;
            }
        }
        let mut a2 = p[o.b2..o.w3].to_vec();
        for (i, h) in a1.iter().enumerate() {
            let h = h.max(0.0);
            let row = &p[o.w2 + i * HIDDEN..o.w2 + (i + 1) * HIDDEN];
            for (a, w) in a2.iter_mut().zip(row) {
                *a += h * w;
            }
        }
        (a1, a2)
    }

    /// Score in `(-1, 1)` for one sample. In floating point the squashing
    /// saturates to exactly `+-1` once `|z|` exceeds about 38.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(squash(self.raw_output(x)))
    }

    /// Scores for a row-major `n x d` feature buffer.
    pub fn predict_batch(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.len() % self.d != 0 {
            return Err(Error::DimensionMismatch { expected: self.d, found: xs.len() % self.d });
        }
        let n = xs.len() / self.d;
        let mut ws = Workspace::default();
        let mut out = Vec::with_capacity(n);
        for chunk in xs.chunks(256 * self.d) {
            let b = chunk.len() / self.d;
            self.forward_batch(chunk, b, &mut ws);
            out.extend_from_slice(&ws.t[..b]);
        }
        Ok(out)
    }

    fn forward_batch(&self, x: &[f64], b: usize, ws: &mut Workspace) {
        let p = &self.params;
        let d = self.d;
        ws.resize(b, self.arch);
        match self.arch {
            Arch::Linear => {
                for (k, row) in x.chunks_exact(d).enumerate() {
                    let z: f64 = row.iter().zip(&p[..d]).map(|(a, w)| a * w).sum::<f64>() + p[d];
                    ws.t[k] = squash(z);
                }
            }
            Arch::Mlp => {
                let o = mlp_offsets(d);
                let h = HIDDEN;
                for row in ws.h1.chunks_exact_mut(h) {
                    row.copy_from_slice(&p[o.b1..o.w2]);
                }
                gemm(b, d, h, x, d, 1, &p[o.w1..o.b1], h, 1, 1.0, &mut ws.h1, h);
                ws.h1.iter_mut().for_each(|v| *v = v.max(0.0));
                for row in ws.h2.chunks_exact_mut(h) {
                    row.copy_from_slice(&p[o.b2..o.w3]);
                }
                gemm(b, h, h, &ws.h1, h, 1, &p[o.w2..o.b2], h, 1, 1.0, &mut ws.h2, h);
                ws.h2.iter_mut().for_each(|v| *v = v.max(0.0));
                let w3 = &p[o.w3..o.b3];
                for (k, row) in ws.h2.chunks_exact(h).enumerate() {
                    let z: f64 = row.iter().zip(w3).map(|(a, w)| a * w).sum::<f64>() + p[o.b3];
                    ws.t[k] = squash(z);
                }
            }
        }
    }

    /// Accumulates `sum_k gt[k] * dt_k/dparams` into `grad` (overwriting it).
    fn backward_batch(&self, x: &[f64], b: usize, ws: &mut Workspace, grad: &mut [f64]) {
        let p = &self.params;
        let d = self.d;
        for k in 0..b {
            let t = ws.t[k];
            ws.gz[k] = ws.gt[k] * 0.5 * (1.0 - t * t);
        }
        match self.arch {
            Arch::Linear => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                for (k, row) in x.chunks_exact(d).enumerate() {
                    let gz = ws.gz[k];
                    for (g, a) in grad[..d].iter_mut().zip(row) {
                        *g += gz * a;
                    }
                    grad[d] += gz;
                }
            }
            Arch::Mlp => {
                let o = mlp_offsets(d);
                let h = HIDDEN;
                // Output layer.
                let (gw3, gb3) = grad[o.w3..].split_at_mut(h);
                gw3.iter_mut().for_each(|g| *g = 0.0);
                for (k, row) in ws.h2.chunks_exact(h).enumerate() {
                    let gz = ws.gz[k];
                    for (g, a) in gw3.iter_mut().zip(row) {
                        *g += gz * a;
                    }
                }
                gb3[0] = ws.gz[..b].iter().sum();
                // Second hidden layer.
                let w3 = &p[o.w3..o.b3];
                for k in 0..b {
                    let gz = ws.gz[k];
                    let hrow = &ws.h2[k * h..(k + 1) * h];
                    let grow = &mut ws.g2[k * h..(k + 1) * h];
                    for ((g, w), a) in grow.iter_mut().zip(w3).zip(hrow) {
                        *g = if *a > 0.0 { gz * w } else { 0.0 };
                    }
                }
                gemm(h, b, h, &ws.h1, 1, h, &ws.g2, h, 1, 0.0, &mut grad[o.w2..o.b2], h);
                column_sums(&ws.g2, b, h, &mut grad[o.b2..o.w3]);
                // First hidden layer.
                gemm(b, h, h, &ws.g2, h, 1, &p[o.w2..o.b2], 1, h, 0.0, &mut ws.g1, h);
                for (g, a) in ws.g1.iter_mut().zip(&ws.h1) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
                gemm(d, b, h, x, 1, d, &ws.g1, h, 1, 0.0, &mut grad[o.w1..o.b1], h);
                column_sums(&ws.g1, b, h, &mut grad[o.b1..o.w2]);
            }
        }
    }

    /// Smallest absolute hidden pre-activation for one sample (infinite for
    /// the linear model).
    pub fn kink_margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(match self.arch {
            Arch::Linear => f64::INFINITY,
            Arch::Mlp => {
                let (a1, a2) = self.hidden(x);
                a1.iter().chain(&a2).fold(f64::INFINITY, |m, v| m.min(v.abs()))
            }
        })
    }
}

pub fn init_predictor(arch: Arch, d: usize, seed: u64) -> Result<Predictor> {
    Predictor::init(arch, d, seed)
}

pub fn forward(p: &Predictor, x: &[f64]) -> Result<f64> {
    p.forward(x)
}

fn column_sums(m: &[f64], rows: usize, cols: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for row in m[..rows * cols].chunks_exact(cols) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// `C = A B + beta C` with `A: m x k`, `B: k x n`, `C: m x n` row-major
/// (row stride `rsc`). `A` and `B` are addressed through their strides so
/// transposed operands need no copy.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |r: usize, c: usize, rs: usize, cs: usize| (r - 1) * rs + (c - 1) * cs;
    assert!(k == 0 || a.len() > last(m, k, rsa, csa));
    assert!(k == 0 || b.len() > last(k, n, rsb, csb));
    assert!(c.len() > last(m, n, rsc, 1));
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is a unique borrow that does not alias `a` or `b`.
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

#[derive(Default)]
struct Workspace {
    h1: Vec<f64>,
    h2: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    t: Vec<f64>,
    gt: Vec<f64>,
    gz: Vec<f64>,
}

impl Workspace {
    fn resize(&mut self, b: usize, arch: Arch) {
        let hidden = if arch == Arch::Mlp { b * HIDDEN } else { 0 };
        for v in [&mut self.h1, &mut self.h2, &mut self.g1, &mut self.g2] {
            v.resize(hidden, 0.0);
        }
        for v in [&mut self.t, &mut self.gt, &mut self.gz] {
            v.resize(b, 0.0);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 0.001, momentum: 0.9, epochs: 200, batch_size: 64, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum", "must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// A trained predictor with its per-epoch mean training loss.
#[derive(Clone, Debug)]
pub struct Trained {
    pub predictor: Predictor,
    pub loss_history: Vec<f64>,
}

/// Trains on flattened S-D points.
pub fn sgd_train<L: PerExampleLoss>(
    p: &Predictor,
    data: &[PointwiseSDPoint],
    loss: &L,
    cfg: &TrainConfig,
) -> Result<Trained> {
    if data.is_empty() {
        return Err(Error::EmptyInput("training data"));
    }
    let mut x = Vec::with_capacity(data.len() * p.d);
    for pt in data {
        p.check_dim(pt.x.len())?;
        x.extend_from_slice(&pt.x);
    }
    let tags: Vec<Sign> = data.iter().map(|pt| pt.q).collect();
    sgd_train_matrix(p, &x, &tags, loss, cfg)
}

/// Trains on a row-major feature buffer with one tag per row.
pub fn sgd_train_matrix<L: PerExampleLoss>(
    p: &Predictor,
    x: &[f64],
    tags: &[Sign],
    loss: &L,
    cfg: &TrainConfig,
) -> Result<Trained> {
    cfg.validate()?;
    let d = p.d;
    if tags.is_empty() {
        return Err(Error::EmptyInput("training data"));
    }
    if x.len() != tags.len() * d {
        return Err(Error::LengthMismatch { left: x.len(), right: tags.len() * d });
    }
    let n = tags.len();
    let mut model = p.clone();
    let mut velocity = vec![0.0; model.params.len()];
    let mut grad = vec![0.0; model.params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    let mut r = rng::from_seed(cfg.seed);
    let mut ws = Workspace::default();
    let mut xb = Vec::with_capacity(cfg.batch_size * d);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut r);
        let mut epoch_loss = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let b = idx.len();
            xb.clear();
            for &i in idx {
                xb.extend_from_slice(&x[i * d..(i + 1) * d]);
            }
            model.forward_batch(&xb, b, &mut ws);
            let mut batch_loss = 0.0;
            for (k, &i) in idx.iter().enumerate() {
                let t = ws.t[k];
                batch_loss += loss.value(t, tags[i]);
                ws.gt[k] = loss.derivative(t, tags[i]) / b as f64;
            }
            model.backward_batch(&xb, b, &mut ws, &mut grad);
            if !batch_loss.is_finite() || !grad.iter().sum::<f64>().is_finite() {
                return Err(Error::NonFinite { epoch, batch });
            }
            epoch_loss += batch_loss;
            for ((w, v), g) in model.params.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *w += *v;
            }
        }
        history.push(epoch_loss / n as f64);
    }
    Ok(Trained { predictor: model, loss_history: history })
}

pub const FD_STEP: f64 = 1e-6;
pub const KINK_MARGIN: f64 = 1e-4;
/// Gradients with both analytic and numeric magnitude below this are
/// compared by absolute error only: a central difference at step 1e-6 of an
/// O(1) loss carries roundoff near 1e-9, so smaller components have no
/// meaningful relative accuracy.
pub const RELATIVE_FLOOR: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientCheck {
    pub max_relative: f64,
    pub max_absolute: f64,
    /// Parameters whose gradient was large enough for the relative test.
    pub relative_checked: usize,
}

/// Backprop gradient against central finite differences of the loss.
///
/// Samples with a hidden pre-activation within [`KINK_MARGIN`] of zero are
/// rejected with [`Error::NearKink`].
pub fn gradient_check<L: PerExampleLoss>(p: &Predictor, loss: &L, sample: &PointwiseSDPoint) -> Result<GradientCheck> {
    let margin = p.kink_margin(&sample.x)?;
    if margin < KINK_MARGIN {
        return Err(Error::NearKink { margin });
    }
    let mut ws = Workspace::default();
    p.forward_batch(&sample.x, 1, &mut ws);
    ws.gt[0] = loss.derivative(ws.t[0], sample.q);
    let mut analytic = vec![0.0; p.params.len()];
    p.backward_batch(&sample.x, 1, &mut ws, &mut analytic);

    let mut probe = p.clone();
    let mut report = GradientCheck { max_relative: 0.0, max_absolute: 0.0, relative_checked: 0 };
    for (i, &a) in analytic.iter().enumerate() {
        let w = probe.params[i];
        probe.params[i] = w + FD_STEP;
        let up = loss.value(squash(probe.raw_output(&sample.x)), sample.q);
        probe.params[i] = w - FD_STEP;
        let down = loss.value(squash(probe.raw_output(&sample.x)), sample.q);
        probe.params[i] = w;
        let numeric = (up - down) / (2.0 * FD_STEP);
        let abs = (a - numeric).abs();
        report.max_absolute = report.max_absolute.max(abs);
        let scale = a.abs().max(numeric.abs());
        if scale > RELATIVE_FLOOR {
            report.relative_checked += 1;
            report.max_relative = report.max_relative.max(abs / scale);
        }
    }
    Ok(report)
}

//! Character-level LSTM language model as a sampled objective.
//!
//! The model is embedding → stacked LSTM → linear projection, trained by
//! mean next-character negative log-likelihood over windows of the corpus.
//! Parameters live in one flat vector so the optimizers stay
//! architecture-blind; the layout is embedding table, then per-layer input
//! and recurrent weights fused as one `(2H, 4H)` matrix plus a `4H` bias,
//! then the output projection and its bias.  Gate order inside the `4H`
//! blocks is input, forget, cell, output.
//!
//! Each evaluation runs on a fresh tape with hidden state zeroed: adaptive
//! sampling draws non-contiguous windows, so there is no meaningful state to
//! carry between batches.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Tensor, Var};
use crate::math;
use crate::problems::{make_batch, Corpus, Objective, Smoothness};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CharLm {
    corpus: Corpus,
    layers: usize,
    hidden: usize,
    seq_len: usize,
    vocab: usize,
    dim: usize,
}

impl CharLm {
    pub fn new(corpus: Corpus, layers: usize, hidden: usize, seq_len: usize) -> Result<CharLm> {
        if layers == 0 {
            return Err(Error::InvalidParam {
                name: "layers",
                detail: "need at least one recurrent layer".into(),
            });
        }
        if hidden == 0 {
            return Err(Error::InvalidParam {
                name: "hidden",
                detail: "hidden width must be at least 1".into(),
            });
        }
        if seq_len == 0 {
            return Err(Error::InvalidParam {
                name: "seq-len",
                detail: "sequence length must be at least 1".into(),
            });
        }
        if corpus.window_count(seq_len) == 0 {
            return Err(Error::Data {
                detail: format!(
                    "corpus of {} tokens cannot supply any length-{seq_len} training window",
                    corpus.len()
                ),
            });
        }
        let v = corpus.vocab_size();
        let h = hidden;
        // The embedding width equals the hidden width, so every layer sees a
        // (·, 2H) input and the per-layer shapes are uniform.
        let dim = v * h + layers * (8 * h * h + 4 * h) + h * v + v;
        Ok(CharLm {
            corpus,
            layers,
            hidden,
            seq_len,
            vocab: v,
            dim,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn embed_range(&self) -> Range<usize> {
        0..self.vocab * self.hidden
    }

    fn layer_base(&self, layer: usize) -> usize {
        let h = self.hidden;
        self.vocab * h + layer * (8 * h * h + 4 * h)
    }

    pub fn layer_w_range(&self, layer: usize) -> Range<usize> {
        let base = self.layer_base(layer);
        base..base + 8 * self.hidden * self.hidden
    }

    pub fn layer_b_range(&self, layer: usize) -> Range<usize> {
        let start = self.layer_w_range(layer).end;
        start..start + 4 * self.hidden
    }

    pub fn out_w_range(&self) -> Range<usize> {
        let start = self.layer_base(self.layers);
        start..start + self.hidden * self.vocab
    }

    pub fn out_b_range(&self) -> Range<usize> {
        let start = self.out_w_range().end;
        start..start + self.vocab
    }

    /// Seeded uniform initialization, each block in ±1/√fan-in of the matrix
    /// it feeds (biases share their matrix's bound).
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let h = self.hidden as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.dim);
        let fill = |out: &mut Vec<f64>, rng: &mut ChaCha8Rng, n: usize, bound: f64| {
            for _ in 0..n {
                out.push(rng.gen_range(-bound..bound));
            }
        };
        fill(&mut out, &mut rng, self.embed_range().len(), 1.0 / math::sqrt(h));
        let gate_bound = 1.0 / math::sqrt(2.0 * h);
        for l in 0..self.layers {
            fill(&mut out, &mut rng, self.layer_w_range(l).len(), gate_bound);
            fill(&mut out, &mut rng, self.layer_b_range(l).len(), gate_bound);
        }
        let out_bound = 1.0 / math::sqrt(h);
        fill(&mut out, &mut rng, self.out_w_range().len(), out_bound);
        fill(&mut out, &mut rng, self.out_b_range().len(), out_bound);
        out
    }

    fn check_ids(&self, op: &'static str, theta: &[f64], x: &[u32], y: &[u32]) -> Result<usize> {
        if theta.len() != self.dim {
            return Err(Error::Length {
                op,
                expected: self.dim,
                got: theta.len(),
            });
        }
        if x.is_empty() || x.len() != y.len() || x.len() % self.seq_len != 0 {
            return Err(Error::Data {
                detail: format!(
                    "{op}: ids must come as equal-length multiples of seq-len {}, got {} and {}",
                    self.seq_len,
                    x.len(),
                    y.len()
                ),
            });
        }
        Ok(x.len() / self.seq_len)
    }

    /// Builds the forward graph for `b` windows; returns the tape, the loss
    /// node, and the parameter nodes in flat-layout order.
    fn build_loss(
        &self,
        theta: &[f64],
        x: &[u32],
        y: &[u32],
        b: usize,
    ) -> Result<(Tape, Var, Vec<Var>)> {
        let h = self.hidden;
        let v = self.vocab;
        let t_len = self.seq_len;
        let mut tape = Tape::new();

        let embed = tape.param(Tensor::from_vec(&[v, h], theta[self.embed_range()].to_vec())?)?;
        let mut params = vec![embed];
        let mut ws = Vec::with_capacity(self.layers);
        let mut bs = Vec::with_capacity(self.layers);
        for l in 0..self.layers {
            let w = tape.param(Tensor::from_vec(
                &[2 * h, 4 * h],
                theta[self.layer_w_range(l)].to_vec(),
            )?)?;
            let bias = tape.param(Tensor::from_vec(
                &[1, 4 * h],
                theta[self.layer_b_range(l)].to_vec(),
            )?)?;
            params.push(w);
            params.push(bias);
            ws.push(w);
            bs.push(bias);
        }
        let w_out = tape.param(Tensor::from_vec(&[h, v], theta[self.out_w_range()].to_vec())?)?;
        let b_out = tape.param(Tensor::from_vec(&[1, v], theta[self.out_b_range()].to_vec())?)?;
        params.push(w_out);
        params.push(b_out);

        let mut hs = Vec::with_capacity(self.layers);
        let mut cs = Vec::with_capacity(self.layers);
        for _ in 0..self.layers {
            hs.push(tape.constant(Tensor::zeros(&[b, h])?)?);
            cs.push(tape.constant(Tensor::zeros(&[b, h])?)?);
        }

        let mut logits_steps = Vec::with_capacity(t_len);
        let mut col = Vec::with_capacity(b);
        for t in 0..t_len {
            col.clear();
            col.extend((0..b).map(|bi| x[bi * t_len + t]));
            let mut xt = tape.embed_rows(embed, &col)?;
            for l in 0..self.layers {
                let cat = tape.concat_cols(&[xt, hs[l]])?;
                let lin = tape.matmul(cat, ws[l])?;
                let pre = tape.add_row(lin, bs[l])?;
                let i_gate = tape.narrow_cols(pre, 0, h)?;
                let f_gate = tape.narrow_cols(pre, h, h)?;
                let g_gate = tape.narrow_cols(pre, 2 * h, h)?;
                let o_gate = tape.narrow_cols(pre, 3 * h, h)?;
                let i_act = tape.sigmoid(i_gate)?;
                let f_act = tape.sigmoid(f_gate)?;
                let g_act = tape.tanh(g_gate)?;
                let o_act = tape.sigmoid(o_gate)?;
                let keep = tape.mul(f_act, cs[l])?;
                let write = tape.mul(i_act, g_act)?;
                let c_new = tape.add(keep, write)?;
                let c_squash = tape.tanh(c_new)?;
                let h_new = tape.mul(o_act, c_squash)?;
                cs[l] = c_new;
                hs[l] = h_new;
                xt = h_new;
            }
            let proj = tape.matmul(xt, w_out)?;
            logits_steps.push(tape.add_row(proj, b_out)?);
        }
        let logits = tape.concat_rows(&logits_steps)?;
        // concat_rows stacked the per-step blocks, so targets go time-major.
        let mut targets = Vec::with_capacity(b * t_len);
        for t in 0..t_len {
            for bi in 0..b {
                targets.push(y[bi * t_len + t]);
            }
        }
        let loss = tape.softmax_xent_mean(logits, &targets)?;
        Ok((tape, loss, params))
    }

    /// Loss and flat gradient for raw id windows, bypassing the corpus
    /// lookup.  `x` and `y` are row-major `(b, seq_len)` with `y` already
    /// shifted.
    pub fn eval_ids(&self, theta: &[f64], x: &[u32], y: &[u32]) -> Result<(f64, Vec<f64>)> {
        let b = self.check_ids("charlm eval", theta, x, y)?;
        let (mut tape, loss, params) = self.build_loss(theta, x, y, b)?;
        let loss_val = tape.item(loss)?;
        let mut grads = tape.backward(loss)?;
        let mut flat = Vec::with_capacity(self.dim);
        for p in params {
            let t = grads
                .take(p)
                .expect("backward fills every parameter node");
            flat.extend_from_slice(t.data());
        }
        Ok((loss_val, flat))
    }

    /// Forward-only variant of [`eval_ids`](CharLm::eval_ids); finite
    /// differencing calls this thousands of times, so skipping the backward
    /// pass matters.
    pub fn loss_ids(&self, theta: &[f64], x: &[u32], y: &[u32]) -> Result<f64> {
        let b = self.check_ids("charlm loss", theta, x, y)?;
        let (tape, loss, _) = self.build_loss(theta, x, y, b)?;
        tape.item(loss)
    }
}

impl Objective for CharLm {
    fn name(&self) -> &'static str {
        "charlm"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// One example per valid window start.
    fn dataset_size(&self) -> usize {
        self.corpus.window_count(self.seq_len)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }

    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        let (x, y) = make_batch(&self.corpus, batch, self.seq_len)?;
        self.eval_ids(theta, &x, &y)
    }

    fn loss(&self, theta: &[f64], batch: &[usize]) -> Result<f64> {
        let (x, y) = make_batch(&self.corpus, batch, self.seq_len)?;
        self.loss_ids(theta, &x, &y)
    }

    /// Windows overlap, so an epoch counts token coverage rather than
    /// window coverage: `ceil(windows / (batch · seq_len))` steps.
    fn epoch_steps(&self, batch: usize) -> usize {
        if batch == 0 {
            return 1;
        }
        self.dataset_size()
            .div_ceil(batch * self.seq_len)
            .max(1)
    }
}

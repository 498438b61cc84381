//! The fusion model: a projected vision slot in front of token embeddings, one
//! causal self-attention layer with a residual connection, and an output head.
//!
//! All base tensors are frozen and stored 4-bit quantized. Only the vision
//! projection and the low-rank adapters on the query and value weights train:
//!
//! ```text
//! W_eff = dequant(W) + (α / r) · B · A        B: d_t × r (zero at init), A: r × d_t
//! ```

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::quant::{QuantizedTensor, QuantizedTensorRepr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub vocab_size: usize,
    pub text_dim: usize,
    pub vision_dim: usize,
    pub context_len: usize,
    pub adapter_rank: usize,
    pub adapter_scale: f64,
    #[serde(default = "default_block")]
    pub quant_block_size: usize,
    pub seed: u64,
    /// With `false` no vision slot is prepended (text-only baseline).
    #[serde(default = "default_true")]
    pub multimodal: bool,
}

fn default_block() -> usize {
    32
}

fn default_true() -> bool {
    true
}

impl FusionConfig {
    /// Desk-scale configuration used by tests and the demo.
    pub fn toy() -> Self {
        FusionConfig {
            vocab_size: 32,
            text_dim: 16,
            vision_dim: 8,
            context_len: 24,
            adapter_rank: 8,
            adapter_scale: 16.0,
            quant_block_size: 32,
            seed: 0,
            multimodal: true,
        }
    }

    /// Vision features of 768 projected into a 4096-wide text space. The
    /// vocabulary and context stay at toy size.
    pub fn full_scale() -> Self {
        FusionConfig {
            vocab_size: 32,
            text_dim: 4096,
            vision_dim: 768,
            context_len: 8,
            adapter_rank: 8,
            adapter_scale: 16.0,
            quant_block_size: 64,
            seed: 0,
            multimodal: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("vocab_size", self.vocab_size),
            ("text_dim", self.text_dim),
            ("vision_dim", self.vision_dim),
            ("context_len", self.context_len),
            ("adapter_rank", self.adapter_rank),
            ("quant_block_size", self.quant_block_size),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be positive")));
        }
        if !(self.adapter_scale.is_finite() && self.adapter_scale > 0.0) {
            return Err(Error::invalid("adapter_scale must be positive"));
        }
        if self.adapter_rank > self.text_dim {
            return Err(Error::invalid(format!(
                "adapter_rank {} exceeds text_dim {}",
                self.adapter_rank, self.text_dim
            )));
        }
        if self.multimodal && self.context_len < 2 {
            return Err(Error::invalid("multimodal context needs room for the vision slot and a token"));
        }
        Ok(())
    }

    pub fn lora_scaling(&self) -> f64 {
        self.adapter_scale / self.adapter_rank as f64
    }

    fn vision_slots(&self) -> usize {
        usize::from(self.multimodal)
    }
}

/// Quantized, never-updated base weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenBase {
    pub token_embedding: QuantizedTensor,
    pub position_embedding: QuantizedTensor,
    pub w_q: QuantizedTensor,
    pub w_k: QuantizedTensor,
    pub w_v: QuantizedTensor,
    pub w_o: QuantizedTensor,
    pub output_head: QuantizedTensor,
}

impl FrozenBase {
    pub fn tensors(&self) -> [(&'static str, &QuantizedTensor); 7] {
        [
            ("token_embedding", &self.token_embedding),
            ("position_embedding", &self.position_embedding),
            ("w_q", &self.w_q),
            ("w_k", &self.w_k),
            ("w_v", &self.w_v),
            ("w_o", &self.w_o),
            ("output_head", &self.output_head),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adapter {
    /// `d_t × r`
    pub b: Array2<f64>,
    /// `r × d_t`
    pub a: Array2<f64>,
}

/// Trainable parameters; the same shape doubles as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainableParams {
    /// `d_t × d_v`
    pub projection: Array2<f64>,
    pub q_adapter: Adapter,
    pub v_adapter: Adapter,
}

impl TrainableParams {
    pub fn zeros_like(other: &TrainableParams) -> Self {
        let z = |m: &Array2<f64>| Array2::zeros(m.dim());
        TrainableParams {
            projection: z(&other.projection),
            q_adapter: Adapter { b: z(&other.q_adapter.b), a: z(&other.q_adapter.a) },
            v_adapter: Adapter { b: z(&other.v_adapter.b), a: z(&other.v_adapter.a) },
        }
    }

    pub fn tensors(&self) -> [(&'static str, &Array2<f64>); 5] {
        [
            ("projection", &self.projection),
            ("q_adapter.b", &self.q_adapter.b),
            ("q_adapter.a", &self.q_adapter.a),
            ("v_adapter.b", &self.v_adapter.b),
            ("v_adapter.a", &self.v_adapter.a),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Array2<f64>); 5] {
        [
            ("projection", &mut self.projection),
            ("q_adapter.b", &mut self.q_adapter.b),
            ("q_adapter.a", &mut self.q_adapter.a),
            ("v_adapter.b", &mut self.v_adapter.b),
            ("v_adapter.a", &mut self.v_adapter.a),
        ]
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors().iter().flat_map(|(_, t)| t.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One training sequence. `targets[p]` is the token expected after sequence
/// position `p` (vision slot included), or `None` where no loss applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub vision: Option<Vec<f64>>,
    pub input_ids: Vec<usize>,
    pub targets: Vec<Option<usize>>,
}

impl Sample {
    /// Teacher-forcing sample for `prompt ++ answer ++ [eos]`, with loss only
    /// on the answer and end token.
    pub fn from_prompt_answer(
        vision: Option<Vec<f64>>,
        prompt: &[usize],
        answer: &[usize],
        eos: usize,
    ) -> Result<Self> {
        if prompt.is_empty() {
            return Err(Error::invalid("prompt must contain at least one token"));
        }
        let full: Vec<usize> = prompt.iter().chain(answer).copied().chain(std::iter::once(eos)).collect();
        let input_ids = full[..full.len() - 1].to_vec();
        let offset = usize::from(vision.is_some());
        let mut targets = vec![None; input_ids.len() + offset];
        for k in 0..input_ids.len() {
            if k + 1 >= prompt.len() {
                targets[k + offset] = Some(full[k + 1]);
            }
        }
        Ok(Sample { vision, input_ids, targets })
    }

    pub fn target_count(&self) -> usize {
        self.targets.iter().flatten().count()
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub x: Array2<f64>,
    pub q: Array2<f64>,
    pub k: Array2<f64>,
    pub v: Array2<f64>,
    pub z_q: Array2<f64>,
    pub z_v: Array2<f64>,
    pub attn: Array2<f64>,
    pub ctx: Array2<f64>,
    pub logits: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub config: FusionConfig,
    pub frozen: FrozenBase,
    pub trainable: TrainableParams,
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Array2<f64> {
    let normal = Normal::new(0.0, std).expect("positive std");
    Array2::from_shape_simple_fn((rows, cols), || normal.sample(rng))
}

pub(crate) fn softmax_row(row: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps = row.mapv(|v| (v - max).exp());
    let sum = exps.sum();
    exps / sum
}

impl FusionModel {
    /// Seeded initialization. Base tensors are drawn at full precision and
    /// quantized once; adapters start with `B = 0`.
    pub fn new(config: FusionConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.text_dim;
        let w_std = 1.0 / (d as f64).sqrt();
        let block = config.quant_block_size;
        let mut quant = |rows: usize, cols: usize, std: f64| -> Result<QuantizedTensor> {
            QuantizedTensor::quantize(random_matrix(&mut rng, rows, cols, std).view(), block)
        };
        let frozen = FrozenBase {
            token_embedding: quant(config.vocab_size, d, 1.0)?,
            position_embedding: quant(config.context_len, d, 0.5)?,
            w_q: quant(d, d, w_std)?,
            w_k: quant(d, d, w_std)?,
            w_v: quant(d, d, w_std)?,
            w_o: quant(d, d, w_std)?,
            output_head: quant(config.vocab_size, d, w_std)?,
        };
        let r = config.adapter_rank;
        let trainable = TrainableParams {
            projection: random_matrix(&mut rng, d, config.vision_dim, 1.0 / (config.vision_dim as f64).sqrt()),
            q_adapter: Adapter { b: Array2::zeros((d, r)), a: random_matrix(&mut rng, r, d, w_std) },
            v_adapter: Adapter { b: Array2::zeros((d, r)), a: random_matrix(&mut rng, r, d, w_std) },
        };
        Ok(FusionModel { config, frozen, trainable })
    }

    /// Fills both `B` matrices with seeded noise (for gradient checks, where
    /// `B = 0` would zero the gradient of `A`).
    pub fn perturb_adapters(&mut self, seed: u64, std: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std).expect("positive std");
        for m in [&mut self.trainable.q_adapter.b, &mut self.trainable.v_adapter.b] {
            m.mapv_inplace(|_| normal.sample(&mut rng));
        }
    }

    /// Embedding sequence: `[P·v + pos_0, E[t_0] + pos_1, …]`, or token rows only
    /// for a text-only model.
    pub fn encode_inputs(&self, vision: Option<&[f64]>, token_ids: &[usize]) -> Result<Array2<f64>> {
        let cfg = &self.config;
        let slots = cfg.vision_slots();
        match (cfg.multimodal, vision) {
            (true, None) => return Err(Error::invalid("multimodal model requires a vision feature")),
            (false, Some(_)) => return Err(Error::invalid("text-only model does not take a vision feature")),
            (true, Some(v)) if v.len() != cfg.vision_dim => {
                return Err(Error::DimensionMismatch {
                    expected: cfg.vision_dim,
                    actual: v.len(),
                    context: "vision feature".into(),
                })
            }
            _ => {}
        }
        let len = token_ids.len() + slots;
        if len == 0 {
            return Err(Error::invalid("empty input sequence"));
        }
        if len > cfg.context_len {
            return Err(Error::invalid(format!("sequence of {len} positions exceeds context {}", cfg.context_len)));
        }
        if let Some(&bad) = token_ids.iter().find(|&&t| t >= cfg.vocab_size) {
            return Err(Error::invalid(format!("token id {bad} outside vocabulary of {}", cfg.vocab_size)));
        }
        let mut x = Array2::zeros((len, cfg.text_dim));
        if let Some(v) = vision {
            let projected = self.trainable.projection.dot(&ArrayView1::from(v));
            x.row_mut(0).assign(&projected);
        }
        for (k, &t) in token_ids.iter().enumerate() {
            x.row_mut(k + slots).assign(&Array1::from(self.frozen.token_embedding.dequantize_row(t)));
        }
        for p in 0..len {
            let pos = Array1::from(self.frozen.position_embedding.dequantize_row(p));
            let mut row = x.row_mut(p);
            row += &pos;
        }
        Ok(x)
    }

    fn adapter_term(&self, adapter: &Adapter, x: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
        let z = x.dot(&adapter.a.t());
        let delta = z.dot(&adapter.b.t()) * self.config.lora_scaling();
        (z, delta)
    }

    fn forward_impl(&self, x: &Array2<f64>, with_adapters: bool) -> ForwardCache {
        let t_len = x.nrows();
        let mut q = self.frozen.w_q.matmul_transposed(x.view());
        let k = self.frozen.w_k.matmul_transposed(x.view());
        let mut v = self.frozen.w_v.matmul_transposed(x.view());
        let r = self.config.adapter_rank;
        let (mut z_q, mut z_v) = (Array2::zeros((t_len, r)), Array2::zeros((t_len, r)));
        if with_adapters {
            let (zq, dq) = self.adapter_term(&self.trainable.q_adapter, x.view());
            let (zv, dv) = self.adapter_term(&self.trainable.v_adapter, x.view());
            q += &dq;
            v += &dv;
            z_q = zq;
            z_v = zv;
        }
        let scale = 1.0 / (self.config.text_dim as f64).sqrt();
        let scores = q.dot(&k.t()) * scale;
        let mut attn = Array2::zeros((t_len, t_len));
        for t in 0..t_len {
            let probs = softmax_row(scores.slice(s![t, ..=t]));
            attn.slice_mut(s![t, ..=t]).assign(&probs);
        }
        let ctx = attn.dot(&v);
        let out = self.frozen.w_o.matmul_transposed(ctx.view());
        let h = x + &out;
        let logits = self.frozen.output_head.matmul_transposed(h.view());
        ForwardCache { x: x.clone(), q, k, v, z_q, z_v, attn, ctx, logits }
    }

    /// Logits (`positions × V`) for an encoded sequence, adapters applied.
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_impl(x, true).logits
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> ForwardCache {
        self.forward_impl(x, true)
    }

    /// Logits of the quantized base alone, adapters ignored.
    pub fn base_forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_impl(x, false).logits
    }

    /// Softmax of every logit row.
    pub fn next_token_distribution(&self, x: &Array2<f64>) -> Array2<f64> {
        let logits = self.forward(x);
        let mut out = Array2::zeros(logits.dim());
        for (mut o, row) in out.outer_iter_mut().zip(logits.outer_iter()) {
            o.assign(&softmax_row(row));
        }
        out
    }

    fn sample_loss_grad(&self, sample: &Sample, grads: Option<&mut TrainableParams>) -> Result<(f64, usize)> {
        let x = self.encode_inputs(sample.vision.as_deref(), &sample.input_ids)?;
        if sample.targets.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                actual: sample.targets.len(),
                context: "targets per sequence position".into(),
            });
        }
        let cache = self.forward_cached(&x);
        let mut loss = 0.0;
        let mut count = 0;
        let mut d_logits = Array2::zeros(cache.logits.dim());
        for (p, target) in sample.targets.iter().enumerate() {
            let Some(t) = *target else { continue };
            if t >= self.config.vocab_size {
                return Err(Error::invalid(format!("target id {t} outside vocabulary")));
            }
            let row = cache.logits.row(p);
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let log_norm = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            loss += log_norm - row[t];
            let probs = softmax_row(row);
            count += 1;
            let mut row = d_logits.row_mut(p);
            row.assign(&probs);
            row[t] -= 1.0;
        }
        if let Some(g) = grads {
            self.backward(&cache, &d_logits, sample.vision.as_deref(), g);
        }
        Ok((loss, count))
    }

    /// Accumulates parameter gradients of `Σ d_logits ⊙ logits` into `grads`.
    pub fn backward(&self, cache: &ForwardCache, d_logits: &Array2<f64>, vision: Option<&[f64]>, grads: &mut TrainableParams) {
        let s = self.config.lora_scaling();
        let scale = 1.0 / (self.config.text_dim as f64).sqrt();
        let d_h = self.frozen.output_head.left_matmul(d_logits.view());
        let mut d_x = d_h.clone();
        let d_ctx = self.frozen.w_o.left_matmul(d_h.view());
        let d_attn = d_ctx.dot(&cache.v.t());
        let d_v = cache.attn.t().dot(&d_ctx);
        let mut d_scores = Array2::zeros(d_attn.dim());
        for t in 0..d_attn.nrows() {
            let a = cache.attn.slice(s![t, ..=t]);
            let da = d_attn.slice(s![t, ..=t]);
            let dot: f64 = a.iter().zip(da.iter()).map(|(x, y)| x * y).sum();
            let row = &a * &(&da - dot);
            d_scores.slice_mut(s![t, ..=t]).assign(&row);
        }
        let d_q = d_scores.dot(&cache.k) * scale;
        let d_k = d_scores.t().dot(&cache.q) * scale;

        let qa = &self.trainable.q_adapter;
        let dq_b = d_q.dot(&qa.b);
        grads.q_adapter.b.scaled_add(s, &d_q.t().dot(&cache.z_q));
        grads.q_adapter.a.scaled_add(s, &dq_b.t().dot(&cache.x));
        d_x += &self.frozen.w_q.left_matmul(d_q.view());
        d_x.scaled_add(s, &dq_b.dot(&qa.a));

        d_x += &self.frozen.w_k.left_matmul(d_k.view());

        let va = &self.trainable.v_adapter;
        let dv_b = d_v.dot(&va.b);
        grads.v_adapter.b.scaled_add(s, &d_v.t().dot(&cache.z_v));
        grads.v_adapter.a.scaled_add(s, &dv_b.t().dot(&cache.x));
        d_x += &self.frozen.w_v.left_matmul(d_v.view());
        d_x.scaled_add(s, &dv_b.dot(&va.a));

        if let Some(v) = vision {
            let dx0 = d_x.row(0).insert_axis(Axis(1));
            let vrow = ArrayView1::from(v).insert_axis(Axis(0));
            grads.projection += &dx0.dot(&vrow);
        }
    }

    /// Mean cross-entropy over all target positions of the batch.
    pub fn loss(&self, batch: &[Sample]) -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0;
        for sample in batch {
            let (l, c) = self.sample_loss_grad(sample, None)?;
            total += l;
            count += c;
        }
        if count == 0 {
            return Err(Error::invalid("batch has no target positions"));
        }
        Ok(total / count as f64)
    }

    /// Loss and gradients of [`FusionModel::loss`] with respect to the trainable parameters.
    pub fn loss_and_gradients(&self, batch: &[Sample]) -> Result<(f64, TrainableParams)> {
        let mut grads = TrainableParams::zeros_like(&self.trainable);
        let mut total = 0.0;
        let mut count = 0;
        for sample in batch {
            let (l, c) = self.sample_loss_grad(sample, Some(&mut grads))?;
            total += l;
            count += c;
        }
        if count == 0 {
            return Err(Error::invalid("batch has no target positions"));
        }
        let inv = 1.0 / count as f64;
        for (_, g) in grads.tensors_mut() {
            *g *= inv;
        }
        Ok((total * inv, grads))
    }

    /// One full-batch gradient-descent step on the trainable parameters.
    /// Returns the loss before the update.
    pub fn train_step(&mut self, batch: &[Sample], learning_rate: f64) -> Result<f64> {
        let (loss, grads) = self.loss_and_gradients(batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                loss,
                step: 0,
                diagnostics: format!(
                    "max |param| = {:.3e}, max |grad| = {:.3e}, learning rate = {learning_rate}",
                    self.trainable.max_abs(),
                    grads.max_abs()
                ),
            });
        }
        for ((_, p), (_, g)) in self.trainable.tensors_mut().into_iter().zip(grads.tensors()) {
            p.scaled_add(-learning_rate, g);
        }
        Ok(loss)
    }

    /// Greedy decoding: appends argmax tokens (lowest id on ties) until `eos`,
    /// `max_new` tokens, or the context is full. Returns the new tokens without `eos`.
    pub fn greedy_decode(&self, vision: Option<&[f64]>, prompt: &[usize], max_new: usize, eos: usize) -> Result<Vec<usize>> {
        let mut tokens = prompt.to_vec();
        let mut generated = Vec::new();
        let slots = self.config.vision_slots();
        while generated.len() < max_new && tokens.len() + slots < self.config.context_len {
            let x = self.encode_inputs(vision, &tokens)?;
            let logits = self.forward(&x);
            let last = logits.row(logits.nrows() - 1);
            let next = last
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                .0;
            if next == eos {
                break;
            }
            tokens.push(next);
            generated.push(next);
        }
        Ok(generated)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let f = &self.frozen;
        Checkpoint {
            config: self.config.clone(),
            frozen: FrozenRepr {
                token_embedding: (&f.token_embedding).into(),
                position_embedding: (&f.position_embedding).into(),
                w_q: (&f.w_q).into(),
                w_k: (&f.w_k).into(),
                w_v: (&f.w_v).into(),
                w_o: (&f.w_o).into(),
                output_head: (&f.output_head).into(),
            },
            trainable: self.trainable.clone(),
        }
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        ck.config.validate()?;
        let f = ck.frozen;
        let frozen = FrozenBase {
            token_embedding: f.token_embedding.try_into()?,
            position_embedding: f.position_embedding.try_into()?,
            w_q: f.w_q.try_into()?,
            w_k: f.w_k.try_into()?,
            w_v: f.w_v.try_into()?,
            w_o: f.w_o.try_into()?,
            output_head: f.output_head.try_into()?,
        };
        let c = &ck.config;
        let (d, r) = (c.text_dim, c.adapter_rank);
        let expected = [
            (frozen.token_embedding.shape(), (c.vocab_size, d)),
            (frozen.position_embedding.shape(), (c.context_len, d)),
            (frozen.w_q.shape(), (d, d)),
            (frozen.w_k.shape(), (d, d)),
            (frozen.w_v.shape(), (d, d)),
            (frozen.w_o.shape(), (d, d)),
            (frozen.output_head.shape(), (c.vocab_size, d)),
            (ck.trainable.projection.dim(), (d, c.vision_dim)),
            (ck.trainable.q_adapter.b.dim(), (d, r)),
            (ck.trainable.q_adapter.a.dim(), (r, d)),
            (ck.trainable.v_adapter.b.dim(), (d, r)),
            (ck.trainable.v_adapter.a.dim(), (r, d)),
        ];
        if let Some((got, want)) = expected.iter().find(|(g, w)| g != w) {
            return Err(Error::invalid(format!("checkpoint tensor shape {got:?} does not match config {want:?}")));
        }
        Ok(FusionModel { config: ck.config, frozen, trainable: ck.trainable })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_checkpoint())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenRepr {
    pub token_embedding: QuantizedTensorRepr,
    pub position_embedding: QuantizedTensorRepr,
    pub w_q: QuantizedTensorRepr,
    pub w_k: QuantizedTensorRepr,
    pub w_v: QuantizedTensorRepr,
    pub w_o: QuantizedTensorRepr,
    pub output_head: QuantizedTensorRepr,
}

/// Serialized model: config, quantized base (codes + scales) and trainable tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: FusionConfig,
    pub frozen: FrozenRepr,
    pub trainable: TrainableParams,
}

/// Draws a random unit-free vector, e.g. a stand-in vision feature.
pub fn random_vector(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

//! Word vocabulary, the 16-sample toy task, greedy generation of a symptom
//! and summary pair, and the finite-difference gradient check.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::model::{FusionConfig, FusionModel, Sample};
use crate::data::GenerationOutput;
use crate::error::{Error, Result};

pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";

const TOY_WORDS: [&str; 32] = [
    "<pad>", "<bos>", "<eos>", "SYMPTOM:", "|", "SUMMARY:", "patient", "has", "with", "pain", "swollen", "tonsils",
    "eye", "redness", "skin", "rash", "knee", "swelling", "mujhe", "hai", "ho", "raha", "mera", "dard", "mein", "image",
    "see", "throat", "itchy", "and", "fever", "since",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        for special in [BOS, EOS] {
            if !index.contains_key(special) {
                return Err(Error::invalid(format!("vocabulary lacks {special}")));
            }
        }
        Ok(Vocab { words, index })
    }

    pub fn toy() -> Self {
        Vocab::new(TOY_WORDS).expect("toy vocabulary is well formed")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn bos(&self) -> usize {
        self.index[BOS]
    }

    pub fn eos(&self) -> usize {
        self.index[EOS]
    }

    /// Whitespace-split encoding; unknown words are an error.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace()
            .map(|w| self.id(w).ok_or_else(|| Error::invalid(format!("word {w:?} not in vocabulary"))))
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().map(|&i| self.words.get(i).map_or("<unk>", String::as_str)).collect::<Vec<_>>().join(" ")
    }
}

/// One toy pair: a vision feature, the prompt (starting with `<bos>`) and the
/// serialized answer, all as token ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyExample {
    pub vision: Vec<f64>,
    pub prompt: Vec<usize>,
    pub answer: Vec<usize>,
}

impl ToyExample {
    pub fn to_sample(&self, eos: usize, multimodal: bool) -> Result<Sample> {
        let vision = multimodal.then(|| self.vision.clone());
        Sample::from_prompt_answer(vision, &self.prompt, &self.answer, eos)
    }
}

const TOY_SYMPTOMS: [(&str, &str); 4] = [
    ("swollen tonsils", "patient has swollen tonsils with pain"),
    ("eye redness", "patient has itchy eye redness"),
    ("skin rash", "patient has itchy skin rash"),
    ("knee swelling", "patient has knee swelling with pain"),
];

const TOY_PROMPTS: [&str; 4] = ["mujhe pain hai", "mera dard ho raha", "see image", "fever since mujhe dard"];

/// 4 symptoms × 4 code-mixed prompts. The prompts carry no symptom
/// information, so the symptom must be read from the vision feature: a unit
/// basis vector for the symptom plus small seeded noise.
pub fn toy_task(seed: u64, vision_dim: usize) -> Result<Vec<ToyExample>> {
    if vision_dim < TOY_SYMPTOMS.len() {
        return Err(Error::invalid(format!("toy task needs vision_dim >= {}", TOY_SYMPTOMS.len())));
    }
    let vocab = Vocab::toy();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).expect("positive std");
    let mut out = Vec::with_capacity(16);
    for (s, (symptom, summary)) in TOY_SYMPTOMS.iter().enumerate() {
        let answer = vocab.encode(&GenerationOutput::serialize_target(symptom, summary))?;
        for prompt in TOY_PROMPTS {
            let mut vision: Vec<f64> = (0..vision_dim).map(|_| noise.sample(&mut rng)).collect();
            vision[s] += 1.0;
            let mut ids = vec![vocab.bos()];
            ids.extend(vocab.encode(prompt)?);
            out.push(ToyExample { vision, prompt: ids, answer: answer.clone() });
        }
    }
    Ok(out)
}

/// Reads a toy fixture: one JSON object `{vision, prompt, answer}` per line.
pub fn load_toy_fixture(path: impl AsRef<Path>) -> Result<Vec<ToyExample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedLine { line: i + 1, message: e.to_string() })
        })
        .collect()
}

pub fn write_toy_fixture(path: impl AsRef<Path>, examples: &[ToyExample]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for ex in examples {
        text.push_str(&serde_json::to_string(ex)?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Greedy decoding of up to `max_len` tokens, parsed under the
/// `SYMPTOM: <T> | SUMMARY: <S>` contract. Parse failures are flagged, not raised.
pub fn generate(
    model: &FusionModel,
    vocab: &Vocab,
    vision: Option<&[f64]>,
    prompt_ids: &[usize],
    max_len: usize,
) -> Result<GenerationOutput> {
    let ids = model.greedy_decode(vision, prompt_ids, max_len, vocab.eos())?;
    Ok(GenerationOutput::parse(&vocab.decode(&ids)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_parameter: String,
    pub checked: usize,
}

/// Compares analytic gradients with central differences on every trainable
/// scalar. Relative error is `|a − n| / max(|a| + |n|, floor)`, with `floor`
/// guarding scalars whose gradient is zero on both sides.
pub fn gradient_check(model: &FusionModel, batch: &[Sample], h: f64, floor: f64) -> Result<GradCheckReport> {
    let (_, analytic) = model.loss_and_gradients(batch)?;
    let mut probe = model.clone();
    let mut report = GradCheckReport { max_relative_error: 0.0, worst_parameter: String::new(), checked: 0 };
    for (t, (name, grad)) in analytic.tensors().into_iter().enumerate() {
        for (idx, &a) in grad.indexed_iter() {
            let original = probe.trainable.tensors()[t].1[idx];
            probe.trainable.tensors_mut()[t].1[idx] = original + h;
            let plus = probe.loss(batch)?;
            probe.trainable.tensors_mut()[t].1[idx] = original - h;
            let minus = probe.loss(batch)?;
            probe.trainable.tensors_mut()[t].1[idx] = original;
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(floor);
            report.checked += 1;
            if rel > report.max_relative_error {
                report.max_relative_error = rel;
                report.worst_parameter = format!("{name}{idx:?}");
            }
        }
    }
    Ok(report)
}

/// Tiny configuration for gradient checks: every scalar is probed.
pub fn gradcheck_config(seed: u64) -> FusionConfig {
    FusionConfig {
        vocab_size: 32,
        text_dim: 8,
        vision_dim: 4,
        context_len: 16,
        adapter_rank: 2,
        adapter_scale: 4.0,
        quant_block_size: 16,
        seed,
        multimodal: true,
    }
}

/// Gradient check on the tiny config with seeded non-zero `B`, using four toy samples.
pub fn seeded_gradient_check(seed: u64) -> Result<GradCheckReport> {
    let config = gradcheck_config(seed);
    let mut model = FusionModel::new(config.clone())?;
    model.perturb_adapters(seed ^ 0x5eed, 0.3);
    let eos = Vocab::toy().eos();
    let batch = toy_task(seed, config.vision_dim)?
        .iter()
        .step_by(4)
        .map(|ex| ex.to_sample(eos, true))
        .collect::<Result<Vec<_>>>()?;
    gradient_check(&model, &batch, GRADCHECK_STEP, GRADCHECK_FLOOR)
}

pub const GRADCHECK_STEP: f64 = 1e-4;
pub const GRADCHECK_FLOOR: f64 = 1e-8;
pub const GRADCHECK_TOLERANCE: f64 = 1e-3;

pub const TOY_STEPS: usize = 200;
pub const TOY_LEARNING_RATE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyTrainingReport {
    pub losses: Vec<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub frozen_unchanged: bool,
}

impl ToyTrainingReport {
    pub fn loss_ratio(&self) -> f64 {
        self.final_loss / self.initial_loss
    }
}

/// Trains `model` on `batch` for `steps` full-batch steps. `final_loss` is
/// measured after the last update.
pub fn train(model: &mut FusionModel, batch: &[Sample], steps: usize, learning_rate: f64) -> Result<ToyTrainingReport> {
    let before = model.to_checkpoint().frozen;
    let mut losses = Vec::with_capacity(steps + 1);
    for step in 0..steps {
        let loss = model.train_step(batch, learning_rate).map_err(|e| match e {
            Error::NonFiniteLoss { loss, diagnostics, .. } => Error::NonFiniteLoss { loss, step, diagnostics },
            other => other,
        })?;
        losses.push(loss);
    }
    let final_loss = model.loss(batch)?;
    losses.push(final_loss);
    Ok(ToyTrainingReport {
        initial_loss: losses[0],
        final_loss,
        losses,
        frozen_unchanged: model.to_checkpoint().frozen == before,
    })
}

/// The default toy training run on the 16-sample task.
pub fn train_toy(seed: u64) -> Result<(FusionModel, ToyTrainingReport)> {
    let config = FusionConfig { seed, ..FusionConfig::toy() };
    let mut model = FusionModel::new(config.clone())?;
    let eos = Vocab::toy().eos();
    let batch = toy_task(seed, config.vision_dim)?
        .iter()
        .map(|ex| ex.to_sample(eos, true))
        .collect::<Result<Vec<_>>>()?;
    let report = train(&mut model, &batch, TOY_STEPS, TOY_LEARNING_RATE)?;
    Ok((model, report))
}

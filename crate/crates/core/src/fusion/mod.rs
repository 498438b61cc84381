//! Desk-scale fusion model.
//!
//! A vision feature is projected by a trainable matrix `P` into the text
//! embedding space and occupies position 0 ahead of the token embeddings. The
//! base (embeddings, one causal attention layer, output head) is frozen and
//! 4-bit quantized; low-rank adapters on the query and value weights and `P`
//! are the only trained parameters.

mod model;
mod quant;
mod toy;

pub use model::{
    random_vector, Adapter, Checkpoint, ForwardCache, FrozenBase, FrozenRepr, FusionConfig, FusionModel, Sample,
    TrainableParams,
};
pub use quant::{QuantizedTensor, QuantizedTensorRepr, QUANT_LEVELS};
pub use toy::{
    generate, gradcheck_config, gradient_check, load_toy_fixture, seeded_gradient_check, toy_task, train, train_toy,
    write_toy_fixture, GradCheckReport, ToyExample, ToyTrainingReport, Vocab, BOS, EOS, GRADCHECK_FLOOR,
    GRADCHECK_STEP, GRADCHECK_TOLERANCE, TOY_LEARNING_RATE, TOY_STEPS,
};

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use medsumm_core::fusion::{toy_task, FusionConfig, FusionModel, QuantizedTensor, Sample, Vocab};
use ndarray::Array2;

fn toy_batch() -> (FusionModel, Vec<Sample>) {
    let model = FusionModel::new(FusionConfig::toy()).unwrap();
    let eos = Vocab::toy().eos();
    let batch = toy_task(0, 8).unwrap().iter().map(|ex| ex.to_sample(eos, true).unwrap()).collect();
    (model, batch)
}

fn training(c: &mut Criterion) {
    let (model, batch) = toy_batch();
    c.bench_function("toy/loss_and_gradients", |b| b.iter(|| model.loss_and_gradients(black_box(&batch)).unwrap()));
    c.bench_function("toy/train_step", |b| {
        b.iter_batched(|| model.clone(), |mut m| m.train_step(&batch, 0.1).unwrap(), criterion::BatchSize::SmallInput)
    });
}

fn quantization(c: &mut Criterion) {
    let t = Array2::from_shape_fn((256, 256), |(i, j)| ((i * 31 + j * 17) % 97) as f64 / 48.0 - 1.0);
    c.bench_function("quantize/256x256", |b| b.iter(|| QuantizedTensor::quantize(black_box(t.view()), 64).unwrap()));
    let q = QuantizedTensor::quantize(t.view(), 64).unwrap();
    let x = Array2::from_elem((8, 256), 0.5);
    c.bench_function("matmul_transposed/8x256x256", |b| b.iter(|| q.matmul_transposed(black_box(x.view()))));
}

criterion_group!(benches, training, quantization);
criterion_main!(benches);

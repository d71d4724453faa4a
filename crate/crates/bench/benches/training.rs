use std::hint::black_box;

use airgan_core::cgan::{Architecture, Generator, TrainConfig, Trainer};
use airgan_core::data::surrogate::{surrogate_dataset, SurrogateConfig};
use airgan_core::eval::generate_fake_dataset;
use airgan_core::ndcore::{mlp_backward, mlp_forward, Activation, Matrix, MlpParams};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn forward_backward(c: &mut Criterion) {
    let arch = Architecture::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut group = c.benchmark_group("mlp");
    for (name, sizes, output) in [
        ("generator", arch.generator_sizes(), Activation::Linear),
        ("discriminator", arch.discriminator_sizes(), Activation::Sigmoid),
    ] {
        let p = MlpParams::init(&sizes, output, arch.leaky_slope, &mut rng).unwrap();
        let x = Matrix::from_fn(16, sizes[0], |_, _| rng.random_range(-1.0..1.0));
        let up = Matrix::from_fn(16, *sizes.last().unwrap(), |_, _| 1.0);
        group.bench_function(format!("{name}_forward_b16"), |b| {
            b.iter(|| mlp_forward(black_box(&p), black_box(&x)).unwrap())
        });
        group.bench_function(format!("{name}_forward_backward_b16"), |b| {
            b.iter(|| {
                let (_, cache) = mlp_forward(&p, black_box(&x)).unwrap();
                mlp_backward(&p, &cache, &up).unwrap()
            })
        });
    }
    group.finish();
}

fn epoch(c: &mut Criterion) {
    let data = surrogate_dataset(&SurrogateConfig::default()).unwrap();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for (name, eval) in [("epoch_210_batches_eval_8", 8), ("epoch_210_batches_eval_10k", 10_000)] {
        let cfg = TrainConfig {
            eval_samples_per_epoch: eval,
            ..TrainConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter_batched(
                || Trainer::new(&data, &cfg).unwrap(),
                |mut t| t.run_epoch().unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn generate(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gen = Generator::init(&Architecture::default(), None, &mut rng).unwrap();
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    group.bench_function("5000_per_class", |b| {
        b.iter(|| generate_fake_dataset(&gen, 5000, 0, "bench", None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, forward_backward, epoch, generate);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use raman_bench::corpus;
use raman_core::baselines::{KnnModel, Metric};
use raman_core::neural::{classifier_train_config, fcnn_spec, fit_binary, lcnn_spec};
use raman_core::nn::Network;
use raman_core::occ::{fit_gate, AutoencoderSpec, GateConfig, GateMode};
use raman_core::synthesis::{blend_pool, BlendSchedule};
use raman_core::Label;

fn forward(c: &mut Criterion) {
    let set = corpus(2470, 0);
    let x = set.spectra()[0].intensities();
    let fcnn = Network::init(fcnn_spec(), 0);
    let lcnn = Network::init(lcnn_spec(), 0);
    c.bench_function("forward/fcnn", |b| b.iter(|| fcnn.forward(black_box(x)).unwrap()));
    c.bench_function("forward/lcnn", |b| b.iter(|| lcnn.forward(black_box(x)).unwrap()));
}

fn epoch(c: &mut Criterion) {
    let set = corpus(2470, 0);
    let mut g = c.benchmark_group("epoch");
    g.sample_size(10);
    g.bench_function("lcnn", |b| {
        b.iter(|| fit_binary(&lcnn_spec(), black_box(&set), &classifier_train_config(1, 0)).unwrap())
    });
    g.bench_function("fcnn", |b| {
        b.iter(|| fit_binary(&fcnn_spec(), black_box(&set), &classifier_train_config(1, 0)).unwrap())
    });
    let pos = set.with_label(Label::Positive);
    g.bench_function("autoencoder", |b| {
        b.iter(|| {
            fit_gate(&pos, GateMode::OneClass, &AutoencoderSpec::new(2470), &GateConfig::new(1, 0)).unwrap()
        })
    });
    g.finish();
}

fn knn(c: &mut Criterion) {
    let set = corpus(2470, 0);
    let model = KnnModel::fit(&set.features(), &set.labels(), 1, Metric::Manhattan).unwrap();
    let x = set.spectra()[3].intensities();
    c.bench_function("knn/predict", |b| b.iter(|| model.predict(black_box(x)).unwrap()));
}

fn blending(c: &mut Criterion) {
    let pos = corpus(2470, 0).with_label(Label::Positive);
    let sched = BlendSchedule::default();
    let mut g = c.benchmark_group("blend");
    g.sample_size(10);
    g.bench_function("sample_1000", |b| b.iter(|| blend_pool(&pos, &sched, Some(1000), 0).unwrap()));
    g.finish();
}

criterion_group!(benches, forward, epoch, knn, blending);
criterion_main!(benches);

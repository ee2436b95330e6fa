use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use nladpcm::experiments::{generate, CorpusKind};
use nladpcm::lpc::{fit, Taper};
use nladpcm::mlp::{lm_train, random_candidate, Topology, TrainConfig};
use nladpcm::{decode, encode, Adaptation, CodecConfig, PredictorKind, TrainingSet};

fn bench_fits(c: &mut Criterion) {
    let signal = generate(CorpusKind::Speechlike, 400, 1).samples;
    c.bench_function("lpc10_fit_100", |b| {
        b.iter(|| fit(&signal[..100], 10, Taper::Rectangular))
    });
    let data = TrainingSet::from_window(&signal[..110], 10).unwrap();
    let init = random_candidate(Topology::default(), 0.2, 7, 0);
    let cfg = TrainConfig::default();
    c.bench_function("lm_train_6_epochs_100", |b| {
        b.iter(|| lm_train(&init, &data, &cfg).unwrap())
    });
}

fn bench_encode(c: &mut Criterion) {
    let signal = generate(CorpusKind::Speechlike, 4000, 2);
    let mut group = c.benchmark_group("encode");
    group.throughput(Throughput::Elements(signal.len() as u64));
    group.sample_size(10);
    let cases = [
        ("b-lpc10", PredictorKind::Lpc, Adaptation::Backward),
        ("f-lpc10", PredictorKind::Lpc, Adaptation::Forward),
        ("b-mlp", PredictorKind::Mlp, Adaptation::Backward),
        ("b-hybrid", PredictorKind::Hybrid, Adaptation::Backward),
    ];
    for (name, predictor, adaptation) in cases {
        let cfg = CodecConfig::block(predictor, adaptation, 4, 100).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| encode(&signal, cfg).unwrap())
        });
    }
    group.finish();

    let cfg = CodecConfig::block(PredictorKind::Mlp, Adaptation::Backward, 4, 100).unwrap();
    let (stream, _) = encode(&signal, &cfg).unwrap();
    let mut group = c.benchmark_group("decode");
    group.throughput(Throughput::Elements(signal.len() as u64));
    group.sample_size(10);
    group.bench_function("b-mlp", |b| b.iter(|| decode(&stream).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_fits, bench_encode);
criterion_main!(benches);

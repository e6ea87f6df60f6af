use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use depparse::features::EncoderConfig;
use depparse::graph_parser::{decode_single_root_mst, BiaffineParser, GraphConfig, ScoreMatrix};
use depparse::neural::TrainSchedule;
use depparse::synthetic::toy_treebank;
use depparse::transition::{SystemKind, TransitionConfig, TransitionParser};

fn mst(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_root_mst");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [10, 25, 50] {
        let scores = ScoreMatrix::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &scores, |b, s| {
            b.iter(|| decode_single_root_mst(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn small_encoder() -> EncoderConfig {
    EncoderConfig {
        word_dim: 64,
        supertoken_dim: 64,
        augment: true,
        ..EncoderConfig::default()
    }
}

fn parsing(c: &mut Criterion) {
    let train = toy_treebank("train", 50, 1);
    let test = toy_treebank("test", 20, 2);
    let schedule = TrainSchedule {
        epochs: 1,
        ..TrainSchedule::default()
    };
    let mut group = c.benchmark_group("parse_20_sentences");
    for system in [SystemKind::ArcStandard, SystemKind::ArcEager] {
        let cfg = TransitionConfig {
            system,
            encoder: small_encoder(),
            hidden_dim: 128,
            ..TransitionConfig::default()
        };
        let (parser, _) = TransitionParser::train(&train, &train, &cfg, &schedule).unwrap();
        group.bench_function(system.to_string(), |b| b.iter(|| parser.parse_treebank(black_box(&test)).unwrap()));
    }
    let cfg = GraphConfig {
        encoder: small_encoder(),
        arc_dim: 128,
        ..GraphConfig::default()
    };
    let (parser, _) = BiaffineParser::train(&train, &train, &cfg, &schedule).unwrap();
    group.bench_function("graph", |b| b.iter(|| parser.parse_treebank(black_box(&test)).unwrap()));
    group.finish();
}

criterion_group!(benches, mst, parsing);
criterion_main!(benches);

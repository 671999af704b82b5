use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use discharge_bench::{fixture_c, fragment};
use discharge_core::choosability::algorithm_a;
use discharge_core::fragments::build_reduction_problem;
use discharge_core::lp::{build_model, solve, ModelOptions, SolveOptions};
use discharge_core::prover::generate_d;
use discharge_core::structure::{structure_of_word, Template};
use discharge_core::words::{enumerate_words, filter_forbidden, WordKind};

fn words(c: &mut Criterion) {
    c.bench_function("enumerate Face3", |b| {
        b.iter(|| enumerate_words(black_box(WordKind::Face3)).count())
    });
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("enumerate Face5", |b| {
        b.iter(|| enumerate_words(black_box(WordKind::Face5)).count())
    });
    let d = generate_d();
    let patterns: Vec<_> = fixture_c().into_iter().flat_map(|e| e.patterns).collect();
    g.bench_function("filter D by fixture C", |b| {
        b.iter(|| filter_forbidden(black_box(&d), black_box(&patterns)).len())
    });
    let model = build_model(&d, ModelOptions::default());
    g.bench_function("solve with empty C", |b| {
        b.iter(|| solve(black_box(&model), &SolveOptions::default(), None).unwrap().alpha)
    });
    g.finish();
}

fn heuristic(c: &mut Criterion) {
    for name in ["c1", "c4", "c6", "h12"] {
        let p = build_reduction_problem(&fragment(name), 12).unwrap();
        c.bench_function(&format!("algorithm A on {name}"), |b| {
            b.iter(|| algorithm_a(black_box(&p.graph)))
        });
    }
}

fn embedding(c: &mut Criterion) {
    let t = Template::new("h03", &fragment("h03"));
    let sample: Vec<_> = enumerate_words(WordKind::Face5).step_by(300).collect();
    c.bench_function("embed h03 into 1080 Face5 words", |b| {
        b.iter(|| {
            sample
                .iter()
                .filter(|w| t.embed(&structure_of_word(w)).is_some())
                .count()
        })
    });
}

criterion_group!(benches, words, heuristic, embedding);
criterion_main!(benches);

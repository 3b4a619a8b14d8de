use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fv_bench::{family, sentence};
use fv_core::reduced::reduced_product;
use fv_core::translate::{certify, Translator};

const SENTENCES: [&str; 3] = ["sup x . P(x)", "half(P(c)) -. P(f(c,c))", "inf x . sup y . d(f(x,y),c) -. P(y)"];

fn bench_translate(c: &mut Criterion) {
    let mut g = c.benchmark_group("translate");
    for text in SENTENCES {
        for n in 0..=2 {
            let f = sentence(text);
            g.bench_with_input(BenchmarkId::new(text, n), &n, |b, &n| {
                // fresh translator so the memo does not short-circuit
                b.iter(|| Translator::new().translate(black_box(&f), n).unwrap())
            });
        }
    }
    g.finish();
}

fn bench_reduced_product(c: &mut Criterion) {
    let fam = family(7);
    c.bench_function("reduced_product", |b| b.iter(|| reduced_product(black_box(&fam)).unwrap()));
}

fn bench_certify(c: &mut Criterion) {
    let fam = family(7);
    let mut g = c.benchmark_group("certify");
    for text in SENTENCES {
        let f = sentence(text);
        g.bench_function(text, |b| b.iter(|| certify(black_box(&f), 2, &fam, &[]).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_translate, bench_reduced_product, bench_certify);
criterion_main!(benches);

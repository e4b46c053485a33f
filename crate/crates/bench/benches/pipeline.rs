use std::hint::black_box;

use boundseek::distance::{set_min_distances, Compressor, Levenshtein, Ncd};
use boundseek::generators::{
    generator_by_name, initial_set, nmcs_step1, GeneratorSettings, NmcsBudget,
};
use boundseek::rng::{derive, Stream};
use boundseek::switchsearch::property_switch_search;
use boundseek::{
    Candidate, DistanceMetric, MutatorSet, Origin, SwitchBudget, ValidityOracle, WalkMode,
    GENERATOR_NAMES,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn samples(name: &str, n: usize) -> Vec<String> {
    let generator = generator_by_name(name, &GeneratorSettings::default()).unwrap();
    let mut rng = derive(1, Stream::Custom(0), 0);
    (0..n).map(|_| generator.sample(&mut rng)).collect()
}

fn distances(c: &mut Criterion) {
    let json = samples("json", 400);
    let (a, b) = (&json[0], &json[1]);
    let ncd = Ncd {
        compressor: Compressor::default(),
    };
    let mut g = c.benchmark_group("distance");
    g.bench_function("levenshtein_pair", |bench| {
        bench.iter(|| Levenshtein.eval(black_box(a), black_box(b)))
    });
    g.bench_function("ncd_pair", |bench| {
        bench.iter(|| ncd.eval(black_box(a), black_box(b)))
    });

    let from: Vec<&str> = json[..40].iter().map(String::as_str).collect();
    let to: Vec<&str> = json[40..].iter().map(String::as_str).collect();
    g.bench_function("levenshtein_set_40x360", |bench| {
        bench.iter(|| set_min_distances(black_box(&from), black_box(&to), &Levenshtein))
    });
    g.bench_function("ncd_set_40x360", |bench| {
        bench.iter(|| set_min_distances(black_box(&from), black_box(&to), &ncd))
    });
    g.finish();
}

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for name in GENERATOR_NAMES {
        let generator = generator_by_name(name, &GeneratorSettings::default()).unwrap();
        let mut rng = derive(2, Stream::Custom(0), 0);
        g.bench_function(name, |bench| bench.iter(|| generator.sample(&mut rng)));
    }
    g.finish();

    let date = generator_by_name("date", &GeneratorSettings::default()).unwrap();
    let ncd = Ncd {
        compressor: Compressor::default(),
    };
    c.bench_function("step1_date_tset10", |bench| {
        bench.iter(|| {
            let mut rng = derive(3, Stream::Step1, 0);
            let initial = initial_set(date.as_ref(), 1, 3, &mut rng);
            nmcs_step1(
                date.as_ref(),
                initial,
                &ncd,
                10,
                &NmcsBudget::default(),
                3,
                &mut rng,
            )
        })
    });
}

fn step2(c: &mut Criterion) {
    let oracle = ValidityOracle::json();
    let ops = MutatorSet::preset("chars").unwrap();
    let seed = Candidate::new(
        r#"{"name":"boundary","tags":["a","b"],"size":12}"#.to_owned(),
        true,
        Origin::Initial { seed: 0, index: 0 },
    );
    c.bench_function("step2_json_walk", |bench| {
        bench.iter(|| {
            let mut rng = derive(4, Stream::Step2 { preset: 0 }, 0);
            property_switch_search(
                0,
                &seed,
                &ops,
                &oracle,
                &SwitchBudget::default(),
                WalkMode::default(),
                &mut rng,
            )
        })
    });
}

criterion_group!(benches, distances, generation, step2);
criterion_main!(benches);

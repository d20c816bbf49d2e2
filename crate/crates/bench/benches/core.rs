use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num::{BigInt, BigRational};

use bsf_core::constructor::{
    build_checkpointed_stream, build_property_p_stream, Budget, PropertyPSchedule, Realizer, TargetPlan,
    WindowRule,
};
use bsf_core::freqstats::{cesaro_trajectory, cesaro_trajectory_f64};
use bsf_core::spectrum::{invariant_polytope, is_in_spectrum};
use bsf_core::{BetaSystem, FrequencyVector, QuadraticNumber, ShiftSpec, Symbol};

fn golden() -> ShiftSpec {
    ShiftSpec::golden_mean().with_spec_constant(1)
}

fn targets(spec: &ShiftSpec, list: &[&str]) -> Vec<FrequencyVector> {
    let blocks = Arc::new(spec.enumerate_language(1).unwrap());
    list.iter().map(|s| FrequencyVector::parse(blocks.clone(), s).unwrap()).collect()
}

fn word(len: usize) -> Vec<Symbol> {
    (0..len).map(|i| ((i * 2654435761) >> 7 & 1) as Symbol).collect()
}

fn language(c: &mut Criterion) {
    let spec = ShiftSpec::golden_mean();
    c.bench_function("enumerate golden L_20", |b| b.iter(|| spec.enumerate_language(black_box(20)).unwrap()));
}

fn beta(c: &mut Criterion) {
    let sys = BetaSystem::golden();
    let x = QuadraticNumber::rational(BigRational::new(BigInt::from(355), BigInt::from(1000)));
    c.bench_function("golden greedy expansion, 200 digits", |b| {
        b.iter(|| sys.greedy_expansion(black_box(&x), 200).unwrap())
    });
}

fn cesaro(c: &mut Criterion) {
    let spec = ShiftSpec::full(2).unwrap();
    let w = word(2000);
    c.bench_function("exact Cesàro tower, n=2000, R=3", |b| {
        b.iter(|| cesaro_trajectory(w.iter().copied(), 1, 3, &spec, &[2000]).unwrap())
    });
    let long = word(1_000_000);
    c.bench_function("float Cesàro tower, n=10^6, R=3", |b| {
        b.iter(|| cesaro_trajectory_f64(long.iter().copied(), 1, 3, &spec, &[1_000_000]).unwrap())
    });
}

fn spectrum(c: &mut Criterion) {
    let spec = ShiftSpec::golden_mean();
    let q = {
        let blocks = Arc::new(spec.enumerate_language(3).unwrap());
        FrequencyVector::parse(blocks, "1/3,1/6,1/6,1/6,1/6").unwrap()
    };
    c.bench_function("spectrum membership, golden k=3", |b| b.iter(|| is_in_spectrum(&q, &spec, 3).unwrap()));
    c.bench_function("polytope vertices, golden k=4", |b| {
        b.iter(|| invariant_polytope(&spec, 4).unwrap().vertices().unwrap())
    });
}

fn constructor(c: &mut Criterion) {
    let spec = golden();
    let q = targets(&spec, &["2/3,1/3"]).remove(0);
    c.bench_function("realize (2/3,1/3) at n=200", |b| {
        b.iter_batched(
            || Realizer::new(&spec, 1).unwrap(),
            |mut r| r.realize(&q, 200).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let mut group = c.benchmark_group("streams");
    group.sample_size(10);
    group.bench_function("cycling checkpoint stream, 10^6 symbols", |b| {
        b.iter(|| {
            let plan = TargetPlan::new(targets(&spec, &["1,0", "1/2,1/2"]), BigRational::new(1.into(), 10.into()))
                .cycling();
            let budget = Budget { max_symbols: 1_000_000, ..Budget::default() };
            build_checkpointed_stream(&spec, plan, &budget).unwrap().count()
        })
    });
    group.bench_function("property-P stream, W=8, 10^6 symbols", |b| {
        b.iter(|| {
            let schedule =
                PropertyPSchedule::new(targets(&spec, &["1,0", "1/2,1/2"]), 10, WindowRule::WindowFactor(8));
            let budget = Budget { max_symbols: 1_000_000, ..Budget::default() };
            build_property_p_stream(&spec, schedule, &budget).unwrap().count()
        })
    });
    group.finish();
}

criterion_group!(benches, language, beta, cesaro, spectrum, constructor);
criterion_main!(benches);

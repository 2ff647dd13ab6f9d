//! Compares data-parallel and sequential execution of independent simulator
//! sweeps. Build with default features for the rayon path; with
//! `--no-default-features` only the serial baseline is measured.

use criterion::{criterion_group, criterion_main, Criterion};

use decenc_core::a2a_universal::prepare_and_shoot;
use decenc_core::field::{Elem, FieldCtx};
use decenc_core::framework::{
    verify_scenario, AlgoChoice, EncodingScenario, GeneratorSpec, Padding,
};
use decenc_core::matrix::Mat;
use decenc_core::netsim::{run, NetParams};
use decenc_core::par::{par_map, serial_map};
use decenc_core::rng::SplitMix64;

fn scenario_batch() -> Vec<EncodingScenario> {
    let ctx = FieldCtx::new(13).unwrap();
    let mut out = Vec::new();
    for (k, r) in [
        (8usize, 4usize),
        (4, 8),
        (12, 3),
        (3, 12),
        (16, 16),
        (25, 4),
        (4, 25),
        (9, 3),
        (6, 6),
        (32, 8),
        (8, 32),
        (24, 6),
    ] {
        let mut rng = SplitMix64::new((k * 100 + r) as u64);
        let mut a = Mat::zeros(&ctx, k, r);
        for i in 0..k {
            for j in 0..r {
                a[(i, j)] = ctx.elem(rng.next_u64());
            }
        }
        out.push(EncodingScenario {
            ctx: ctx.clone(),
            sources: k,
            sinks: r,
            width: 1,
            generator: GeneratorSpec::SystematicDense { a },
            algo: AlgoChoice::Universal,
            ports: 1,
            alpha: 1.0,
            beta: 1.0,
            seed: (k + r) as u64,
            padding: Padding::Zero,
        });
    }
    out
}

fn verify_batch_serial(batch: &[EncodingScenario]) -> usize {
    serial_map(batch.to_vec(), |s| {
        usize::from(verify_scenario(&s, 2).unwrap().passed())
    })
    .into_iter()
    .sum()
}

#[cfg(feature = "parallel")]
fn verify_batch_parallel(batch: &[EncodingScenario]) -> usize {
    par_map(batch.to_vec(), |s| {
        usize::from(verify_scenario(&s, 2).unwrap().passed())
    })
    .into_iter()
    .sum()
}

fn bench_framework_sweep(c: &mut Criterion) {
    let batch = scenario_batch();
    let mut group = c.benchmark_group("framework_verify_sweep");
    group.sample_size(10);
    group.bench_function("serial", |b| {
        b.iter(|| assert_eq!(verify_batch_serial(&batch), batch.len()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| assert_eq!(verify_batch_parallel(&batch), batch.len()))
    });
    group.finish();
}

fn encode_once(k: usize, seed: u64) -> usize {
    let ctx = FieldCtx::new(257).unwrap();
    let mut rng = SplitMix64::new(seed);
    let mut m = Mat::zeros(&ctx, k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = ctx.elem(rng.next_u64());
        }
    }
    let prog = prepare_and_shoot(m, 1).unwrap();
    let inputs: Vec<Vec<Elem>> = (0..k).map(|_| vec![ctx.elem(rng.next_u64())]).collect();
    let params = NetParams::new(k, 1, 1.0, 1.0, 257, 1);
    run(&prog, &params, &inputs).unwrap().c2
}

fn bench_universal_sweep(c: &mut Criterion) {
    let sizes: Vec<(usize, u64)> = (0..24).map(|i| (16 + 8 * (i % 6), i as u64)).collect();
    let mut group = c.benchmark_group("universal_encode_sweep");
    group.sample_size(10);
    group.bench_function("serial", |b| {
        b.iter(|| serial_map(sizes.clone(), |(k, seed)| encode_once(k, seed)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| par_map(sizes.clone(), |(k, seed)| encode_once(k, seed)))
    });
    group.finish();
}

criterion_group!(benches, bench_framework_sweep, bench_universal_sweep);
criterion_main!(benches);

use cdc_bench::low_rank_matrix;
use cdc_core::codec::encode_node_messages;
use cdc_core::gf2::rank_and_basis;
use cdc_core::workloads::{SyntheticRankWorkload, WordCountWorkload};
use cdc_core::{make_placement, run, JobSpec, Scheme, Workload};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn rank(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank_and_basis");
    for (rows, cols, r) in [(64, 256, 16), (64, 256, 64), (512, 4096, 128)] {
        let m = low_rank_matrix(1, rows, cols, r);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{rows}x{cols}/rank{r}")), &m, |b, m| {
            b.iter(|| rank_and_basis(black_box(m)))
        });
    }
    g.finish();
}

fn encode(c: &mut Criterion) {
    let spec = JobSpec::new(6, 120, 6, 3, 1, 256).unwrap();
    let placement = make_placement(&spec).unwrap();
    let store = SyntheticRankWorkload::new(3, 0.2).unwrap().map(&spec).unwrap();
    c.bench_function("encode_node_messages/K6_r3_T256", |b| {
        b.iter(|| encode_node_messages(1, 4, &placement, black_box(&store)).unwrap())
    });
    let spec = JobSpec::new(5, 10, 10, 2, 2, 240).unwrap();
    let placement = make_placement(&spec).unwrap();
    let store = SyntheticRankWorkload::new(3, 0.2).unwrap().map(&spec).unwrap();
    c.bench_function("encode_node_messages/K5_r2_s2_vandermonde", |b| {
        b.iter(|| encode_node_messages(1, 4, &placement, black_box(&store)).unwrap())
    });
}

fn full_run(c: &mut Criterion) {
    let example = Workload::WordCount(WordCountWorkload::example());
    let spec = JobSpec::new(4, 6, 4, 2, 1, 64).unwrap();
    let mut g = c.benchmark_group("run");
    for scheme in Scheme::ALL {
        g.bench_function(format!("paper-wordcount/{scheme}"), |b| b.iter(|| run(&spec, &example, scheme).unwrap()));
    }
    let spec = JobSpec::new(6, 60, 6, 2, 1, 128).unwrap();
    let w = Workload::Synthetic(SyntheticRankWorkload::new(7, 0.5).unwrap());
    g.bench_function("synthetic-K6/cdc-ld", |b| b.iter(|| run(&spec, &w, Scheme::CdcLd).unwrap()));
    g.finish();
}

criterion_group!(benches, rank, encode, full_run);
criterion_main!(benches);

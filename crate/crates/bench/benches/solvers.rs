use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;

use coopetitive::random::{random_instance, ValueLaw};
use coopetitive::{
    build_polytope, egalitarian_solve, lexmax_surplus_grid, parse_shorthand, revenue_range, sample_pareto_equilibrium,
    vcg, AuctionInstance, GridSpec, Scalar,
};

fn corpus(seed: u64, count: usize, max_n: usize, max_m: usize) -> Vec<AuctionInstance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let law = ValueLaw::Rational {
        max_denominator: 6,
        max_value: 10,
    };
    (0..count).map(|_| random_instance(&mut rng, max_n, max_m, &law)).collect()
}

fn bench_mechanisms(c: &mut Criterion) {
    let mut group = c.benchmark_group("mechanisms");
    for &(n, m) in &[(4usize, 3usize), (8, 6), (12, 10)] {
        let instances = corpus(11, 32, n, m);
        group.bench_with_input(BenchmarkId::new("egalitarian", format!("{n}x{m}")), &instances, |b, xs| {
            b.iter(|| {
                for inst in xs {
                    black_box(egalitarian_solve(inst));
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("vcg", format!("{n}x{m}")), &instances, |b, xs| {
            b.iter(|| {
                for inst in xs {
                    black_box(vcg(inst));
                }
            })
        });
    }
    group.finish();
}

fn bench_polytope(c: &mut Criterion) {
    let instances = corpus(5, 16, 8, 6);
    c.bench_function("pareto_sample_8x6", |b| {
        b.iter(|| {
            for inst in &instances {
                let p = build_polytope(inst);
                let w = vec![Scalar::one(); p.members().len()];
                black_box(sample_pareto_equilibrium(&p, &w).unwrap());
            }
        })
    });
    c.bench_function("revenue_range_8x6", |b| {
        b.iter(|| {
            for inst in &instances {
                black_box(revenue_range(&build_polytope(inst)).unwrap());
            }
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let triangle = parse_shorthand("{(A:1,B:1,C:1),(A:1,D:1),(B:1,E:1)}").unwrap();
    let grid = GridSpec::new(Scalar::new(1, 16));
    c.bench_function("lexmax_grid_triangle_1/16", |b| {
        b.iter(|| black_box(lexmax_surplus_grid(&triangle, &grid).unwrap()))
    });
}

criterion_group!(benches, bench_mechanisms, bench_polytope, bench_oracle);
criterion_main!(benches);

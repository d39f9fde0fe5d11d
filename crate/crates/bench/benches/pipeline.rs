use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tspower_bench::{flicker_netlist, flicker_source, harmonic_source, ladder, random_solutions};
use tspower_core::power::{default_s_grid, default_t_grid};
use tspower_core::{budeanu, instantaneous, scaled, solve, BalanceReport, TimeScaleModel};

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("multiply");
    for lines in [4, 16, 64] {
        let u = harmonic_source(lines);
        group.bench_with_input(BenchmarkId::from_parameter(lines), &u, |b, u| {
            b.iter(|| black_box(u.multiply(u).unwrap()))
        });
    }
    group.finish();
}

fn network(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let u = harmonic_source(8);
    for sections in [1, 4, 16] {
        let net = ladder(sections);
        group.bench_with_input(BenchmarkId::from_parameter(3 * sections), &net, |b, net| {
            b.iter(|| black_box(solve(net, &u).unwrap()))
        });
    }
    group.finish();
}

fn scaled_grid(c: &mut Criterion) {
    let sol = solve(&ladder(3), &harmonic_source(8)).unwrap();
    let source = sol.source().clone();
    let mut group = c.benchmark_group("scaled_grid");
    for n in [21, 64] {
        let t = default_t_grid(&source, n);
        let s = default_s_grid(&source, n - 1);
        group.bench_function(BenchmarkId::from_parameter(format!("{n}x{n}")), |b| {
            b.iter(|| black_box(scaled(&sol, &t, &s).unwrap()))
        });
    }
    group.finish();
}

fn full_analysis(c: &mut Criterion) {
    let net = flicker_netlist();
    let u = flicker_source();
    let t = default_t_grid(&u, 256);
    let s = default_s_grid(&u, 32);
    c.bench_function("flicker_analysis", |b| {
        b.iter(|| {
            let sol = solve(&net, &u).unwrap();
            let set = instantaneous(&sol).unwrap();
            let model = TimeScaleModel::new(&sol);
            let q_b = budeanu(&model).unwrap();
            let sq = scaled(&sol, &t, &s).unwrap();
            black_box((q_b, BalanceReport::new(&set, &sq)))
        })
    });

    let cases = random_solutions(1, 10);
    c.bench_function("balance_suite_10_cases_21x21", |b| {
        b.iter(|| {
            for sol in &cases {
                let source = sol.source();
                let sq = scaled(
                    sol,
                    &default_t_grid(source, 21),
                    &default_s_grid(source, 20),
                )
                .unwrap();
                black_box(BalanceReport::new(&instantaneous(sol).unwrap(), &sq));
            }
        })
    });
}

criterion_group!(benches, spectrum, network, scaled_grid, full_analysis);
criterion_main!(benches);

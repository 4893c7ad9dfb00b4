use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use germfold::trivial::{default_scales, lipschitz_scan};
use germfold::{scan_link, solve_arc, Trivializer};
use germfold_bench::{germ, link_point, scaled, SEED};

fn bench_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan_link");
    for name in ["quadric", "briancon-speder", "ci-quadrics"] {
        let gs = germ(name);
        g.bench_function(name, |b| b.iter(|| scan_link(&gs, 2000, SEED, 1e-6).unwrap()));
    }
    g.finish();
}

fn bench_arc(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_arc");
    for (name, eps) in [("quadric", 1.0), ("cusp-d4", 1.0), ("briancon-speder", 0.05)] {
        let gs = germ(name);
        let s = link_point(&gs);
        for k in [4, 8] {
            g.bench_function(format!("{name}/K{k}"), |b| b.iter(|| solve_arc(&gs, &s, eps, k).unwrap()));
        }
    }
    g.finish();
}

fn bench_psi(c: &mut Criterion) {
    let gs = germ("cusp-d4");
    let x = scaled(&gs, &link_point(&gs), 0.05);
    c.bench_function("psi/cold", |b| {
        b.iter_batched(|| Trivializer::new(&gs, 1.0, 8), |tr| tr.psi(&x).unwrap(), BatchSize::SmallInput)
    });
    let tr = Trivializer::new(&gs, 1.0, 8);
    tr.psi(&x).unwrap();
    c.bench_function("psi/cached", |b| b.iter(|| tr.psi(&x).unwrap()));
}

fn bench_scan_scales(c: &mut Criterion) {
    let gs = germ("cusp-d4");
    let mut g = c.benchmark_group("lipschitz_scan");
    g.sample_size(10);
    g.bench_function("cusp-d4", |b| {
        b.iter(|| {
            let tr = Trivializer::new(&gs, 1.0, 8);
            let scales = default_scales(&tr, 64, SEED, 5);
            lipschitz_scan(&tr, &scales, 64, SEED).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, bench_scan, bench_arc, bench_psi, bench_scan_scales);
criterion_main!(benches);

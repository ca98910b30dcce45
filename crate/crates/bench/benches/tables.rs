use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jetham::connections::NLinearConnection;
use jetham::tensors::{curvature_table, torsion_table};
use jetham::verify::{
    ad_fd_crosscheck, covariance_suite, probe_points, random_connection, random_expression,
    random_metrics, standard_changes, Objects, ProbeBox,
};
use jetham::{Dims, ScalarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIMS: [(usize, usize); 3] = [(1, 2), (2, 2), (3, 3)];

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("tables");
    for (m, n) in DIMS {
        let d = Dims::new(m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conn = random_connection(&mut rng, d);
        let pt = probe_points(d, &ProbeBox::unit(d), 2, 1).remove(0);
        let id = format!("{m}x{n}");
        g.bench_with_input(BenchmarkId::new("connection_at", &id), &pt, |b, pt| {
            b.iter(|| conn.at(pt).unwrap())
        });
        let at = conn.at(&pt).unwrap();
        g.bench_with_input(BenchmarkId::new("torsion", &id), &at, |b, at| {
            b.iter(|| torsion_table(at))
        });
        g.bench_with_input(BenchmarkId::new("curvature", &id), &at, |b, at| {
            b.iter(|| curvature_table(at).unwrap())
        });
    }
    g.finish();
}

fn covariance(c: &mut Criterion) {
    let mut g = c.benchmark_group("covariance");
    g.sample_size(10);
    for (m, n) in DIMS {
        let d = Dims::new(m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (h, phi) = random_metrics(&mut rng, d);
        let obj = Objects {
            conn: NLinearConnection::berwald_from_metrics(h.clone(), phi.clone()),
            metrics: Some((h, phi)),
            hamiltonian: None,
        };
        let changes = standard_changes(d);
        let pts = probe_points(d, &ProbeBox::unit(d), 4, 2);
        g.bench_function(format!("berwald {m}x{n}"), |b| {
            b.iter(|| covariance_suite(&obj, &changes, &pts).unwrap())
        });
    }
    g.finish();
}

fn differentiation(c: &mut Criterion) {
    let d = Dims::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fields: Vec<ScalarField> = (0..20)
        .map(|_| ScalarField::parse(&random_expression(&mut rng, d, 5), d).unwrap())
        .collect();
    let pts = probe_points(d, &ProbeBox::unit(d), 6, 1);
    c.bench_function("ad_fd 20 fields 2x2", |b| {
        b.iter(|| ad_fd_crosscheck(&fields, &pts).unwrap())
    });
}

criterion_group!(benches, tables, covariance, differentiation);
criterion_main!(benches);

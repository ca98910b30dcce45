use jetham::bundle::IndexKind;
use jetham::connections::{adapted_frame, covariant_derivative, projectors};
use jetham::metrics::{christoffel, metric_values, riemann};
use jetham::tensors::{curvature_table, torsion_table, ROWS};
use jetham::verify::{
    probe_points, random_connection, random_expression, random_metrics, standard_changes, ProbeBox,
};
use jetham::{Block, DTensor, Dims, Jet, Point, ScalarField};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = Dims> {
    (1usize..=3, 1usize..=3).prop_map(|(m, n)| Dims::new(m, n).unwrap())
}

fn small_dims() -> impl Strategy<Value = Dims> {
    (1usize..=2, 1usize..=2).prop_map(|(m, n)| Dims::new(m, n).unwrap())
}

fn point(d: Dims, seed: u64) -> Point {
    probe_points(d, &ProbeBox::unit(d), seed, 1).remove(0)
}

const KINDS: [IndexKind; 6] = [
    IndexKind::TUp,
    IndexKind::TDown,
    IndexKind::SUp,
    IndexKind::SDown,
    IndexKind::PVec,
    IndexKind::PForm,
];

fn jets(rng: &mut ChaCha8Rng, d: Dims, pt: &Point, count: usize) -> Vec<Jet> {
    (0..count)
        .map(|_| {
            ScalarField::parse(&random_expression(rng, d, 3), d)
                .unwrap()
                .jet(pt, 1)
                .unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_then_inverse_is_identity(d in dims(), seed in any::<u64>(), which in 0usize..5, rank in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kinds: Vec<IndexKind> = (0..rank).map(|_| KINDS[rng.random_range(0..6)]).collect();
        let t = DTensor::from_fn(d, &kinds, |_| rng.random_range(-1.0..1.0));
        let chg = &standard_changes(d)[which];
        let pt = point(d, seed);
        let there = t.transform(&chg.jacobians(&pt).unwrap());
        let back = there.transform(&chg.inverse().jacobians(&chg.push_point(&pt).unwrap()).unwrap());
        prop_assert!(back.max_abs_diff(&t).unwrap() < 1e-10);
    }

    #[test]
    fn levi_civita_symmetries(d in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, phi) = random_metrics(&mut rng, d);
        let pt = point(d, seed);
        let n = d.n;
        let gam = christoffel(&phi, &pt).unwrap();
        let r = riemann(&phi, &pt).unwrap();
        let g = metric_values(&phi, None, &pt).unwrap();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    prop_assert!((gam[[a, b, c]] - gam[[a, c, b]]).abs() < 1e-12);
                    for e in 0..n {
                        let v = r.get(&[e, a, b, c]);
                        prop_assert!((v + r.get(&[e, a, c, b])).abs() < 1e-10);
                        let cyc = v + r.get(&[e, b, c, a]) + r.get(&[e, c, a, b]);
                        prop_assert!(cyc.abs() < 1e-10, "first Bianchi {}", cyc);
                        // lowered: R_{eabc} = −R_{aebc}
                        let low = |x: usize, y: usize| (0..n).map(|f| g[x * n + f] * r.get(&[f, y, b, c])).sum::<f64>();
                        prop_assert!((low(e, a) + low(a, e)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn frame_duality_and_projectors(d in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_connection(&mut rng, d);
        let nlc = conn.nonlinear().at(&point(d, seed)).unwrap();
        let fr = adapted_frame(&nlc);
        let dd = d.total();
        prop_assert!((fr.pairing() - DMatrix::<f64>::identity(dd, dd)).amax() < 1e-12);
        let pr = projectors(&nlc);
        prop_assert!(pr.adapted_residual() < 1e-12 && pr.natural_residual() < 1e-12);
    }

    #[test]
    fn covariant_derivative_is_leibniz(d in small_dims(), seed in any::<u64>(), dir in 0usize..3) {
        let dir = Block::ALL[dir];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = point(d, seed);
        let conn = random_connection(&mut rng, d).at(&pt).unwrap();
        let (q, n) = (d.len(Block::P), d.n);
        let f = jets(&mut rng, d, &pt, q);
        let g = jets(&mut rng, d, &pt, n);
        let prod: Vec<Jet> = (0..q).flat_map(|a| g.iter().map(|b| &f[a] * b).collect::<Vec<_>>()).collect();
        let df = covariant_derivative(&conn, &[IndexKind::PVec], &f, dir).unwrap();
        let dg = covariant_derivative(&conn, &[IndexKind::SDown], &g, dir).unwrap();
        let dp = covariant_derivative(&conn, &[IndexKind::PVec, IndexKind::SDown], &prod, dir).unwrap();
        for (a, fa) in f.iter().enumerate() {
            for (k, gk) in g.iter().enumerate() {
                for e in 0..d.len(dir) {
                    let want = df.get(&[a, e]) * gk.value() + fa.value() * dg.get(&[k, e]);
                    prop_assert!((dp.get(&[a, k, e]) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn covariant_derivative_commutes_with_contraction(d in small_dims(), seed in any::<u64>(), dir in 0usize..3, blk in 0usize..3) {
        let (dir, blk) = (Block::ALL[dir], Block::ALL[blk]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = point(d, seed);
        let conn = random_connection(&mut rng, d).at(&pt).unwrap();
        let len = d.len(blk);
        let kinds = [IndexKind::up(blk), IndexKind::down(blk)];
        let t = jets(&mut rng, d, &pt, len * len);
        let trace = (0..len).map(|k| t[k * len + k].clone()).reduce(|a, b| a + &b).unwrap();
        let dt = covariant_derivative(&conn, &kinds, &t, dir).unwrap();
        let lhs = covariant_derivative(&conn, &[], &[trace], dir).unwrap();
        let rhs = dt.contract(0, 1).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn diagonal_rows_are_antisymmetric(d in small_dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_connection(&mut rng, d).at(&point(d, seed)).unwrap();
        let tt = torsion_table(&conn);
        let ct = curvature_table(&conn).unwrap();
        for e in tt.entries.iter().filter(|e| e.slots.x == e.slots.y) {
            let t = &e.tensor;
            let s = t.shape().to_vec();
            for o in 0..s[0] {
                for y in 0..s[1] {
                    for x in 0..s[2] {
                        prop_assert!((t.get(&[o, y, x]) + t.get(&[o, x, y])).abs() < 1e-10, "{}", e.label);
                    }
                }
            }
        }
        for e in ct.entries.iter().filter(|e| e.slots.x == e.slots.y) {
            let t = &e.tensor;
            let s = t.shape().to_vec();
            for o in 0..s[0] {
                for z in 0..s[1] {
                    for y in 0..s[2] {
                        for x in 0..s[3] {
                            prop_assert!((t.get(&[o, z, y, x]) + t.get(&[o, z, x, y])).abs() < 1e-10, "{}", e.label);
                        }
                    }
                }
            }
        }
        prop_assert_eq!(tt.entries.len(), 3 * ROWS.len());
        prop_assert_eq!(tt.entries.iter().filter(|e| e.structural_zero).count(), 6);
        for e in tt.entries.iter().filter(|e| e.structural_zero) {
            prop_assert_eq!(e.tensor.max_abs(), 0.0);
        }
    }
}

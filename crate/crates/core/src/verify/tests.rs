use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bundle::Dims;

fn setup(m: usize, n: usize, seed: u64) -> (Dims, Vec<CoordinateChange>, Vec<Point>) {
    let d = Dims::new(m, n).unwrap();
    (
        d,
        standard_changes(d),
        probe_points(d, &ProbeBox::unit(d), seed, 3),
    )
}

#[test]
fn berwald_rules_and_guards() {
    let (d, changes, pts) = setup(2, 2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (h, phi) = random_metrics(&mut rng, d);
    let conn = NLinearConnection::berwald_from_metrics(h.clone(), phi.clone());
    let obj = Objects {
        conn,
        metrics: Some((h, phi)),
        hamiltonian: None,
    };
    for out in covariance_suite(&obj, &changes, &pts).unwrap() {
        assert!(
            out.report.pass,
            "{} under {}: {:e}",
            out.report.object_id, out.report.change_id, out.report.max_abs_residual
        );
        assert!(
            !out.guard.pass,
            "guard {} under {}",
            out.guard.object_id, out.guard.change_id
        );
    }
}

#[test]
fn custom_connection_covariance() {
    let (d, changes, pts) = setup(2, 1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let conn = random_connection(&mut rng, d);
    let obj = Objects {
        conn,
        metrics: None,
        hamiltonian: Some(
            ScalarField::parse("exp(0.2*p[1][1]*p[1][2]) + t[1]*p[1][2]^3", d).unwrap(),
        ),
    };
    for out in covariance_suite(&obj, &changes, &pts).unwrap() {
        assert!(
            out.ok(),
            "{} under {}: {:e} / guard {:e}",
            out.report.object_id,
            out.report.change_id,
            out.report.max_abs_residual,
            out.guard.max_abs_residual
        );
    }
}

#[test]
fn oracles_on_random_connection() {
    let (d, _, pts) = setup(2, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rep = oracle_suite(&random_connection(&mut rng, d), &pts).unwrap();
    assert!(rep.pass(), "{rep:?}");
}

#[test]
fn ad_matches_fd() {
    let d = Dims::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fields: Vec<ScalarField> = (0..50)
        .map(|_| ScalarField::parse(&random_expression(&mut rng, d, 4), d).unwrap())
        .collect();
    let pts = probe_points(d, &ProbeBox::unit(d), 12, 2);
    let rep = ad_fd_crosscheck(&fields, &pts).unwrap();
    assert!(rep.pass(), "{rep:?}");
}

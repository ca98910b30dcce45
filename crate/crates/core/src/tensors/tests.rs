use super::*;
use crate::bundle::{Dims, Point};
use crate::connections::{bracket_coefficients, NLinearConnection, Nine};
use crate::expr::ScalarField;
use crate::grid::Grid;
use crate::metrics::{riemann, SpatialMetric, TemporalMetric};
use approx::assert_relative_eq;

fn custom(d: Dims) -> NLinearConnection {
    let f = |s: String| ScalarField::parse(&s, d).unwrap();
    let q = d.m * d.n;
    let pv = |k: usize| format!("p[{}][{}]", k / d.m + 1, k % d.m + 1);
    let n1 = Grid::from_fn(&[q, d.m], |ix| {
        f(format!(
            "0.3*sin(t[{}] + {})*{} + 0.1*x[1]*{}",
            ix[1] + 1,
            ix[0],
            pv(ix[0]),
            pv((ix[0] + 1) % q)
        ))
    });
    let n2 = Grid::from_fn(&[q, d.n], |ix| {
        f(format!(
            "0.2*x[{}]*t[1]*{} - 0.1*{}^2",
            ix[1] + 1,
            pv(ix[0]),
            pv(0)
        ))
    });
    let nine = Nine::from_fn(|c| {
        Grid::from_fn(&c.shape(d), |ix| {
            let w = ((ix[0] * 7 + ix[1] * 3 + ix[2] * 5) % 11) as f64 * 0.05 - 0.2;
            f(format!(
                "{w}*cos(t[1] - x[{}]) + 0.07*{}*t[{}]",
                ix[2] % d.n + 1,
                pv((ix[0] + ix[2]) % q),
                ix[1] % d.m + 1
            ))
        })
    });
    NLinearConnection::custom(d, n1, n2, nine).unwrap()
}

fn point(d: Dims) -> Point {
    let z: Vec<f64> = (0..d.total())
        .map(|k| 0.3 * ((k as f64) * 1.7).sin() + 0.1)
        .collect();
    Point::from_flat(d, z).unwrap()
}

#[test]
fn oracles_match_formulas() {
    for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let d = Dims::new(m, n).unwrap();
        let conn = custom(d).at(&point(d)).unwrap();
        let frame = FrameFields::new(&conn.nlc);
        let br = bracket_coefficients(&conn.nlc);
        let bo = bracket_oracle(&frame);
        for (a, b) in [
            (&br.r_tt, &bo.r_tt),
            (&br.r_ts, &bo.r_ts),
            (&br.r_ss, &bo.r_ss),
            (&br.b_t, &bo.b_t),
            (&br.b_s, &bo.b_s),
        ] {
            assert!(a.max_abs_diff(b).unwrap() < 1e-12);
        }
        let tt = torsion_table(&conn);
        let ct = curvature_table(&conn).unwrap();
        for s in all_slots() {
            let t = torsion_oracle(&conn, &frame, s);
            assert!(
                tt.get(s).max_abs_diff(&t).unwrap() < 1e-10,
                "{} {m}{n}",
                s.torsion_label()
            );
            let r = curvature_oracle(&conn, &frame, s);
            let diff = ct.get(s).max_abs_diff(&r).unwrap();
            assert!(diff < 1e-10, "{} {m}{n}: {diff}", s.curvature_label());
        }
    }
}

#[test]
fn berwald_sphere() {
    let d = Dims::new(1, 2).unwrap();
    let h = TemporalMetric::parse(d, &["exp(2*t[1])"]).unwrap();
    let phi = SpatialMetric::parse(d, &["1", "0", "0", "sin(x[1])^2"]).unwrap();
    let x1 = std::f64::consts::FRAC_PI_3;
    let pt = Point::new(d, &[0.2], &[x1, 0.4], &[vec![0.5], vec![-1.5]]).unwrap();
    let conn = NLinearConnection::berwald_from_metrics(h, phi.clone())
        .at(&pt)
        .unwrap();
    let ct = curvature_table(&conn).unwrap();
    let rss = ct.by_label("R_ijk^l").unwrap();
    // R(δ/δx^2, δ/δx^1) δ/δx^2 = −sin²x¹ δ/δx^1
    assert_relative_eq!(rss.get(&[0, 1, 0, 1]), -0.75, epsilon = 1e-12);
    assert_relative_eq!(rss.get(&[0, 1, 1, 0]), 0.75, epsilon = 1e-12);
    let r = riemann(&phi, &pt).unwrap();
    let rp = ct.by_label("R_(l)(a)jk^(d)(i)").unwrap();
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_relative_eq!(
                        rp.get(&[l, i, j, k]),
                        r.get(&[i, l, j, k]),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }
    let tt = torsion_table(&conn);
    let rt = tt.by_label("R_(r)ij^(f)").unwrap();
    for rr in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let want: f64 = (0..2).map(|s| -r.get(&[s, rr, i, j]) * pt.p(s, 0)).sum();
                assert_relative_eq!(rt.get(&[rr, i, j]), want, epsilon = 1e-12);
            }
        }
    }
}

//! Seeded generators for test scenarios: analytic metrics, linear and
//! N-linear connections, and a corpus of smooth scalar fields.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::Dims;
use crate::connections::{NLinearConnection, Nine};
use crate::expr::ScalarField;
use crate::grid::Grid;
use crate::metrics::{LinearConnectionCoeffs, SpatialMetric, TemporalMetric};

fn coef(rng: &mut ChaCha8Rng, scale: f64) -> String {
    format!("{:.4}", rng.random_range(-scale..=scale))
}

fn parse(s: &str, d: Dims) -> ScalarField {
    ScalarField::parse(s, d).unwrap_or_else(|e| panic!("generated `{s}`: {e}"))
}

/// A symmetric metric on one block with diagonal `±(2 + small)` and small
/// off-diagonal terms, so it stays nondegenerate on `[−1, 1]`.
fn metric_strings(rng: &mut ChaCha8Rng, len: usize, var: char) -> Vec<String> {
    let mut g = vec![String::new(); len * len];
    for r in 0..len {
        let sign = if rng.random_bool(0.3) { "-" } else { "" };
        let k = (r + 1) % len + 1;
        g[r * len + r] = format!(
            "{sign}(2 + {}*sin({}*{var}[{}] + {}) + {}*{var}[{k}]^2)",
            coef(rng, 0.3),
            coef(rng, 1.5),
            r + 1,
            coef(rng, 1.0),
            coef(rng, 0.1),
        );
        for c in r + 1..len {
            let s = format!(
                "{}*cos({}*{var}[{}]) + {}*{var}[{}]",
                coef(rng, 0.1),
                coef(rng, 1.0),
                c + 1,
                coef(rng, 0.05),
                r + 1
            );
            g[r * len + c] = s.clone();
            g[c * len + r] = s;
        }
    }
    g
}

pub fn random_metrics(rng: &mut ChaCha8Rng, d: Dims) -> (TemporalMetric, SpatialMetric) {
    let h = metric_strings(rng, d.m, 't');
    let phi = metric_strings(rng, d.n, 'x');
    fn v(s: &[String]) -> Vec<&str> {
        s.iter().map(String::as_str).collect()
    }
    (
        TemporalMetric::parse(d, &v(&h)).unwrap(),
        SpatialMetric::parse(d, &v(&phi)).unwrap(),
    )
}

/// Arbitrary (non-symmetric) linear connections `χ(t)`, `Γ(x)`.
pub fn random_linear(rng: &mut ChaCha8Rng, d: Dims) -> LinearConnectionCoeffs {
    let mut gen = |len: usize, var: char| {
        Grid::from_fn(&[len, len, len], |_| {
            let k = rng.random_range(1..=len);
            parse(
                &format!(
                    "{}*sin({}*{var}[{k}]) + {}",
                    coef(rng, 0.5),
                    coef(rng, 1.5),
                    coef(rng, 0.3)
                ),
                d,
            )
        })
    };
    let chi = gen(d.m, 't');
    let gamma = gen(d.n, 'x');
    LinearConnectionCoeffs::new(d, chi, gamma).unwrap()
}

fn coordinate(rng: &mut ChaCha8Rng, d: Dims) -> String {
    match rng.random_range(0..3) {
        0 => format!("t[{}]", rng.random_range(1..=d.m)),
        1 => format!("x[{}]", rng.random_range(1..=d.n)),
        _ => format!(
            "p[{}][{}]",
            rng.random_range(1..=d.n),
            rng.random_range(1..=d.m)
        ),
    }
}

/// A small smooth term in all coordinates, of size `≲ scale` on the unit box.
fn mixed_term(rng: &mut ChaCha8Rng, d: Dims, scale: f64) -> String {
    let a = coordinate(rng, d);
    let b = coordinate(rng, d);
    let c = coordinate(rng, d);
    format!(
        "{}*sin({}*{a} + {}) + {}*{b}*{c} + {}",
        coef(rng, scale),
        coef(rng, 1.5),
        coef(rng, 1.0),
        coef(rng, scale),
        coef(rng, scale)
    )
}

/// An N-linear connection with every family (and `N`) a generic smooth
/// function of `(t, x, p)`.
pub fn random_connection(rng: &mut ChaCha8Rng, d: Dims) -> NLinearConnection {
    let q = d.m * d.n;
    let n1 = Grid::from_fn(&[q, d.m], |_| parse(&mixed_term(rng, d, 0.4), d));
    let n2 = Grid::from_fn(&[q, d.n], |_| parse(&mixed_term(rng, d, 0.4), d));
    let nine =
        Nine::from_fn(|c| Grid::from_fn(&c.shape(d), |_| parse(&mixed_term(rng, d, 0.3), d)));
    NLinearConnection::custom(d, n1, n2, nine).unwrap()
}

/// Random expression text built from every function of the grammar, kept
/// away from domain boundaries and of moderate size on the unit box.
pub fn random_expression(rng: &mut ChaCha8Rng, d: Dims, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            coordinate(rng, d)
        } else {
            coef(rng, 1.0)
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_expression(rng, d, depth - 1);
    let a = sub(rng);
    match rng.random_range(0..14) {
        0 => format!("({a}) + ({})", sub(rng)),
        1 => format!("({a}) - ({})", sub(rng)),
        2 => format!("0.5*({a})*({})", sub(rng)),
        3 => format!("({a})/(2 + cos({}))", sub(rng)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("tan(0.4*sin({a}))"),
        7 => format!("exp(0.5*sin({a}))"),
        8 => format!("log(2 + sin({a}))"),
        9 => format!("sqrt(1 + ({a})^2)"),
        10 => format!("sinh(0.5*sin({a}))"),
        11 => format!("cosh(0.5*cos({a}))"),
        12 => format!("sin({a})^{}", rng.random_range(2..=3)),
        _ => format!("-(0.5*cos({a}))^2"),
    }
}

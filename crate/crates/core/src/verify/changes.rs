//! Probe coordinate changes and probe points.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{CoordinateChange, Dims, Point};

const AFFINE_T: [[f64; 3]; 3] = [[1.5, 0.3, 0.0], [-0.2, 1.2, 0.1], [0.0, 0.25, 0.9]];
const AFFINE_X: [[f64; 3]; 3] = [[0.8, -0.1, 0.2], [0.3, 1.1, 0.0], [0.1, 0.0, 1.4]];
const ROT_T: [[f64; 3]; 3] = [[0.6, -0.8, 0.1], [0.8, 0.6, 0.0], [0.0, 0.2, 1.3]];
const ROT_X: [[f64; 3]; 3] = [[2.0, 0.0, 0.3], [0.5, 1.0, 0.0], [0.0, -0.4, 0.7]];

fn block(src: &[[f64; 3]; 3], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |r, c| src[r][c])
}

/// `Σ_c a[r][c] · arg(c)` as expression text.
fn linear(a: &DMatrix<f64>, r: usize, arg: impl Fn(usize) -> String) -> String {
    let terms: Vec<String> = (0..a.ncols())
        .filter(|&c| a[(r, c)] != 0.0)
        .map(|c| format!("({:e})*({})", a[(r, c)], arg(c)))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn affine(
    dims: Dims,
    id: &str,
    at: DMatrix<f64>,
    ax: DMatrix<f64>,
    shift: f64,
) -> CoordinateChange {
    let it = at.clone().try_inverse().expect("invertible probe matrix");
    let ix = ax.clone().try_inverse().expect("invertible probe matrix");
    let tmap: Vec<String> = (0..dims.m)
        .map(|r| format!("{} + {shift}", linear(&at, r, |c| format!("t[{}]", c + 1))))
        .collect();
    let xmap: Vec<String> = (0..dims.n)
        .map(|r| format!("{} - {shift}", linear(&ax, r, |c| format!("x[{}]", c + 1))))
        .collect();
    let tinv: Vec<String> = (0..dims.m)
        .map(|r| linear(&it, r, |c| format!("t[{}] - {shift}", c + 1)))
        .collect();
    let xinv: Vec<String> = (0..dims.n)
        .map(|r| linear(&ix, r, |c| format!("x[{}] + {shift}", c + 1)))
        .collect();
    build(dims, id, &tmap, &xmap, &tinv, &xinv)
}

fn build(
    dims: Dims,
    id: &str,
    tmap: &[String],
    xmap: &[String],
    tinv: &[String],
    xinv: &[String],
) -> CoordinateChange {
    fn v(s: &[String]) -> Vec<&str> {
        s.iter().map(String::as_str).collect()
    }
    CoordinateChange::parse(dims, id, &v(tmap), &v(xmap), &v(tinv), &v(xinv))
        .expect("probe change parses")
}

/// `t̃^1 = t^1 + (t^1)²/4`, `t̃^a = t^a + 0.1 sin t^{a−1}`;
/// `x̃^i = x^i + 0.2 (x^{i+1})²`, `x̃^n = sinh x^n`.
fn triangular(dims: Dims) -> CoordinateChange {
    let (m, n) = (dims.m, dims.n);
    let mut tmap = vec!["t[1] + 0.25*t[1]^2".to_string()];
    let mut tinv = vec!["2*sqrt(1 + t[1]) - 2".to_string()];
    for a in 1..m {
        tmap.push(format!("t[{}] + 0.1*sin(t[{}])", a + 1, a));
        let prev = tinv[a - 1].clone();
        tinv.push(format!("t[{}] - 0.1*sin({prev})", a + 1));
    }
    let mut xmap = vec![String::new(); n];
    let mut xinv = vec![String::new(); n];
    xmap[n - 1] = format!("sinh(x[{n}])");
    xinv[n - 1] = format!("log(x[{n}] + sqrt(x[{n}]^2 + 1))");
    for i in (0..n - 1).rev() {
        xmap[i] = format!("x[{}] + 0.2*x[{}]^2", i + 1, i + 2);
        xinv[i] = format!("x[{}] - 0.2*({})^2", i + 1, xinv[i + 1]);
    }
    build(dims, "triangular", &tmap, &xmap, &tinv, &xinv)
}

/// `t̃ = A·(2 sinh(t/2))`, `x̃ = B·(x + x²/4)` componentwise.
fn warped(dims: Dims) -> CoordinateChange {
    let (m, n) = (dims.m, dims.n);
    let at = block(&ROT_T, m) * 0.9;
    let ax = block(&AFFINE_X, n);
    let it = at.clone().try_inverse().unwrap();
    let ix = ax.clone().try_inverse().unwrap();
    let tmap: Vec<String> = (0..m)
        .map(|r| linear(&at, r, |c| format!("2*sinh(t[{}]/2)", c + 1)))
        .collect();
    let xmap: Vec<String> = (0..n)
        .map(|r| linear(&ax, r, |c| format!("x[{0}] + 0.25*x[{0}]^2", c + 1)))
        .collect();
    let tinv: Vec<String> = (0..m)
        .map(|r| {
            let u = linear(&it, r, |c| format!("t[{}]", c + 1));
            format!("2*log(({u})/2 + sqrt((({u})/2)^2 + 1))")
        })
        .collect();
    let xinv: Vec<String> = (0..n)
        .map(|r| {
            format!(
                "2*sqrt(1 + ({})) - 2",
                linear(&ix, r, |c| format!("x[{}]", c + 1))
            )
        })
        .collect();
    build(dims, "warped", &tmap, &xmap, &tinv, &xinv)
}

/// The five probe changes: identity, two affine, two nonlinear ones close to
/// the identity on the box `[−1, 1]^D`.
pub fn standard_changes(dims: Dims) -> Vec<CoordinateChange> {
    assert!(
        dims.m <= 3 && dims.n <= 3,
        "probe changes are tabulated for m, n ≤ 3"
    );
    vec![
        CoordinateChange::identity(dims),
        affine(
            dims,
            "affine-1",
            block(&AFFINE_T, dims.m),
            block(&AFFINE_X, dims.n),
            0.5,
        ),
        affine(
            dims,
            "affine-2",
            block(&ROT_T, dims.m),
            block(&ROT_X, dims.n),
            -0.25,
        ),
        triangular(dims),
        warped(dims),
    ]
}

/// Where probe points are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBox {
    /// Center of the box, one entry per coordinate.
    pub center: Vec<f64>,
    /// Half-width per coordinate.
    pub radius: Vec<f64>,
}

impl ProbeBox {
    /// `[−1, 1]` in every coordinate.
    pub fn unit(dims: Dims) -> ProbeBox {
        ProbeBox {
            center: vec![0.0; dims.total()],
            radius: vec![1.0; dims.total()],
        }
    }
}

/// `count` points uniform in the box, reproducible from `seed`.
pub fn probe_points(dims: Dims, bx: &ProbeBox, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = (0..dims.total())
                .map(|k| bx.center[k] + bx.radius[k] * rng.random_range(-1.0..=1.0))
                .collect();
            Point::from_flat(dims, z).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn changes_invert_on_box() {
        for (m, n) in [(1, 1), (2, 3), (3, 2), (3, 3)] {
            let d = Dims::new(m, n).unwrap();
            for chg in standard_changes(d) {
                for pt in probe_points(d, &ProbeBox::unit(d), 7, 10) {
                    let back = chg.pull_point(&chg.push_point(&pt).unwrap()).unwrap();
                    let err = pt
                        .coords()
                        .iter()
                        .zip(back.coords())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(err < 1e-10, "{} {m}{n}: {err}", chg.id());
                    let j = chg.jacobians(&pt).unwrap();
                    for mat in [&j.jt, &j.jx] {
                        let sv = mat.clone().singular_values();
                        assert!(sv.max() / sv.min() < 10.0, "{} condition", chg.id());
                    }
                }
            }
        }
    }
}

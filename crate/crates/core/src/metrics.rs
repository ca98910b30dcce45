//! Semi-Riemannian metrics on the temporal and spatial factors, their
//! Christoffel symbols and curvature, and coefficient sets of linear
//! connections.
//!
//! Curvature uses `R^d_{abc} = ∂_c Γ^d_{ab} − ∂_b Γ^d_{ac} + Γ^f_{ab}Γ^d_{fc} − Γ^f_{ac}Γ^d_{fb}`.
//! With this convention the round sphere `diag(1, sin²x¹)` has
//! `r^1_{221} = sin²x¹`.

use crate::bundle::chart::Local;
use crate::bundle::{Block, CoordinateChange, DTensor, Dims, IndexKind, Point};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::grid::Grid;
use crate::jet::Jet;
use crate::num::{det_value, invert, Num};

/// Threshold on `|det|` below which a metric is treated as singular.
pub const SINGULAR_METRIC: f64 = 1e-10;

/// Common interface of [`TemporalMetric`] and [`SpatialMetric`].
pub trait Metric {
    fn block(&self) -> Block;
    fn dims(&self) -> Dims;
    /// Row-major components.
    fn components(&self) -> &[ScalarField];
}

macro_rules! metric_type {
    ($(#[$doc:meta])* $name:ident, $block:expr, $what:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone)]
        pub struct $name {
            dims: Dims,
            comps: Vec<ScalarField>,
        }

        impl $name {
            pub fn new(dims: Dims, comps: Vec<ScalarField>) -> Result<$name> {
                let len = dims.len($block);
                if comps.len() != len * len {
                    return Err(Error::dims(format!("{} components", len * len), comps.len()));
                }
                if let Some(f) = comps.iter().find(|f| !f.depends_only_on(&[$block])) {
                    return Err(Error::Invalid(format!(
                        concat!($what, " metric component `{}` must depend only on the ", $what, " coordinates"),
                        f
                    )));
                }
                Ok($name { dims, comps })
            }

            pub fn parse(dims: Dims, comps: &[&str]) -> Result<$name> {
                let comps = comps
                    .iter()
                    .map(|s| ScalarField::parse(s, dims))
                    .collect::<Result<_>>()?;
                $name::new(dims, comps)
            }
        }

        impl Metric for $name {
            fn block(&self) -> Block {
                $block
            }
            fn dims(&self) -> Dims {
                self.dims
            }
            fn components(&self) -> &[ScalarField] {
                &self.comps
            }
        }
    };
}

metric_type!(
    /// `h_{ab}(t)` on the temporal factor.
    TemporalMetric,
    Block::T,
    "temporal"
);
metric_type!(
    /// `φ_{ij}(x)` on the spatial factor.
    SpatialMetric,
    Block::S,
    "spatial"
);

/// Jets of the metric in the chart of `local`, of derivative order `k`.
pub(crate) fn metric_jets(g: &dyn Metric, local: &Local, k: u8) -> Result<Vec<Jet>> {
    let len = g.dims().len(g.block());
    let base = local.base(k);
    let raw: Vec<Jet> = g
        .components()
        .iter()
        .map(|f| f.eval_with(&base))
        .collect::<Result<_>>()?;
    let out = match &local.tilde {
        None => raw,
        Some(tj) => {
            let jac = match g.block() {
                Block::T => &tj.dt,
                _ => &tj.dx,
            };
            let jac: Vec<Jet> = jac.iter().map(|j| j.truncate(k)).collect();
            let mut out = Vec::with_capacity(len * len);
            for a in 0..len {
                for b in 0..len {
                    let mut acc = raw[0].lift(0.0);
                    for c in 0..len {
                        for d in 0..len {
                            acc =
                                acc + &(&jac[c * len + a] * &jac[d * len + b]) * &raw[c * len + d];
                        }
                    }
                    out.push(acc);
                }
            }
            out
        }
    };
    let det = det_value(&out, len);
    if det.abs() <= SINGULAR_METRIC || !det.is_finite() {
        return Err(Error::SingularMetric { det });
    }
    Ok(out)
}

/// `Γ^a_{bc}` at `[a][b][c]` from metric jets, one order lower.
pub(crate) fn christoffel_jets(
    g: &[Jet],
    len: usize,
    var: impl Fn(usize) -> usize,
) -> Result<Vec<Jet>> {
    let det = det_value(g, len);
    let (ginv, _) = invert(g, len).ok_or(Error::SingularMetric { det })?;
    let k = g[0].order() - 1;
    let dg: Vec<Jet> = (0..len * len * len)
        .map(|r| g[r / len].diff(var(r % len)))
        .collect();
    let at = |d: usize, b: usize, c: usize| &dg[(d * len + b) * len + c];
    let mut out = Vec::with_capacity(len * len * len);
    for a in 0..len {
        for b in 0..len {
            for c in 0..len {
                let mut acc = Jet::constant(g[0].space(), k, 0.0);
                for d in 0..len {
                    let s = &(at(d, c, b) + at(d, b, c)) - at(b, c, d);
                    acc = acc + &ginv[a * len + d].truncate(k) * &s;
                }
                out.push(acc.scale(0.5));
            }
        }
    }
    Ok(out)
}

/// `R^d_{abc}` at `[d][a][b][c]` from connection coefficient jets
/// `Γ^a_{bc}` (any torsion), one order lower.
pub(crate) fn curvature_jets(gam: &[Jet], len: usize, var: impl Fn(usize) -> usize) -> Vec<Jet> {
    let g = |a: usize, b: usize, c: usize| &gam[(a * len + b) * len + c];
    let k = gam[0].order() - 1;
    let mut out = Vec::with_capacity(len.pow(4));
    for d in 0..len {
        for a in 0..len {
            for b in 0..len {
                for c in 0..len {
                    let mut acc = &g(d, a, b).diff(var(c)) - &g(d, a, c).diff(var(b));
                    for f in 0..len {
                        acc = acc + &(g(f, a, b) * g(d, f, c)) - &(g(f, a, c) * g(d, f, b));
                    }
                    out.push(acc.truncate(k));
                }
            }
        }
    }
    out
}

fn block_var(g: &dyn Metric) -> impl Fn(usize) -> usize {
    let off = g.dims().offset(g.block());
    move |a| off + a
}

/// Components `g_{ab}` at a point of the given chart.
pub fn metric_values(
    g: &dyn Metric,
    chart: Option<&CoordinateChange>,
    pt: &Point,
) -> Result<Vec<f64>> {
    let local = Local::new(chart, pt, 0)?;
    Ok(metric_jets(g, &local, 0)?.iter().map(Jet::value).collect())
}

/// Christoffel symbols `Γ^a_{bc}` at `[a][b][c]`.
pub fn christoffel(g: &dyn Metric, pt: &Point) -> Result<Grid<f64>> {
    christoffel_in(g, None, pt)
}

pub fn christoffel_in(
    g: &dyn Metric,
    chart: Option<&CoordinateChange>,
    pt: &Point,
) -> Result<Grid<f64>> {
    let len = g.dims().len(g.block());
    let local = Local::new(chart, pt, 1)?;
    let gj = metric_jets(g, &local, 1)?;
    let gam = christoffel_jets(&gj, len, block_var(g))?;
    Ok(Grid::from_vec(
        &[len; 3],
        gam.iter().map(Jet::value).collect(),
    ))
}

/// Riemann curvature `R^d_{abc}` of the Levi-Civita connection.
pub fn riemann(g: &dyn Metric, pt: &Point) -> Result<DTensor> {
    riemann_in(g, None, pt)
}

pub fn riemann_in(g: &dyn Metric, chart: Option<&CoordinateChange>, pt: &Point) -> Result<DTensor> {
    let len = g.dims().len(g.block());
    let local = Local::new(chart, pt, 2)?;
    let gj = metric_jets(g, &local, 2)?;
    let gam = christoffel_jets(&gj, len, block_var(g))?;
    let r = curvature_jets(&gam, len, block_var(g));
    let kind = |up: bool| match (g.block(), up) {
        (Block::T, true) => IndexKind::TUp,
        (Block::T, false) => IndexKind::TDown,
        (_, true) => IndexKind::SUp,
        (_, false) => IndexKind::SDown,
    };
    DTensor::from_vec(
        g.dims(),
        &[kind(true), kind(false), kind(false), kind(false)],
        r.iter().map(Jet::value).collect(),
    )
}

/// Coefficients `χ^a_{bc}(t)` and `Γ^i_{jk}(x)` of linear connections on the
/// two factors, at `[a][b][c]` and `[i][j][k]`.
#[derive(Debug, Clone)]
pub struct LinearConnectionCoeffs {
    dims: Dims,
    pub chi: Grid<ScalarField>,
    pub gamma: Grid<ScalarField>,
}

impl LinearConnectionCoeffs {
    pub fn new(dims: Dims, chi: Grid<ScalarField>, gamma: Grid<ScalarField>) -> Result<Self> {
        let (m, n) = (dims.m, dims.n);
        if chi.shape() != [m, m, m] || gamma.shape() != [n, n, n] {
            return Err(Error::dims(
                format!("[{m},{m},{m}] and [{n},{n},{n}]"),
                format!("{:?} and {:?}", chi.shape(), gamma.shape()),
            ));
        }
        if chi.data().iter().any(|f| !f.depends_only_on(&[Block::T]))
            || gamma.data().iter().any(|f| !f.depends_only_on(&[Block::S]))
        {
            return Err(Error::Invalid(
                "temporal coefficients must depend on t only and spatial ones on x only".into(),
            ));
        }
        Ok(LinearConnectionCoeffs { dims, chi, gamma })
    }

    /// Parses flat row-major lists of `m³` and `n³` expressions.
    pub fn parse(dims: Dims, chi: &[&str], gamma: &[&str]) -> Result<Self> {
        let p = |src: &[&str], len: usize| -> Result<Grid<ScalarField>> {
            if src.len() != len.pow(3) {
                return Err(Error::dims(len.pow(3), src.len()));
            }
            let v = src
                .iter()
                .map(|s| ScalarField::parse(s, dims))
                .collect::<Result<_>>()?;
            Ok(Grid::from_vec(&[len; 3], v))
        };
        LinearConnectionCoeffs::new(dims, p(chi, dims.m)?, p(gamma, dims.n)?)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Order-`k` jets of `(χ, Γ)` in the chart of `local`, using the
    /// inhomogeneous transformation law in a tilde chart.
    pub(crate) fn jets(&self, local: &Local, k: u8) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let base = local.base(k);
        let eval = |g: &Grid<ScalarField>| -> Result<Vec<Jet>> {
            g.data().iter().map(|f| f.eval_with(&base)).collect()
        };
        let chi = eval(&self.chi)?;
        let gamma = eval(&self.gamma)?;
        match &local.tilde {
            None => Ok((chi, gamma)),
            Some(tj) => Ok((
                linear_law(&chi, &tj.dt, &tj.dt_inv, &tj.ddt, self.dims.m, k),
                linear_law(&gamma, &tj.dx, &tj.dx_inv, &tj.ddx, self.dims.n, k),
            )),
        }
    }
}

// c̃^a_{fg} = (∂ỹ^a/∂y^d)[c^d_{bc}(∂y^b/∂ỹ^f)(∂y^c/∂ỹ^g) + ∂²y^d/∂ỹ^f∂ỹ^g]
fn linear_law(c: &[Jet], j: &[Jet], jinv: &[Jet], jj: &[Jet], n: usize, k: u8) -> Vec<Jet> {
    let tr = |v: &[Jet]| -> Vec<Jet> { v.iter().map(|x| x.truncate(k)).collect() };
    let (j, jinv, jj) = (tr(j), tr(jinv), tr(jj));
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for f in 0..n {
            for g in 0..n {
                let mut acc = c[0].lift(0.0);
                for d in 0..n {
                    let mut inner = jj[(d * n + f) * n + g].clone();
                    for b in 0..n {
                        for e in 0..n {
                            inner =
                                inner + &(&c[(d * n + b) * n + e] * &j[b * n + f]) * &j[e * n + g];
                        }
                    }
                    acc = acc + &jinv[a * n + d] * &inner;
                }
                out.push(acc);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn sphere() -> (Dims, SpatialMetric) {
        let d = Dims::new(1, 2).unwrap();
        (
            d,
            SpatialMetric::parse(d, &["1", "0", "0", "sin(x[1])^2"]).unwrap(),
        )
    }

    fn at(d: Dims, x: [f64; 2]) -> Point {
        Point::new(d, &[0.0], &x, &[vec![0.0], vec![0.0]]).unwrap()
    }

    #[test]
    fn sphere_christoffel() {
        let (d, g) = sphere();
        let gam = christoffel(&g, &at(d, [FRAC_PI_4, 0.0])).unwrap();
        assert_relative_eq!(gam[[0, 1, 1]], -0.5, epsilon = 1e-12);
        assert_relative_eq!(gam[[1, 0, 1]], 1.0, epsilon = 1e-12);
        assert_relative_eq!(gam[[1, 1, 0]], 1.0, epsilon = 1e-12);
        assert_relative_eq!(gam[[0, 0, 0]], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_curvature() {
        let (d, g) = sphere();
        let r = riemann(&g, &at(d, [FRAC_PI_3, 0.2])).unwrap();
        let s2 = FRAC_PI_3.sin().powi(2);
        assert_relative_eq!(r.get(&[0, 1, 1, 0]), s2, epsilon = 1e-12);
        assert_relative_eq!(r.get(&[0, 1, 0, 1]), -s2, epsilon = 1e-12);
        assert_relative_eq!(r.get(&[1, 0, 0, 1]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_metric_in_polar_chart_stays_flat() {
        let d = Dims::new(1, 2).unwrap();
        let g = SpatialMetric::parse(d, &["1", "0", "0", "1"]).unwrap();
        let chg = CoordinateChange::parse(
            d,
            "shear",
            &["t[1]"],
            &["x[1] + 0.3*x[2]^2", "x[2]"],
            &["t[1]"],
            &["x[1] - 0.3*x[2]^2", "x[2]"],
        )
        .unwrap();
        let pt = at(d, [0.5, 0.7]);
        let r = riemann_in(&g, Some(&chg), &pt).unwrap();
        assert!(r.max_abs() < 1e-12);
        let gam = christoffel_in(&g, Some(&chg), &pt).unwrap();
        assert_relative_eq!(gam[[0, 1, 1]], -0.6, epsilon = 1e-12);
    }

    #[test]
    fn singular_metric_rejected() {
        let (d, _) = sphere();
        let g = SpatialMetric::parse(d, &["1", "0", "0", "sin(x[1])^2"]).unwrap();
        assert!(matches!(
            christoffel(&g, &at(d, [0.0, 0.0])),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn wrong_block_rejected() {
        let d = Dims::new(1, 1).unwrap();
        assert!(TemporalMetric::parse(d, &["1 + x[1]^2"]).is_err());
    }
}

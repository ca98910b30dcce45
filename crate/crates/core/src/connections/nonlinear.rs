use std::sync::Arc;

use super::{Perturbation, Target};
use crate::bundle::chart::Local;
use crate::bundle::{Block, CoordinateChange, DTensor, Dims, IndexKind, Point};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::grid::Grid;
use crate::jet::Jet;
use crate::metrics::{
    christoffel_jets, metric_jets, LinearConnectionCoeffs, SpatialMetric, TemporalMetric,
};
use crate::num::invert;

/// Where the coefficients `N1^{(a)}_{(i)b}` and `N2^{(a)}_{(i)j}` come from.
#[derive(Debug, Clone)]
pub enum NlcSource {
    /// Built from the Christoffel symbols of `h` and `φ`.
    Canonical {
        h: TemporalMetric,
        phi: SpatialMetric,
    },
    /// `N1 = χ^a_{cb} p_i^c`, `N2 = −Γ^k_{ij} p_k^a`.
    Linear(LinearConnectionCoeffs),
    /// Explicit expressions at `[(i,a)][b]` and `[(i,a)][j]`.
    Custom {
        n1: Grid<ScalarField>,
        n2: Grid<ScalarField>,
    },
}

/// A nonlinear connection `N = (N1, N2)`.
///
/// The connection lives in the original chart; [`NonlinearConnection::in_chart`]
/// gives the same geometric object read in a tilde chart, computed from the
/// source data (metrics are transformed as tensors, linear connections by
/// their inhomogeneous law, custom coefficients by pushing the adapted frame
/// forward).
#[derive(Debug, Clone)]
pub struct NonlinearConnection {
    dims: Dims,
    source: Arc<NlcSource>,
    chart: Option<CoordinateChange>,
    perturb: Option<Perturbation>,
}

/// `N1`, `N2` as order-1 jets in the chart coordinates at one point.
#[derive(Debug, Clone)]
pub struct NlcAt {
    pub dims: Dims,
    /// `N1^{(a)}_{(i)b}` at `[(i,a)][b]`.
    pub n1: Grid<Jet>,
    /// `N2^{(a)}_{(i)j}` at `[(i,a)][j]`.
    pub n2: Grid<Jet>,
}

impl NlcAt {
    /// `δf/δt^c = ∂f/∂t^c − N1^{(b)}_{(j)c} ∂f/∂p_j^b`.
    pub fn delta_t(&self, f: &Jet, c: usize) -> f64 {
        let d = self.dims;
        let mut v = f.d1(d.t(c));
        for q in 0..d.m * d.n {
            v -= self.n1[[q, c]].value() * f.d1(d.m + d.n + q);
        }
        v
    }

    /// `δf/δx^k = ∂f/∂x^k − N2^{(b)}_{(j)k} ∂f/∂p_j^b`.
    pub fn delta_x(&self, f: &Jet, k: usize) -> f64 {
        let d = self.dims;
        let mut v = f.d1(d.x(k));
        for q in 0..d.m * d.n {
            v -= self.n2[[q, k]].value() * f.d1(d.m + d.n + q);
        }
        v
    }

    /// `∂f/∂p_k^c` for the pair `q = (k, c)`.
    pub fn d_p(&self, f: &Jet, q: usize) -> f64 {
        f.d1(self.dims.m + self.dims.n + q)
    }

    /// Frame derivative along the `g`-th direction of `block`.
    pub fn along(&self, block: Block, f: &Jet, g: usize) -> f64 {
        match block {
            Block::T => self.delta_t(f, g),
            Block::S => self.delta_x(f, g),
            Block::P => self.d_p(f, g),
        }
    }

    pub fn n1_tensor(&self) -> DTensor {
        let v = self.n1.map(Jet::value);
        DTensor::from_vec(
            self.dims,
            &[IndexKind::PVec, IndexKind::TDown],
            v.into_data(),
        )
        .unwrap()
    }

    pub fn n2_tensor(&self) -> DTensor {
        let v = self.n2.map(Jet::value);
        DTensor::from_vec(
            self.dims,
            &[IndexKind::PVec, IndexKind::SDown],
            v.into_data(),
        )
        .unwrap()
    }
}

/// `N1^{(a)}_{(i)b} = χ^a_{cb} p_i^c`, `N2^{(a)}_{(i)j} = −Γ^k_{ij} p_k^a` from
/// coefficient jets and momentum jets.
pub(crate) fn from_linear_jets(
    d: Dims,
    chi: &[Jet],
    gamma: &[Jet],
    own: &[Jet],
) -> (Grid<Jet>, Grid<Jet>) {
    let (m, n) = (d.m, d.n);
    let p = |i: usize, a: usize| &own[d.p(i, a)];
    let n1 = Grid::from_fn(&[m * n, m], |ix| {
        let (i, a) = d.unpair(ix[0]);
        let b = ix[1];
        let mut acc = chi[0].lift_zero();
        for c in 0..m {
            acc = acc + &chi[(a * m + c) * m + b] * p(i, c);
        }
        acc
    });
    let n2 = Grid::from_fn(&[m * n, n], |ix| {
        let (i, a) = d.unpair(ix[0]);
        let j = ix[1];
        let mut acc = gamma[0].lift_zero();
        for k in 0..n {
            acc = acc - &gamma[(k * n + i) * n + j] * p(k, a);
        }
        acc
    });
    (n1, n2)
}

impl Jet {
    pub(crate) fn lift_zero(&self) -> Jet {
        Jet::constant(self.space(), self.order(), 0.0)
    }
}

/// Christoffel jets of both metrics at derivative order `k`.
pub(crate) fn metric_christoffels(
    h: &TemporalMetric,
    phi: &SpatialMetric,
    local: &Local,
    k: u8,
) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let d = local.dims;
    let hj = metric_jets(h, local, k + 1)?;
    let pj = metric_jets(phi, local, k + 1)?;
    Ok((
        christoffel_jets(&hj, d.m, |a| d.t(a))?,
        christoffel_jets(&pj, d.n, |i| d.x(i))?,
    ))
}

impl NonlinearConnection {
    pub fn canonical(h: TemporalMetric, phi: SpatialMetric) -> NonlinearConnection {
        use crate::metrics::Metric;
        NonlinearConnection::from_source(h.dims(), NlcSource::Canonical { h, phi })
    }

    pub fn from_linear(lc: LinearConnectionCoeffs) -> NonlinearConnection {
        NonlinearConnection::from_source(lc.dims(), NlcSource::Linear(lc))
    }

    pub fn custom(
        dims: Dims,
        n1: Grid<ScalarField>,
        n2: Grid<ScalarField>,
    ) -> Result<NonlinearConnection> {
        let (m, n) = (dims.m, dims.n);
        if n1.shape() != [m * n, m] || n2.shape() != [m * n, n] {
            return Err(Error::dims(
                format!("[{},{m}] and [{},{n}]", m * n, m * n),
                format!("{:?} and {:?}", n1.shape(), n2.shape()),
            ));
        }
        Ok(NonlinearConnection::from_source(
            dims,
            NlcSource::Custom { n1, n2 },
        ))
    }

    pub fn from_source(dims: Dims, source: NlcSource) -> NonlinearConnection {
        NonlinearConnection {
            dims,
            source: Arc::new(source),
            chart: None,
            perturb: None,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn source(&self) -> &NlcSource {
        &self.source
    }

    pub fn chart(&self) -> Option<&CoordinateChange> {
        self.chart.as_ref()
    }

    /// The same connection read in the tilde chart of `chg`.
    pub fn in_chart(&self, chg: &CoordinateChange) -> NonlinearConnection {
        NonlinearConnection {
            chart: Some(chg.clone()),
            perturb: None,
            ..self.clone()
        }
    }

    pub fn perturbed(&self, p: Perturbation) -> NonlinearConnection {
        NonlinearConnection {
            perturb: Some(p),
            ..self.clone()
        }
    }

    /// Coefficient jets at a point of this connection's chart.
    pub fn at(&self, pt: &Point) -> Result<NlcAt> {
        let local = Local::new(self.chart.as_ref(), pt, 1)?;
        self.at_local(&local)
    }

    pub(crate) fn at_local(&self, local: &Local) -> Result<NlcAt> {
        let d = self.dims;
        let own = local.own(1);
        let (mut n1, mut n2) = match &*self.source {
            NlcSource::Canonical { h, phi } => {
                let (kappa, gamma) = metric_christoffels(h, phi, local, 1)?;
                from_linear_jets(d, &kappa, &gamma, &own)
            }
            NlcSource::Linear(lc) => {
                let (chi, gamma) = lc.jets(local, 1)?;
                from_linear_jets(d, &chi, &gamma, &own)
            }
            NlcSource::Custom { n1, n2 } => custom_jets(d, n1, n2, local)?,
        };
        if let Some(p) = self.perturb {
            let g = match p.target {
                Target::N1 => Some(&mut n1),
                Target::N2 => Some(&mut n2),
                Target::Coeff(_) => None,
            };
            if let Some(g) = g {
                let slot = g.data_mut().get_mut(p.index).ok_or_else(|| {
                    Error::Invalid(format!("perturbation index {} out of range", p.index))
                })?;
                *slot = slot.add_const(p.delta);
            }
        }
        Ok(NlcAt { dims: d, n1, n2 })
    }
}

/// Custom coefficients: evaluated directly in the original chart; in a tilde
/// chart, the adapted frame is pushed forward through `∂z̃/∂z`.
fn custom_jets(
    d: Dims,
    n1: &Grid<ScalarField>,
    n2: &Grid<ScalarField>,
    local: &Local,
) -> Result<(Grid<Jet>, Grid<Jet>)> {
    let base = local.base(1);
    let eval = |g: &Grid<ScalarField>| g.try_map(|f| f.eval_with(&base));
    let (o1, o2) = (eval(n1)?, eval(n2)?);
    let Some(tj) = &local.tilde else {
        return Ok((o1, o2));
    };
    let dn = d.total();
    let base2 = local.base(2);
    let a: Vec<Jet> = (0..dn * dn).map(|r| base2[r / dn].diff(r % dn)).collect();
    let (k, _) = invert(&a, dn).ok_or(Error::SingularJacobian { det: 0.0 })?;
    let mn = d.m * d.n;
    let poff = d.m + d.n;
    // Pushed component `row` of the original adapted vector along `var` with
    // vertical correction `n[(j,b)]`.
    let push = |row: usize, var: usize, n: &dyn Fn(usize) -> Jet| -> Jet {
        let mut acc = k[row * dn + var].clone();
        for q in 0..mn {
            acc = acc - &n(q) * &k[row * dn + poff + q];
        }
        acc
    };
    let t1 = Grid::from_fn(&[mn, d.m], |ix| {
        let (q, c) = (ix[0], ix[1]);
        let mut acc = o1[[0, 0]].lift_zero();
        for av in 0..d.m {
            let v = push(poff + q, d.t(av), &|r| o1[[r, av]].clone());
            acc = acc + &tj.dt[av * d.m + c].truncate(1) * &v;
        }
        -acc
    });
    let t2 = Grid::from_fn(&[mn, d.n], |ix| {
        let (q, kk) = (ix[0], ix[1]);
        let mut acc = o2[[0, 0]].lift_zero();
        for iv in 0..d.n {
            let v = push(poff + q, d.x(iv), &|r| o2[[r, iv]].clone());
            acc = acc + &tj.dx[iv * d.n + kk].truncate(1) * &v;
        }
        -acc
    });
    Ok((t1, t2))
}

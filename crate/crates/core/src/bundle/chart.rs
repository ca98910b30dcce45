//! Jets of the coordinates of one chart, and of the original coordinates
//! seen from a tilde chart.

use super::change::SINGULAR_DET;
use super::{CoordinateChange, Dims, Point};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::num::{det_value, invert};

/// Data of the change evaluated at a tilde point, as jets in the tilde
/// coordinates. Square blocks are row-major.
pub(crate) struct TildeJets {
    /// `∂t^a/∂t̃^b` at `[a][b]`.
    pub dt: Vec<Jet>,
    /// `∂t̃^a/∂t^b` at `[a][b]`, evaluated at the preimage.
    pub dt_inv: Vec<Jet>,
    /// `∂²t^d/∂t̃^e∂t̃^f` at `[d][e][f]`.
    pub ddt: Vec<Jet>,
    pub dx: Vec<Jet>,
    pub dx_inv: Vec<Jet>,
    pub ddx: Vec<Jet>,
}

pub(crate) struct Local {
    pub dims: Dims,
    /// Identity jets of the chart's own coordinates.
    pub own: Vec<Jet>,
    /// Original coordinates as jets in the own coordinates.
    base: Vec<Jet>,
    pub tilde: Option<TildeJets>,
}

impl Local {
    /// Jets sufficient to build objects of derivative order `k` on the
    /// original coordinates.
    pub fn new(chart: Option<&CoordinateChange>, pt: &Point, k: u8) -> Result<Local> {
        let dims = pt.dims();
        let order = (k + 2).min(3);
        let Some(chg) = chart else {
            let own = Jet::seed(pt.coords(), order);
            return Ok(Local {
                dims,
                base: own.clone(),
                own,
                tilde: None,
            });
        };
        if chg.dims() != dims {
            return Err(Error::dims(
                format!("{:?}", chg.dims()),
                format!("{dims:?}"),
            ));
        }
        let (m, n) = (dims.m, dims.n);
        let own = Jet::seed(pt.coords(), order);
        let tb: Vec<Jet> = chg
            .tinv()
            .iter()
            .map(|f| f.eval_with(&own))
            .collect::<Result<_>>()?;
        let xb: Vec<Jet> = chg
            .xinv()
            .iter()
            .map(|f| f.eval_with(&own))
            .collect::<Result<_>>()?;
        let dt: Vec<Jet> = (0..m * m).map(|r| tb[r / m].diff(dims.t(r % m))).collect();
        let dx: Vec<Jet> = (0..n * n).map(|r| xb[r / n].diff(dims.x(r % n))).collect();
        let dt_inv = inverse(&dt, m)?;
        let dx_inv = inverse(&dx, n)?;
        let second = |j: &[Jet], len: usize, var: &dyn Fn(usize) -> usize| -> Vec<Jet> {
            if order < 2 {
                return Vec::new();
            }
            (0..len * len * len)
                .map(|r| j[r / len].diff(var(r % len)))
                .collect()
        };
        let ddt = second(&dt, m, &|f| dims.t(f));
        let ddx = second(&dx, n, &|f| dims.x(f));
        let mut base = tb;
        base.extend(xb);
        for j in 0..n {
            for b in 0..m {
                let mut acc = Jet::constant(own[0].space(), order - 1, 0.0);
                for i in 0..n {
                    for a in 0..m {
                        acc = acc + &(&dx_inv[i * n + j] * &dt[b * m + a]) * &own[dims.p(i, a)];
                    }
                }
                base.push(acc);
            }
        }
        Ok(Local {
            dims,
            own,
            base,
            tilde: Some(TildeJets {
                dt,
                dt_inv,
                ddt,
                dx,
                dx_inv,
                ddx,
            }),
        })
    }

    /// Original coordinates truncated to `order`.
    pub fn base(&self, order: u8) -> Vec<Jet> {
        self.base.iter().map(|j| j.truncate(order)).collect()
    }

    pub fn own(&self, order: u8) -> Vec<Jet> {
        self.own.iter().map(|j| j.truncate(order)).collect()
    }
}

fn inverse(j: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let det = det_value(j, n);
    if det.abs() <= SINGULAR_DET {
        return Err(Error::SingularJacobian { det });
    }
    invert(j, n)
        .map(|(inv, _)| inv)
        .ok_or(Error::SingularJacobian { det })
}

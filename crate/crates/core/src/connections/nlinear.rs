use std::sync::Arc;

use super::nonlinear::metric_christoffels;
use super::{Coeff, Nine, NlcAt, NlcSource, NonlinearConnection, Perturbation, Target};
use crate::bundle::chart::{Local, TildeJets};
use crate::bundle::{Block, CoordinateChange, DTensor, Dims, Point};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::grid::Grid;
use crate::jet::Jet;
use crate::metrics::{LinearConnectionCoeffs, Metric, SpatialMetric, TemporalMetric};

#[derive(Debug, Clone)]
pub enum NLinearSource {
    /// Berwald connection built on the Christoffel symbols of `h` and `φ`.
    BerwaldMetric {
        h: TemporalMetric,
        phi: SpatialMetric,
    },
    /// Berwald connection built on arbitrary linear connections `χ`, `Γ`.
    BerwaldLinear(LinearConnectionCoeffs),
    /// Explicit nonlinear connection and nine coefficient families.
    Custom {
        n1: Grid<ScalarField>,
        n2: Grid<ScalarField>,
        nine: Nine<ScalarField>,
    },
}

/// An N-linear connection `D` together with its nonlinear connection `N`.
#[derive(Debug, Clone)]
pub struct NLinearConnection {
    dims: Dims,
    source: Arc<NLinearSource>,
    chart: Option<CoordinateChange>,
    perturb: Option<Perturbation>,
}

/// `N` and the nine families as order-1 jets in the chart coordinates.
#[derive(Debug, Clone)]
pub struct ConnectionAt {
    pub dims: Dims,
    pub nlc: NlcAt,
    pub coeffs: Nine<Jet>,
}

impl ConnectionAt {
    /// Values of one family as a d-tensor.
    pub fn family_tensor(&self, c: Coeff) -> DTensor {
        let v = self.coeffs.get(c).map(Jet::value).into_data();
        DTensor::from_vec(self.dims, &c.kinds(), v).unwrap()
    }

    /// Value of one family component.
    pub fn v(&self, c: Coeff, idx: [usize; 3]) -> f64 {
        self.coeffs.get(c)[idx].value()
    }
}

/// Nine families of the Berwald connection of `(χ, Γ)`:
/// `A^a_{bc} = χ^a_{bc}`, `A^{(a)(j)}_{(i)(b)c} = −δ^j_i χ^a_{bc}`,
/// `H^i_{jk} = Γ^i_{jk}`, `H^{(a)(j)}_{(i)(b)k} = δ^a_b Γ^j_{ik}`, all others zero.
fn berwald_coeffs(d: Dims, chi: &[Jet], gamma: &[Jet]) -> Nine<Jet> {
    let (m, n) = (d.m, d.n);
    let zero = chi[0].lift_zero();
    Nine::from_fn(|c| {
        Grid::from_fn(&c.shape(d), |ix| match c {
            Coeff::Att => chi[(ix[0] * m + ix[1]) * m + ix[2]].clone(),
            Coeff::Hss => gamma[(ix[0] * n + ix[1]) * n + ix[2]].clone(),
            Coeff::App => {
                let ((i, a), (j, b)) = (d.unpair(ix[0]), d.unpair(ix[1]));
                if i == j {
                    -chi[(a * m + b) * m + ix[2]].clone()
                } else {
                    zero.clone()
                }
            }
            Coeff::Hpp => {
                let ((i, a), (j, b)) = (d.unpair(ix[0]), d.unpair(ix[1]));
                if a == b {
                    gamma[(j * n + i) * n + ix[2]].clone()
                } else {
                    zero.clone()
                }
            }
            _ => zero.clone(),
        })
    })
}

impl NLinearConnection {
    pub fn berwald_from_metrics(h: TemporalMetric, phi: SpatialMetric) -> NLinearConnection {
        NLinearConnection::from_source(h.dims(), NLinearSource::BerwaldMetric { h, phi })
    }

    pub fn berwald_from_linear(lc: LinearConnectionCoeffs) -> NLinearConnection {
        NLinearConnection::from_source(lc.dims(), NLinearSource::BerwaldLinear(lc))
    }

    /// A connection given by expressions for `N` and all nine families
    /// (shapes as documented on [`Coeff`]).
    pub fn custom(
        dims: Dims,
        n1: Grid<ScalarField>,
        n2: Grid<ScalarField>,
        nine: Nine<ScalarField>,
    ) -> Result<NLinearConnection> {
        NonlinearConnection::custom(dims, n1.clone(), n2.clone())?;
        for c in Coeff::ALL {
            if nine.get(c).shape() != c.shape(dims) {
                return Err(Error::dims(
                    format!("{} of shape {:?}", c.key(), c.shape(dims)),
                    format!("{:?}", nine.get(c).shape()),
                ));
            }
        }
        Ok(NLinearConnection::from_source(
            dims,
            NLinearSource::Custom { n1, n2, nine },
        ))
    }

    fn from_source(dims: Dims, source: NLinearSource) -> NLinearConnection {
        NLinearConnection {
            dims,
            source: Arc::new(source),
            chart: None,
            perturb: None,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn source(&self) -> &NLinearSource {
        &self.source
    }

    pub fn chart(&self) -> Option<&CoordinateChange> {
        self.chart.as_ref()
    }

    pub fn in_chart(&self, chg: &CoordinateChange) -> NLinearConnection {
        NLinearConnection {
            chart: Some(chg.clone()),
            perturb: None,
            ..self.clone()
        }
    }

    pub fn perturbed(&self, p: Perturbation) -> NLinearConnection {
        NLinearConnection {
            perturb: Some(p),
            ..self.clone()
        }
    }

    /// The underlying nonlinear connection, in the same chart and carrying
    /// the same perturbation if it targets `N`.
    pub fn nonlinear(&self) -> NonlinearConnection {
        let src = match &*self.source {
            NLinearSource::BerwaldMetric { h, phi } => NlcSource::Canonical {
                h: h.clone(),
                phi: phi.clone(),
            },
            NLinearSource::BerwaldLinear(lc) => NlcSource::Linear(lc.clone()),
            NLinearSource::Custom { n1, n2, .. } => NlcSource::Custom {
                n1: n1.clone(),
                n2: n2.clone(),
            },
        };
        let mut n = NonlinearConnection::from_source(self.dims, src);
        if let Some(chg) = &self.chart {
            n = n.in_chart(chg);
        }
        match self.perturb {
            Some(p) if matches!(p.target, Target::N1 | Target::N2) => n.perturbed(p),
            _ => n,
        }
    }

    /// Coefficient jets at a point of this connection's chart.
    pub fn at(&self, pt: &Point) -> Result<ConnectionAt> {
        let d = self.dims;
        let local = Local::new(self.chart.as_ref(), pt, 1)?;
        let nlc = self.nonlinear().at_local(&local)?;
        let mut coeffs = match &*self.source {
            NLinearSource::BerwaldMetric { h, phi } => {
                let (kappa, gamma) = metric_christoffels(h, phi, &local, 1)?;
                berwald_coeffs(d, &kappa, &gamma)
            }
            NLinearSource::BerwaldLinear(lc) => {
                let (chi, gamma) = lc.jets(&local, 1)?;
                berwald_coeffs(d, &chi, &gamma)
            }
            NLinearSource::Custom { nine, .. } => {
                let base = local.base(1);
                let raw = Nine::try_from_fn(|c| nine.get(c).try_map(|f| f.eval_with(&base)))?;
                match &local.tilde {
                    None => raw,
                    Some(tj) => frame_change(d, &raw, tj),
                }
            }
        };
        if let Some(p) = self.perturb {
            if let Target::Coeff(c) = p.target {
                let slot = coeffs
                    .get_mut(c)
                    .data_mut()
                    .get_mut(p.index)
                    .ok_or_else(|| {
                        Error::Invalid(format!("perturbation index {} out of range", p.index))
                    })?;
                *slot = slot.add_const(p.delta);
            }
        }
        Ok(ConnectionAt {
            dims: d,
            nlc,
            coeffs,
        })
    }
}

/// Jacobian `L^ρ_β` of the frame change (original frame vector `ρ`, tilde
/// frame vector `β`) for one block, its inverse `(L⁻¹)^β_ρ`, both row-major
/// and order 2.
fn frame_blocks(d: Dims, tj: &TildeJets, b: Block) -> (Vec<Jet>, Vec<Jet>) {
    match b {
        Block::T => (tj.dt.clone(), tj.dt_inv.clone()),
        Block::S => (tj.dx.clone(), tj.dx_inv.clone()),
        Block::P => {
            let (m, n) = (d.m, d.n);
            let q = m * n;
            let mut l = Vec::with_capacity(q * q);
            let mut li = Vec::with_capacity(q * q);
            for r in 0..q {
                for c in 0..q {
                    // ∂/∂p̃_j^b = (∂t^a/∂t̃^b)(∂x̃^j/∂x^i) ∂/∂p_i^a
                    let ((i, a), (j, bb)) = (d.unpair(r), d.unpair(c));
                    l.push(&tj.dt[a * m + bb] * &tj.dx_inv[j * n + i]);
                    let ((j2, b2), (i2, a2)) = (d.unpair(r), d.unpair(c));
                    li.push(&tj.dt_inv[b2 * m + a2] * &tj.dx[i2 * n + j2]);
                }
            }
            (l, li)
        }
    }
}

/// Connection coefficients in the tilde adapted frame:
/// `Ω'[α][β][γ] = (L⁻¹)^γ_ρ (ẽ_α(L^ρ_β) + L^μ_α L^ν_β Ω[μ][ν][ρ])`, where
/// `D_{e_μ} e_ν = Ω[μ][ν][ρ] e_ρ` and vertical families enter `Ω` with a minus sign.
fn frame_change(d: Dims, raw: &Nine<Jet>, tj: &TildeJets) -> Nine<Jet> {
    let blocks: Vec<(Vec<Jet>, Vec<Jet>)> =
        Block::ALL.iter().map(|b| frame_blocks(d, tj, *b)).collect();
    let bidx = |b: Block| Block::ALL.iter().position(|x| *x == b).unwrap();
    Nine::from_fn(|c| {
        let (tb, db) = (c.target(), c.dir());
        let (nt, nd) = (d.len(tb), d.len(db));
        let (l, li) = &blocks[bidx(tb)];
        let ld = &blocks[bidx(db)].0;
        let fam = raw.get(c);
        let sign = if tb == Block::P { -1.0 } else { 1.0 };
        let l1: Vec<Jet> = l.iter().map(|x| x.truncate(1)).collect();
        let li1: Vec<Jet> = li.iter().map(|x| x.truncate(1)).collect();
        let ld1: Vec<Jet> = ld.iter().map(|x| x.truncate(1)).collect();
        let zero = fam.data()[0].lift_zero();
        // w[ρ][β][μ] = L^ν_β fam[ρ][ν][μ]
        let w = Grid::from_fn(&[nt, nt, nd], |ix| {
            let (rho, beta, mu) = (ix[0], ix[1], ix[2]);
            let mut acc = zero.clone();
            for nu in 0..nt {
                acc = acc + &l1[nu * nt + beta] * &fam[[rho, nu, mu]];
            }
            acc
        });
        // x[ρ][β][α] = L^μ_α w[ρ][β][μ] + sign ẽ_α(L^ρ_β)
        let x = Grid::from_fn(&[nt, nt, nd], |ix| {
            let (rho, beta, alpha) = (ix[0], ix[1], ix[2]);
            let mut acc = zero.clone();
            for mu in 0..nd {
                acc = acc + &ld1[mu * nd + alpha] * &w[[rho, beta, mu]];
            }
            if db != Block::P {
                let var = d.offset(db) + alpha;
                acc = acc + l[rho * nt + beta].diff(var).scale(sign);
            }
            acc
        });
        Grid::from_fn(&[nt, nt, nd], |ix| {
            let (gamma, beta, alpha) = (ix[0], ix[1], ix[2]);
            let mut acc = zero.clone();
            for rho in 0..nt {
                acc = acc + &li1[gamma * nt + rho] * &x[[rho, beta, alpha]];
            }
            acc
        })
    })
}

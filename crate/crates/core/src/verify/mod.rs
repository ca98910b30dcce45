//! Covariance and consistency checks: transformation laws under probe
//! coordinate changes, and AD against finite differences.

mod changes;
mod random;
mod suite;

pub use changes::{probe_points, standard_changes, ProbeBox};
pub use random::{random_connection, random_expression, random_linear, random_metrics};
pub use suite::{covariance_suite, oracle_suite, CheckOutcome, Objects, OracleReport, TOL_ORACLE};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bundle::{Block, CoordinateChange, DTensor, Point};
use crate::connections::{Coeff, NLinearConnection, Nine, NonlinearConnection};
use crate::error::Result;
use crate::expr::ScalarField;
use crate::jet::Jet;

/// Tolerance for d-tensors built from connections (torsion, curvature, …).
pub const TOL_DTENSOR: f64 = 1e-6;
/// Tolerance for metric-derived d-tensors and connection transformation rules.
pub const TOL_RULE: f64 = 1e-8;

/// Outcome of one covariance check over a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub object_id: String,
    pub change_id: String,
    pub max_abs_residual: f64,
    /// Largest residual per component (or per family for rule checks).
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CovarianceReport {
    fn new(
        object_id: impl Into<String>,
        change_id: &str,
        residuals: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let max = residuals.iter().cloned().fold(0.0, worst);
        CovarianceReport {
            object_id: object_id.into(),
            change_id: change_id.to_string(),
            max_abs_residual: max,
            residuals,
            tolerance,
            pass: max < tolerance,
        }
    }
}

/// `max` that keeps NaN, so a non-finite residual never passes.
pub(crate) fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn merge_max(acc: &mut Vec<f64>, next: impl IntoIterator<Item = f64>) {
    for (k, v) in next.into_iter().enumerate() {
        if k >= acc.len() {
            acc.push(v);
        } else {
            acc[k] = worst(acc[k], v);
        }
    }
}

fn residual(a: &DTensor, b: &DTensor) -> Vec<f64> {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .collect()
}

/// Checks several d-tensor fields at once: each field evaluated natively in
/// the tilde chart against its original-chart value pushed through the
/// Jacobian factors of its slot kinds.
pub fn check_dtensors_covariance<F>(
    ids: &[String],
    field: F,
    chg: &CoordinateChange,
    pts: &[Point],
    tolerance: f64,
) -> Result<Vec<CovarianceReport>>
where
    F: Fn(Option<&CoordinateChange>, &Point) -> Result<Vec<DTensor>> + Sync,
{
    let per_point: Vec<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|pt| -> Result<Vec<Vec<f64>>> {
            let jac = chg.jacobians(pt)?;
            let old = field(None, pt)?;
            let new = field(Some(chg), &chg.push_point(pt)?)?;
            Ok(old
                .iter()
                .zip(&new)
                .map(|(o, n)| residual(&o.transform(&jac), n))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let mut acc = Vec::new();
            for p in &per_point {
                merge_max(&mut acc, p[k].iter().cloned());
            }
            CovarianceReport::new(id.clone(), chg.id(), acc, tolerance)
        })
        .collect())
}

/// Covariance of one d-tensor field.
pub fn check_dtensor_covariance<F>(
    id: &str,
    field: F,
    chg: &CoordinateChange,
    pts: &[Point],
    tolerance: f64,
) -> Result<CovarianceReport>
where
    F: Fn(Option<&CoordinateChange>, &Point) -> Result<DTensor> + Sync,
{
    let mut r = check_dtensors_covariance(
        &[id.to_string()],
        |c, p| Ok(vec![field(c, p)?]),
        chg,
        pts,
        tolerance,
    )?;
    Ok(r.remove(0))
}

/// The transformation rule of `N`, new from old:
/// `Ñ1^{(b)}_{(j)c} = (M N1 − ∂p̃/∂t)^{(b)}_{(j)a} (∂t^a/∂t̃^c)` and
/// `Ñ2^{(b)}_{(j)k} = (M N2 − ∂p̃/∂x)^{(b)}_{(j)i} (∂x^i/∂x̃^k)`, with
/// `M = ∂p̃/∂p` and all blocks read off the natural Jacobian `∂z̃/∂z`.
/// Compared against `N` evaluated natively in the tilde chart.
pub fn check_nlc_covariance(
    nlc: &NonlinearConnection,
    chg: &CoordinateChange,
    pts: &[Point],
) -> Result<CovarianceReport> {
    let d = nlc.dims();
    let (m, n, q) = (d.m, d.n, d.len(Block::P));
    let po = d.offset(Block::P);
    let native = nlc.in_chart(chg);
    let per_point: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|pt| -> Result<Vec<f64>> {
            let z = chg.natural_frame_jacobians(pt)?;
            let jac = chg.jacobians(pt)?;
            let old = nlc.at(pt)?;
            let new = native.at(&chg.push_point(pt)?)?;
            let mut res = Vec::with_capacity(q * (m + n));
            for r in 0..q {
                for c in 0..m {
                    let rule: f64 = (0..m)
                        .map(|a| {
                            let mn: f64 = (0..q)
                                .map(|s| z[(po + r, po + s)] * old.n1[[s, a]].value())
                                .sum();
                            (mn - z[(po + r, d.t(a))]) * jac.jt_inv[(a, c)]
                        })
                        .sum();
                    res.push((rule - new.n1[[r, c]].value()).abs());
                }
            }
            for r in 0..q {
                for k in 0..n {
                    let rule: f64 = (0..n)
                        .map(|i| {
                            let mn: f64 = (0..q)
                                .map(|s| z[(po + r, po + s)] * old.n2[[s, i]].value())
                                .sum();
                            (mn - z[(po + r, d.x(i))]) * jac.jx_inv[(i, k)]
                        })
                        .sum();
                    res.push((rule - new.n2[[r, k]].value()).abs());
                }
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    let mut acc = Vec::new();
    for p in per_point {
        merge_max(&mut acc, p);
    }
    Ok(CovarianceReport::new("N", chg.id(), acc, TOL_RULE))
}

/// Frame-change matrices at a point of the original chart, built from the
/// forward maps: `e_ν = K^β_ν ẽ_β` per block, `K⁻¹`, and the derivatives
/// `e_μ(K^γ_ν)` along the original adapted frame.
struct FrameChange {
    k: [DMatrix<f64>; 3],
    kinv: [DMatrix<f64>; 3],
    /// `ek[target][dir][(γ·len + ν)·len_dir + μ]`
    ek: [[Vec<f64>; 3]; 3],
}

fn block_idx(b: Block) -> usize {
    Block::ALL.iter().position(|x| *x == b).unwrap()
}

impl FrameChange {
    fn new(chg: &CoordinateChange, pt: &Point) -> Result<FrameChange> {
        let d = chg.dims();
        let (m, n, q) = (d.m, d.n, d.len(Block::P));
        let jac = chg.jacobians(pt)?;
        let z = Jet::seed(pt.coords(), 2);
        let tt: Vec<Jet> = chg
            .tmap()
            .iter()
            .map(|f| f.eval_with(&z))
            .collect::<Result<_>>()?;
        let xt: Vec<Jet> = chg
            .xmap()
            .iter()
            .map(|f| f.eval_with(&z))
            .collect::<Result<_>>()?;
        let ht = |g: usize, a: usize, mu: usize| tt[g].derivative(&[d.t(a), d.t(mu)]);
        let hx = |g: usize, a: usize, mu: usize| xt[g].derivative(&[d.x(a), d.x(mu)]);
        let (jt, jx, jxi) = (&jac.jt, &jac.jx, &jac.jx_inv);
        let kp = DMatrix::from_fn(q, q, |r, c| {
            let ((j, b), (i, a)) = (d.unpair(r), d.unpair(c));
            jt[(b, a)] * jxi[(i, j)]
        });
        let kpinv = kp.clone().try_inverse().expect("invertible momentum block");
        // ∂/∂x^μ (∂x^i/∂x̃^j) = −(J⁻¹ ∂_μJ J⁻¹)^i_j
        let djxi = |i: usize, j: usize, mu: usize| -> f64 {
            let mut s = 0.0;
            for r in 0..n {
                for c in 0..n {
                    s -= jxi[(i, r)] * hx(r, c, mu) * jxi[(c, j)];
                }
            }
            s
        };
        let mut ek: [[Vec<f64>; 3]; 3] = Default::default();
        ek[0][0] = (0..m * m * m)
            .map(|f| ht(f / (m * m), (f / m) % m, f % m))
            .collect();
        ek[1][1] = (0..n * n * n)
            .map(|f| hx(f / (n * n), (f / n) % n, f % n))
            .collect();
        ek[2][0] = (0..q * q * m)
            .map(|f| {
                let (g, nu, mu) = (f / (q * m), (f / m) % q, f % m);
                let ((j, b), (i, a)) = (d.unpair(g), d.unpair(nu));
                ht(b, a, mu) * jxi[(i, j)]
            })
            .collect();
        ek[2][1] = (0..q * q * n)
            .map(|f| {
                let (g, nu, mu) = (f / (q * n), (f / n) % q, f % n);
                let ((j, b), (i, a)) = (d.unpair(g), d.unpair(nu));
                jt[(b, a)] * djxi(i, j, mu)
            })
            .collect();
        Ok(FrameChange {
            k: [jt.clone(), jx.clone(), kp],
            kinv: [jac.jt_inv.clone(), jac.jx_inv.clone(), kpinv],
            ek,
        })
    }

    /// New-from-old rule for one family:
    /// `F̃[γ][β][α] = (K⁻¹)^μ_α (K⁻¹)^ν_β (F[ρ][ν][μ] K^γ_ρ − s e_μ(K^γ_ν))`,
    /// `s = −1` for vertical targets.
    fn apply(&self, c: Coeff, fam: &[f64]) -> Vec<f64> {
        let (tb, db) = (block_idx(c.target()), block_idx(c.dir()));
        let (k, ki, di) = (&self.k[tb], &self.kinv[tb], &self.kinv[db]);
        let (nt, nd) = (k.nrows(), di.nrows());
        let sign = if c.target() == Block::P { -1.0 } else { 1.0 };
        let ek = &self.ek[tb][db];
        // inner[γ][ν][μ]
        let mut inner = vec![0.0; nt * nt * nd];
        for g in 0..nt {
            for nu in 0..nt {
                for mu in 0..nd {
                    let mut s: f64 = (0..nt)
                        .map(|r| fam[(r * nt + nu) * nd + mu] * k[(g, r)])
                        .sum();
                    if !ek.is_empty() {
                        s -= sign * ek[(g * nt + nu) * nd + mu];
                    }
                    inner[(g * nt + nu) * nd + mu] = s;
                }
            }
        }
        let mut out = vec![0.0; nt * nt * nd];
        for g in 0..nt {
            for b in 0..nt {
                for a in 0..nd {
                    let mut s = 0.0;
                    for nu in 0..nt {
                        let w = ki[(nu, b)];
                        if w == 0.0 {
                            continue;
                        }
                        for mu in 0..nd {
                            s += di[(mu, a)] * w * inner[(g * nt + nu) * nd + mu];
                        }
                    }
                    out[(g * nt + b) * nd + a] = s;
                }
            }
        }
        out
    }
}

/// The nine coefficient transformation rules, new from old, against the
/// coefficients evaluated natively in the tilde chart. One residual per family.
pub fn check_connection_coeff_rules(
    conn: &NLinearConnection,
    chg: &CoordinateChange,
    pts: &[Point],
) -> Result<CovarianceReport> {
    let native = conn.in_chart(chg);
    let per_point: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|pt| -> Result<Vec<f64>> {
            let fc = FrameChange::new(chg, pt)?;
            let old = conn.at(pt)?;
            let new = native.at(&chg.push_point(pt)?)?;
            let old_v: Nine<f64> = old.coeffs.map(Jet::value);
            Ok(Coeff::ALL
                .iter()
                .map(|&c| {
                    let rule = fc.apply(c, old_v.get(c).data());
                    rule.iter()
                        .zip(new.coeffs.get(c).data())
                        .map(|(r, n)| (r - n.value()).abs())
                        .fold(0.0, f64::max)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut acc = Vec::new();
    for p in per_point {
        merge_max(&mut acc, p);
    }
    Ok(CovarianceReport::new("DΓ(N)", chg.id(), acc, TOL_RULE))
}

/// Largest discrepancies between AD and central finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdFdReport {
    /// `max |AD − FD| / (1 + |AD|)` over first derivatives.
    pub first: f64,
    /// The same over second derivatives.
    pub second: f64,
    /// Largest `|∂_u∂_v f − ∂_v∂_u f|` from [`ScalarField::partial`].
    pub asymmetry: f64,
    /// Field-point pairs visited.
    pub checked: usize,
}

/// Step of the first-derivative stencil.
pub const FD_STEP: f64 = 1e-5;
/// Step of the second-derivative stencil; larger than [`FD_STEP`] because
/// the roundoff of a second difference grows like `ε/h²`.
pub const FD_STEP_SECOND: f64 = 1e-4;
pub const FD_TOL: f64 = 1e-5;

impl AdFdReport {
    pub fn pass(&self) -> bool {
        self.first <= FD_TOL && self.second <= FD_TOL && self.asymmetry <= 1e-12
    }
}

/// AD against central differences: first derivatives
/// `(f(z+h) − f(z−h))/2h` with [`FD_STEP`], second derivatives by applying
/// that stencil twice with [`FD_STEP_SECOND`].
pub fn ad_fd_crosscheck(fields: &[ScalarField], pts: &[Point]) -> Result<AdFdReport> {
    let rows: Vec<AdFdReport> = fields
        .par_iter()
        .map(|f| -> Result<AdFdReport> {
            let mut rep = AdFdReport {
                first: 0.0,
                second: 0.0,
                asymmetry: 0.0,
                checked: 0,
            };
            for pt in pts {
                let dd = pt.coords().len();
                let jet = f.jet(pt, 2)?;
                let eval = |shift: &[(usize, f64)]| -> Result<f64> {
                    let mut z = pt.coords().to_vec();
                    for &(k, s) in shift {
                        z[k] += s;
                    }
                    f.eval(&Point::from_flat(pt.dims(), z)?)
                };
                let (h, k) = (FD_STEP, FD_STEP_SECOND);
                for u in 0..dd {
                    let fd = (eval(&[(u, h)])? - eval(&[(u, -h)])?) / (2.0 * h);
                    let ad = jet.d1(u);
                    rep.first = worst(rep.first, (ad - fd).abs() / (1.0 + ad.abs()));
                    for v in u..dd {
                        let fd = (eval(&[(u, k), (v, k)])?
                            - eval(&[(u, k), (v, -k)])?
                            - eval(&[(u, -k), (v, k)])?
                            + eval(&[(u, -k), (v, -k)])?)
                            / (4.0 * k * k);
                        let ad = jet.derivative(&[u, v]);
                        rep.second = worst(rep.second, (ad - fd).abs() / (1.0 + ad.abs()));
                        if u != v {
                            let cu = crate::expr::Coord::from_flat(pt.dims(), u);
                            let cv = crate::expr::Coord::from_flat(pt.dims(), v);
                            let a = f.partial(&[cu, cv], pt)?;
                            let b = f.partial(&[cv, cu], pt)?;
                            rep.asymmetry = worst(rep.asymmetry, (a - b).abs() / (1.0 + a.abs()));
                        }
                    }
                }
                rep.checked += 1;
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(
        AdFdReport {
            first: 0.0,
            second: 0.0,
            asymmetry: 0.0,
            checked: 0,
        },
        |a, b| AdFdReport {
            first: worst(a.first, b.first),
            second: worst(a.second, b.second),
            asymmetry: worst(a.asymmetry, b.asymmetry),
            checked: a.checked + b.checked,
        },
    ))
}

#[cfg(test)]
mod tests;

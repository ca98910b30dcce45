//! Batched checks over the objects of one scenario.

use rayon::prelude::*;

use super::{
    check_connection_coeff_rules, check_dtensors_covariance, check_nlc_covariance, worst,
    CovarianceReport, TOL_DTENSOR, TOL_RULE,
};
use crate::bundle::{
    fundamental_metric, h_normalization_tensor, liouville_hamilton, polymomentum_hamilton_tensor,
    CoordinateChange, DTensor, Point,
};
use crate::connections::{
    bracket_coefficients, deflections, deflections_closed_form, Coeff, NLinearConnection,
    Perturbation, Target,
};
use crate::error::Result;
use crate::expr::ScalarField;
use crate::metrics::{SpatialMetric, TemporalMetric};
use crate::tensors::{
    all_slots, bracket_oracle, curvature_oracle, curvature_table, torsion_oracle, torsion_table,
    FrameFields,
};

/// The objects of a scenario that covariance checks range over.
#[derive(Debug, Clone)]
pub struct Objects {
    pub conn: NLinearConnection,
    pub metrics: Option<(TemporalMetric, SpatialMetric)>,
    pub hamiltonian: Option<ScalarField>,
}

/// A check together with the same check run on a deliberately corrupted
/// input; a meaningful check passes and its guard fails.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub report: CovarianceReport,
    pub guard: CovarianceReport,
}

impl CheckOutcome {
    pub fn ok(&self) -> bool {
        self.report.pass && !self.guard.pass
    }
}

const MUTATION: f64 = 0.1;

fn in_chart(conn: &NLinearConnection, chart: Option<&CoordinateChange>) -> NLinearConnection {
    chart.map_or_else(|| conn.clone(), |c| conn.in_chart(c))
}

/// Every d-tensor of the scenario at one point, with tolerances and ids.
fn dtensors(obj: &Objects, chart: Option<&CoordinateChange>, pt: &Point) -> Result<Vec<DTensor>> {
    let at = in_chart(&obj.conn, chart).at(pt)?;
    let mut out = Vec::new();
    let tt = torsion_table(&at);
    out.extend(tt.entries.into_iter().map(|e| e.tensor));
    let ct = curvature_table(&at)?;
    out.extend(ct.entries.into_iter().map(|e| e.tensor));
    let df = deflections_closed_form(&at, pt);
    out.extend([df.temporal, df.spatial, df.vertical]);
    let br = bracket_coefficients(&at.nlc);
    out.extend([br.r_tt, br.r_ts, br.r_ss]);
    out.push(liouville_hamilton(pt));
    if let Some(h) = &obj.hamiltonian {
        out.push(fundamental_metric(h, chart, pt)?);
    }
    if let Some((h, phi)) = &obj.metrics {
        out.push(polymomentum_hamilton_tensor(phi, chart, pt)?);
        out.push(h_normalization_tensor(h, chart, pt)?);
    }
    Ok(out)
}

fn dtensor_ids(obj: &Objects) -> Vec<(String, f64)> {
    let mut ids: Vec<(String, f64)> = Vec::new();
    for s in all_slots() {
        ids.push((format!("torsion {}", s.torsion_label()), TOL_DTENSOR));
    }
    for s in all_slots() {
        ids.push((format!("curvature {}", s.curvature_label()), TOL_DTENSOR));
    }
    for l in [
        "deflection Delta_(i)b^(a)",
        "deflection Delta_(i)j^(a)",
        "deflection theta_(i)(b)^(a)(j)",
    ] {
        ids.push((l.to_string(), TOL_DTENSOR));
    }
    for l in [
        "bracket R_(i)bc^(a)",
        "bracket R_(i)bk^(a)",
        "bracket R_(i)jk^(a)",
    ] {
        ids.push((l.to_string(), TOL_DTENSOR));
    }
    ids.push(("C*".into(), TOL_RULE));
    if obj.hamiltonian.is_some() {
        ids.push(("G".into(), TOL_RULE));
    }
    if obj.metrics.is_some() {
        ids.push(("H".into(), TOL_RULE));
        ids.push(("J".into(), TOL_RULE));
    }
    ids
}

/// All covariance checks of a scenario under each change, each with its
/// mutation guard. The order of the result is deterministic.
pub fn covariance_suite(
    obj: &Objects,
    changes: &[CoordinateChange],
    pts: &[Point],
) -> Result<Vec<CheckOutcome>> {
    let ids = dtensor_ids(obj);
    let names: Vec<String> = ids.iter().map(|(n, _)| n.clone()).collect();
    let per_change: Vec<Vec<CheckOutcome>> = changes
        .par_iter()
        .map(|chg| -> Result<Vec<CheckOutcome>> {
            let mut out = Vec::new();
            let nlc = obj.conn.nonlinear();
            let bad_n = nlc.perturbed(Perturbation {
                target: Target::N1,
                index: 0,
                delta: MUTATION,
            });
            out.push(CheckOutcome {
                report: check_nlc_covariance(&nlc, chg, pts)?,
                guard: check_nlc_covariance(&bad_n, chg, pts)?,
            });
            let bad_c = obj.conn.perturbed(Perturbation {
                target: Target::Coeff(Coeff::Att),
                index: 0,
                delta: MUTATION,
            });
            out.push(CheckOutcome {
                report: check_connection_coeff_rules(&obj.conn, chg, pts)?,
                guard: check_connection_coeff_rules(&bad_c, chg, pts)?,
            });
            let good =
                check_dtensors_covariance(&names, |c, p| dtensors(obj, c, p), chg, pts, 1.0)?;
            let bad = check_dtensors_covariance(
                &names,
                |c, p| {
                    let mut v = dtensors(obj, c, p)?;
                    if c.is_none() {
                        for t in &mut v {
                            let idx = vec![0; t.kinds().len()];
                            let x = t.get(&idx);
                            t.set(&idx, x + MUTATION);
                        }
                    }
                    Ok(v)
                },
                chg,
                pts,
                1.0,
            )?;
            for ((g, b), (_, tol)) in good.into_iter().zip(bad).zip(&ids) {
                out.push(CheckOutcome {
                    report: with_tolerance(g, *tol),
                    guard: with_tolerance(b, *tol),
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_change.into_iter().flatten().collect())
}

fn with_tolerance(mut r: CovarianceReport, tol: f64) -> CovarianceReport {
    r.tolerance = tol;
    r.pass = r.max_abs_residual < tol;
    r
}

/// Largest differences between closed-form tables and their definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub torsion: f64,
    pub curvature: f64,
    pub brackets: f64,
    /// Closed-form deflections against covariant derivatives of `C*`.
    pub deflections: f64,
}

pub const TOL_ORACLE: f64 = 1e-6;

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.torsion <= TOL_ORACLE
            && self.curvature <= TOL_ORACLE
            && self.brackets <= TOL_ORACLE
            && self.deflections <= 1e-10
    }
}

pub fn oracle_suite(conn: &NLinearConnection, pts: &[Point]) -> Result<OracleReport> {
    let rows: Vec<OracleReport> = pts
        .par_iter()
        .map(|pt| -> Result<OracleReport> {
            let at = conn.at(pt)?;
            let frame = FrameFields::new(&at.nlc);
            let tt = torsion_table(&at);
            let ct = curvature_table(&at)?;
            let mut r = OracleReport {
                torsion: 0.0,
                curvature: 0.0,
                brackets: 0.0,
                deflections: 0.0,
            };
            for s in all_slots() {
                r.torsion = worst(
                    r.torsion,
                    tt.get(s).max_abs_diff(&torsion_oracle(&at, &frame, s))?,
                );
                r.curvature = worst(
                    r.curvature,
                    ct.get(s).max_abs_diff(&curvature_oracle(&at, &frame, s))?,
                );
            }
            let (a, b) = (bracket_coefficients(&at.nlc), bracket_oracle(&frame));
            for (x, y) in [
                (&a.r_tt, &b.r_tt),
                (&a.r_ts, &b.r_ts),
                (&a.r_ss, &b.r_ss),
                (&a.b_t, &b.b_t),
                (&a.b_s, &b.b_s),
            ] {
                r.brackets = worst(r.brackets, x.max_abs_diff(y)?);
            }
            let (a, b) = (deflections(&at, pt)?, deflections_closed_form(&at, pt));
            for (x, y) in [
                (&a.temporal, &b.temporal),
                (&a.spatial, &b.spatial),
                (&a.vertical, &b.vertical),
            ] {
                r.deflections = worst(r.deflections, x.max_abs_diff(y)?);
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(
        OracleReport {
            torsion: 0.0,
            curvature: 0.0,
            brackets: 0.0,
            deflections: 0.0,
        },
        |a, b| OracleReport {
            torsion: worst(a.torsion, b.torsion),
            curvature: worst(a.curvature, b.curvature),
            brackets: worst(a.brackets, b.brackets),
            deflections: worst(a.deflections, b.deflections),
        },
    ))
}

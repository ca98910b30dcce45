//! Output documents (schema `jetham/1`).

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use jetham::bundle::fundamental_metric;
use jetham::connections::{
    adapted_frame, almost_product, bracket_coefficients, deflections_closed_form, projectors,
};
use jetham::tensors::{curvature_table, torsion_table, Table};
use jetham::{DTensor, Dims, IndexKind, Point};

use crate::scenario::{Scenario, Setup};

pub const SCHEMA: &str = "jetham/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Frames,
    Brackets,
    Torsion,
    Curvature,
    Deflection,
    FundamentalMetric,
    AlmostProduct,
}

impl What {
    fn name(&self) -> &'static str {
        match self {
            What::Frames => "frames",
            What::Brackets => "brackets",
            What::Torsion => "torsion",
            What::Curvature => "curvature",
            What::Deflection => "deflection",
            What::FundamentalMetric => "fundamental-metric",
            What::AlmostProduct => "almost-product",
        }
    }
}

#[derive(Serialize)]
pub struct Document<'a, B> {
    pub schema: &'static str,
    pub command: &'static str,
    pub what: &'static str,
    pub scenario: &'a Scenario,
    pub results: Vec<B>,
}

#[derive(Serialize)]
pub struct PointOut {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

impl From<&Point> for PointOut {
    fn from(p: &Point) -> Self {
        PointOut {
            t: p.t().to_vec(),
            x: p.x().to_vec(),
            p: p.p_rows(),
        }
    }
}

#[derive(Serialize)]
pub struct Entry {
    /// 1-based; a paired slot contributes `(i, a)`.
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Serialize)]
pub struct Family {
    pub family: String,
    pub kinds: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_zero: Option<bool>,
    pub entries: Vec<Entry>,
}

fn family(label: &str, t: &DTensor, structural_zero: Option<bool>) -> Family {
    let d = t.dims();
    let shape = t.shape().to_vec();
    let mut entries = Vec::with_capacity(t.data().len());
    let mut idx = vec![0usize; shape.len()];
    for &value in t.data() {
        let mut index = Vec::with_capacity(idx.len() + 2);
        for (k, &ix) in idx.iter().enumerate() {
            match t.kinds()[k] {
                IndexKind::PVec | IndexKind::PForm => {
                    let (i, a) = d.unpair(ix);
                    index.extend([i + 1, a + 1]);
                }
                _ => index.push(ix + 1),
            }
        }
        entries.push(Entry { index, value });
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Family {
        family: label.to_string(),
        kinds: t.kinds().iter().map(IndexKind::name).collect(),
        structural_zero,
        entries,
    }
}

fn table(t: &Table, torsion: bool) -> Vec<Family> {
    t.entries
        .iter()
        .map(|e| family(e.label, &e.tensor, torsion.then_some(e.structural_zero)))
        .collect()
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().cloned().collect())
        .collect()
}

fn frame_labels(d: Dims, vectors: bool) -> Vec<String> {
    let mut out = Vec::new();
    for a in 1..=d.m {
        out.push(if vectors {
            format!("delta/delta t^{a}")
        } else {
            format!("dt^{a}")
        });
    }
    for i in 1..=d.n {
        out.push(if vectors {
            format!("delta/delta x^{i}")
        } else {
            format!("dx^{i}")
        });
    }
    for i in 1..=d.n {
        for a in 1..=d.m {
            out.push(if vectors {
                format!("d/dp_{i}^{a}")
            } else {
                format!("delta p_{i}^{a}")
            });
        }
    }
    out
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Body {
    Families {
        point: PointOut,
        families: Vec<Family>,
    },
    Frames(Box<FramesOut>),
    AlmostProduct(Box<AlmostProductOut>),
}

#[derive(Serialize)]
pub struct FramesOut {
    point: PointOut,
    /// Rows: natural components of each adapted vector.
    frame_labels: Vec<String>,
    frame: Vec<Vec<f64>>,
    coframe_labels: Vec<String>,
    coframe: Vec<Vec<f64>>,
    duality_residual: f64,
    projector_residual: f64,
}

#[derive(Serialize)]
pub struct AlmostProductOut {
    point: PointOut,
    adapted: Vec<Vec<f64>>,
    natural: Vec<Vec<f64>>,
    trace: f64,
    square_residual: f64,
    multiplicity_plus: usize,
    multiplicity_minus: usize,
}

fn compute_at(setup: &Setup, what: What, pt: &Point) -> jetham::Result<Body> {
    let conn = setup.objects.conn.at(pt)?;
    let fams = |families| Body::Families {
        point: pt.into(),
        families,
    };
    Ok(match what {
        What::Torsion => fams(table(&torsion_table(&conn), true)),
        What::Curvature => fams(table(&curvature_table(&conn)?, false)),
        What::Brackets => {
            let b = bracket_coefficients(&conn.nlc);
            fams(vec![
                family("R_(i)bc^(a)", &b.r_tt, None),
                family("R_(i)bk^(a)", &b.r_ts, None),
                family("R_(i)jk^(a)", &b.r_ss, None),
                family("B_(i)b(c)^(a)(k)", &b.b_t, None),
                family("B_(i)j(c)^(a)(k)", &b.b_s, None),
            ])
        }
        What::Deflection => {
            let df = deflections_closed_form(&conn, pt);
            fams(vec![
                family("Delta_(i)b^(a)", &df.temporal, None),
                family("Delta_(i)j^(a)", &df.spatial, None),
                family("theta_(i)(b)^(a)(j)", &df.vertical, None),
            ])
        }
        What::FundamentalMetric => {
            let h = setup.objects.hamiltonian.as_ref().expect("checked before");
            fams(vec![family(
                "G_(a)(b)^(i)(j)",
                &fundamental_metric(h, None, pt)?,
                None,
            )])
        }
        What::Frames => {
            let fr = adapted_frame(&conn.nlc);
            let id = DMatrix::<f64>::identity(fr.frame.nrows(), fr.frame.nrows());
            let pr = projectors(&conn.nlc);
            Body::Frames(Box::new(FramesOut {
                point: pt.into(),
                frame_labels: frame_labels(setup.dims, true),
                frame: rows(&fr.frame),
                coframe_labels: frame_labels(setup.dims, false),
                coframe: rows(&fr.coframe),
                duality_residual: (fr.pairing() - id).amax(),
                projector_residual: pr.natural_residual(),
            }))
        }
        What::AlmostProduct => {
            let ap = almost_product(&conn.nlc);
            let (plus, minus) = ap.multiplicities();
            Body::AlmostProduct(Box::new(AlmostProductOut {
                point: pt.into(),
                adapted: rows(&ap.adapted),
                natural: rows(&ap.natural),
                trace: ap.trace(),
                square_residual: ap.square_residual(),
                multiplicity_plus: plus,
                multiplicity_minus: minus,
            }))
        }
    })
}

/// The `compute` document; points are evaluated in parallel and kept in
/// scenario order.
pub fn compute<'a>(
    scenario: &'a Scenario,
    setup: &Setup,
    what: What,
) -> Result<Document<'a, Body>> {
    if what == What::FundamentalMetric && setup.objects.hamiltonian.is_none() {
        bail!("what=fundamental-metric needs a hamiltonian in the scenario");
    }
    let results = setup
        .points
        .par_iter()
        .map(|pt| compute_at(setup, what, pt))
        .collect::<jetham::Result<Vec<_>>>()?;
    Ok(Document {
        schema: SCHEMA,
        command: "compute",
        what: what.name(),
        scenario,
        results,
    })
}

//! Scenario files: JSON with expression strings.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use jetham::connections::{Coeff, NLinearConnection, Nine, Perturbation, Target};
use jetham::metrics::{SpatialMetric, TemporalMetric};
use jetham::verify::{probe_points, Objects, ProbeBox};
use jetham::{Dims, Grid, Point, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimsSpec {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionMode {
    CanonicalBerwald,
    Custom,
}

/// A coordinate given as a number or a constant expression such as `"pi/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub t: Vec<Value>,
    pub x: Vec<Value>,
    /// `p[i][a]`, spatial index first.
    pub p: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
    pub count: usize,
}

/// Corrupts one component of `n1`, `n2` or a coefficient family in the
/// scenario chart only. `index` is 1-based into the flat row-major family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub target: String,
    pub index: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub dims: DimsSpec,
    pub temporal_metric: Vec<Vec<String>>,
    pub spatial_metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    /// Flat row-major families keyed `n1`, `n2`, `A_tt`, …, `C_pp`; missing
    /// families are zero.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub custom: BTreeMap<String, Vec<String>>,
    pub connection_mode: ConnectionMode,
    pub eval_points: Vec<PointSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Extra random points for the verification suites.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), e))
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub dims: Dims,
    pub objects: Objects,
    pub points: Vec<Point>,
    /// Evaluation points followed by the random probes.
    pub probes: Vec<Point>,
}

fn field(text: &str, d: Dims, what: impl Fn() -> String) -> Result<ScalarField> {
    ScalarField::parse(text, d).with_context(what)
}

fn metric(rows: &[Vec<String>], len: usize, d: Dims, name: &str) -> Result<Vec<ScalarField>> {
    if rows.len() != len || rows.iter().any(|r| r.len() != len) {
        bail!("{name} must be {len}x{len}");
    }
    let mut out = Vec::with_capacity(len * len);
    for (r, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            out.push(field(s, d, || format!("{name}[{}][{}]", r + 1, c + 1))?);
        }
    }
    for r in 0..len {
        for c in r + 1..len {
            if out[r * len + c].to_string() != out[c * len + r].to_string() {
                bail!("{name} is not symmetric at ({}, {})", r + 1, c + 1);
            }
        }
    }
    Ok(out)
}

fn value(v: &Value, d: Dims, what: impl Fn() -> String) -> Result<f64> {
    match v {
        Value::Number(x) => Ok(*x),
        Value::Expr(s) => {
            let f = field(s, d, &what)?;
            if !f.coords().is_empty() {
                bail!("{}: `{s}` is not a constant", what());
            }
            Ok(f.eval(&Point::from_flat(d, vec![0.0; d.total()])?)?)
        }
    }
}

fn point(spec: &PointSpec, d: Dims, k: usize) -> Result<Point> {
    let at = |name: &str, v: &[Value]| -> Result<Vec<f64>> {
        v.iter()
            .enumerate()
            .map(|(j, x)| value(x, d, || format!("eval_points[{k}].{name}[{}]", j + 1)))
            .collect()
    };
    let p = spec
        .p
        .iter()
        .map(|row| at("p", row))
        .collect::<Result<Vec<_>>>()?;
    Point::new(d, &at("t", &spec.t)?, &at("x", &spec.x)?, &p)
        .with_context(|| format!("eval_points[{k}]"))
}

fn family(
    custom: &BTreeMap<String, Vec<String>>,
    key: &str,
    shape: &[usize],
    d: Dims,
) -> Result<Grid<ScalarField>> {
    let len: usize = shape.iter().product();
    let data = match custom.get(key) {
        None => vec![ScalarField::constant(0.0, d); len],
        Some(v) => {
            if v.len() != len {
                bail!(
                    "custom.{key} needs {len} entries (shape {shape:?}), found {}",
                    v.len()
                );
            }
            v.iter()
                .enumerate()
                .map(|(j, s)| field(s, d, || format!("custom.{key}[{}]", j + 1)))
                .collect::<Result<_>>()?
        }
    };
    Ok(Grid::from_vec(shape, data))
}

fn perturbation(spec: &PerturbationSpec) -> Result<Perturbation> {
    let target = match spec.target.as_str() {
        "n1" => Target::N1,
        "n2" => Target::N2,
        k => Target::Coeff(
            Coeff::from_key(k).ok_or_else(|| anyhow!("unknown perturbation target `{k}`"))?,
        ),
    };
    if spec.index == 0 {
        bail!("perturbation.index is 1-based");
    }
    Ok(Perturbation {
        target,
        index: spec.index - 1,
        delta: spec.delta,
    })
}

impl Scenario {
    pub fn setup(&self) -> Result<Setup> {
        let d = Dims::new(self.dims.m, self.dims.n)?;
        let h = TemporalMetric::new(d, metric(&self.temporal_metric, d.m, d, "temporal_metric")?)?;
        let phi = SpatialMetric::new(d, metric(&self.spatial_metric, d.n, d, "spatial_metric")?)?;
        let hamiltonian = self
            .hamiltonian
            .as_deref()
            .map(|s| field(s, d, || "hamiltonian".into()))
            .transpose()?;
        let mut conn = match self.connection_mode {
            ConnectionMode::CanonicalBerwald => {
                if !self.custom.is_empty() {
                    bail!("custom families given but connection_mode is canonical-berwald");
                }
                NLinearConnection::berwald_from_metrics(h.clone(), phi.clone())
            }
            ConnectionMode::Custom => {
                let known = ["n1", "n2"]
                    .into_iter()
                    .chain(Coeff::ALL.iter().map(Coeff::key));
                let known: Vec<&str> = known.collect();
                if let Some(k) = self.custom.keys().find(|k| !known.contains(&k.as_str())) {
                    bail!(
                        "unknown custom family `{k}` (expected one of {})",
                        known.join(", ")
                    );
                }
                let q = d.m * d.n;
                let nine = Nine::try_from_fn(|c| family(&self.custom, c.key(), &c.shape(d), d))?;
                NLinearConnection::custom(
                    d,
                    family(&self.custom, "n1", &[q, d.m], d)?,
                    family(&self.custom, "n2", &[q, d.n], d)?,
                    nine,
                )?
            }
        };
        if let Some(p) = &self.perturbation {
            conn = conn.perturbed(perturbation(p)?);
        }
        if self.eval_points.is_empty() {
            bail!("at least one eval point is required");
        }
        let points = self
            .eval_points
            .iter()
            .enumerate()
            .map(|(k, p)| point(p, d, k))
            .collect::<Result<Vec<_>>>()?;
        let mut probes = points.clone();
        if let Some(pb) = &self.probe {
            if pb.center.len() != d.total() || pb.radius.len() != d.total() {
                bail!("probe.center and probe.radius need {} entries", d.total());
            }
            let bx = ProbeBox {
                center: pb.center.clone(),
                radius: pb.radius.clone(),
            };
            probes.extend(probe_points(d, &bx, self.seed, pb.count));
        }
        Ok(Setup {
            dims: d,
            objects: Objects {
                conn,
                metrics: Some((h, phi)),
                hamiltonian,
            },
            points,
            probes,
        })
    }
}

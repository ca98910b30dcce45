//! The `verify` command: runs the suites and collects one line per check.

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use jetham::connections::{
    adapted_frame, almost_product, deflections_closed_form, integrability_check, projectors,
    INTEGRABILITY_TOL,
};
use jetham::metrics::Metric;
use jetham::verify::{
    ad_fd_crosscheck, covariance_suite, oracle_suite, standard_changes, FD_TOL, TOL_ORACLE,
};
use jetham::{Block, ScalarField};

use crate::report::SCHEMA;
use crate::scenario::{ConnectionMode, Scenario, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Covariance,
    Oracle,
    Integrability,
    All,
}

impl Suite {
    fn name(&self) -> &'static str {
        match self {
            Suite::Covariance => "covariance",
            Suite::Oracle => "oracle",
            Suite::Integrability => "integrability",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change: Option<String>,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Residual of the same check on deliberately corrupted data; it must
    /// exceed the tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_residual: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn plain(
        suite: &'static str,
        name: impl Into<String>,
        max_residual: f64,
        tolerance: f64,
    ) -> Check {
        Check {
            suite,
            name: name.into(),
            change: None,
            max_residual,
            tolerance,
            guard_residual: None,
            pass: max_residual <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name
        );
        if let Some(c) = &self.change {
            s += &format!(" [{c}]");
        }
        s += &format!(
            ": max residual {:e} (tol {:e})",
            self.max_residual, self.tolerance
        );
        if let Some(g) = self.guard_residual {
            s += &format!(", guard {g:e}");
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub name: &'static str,
    pub integrable: bool,
    pub max_violation: f64,
    pub max_by_family: [f64; 3],
    pub tolerance: f64,
}

impl Finding {
    pub fn line(&self) -> String {
        format!(
            "INFO integrability: {} (max violation {:e}; R_(i)bc^(a) {:e}, R_(i)bk^(a) {:e}, R_(i)jk^(a) {:e})",
            if self.integrable { "integrable" } else { "not integrable" },
            self.max_violation,
            self.max_by_family[0],
            self.max_by_family[1],
            self.max_by_family[2]
        )
    }
}

#[derive(Serialize)]
pub struct VerifyDocument<'a> {
    pub schema: &'static str,
    pub command: &'static str,
    pub suite: &'static str,
    pub scenario: &'a Scenario,
    pub checks: Vec<Check>,
    pub findings: Vec<Finding>,
    pub pass: bool,
}

/// Agreement of the structure identities, worst over the probes.
const TOL_STRUCTURE: f64 = 1e-12;
const TOL_DEFLECTION: f64 = 1e-10;

fn covariance(setup: &Setup) -> Result<Vec<Check>> {
    let d = setup.dims;
    if d.m > 3 || d.n > 3 {
        bail!("the covariance suite supports m, n <= 3");
    }
    let out = covariance_suite(&setup.objects, &standard_changes(d), &setup.probes)?;
    Ok(out
        .into_iter()
        .map(|o| Check {
            suite: "covariance",
            pass: o.ok(),
            name: o.report.object_id,
            change: Some(o.report.change_id),
            max_residual: o.report.max_abs_residual,
            tolerance: o.report.tolerance,
            guard_residual: Some(o.guard.max_abs_residual),
        })
        .collect())
}

fn scenario_fields(setup: &Setup) -> Vec<ScalarField> {
    let mut out = Vec::new();
    if let Some((h, phi)) = &setup.objects.metrics {
        out.extend(h.components().iter().cloned());
        out.extend(phi.components().iter().cloned());
    }
    out.extend(setup.objects.hamiltonian.iter().cloned());
    out
}

#[derive(Default, Clone, Copy)]
struct Structure {
    duality: f64,
    square: f64,
    multiplicity: f64,
    projectors: f64,
    berwald_deflection: f64,
}

fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn oracle(setup: &Setup, mode: ConnectionMode) -> Result<Vec<Check>> {
    let d = setup.dims;
    let rep = oracle_suite(&setup.objects.conn, &setup.probes)?;
    let mut out = vec![
        Check::plain(
            "oracle",
            "torsion table vs definition",
            rep.torsion,
            TOL_ORACLE,
        ),
        Check::plain(
            "oracle",
            "curvature table vs definition",
            rep.curvature,
            TOL_ORACLE,
        ),
        Check::plain(
            "oracle",
            "bracket coefficients vs frame brackets",
            rep.brackets,
            TOL_ORACLE,
        ),
        Check::plain(
            "oracle",
            "deflections vs covariant derivatives of C*",
            rep.deflections,
            TOL_DEFLECTION,
        ),
    ];
    let per_point = setup
        .probes
        .par_iter()
        .map(|pt| -> jetham::Result<Structure> {
            let conn = setup.objects.conn.at(pt)?;
            let fr = adapted_frame(&conn.nlc);
            let dd = d.total();
            let id = DMatrix::<f64>::identity(dd, dd);
            let ap = almost_product(&conn.nlc);
            let (plus, minus) = ap.multiplicities();
            let pr = projectors(&conn.nlc);
            let mut s = Structure {
                duality: (fr.pairing() - &id).amax(),
                square: ap.square_residual(),
                multiplicity: (plus.abs_diff(d.m + d.n) + minus.abs_diff(d.len(Block::P))) as f64,
                projectors: pr.adapted_residual().max(pr.natural_residual()),
                berwald_deflection: 0.0,
            };
            if mode == ConnectionMode::CanonicalBerwald {
                let df = deflections_closed_form(&conn, pt);
                let kron = jetham::DTensor::from_fn(d, df.vertical.kinds(), |k| {
                    if k[0] == k[1] {
                        1.0
                    } else {
                        0.0
                    }
                });
                s.berwald_deflection = df
                    .temporal
                    .max_abs()
                    .max(df.spatial.max_abs())
                    .max(df.vertical.max_abs_diff(&kron)?);
            }
            Ok(s)
        })
        .collect::<jetham::Result<Vec<_>>>()?;
    let s = per_point
        .into_iter()
        .fold(Structure::default(), |a, b| Structure {
            duality: worst(a.duality, b.duality),
            square: worst(a.square, b.square),
            multiplicity: worst(a.multiplicity, b.multiplicity),
            projectors: worst(a.projectors, b.projectors),
            berwald_deflection: worst(a.berwald_deflection, b.berwald_deflection),
        });
    out.push(Check::plain(
        "structure",
        "frame/coframe duality",
        s.duality,
        TOL_STRUCTURE,
    ));
    out.push(Check::plain(
        "structure",
        "P^2 = I",
        s.square,
        TOL_STRUCTURE,
    ));
    out.push(Check::plain(
        "structure",
        "eigenvalue multiplicities of P",
        s.multiplicity,
        0.0,
    ));
    out.push(Check::plain(
        "structure",
        "projector identities",
        s.projectors,
        TOL_STRUCTURE,
    ));
    if mode == ConnectionMode::CanonicalBerwald {
        out.push(Check::plain(
            "oracle",
            "Berwald deflections (Delta = 0, theta = delta)",
            s.berwald_deflection,
            TOL_DEFLECTION,
        ));
    }
    let ad = ad_fd_crosscheck(&scenario_fields(setup), &setup.probes)?;
    out.push(Check::plain(
        "differentiation",
        "AD vs FD, first derivatives",
        ad.first,
        FD_TOL,
    ));
    out.push(Check::plain(
        "differentiation",
        "AD vs FD, second derivatives",
        ad.second,
        FD_TOL,
    ));
    out.push(Check::plain(
        "differentiation",
        "mixed partial symmetry",
        ad.asymmetry,
        1e-12,
    ));
    Ok(out)
}

fn integrability(setup: &Setup) -> Result<Finding> {
    let rep = integrability_check(&setup.objects.conn.nonlinear(), &setup.probes)?;
    Ok(Finding {
        name: "integrability",
        integrable: rep.integrable,
        max_violation: rep.max_violation,
        max_by_family: rep.max_by_family,
        tolerance: INTEGRABILITY_TOL,
    })
}

pub fn run<'a>(scenario: &'a Scenario, setup: &Setup, suite: Suite) -> Result<VerifyDocument<'a>> {
    let mut checks = Vec::new();
    let mut findings = Vec::new();
    if matches!(suite, Suite::Covariance | Suite::All) {
        checks.extend(covariance(setup)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle(setup, scenario.connection_mode)?);
    }
    if matches!(suite, Suite::Integrability | Suite::All) {
        findings.push(integrability(setup)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyDocument {
        schema: SCHEMA,
        command: "verify",
        suite: suite.name(),
        scenario,
        checks,
        findings,
        pass,
    })
}

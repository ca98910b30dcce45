//! Distinguished d-tensors built from the coordinates and the metrics.

use super::chart::Local;
use super::{CoordinateChange, DTensor, IndexKind, Point};
use crate::error::Result;
use crate::expr::ScalarField;
use crate::jet::Jet;
use crate::metrics::{metric_jets, SpatialMetric, TemporalMetric};

/// `C* = p_i^a ∂/∂p_i^a`, components `p_i^a`.
pub fn liouville_hamilton(pt: &Point) -> DTensor {
    let d = pt.dims();
    DTensor::from_fn(d, &[IndexKind::PVec], |k| {
        let (i, a) = d.unpair(k[0]);
        pt.p(i, a)
    })
}

/// `G^{(i)(j)}_{(a)(b)} = ½ ∂²H/∂p_i^a∂p_j^b` of a Hamiltonian, at a point
/// of the given chart (the Hamiltonian is written in original coordinates).
pub fn fundamental_metric(
    h: &ScalarField,
    chart: Option<&CoordinateChange>,
    pt: &Point,
) -> Result<DTensor> {
    let d = pt.dims();
    let local = Local::new(chart, pt, 2)?;
    let v = h.eval_with(&local.base(2))?;
    let off = d.offset(super::Block::P);
    Ok(DTensor::from_fn(
        d,
        &[IndexKind::PForm, IndexKind::PForm],
        |k| 0.5 * v.derivative(&[off + k[0], off + k[1]]),
    ))
}

/// `H^{(a)}_{(i)jk} = φ_{ij} p_k^a` at `[(i,a)][j][k]`.
pub fn polymomentum_hamilton_tensor(
    phi: &SpatialMetric,
    chart: Option<&CoordinateChange>,
    pt: &Point,
) -> Result<DTensor> {
    let d = pt.dims();
    let local = Local::new(chart, pt, 0)?;
    let g: Vec<f64> = metric_jets(phi, &local, 0)?
        .iter()
        .map(Jet::value)
        .collect();
    Ok(DTensor::from_fn(
        d,
        &[IndexKind::PVec, IndexKind::SDown, IndexKind::SDown],
        |k| {
            let (i, a) = d.unpair(k[0]);
            g[i * d.n + k[1]] * pt.p(k[2], a)
        },
    ))
}

/// `J^{(i)}_{(a)bj} = h_{ab} δ^i_j` at `[(i,a)][b][j]`.
pub fn h_normalization_tensor(
    h: &TemporalMetric,
    chart: Option<&CoordinateChange>,
    pt: &Point,
) -> Result<DTensor> {
    let d = pt.dims();
    let local = Local::new(chart, pt, 0)?;
    let g: Vec<f64> = metric_jets(h, &local, 0)?.iter().map(Jet::value).collect();
    Ok(DTensor::from_fn(
        d,
        &[IndexKind::PForm, IndexKind::TDown, IndexKind::SDown],
        |k| {
            let (i, a) = d.unpair(k[0]);
            if i == k[2] {
                g[a * d.m + k[1]]
            } else {
                0.0
            }
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Dims;
    use approx::assert_relative_eq;

    fn setup() -> (Dims, CoordinateChange, Point) {
        let d = Dims::new(2, 2).unwrap();
        let c = CoordinateChange::parse(
            d,
            "mix",
            &["t[1] + 0.25*t[1]^2", "t[2] + 0.1*sin(t[1])"],
            &["sinh(x[1])", "x[2] + 0.2*x[1]^2"],
            &[
                "2*sqrt(1 + t[1]) - 2",
                "t[2] - 0.1*sin(2*sqrt(1 + t[1]) - 2)",
            ],
            &[
                "log(x[1] + sqrt(x[1]^2 + 1))",
                "x[2] - 0.2*log(x[1] + sqrt(x[1]^2 + 1))^2",
            ],
        )
        .unwrap();
        let pt = Point::new(
            d,
            &[0.3, -0.4],
            &[0.5, 0.1],
            &[vec![0.7, -0.2], vec![0.4, 1.1]],
        )
        .unwrap();
        (d, c, pt)
    }

    #[test]
    fn fundamental_metric_transforms() {
        let (d, c, pt) = setup();
        let h = ScalarField::parse(
            "exp(t[1])*p[1][1]^2 + p[1][2]*p[2][1]*cos(x[2]) + p[2][2]^2*(1 + x[1]^2) + p[1][1]*p[2][2]^3",
            d,
        )
        .unwrap();
        let g = fundamental_metric(&h, None, &pt).unwrap();
        let tilde = c.push_point(&pt).unwrap();
        let g_native = fundamental_metric(&h, Some(&c), &tilde).unwrap();
        let g_law = g.transform(&c.jacobians(&pt).unwrap());
        assert!(g_native.max_abs_diff(&g_law).unwrap() < 1e-10);
        assert_relative_eq!(g.get(&[0, 0]), 0.3f64.exp(), epsilon = 1e-12);
        assert_relative_eq!(g.get(&[0, 3]), 1.5 * 1.1 * 1.1, epsilon = 1e-12);
    }

    #[test]
    fn normalization_tensors_transform() {
        let (d, c, pt) = setup();
        let h = TemporalMetric::parse(d, &["2 + sin(t[1])", "0.3*t[2]", "0.3*t[2]", "1 + t[1]^2"])
            .unwrap();
        let phi = SpatialMetric::parse(d, &["1 + x[2]^2", "0.1", "0.1", "exp(x[1])"]).unwrap();
        let tilde = c.push_point(&pt).unwrap();
        let jac = c.jacobians(&pt).unwrap();
        let hh = polymomentum_hamilton_tensor(&phi, None, &pt).unwrap();
        let hh_t = polymomentum_hamilton_tensor(&phi, Some(&c), &tilde).unwrap();
        assert!(hh.transform(&jac).max_abs_diff(&hh_t).unwrap() < 1e-10);
        let j = h_normalization_tensor(&h, None, &pt).unwrap();
        let j_t = h_normalization_tensor(&h, Some(&c), &tilde).unwrap();
        assert!(j.transform(&jac).max_abs_diff(&j_t).unwrap() < 1e-10);
        let cs = liouville_hamilton(&pt).transform(&jac);
        assert!(cs.max_abs_diff(&liouville_hamilton(&tilde)).unwrap() < 1e-12);
    }
}

use super::{Coeff, ConnectionAt};
use crate::bundle::{Block, DTensor, IndexKind, Point};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::jet::Jet;

/// Covariant derivative of a d-tensor field along the adapted directions of
/// `dir` (`/c` for `T`, `|k` for `S`, `|^{(k)}_{(c)}` for `P`).
///
/// `comps` are the adapted components as jets (order ≥ 1) in the chart of
/// `conn`, row-major over `kinds`. The result has `kinds` followed by the
/// lower slot of `dir`.
pub fn covariant_derivative(
    conn: &ConnectionAt,
    kinds: &[IndexKind],
    comps: &[Jet],
    dir: Block,
) -> Result<DTensor> {
    let d = conn.dims;
    let shape = DTensor::shape_of(d, kinds);
    let total: usize = shape.iter().product();
    if comps.len() != total {
        return Err(Error::dims(
            format!("{total} components"),
            comps.len().to_string(),
        ));
    }
    let comps = Grid::from_vec(&shape, comps.to_vec());
    let vals = comps.map(Jet::value);
    let mut out_kinds = kinds.to_vec();
    out_kinds.push(IndexKind::down(dir));
    let nd = d.len(dir);
    let rank = kinds.len();
    Ok(DTensor::from_fn(d, &out_kinds, |ix| {
        let (idx, g) = (&ix[..rank], ix[rank]);
        let mut v = conn.nlc.along(dir, comps.at(idx), g);
        let mut probe = idx.to_vec();
        for (slot, kind) in kinds.iter().enumerate() {
            let blk = kind.block();
            let fam = conn.coeffs.get(Coeff::of(blk, dir));
            let sign = if blk == Block::P { -1.0 } else { 1.0 };
            let u = idx[slot];
            let up = *kind == IndexKind::up(blk);
            let mut acc = 0.0;
            for f in 0..d.len(blk) {
                probe[slot] = f;
                let c = if up {
                    fam[[u, f, g]].value()
                } else {
                    -fam[[f, u, g]].value()
                };
                acc += vals.at(&probe) * c;
            }
            probe[slot] = u;
            v += sign * acc;
        }
        debug_assert!(g < nd);
        v
    }))
}

/// The three deflection d-tensors `Δ_{(i)b}^{(a)}`, `Δ_{(i)j}^{(a)}`,
/// `ϑ_{(i)(b)}^{(a)(j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflections {
    /// Kinds `[PVec, TDown]`.
    pub temporal: DTensor,
    /// Kinds `[PVec, SDown]`.
    pub spatial: DTensor,
    /// Kinds `[PVec, PForm]`.
    pub vertical: DTensor,
}

/// Deflections as covariant derivatives of the Liouville-Hamilton field `C* = p`.
pub fn deflections(conn: &ConnectionAt, pt: &Point) -> Result<Deflections> {
    let d = conn.dims;
    let own = Jet::seed(pt.coords(), 1);
    let p: Vec<Jet> = (0..d.len(Block::P))
        .map(|q| own[d.len(Block::T) + d.len(Block::S) + q].clone())
        .collect();
    let k = [IndexKind::PVec];
    Ok(Deflections {
        temporal: covariant_derivative(conn, &k, &p, Block::T)?,
        spatial: covariant_derivative(conn, &k, &p, Block::S)?,
        vertical: covariant_derivative(conn, &k, &p, Block::P)?,
    })
}

/// Deflections from their closed-form expressions:
/// `Δ_{(i)b}^{(a)} = −N1_{(i)b}^{(a)} − A_{(i)(c)b}^{(a)(k)} p_k^c`, likewise with
/// `N2`, `H`, and `ϑ_{(i)(b)}^{(a)(j)} = δ^a_b δ^j_i − C_{(i)(c)(b)}^{(a)(k)(j)} p_k^c`.
pub fn deflections_closed_form(conn: &ConnectionAt, pt: &Point) -> Deflections {
    let d = conn.dims;
    let q = d.len(Block::P);
    let p: Vec<f64> = (0..q)
        .map(|r| pt.coords()[d.offset(Block::P) + r])
        .collect();
    let contract = |c: Coeff, q0: usize, g: usize| -> f64 {
        let fam = conn.coeffs.get(c);
        (0..q).map(|r| fam[[q0, r, g]].value() * p[r]).sum()
    };
    Deflections {
        temporal: DTensor::from_fn(d, &[IndexKind::PVec, IndexKind::TDown], |ix| {
            -conn.nlc.n1[[ix[0], ix[1]]].value() - contract(Coeff::App, ix[0], ix[1])
        }),
        spatial: DTensor::from_fn(d, &[IndexKind::PVec, IndexKind::SDown], |ix| {
            -conn.nlc.n2[[ix[0], ix[1]]].value() - contract(Coeff::Hpp, ix[0], ix[1])
        }),
        vertical: DTensor::from_fn(d, &[IndexKind::PVec, IndexKind::PForm], |ix| {
            let delta = if ix[0] == ix[1] { 1.0 } else { 0.0 };
            delta - contract(Coeff::Cpp, ix[0], ix[1])
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{NLinearConnection, Nine};
    use super::*;
    use crate::bundle::Dims;
    use crate::expr::ScalarField;
    use crate::metrics::{LinearConnectionCoeffs, SpatialMetric, TemporalMetric};
    use approx::assert_relative_eq;

    fn dims() -> Dims {
        Dims::new(2, 2).unwrap()
    }

    fn point() -> Point {
        Point::new(
            dims(),
            &[0.2, -0.4],
            &[0.7, 0.1],
            &[vec![1.0, -0.5], vec![0.3, 2.0]],
        )
        .unwrap()
    }

    fn custom() -> NLinearConnection {
        let d = dims();
        let f = |s: String| ScalarField::parse(&s, d).unwrap();
        let n1 = Grid::from_fn(&[4, 2], |ix| {
            f(format!("0.1*t[{}]*p[1][2] + 0.2*x[1]", ix[1] + 1))
        });
        let n2 = Grid::from_fn(&[4, 2], |ix| {
            f(format!("sin(p[2][1]) * {}", ix[0] as f64 * 0.3))
        });
        let nine = Nine::from_fn(|c| {
            Grid::from_fn(&c.shape(d), |ix| {
                let w = (ix[0] + 2 * ix[1] + 3 * ix[2]) as f64 * 0.1;
                f(format!(
                    "{w}*cos(t[1] + x[2]) + 0.05*p[{}][1]",
                    ix[2] % 2 + 1
                ))
            })
        });
        NLinearConnection::custom(d, n1, n2, nine).unwrap()
    }

    #[test]
    fn scalar_derivatives_are_frame_derivatives() {
        let conn = custom().at(&point()).unwrap();
        let f = ScalarField::parse("t[1]*p[1][2] + x[2]^2", dims()).unwrap();
        let j = f.jet(&point(), 1).unwrap();
        let dt = covariant_derivative(&conn, &[], std::slice::from_ref(&j), Block::T).unwrap();
        for c in 0..2 {
            assert_relative_eq!(dt.get(&[c]), conn.nlc.delta_t(&j, c), epsilon = 1e-14);
        }
        let dp = covariant_derivative(&conn, &[], std::slice::from_ref(&j), Block::P).unwrap();
        assert_relative_eq!(dp.get(&[dims().pair(0, 1)]), 0.2, epsilon = 1e-14);
    }

    #[test]
    fn temporal_vector_formula() {
        // Y^a_{/c} = δY^a/δt^c + Y^b A^a_{bc}
        let conn = custom().at(&point()).unwrap();
        let ys = [
            ScalarField::parse("t[1]*x[1] + p[2][2]", dims()).unwrap(),
            ScalarField::parse("exp(t[2]) * p[1][1]", dims()).unwrap(),
        ];
        let jets: Vec<Jet> = ys.iter().map(|y| y.jet(&point(), 1).unwrap()).collect();
        let out = covariant_derivative(&conn, &[IndexKind::TUp], &jets, Block::T).unwrap();
        let a = conn.coeffs.get(Coeff::Att);
        for aa in 0..2 {
            for c in 0..2 {
                let mut want = conn.nlc.delta_t(&jets[aa], c);
                for b in 0..2 {
                    want += jets[b].value() * a[[aa, b, c]].value();
                }
                assert_relative_eq!(out.get(&[aa, c]), want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn closed_form_deflections_match() {
        let conn = custom().at(&point()).unwrap();
        let a = deflections(&conn, &point()).unwrap();
        let b = deflections_closed_form(&conn, &point());
        assert!(a.temporal.max_abs_diff(&b.temporal).unwrap() < 1e-12);
        assert!(a.spatial.max_abs_diff(&b.spatial).unwrap() < 1e-12);
        assert!(a.vertical.max_abs_diff(&b.vertical).unwrap() < 1e-12);
    }

    #[test]
    fn berwald_deflections_vanish() {
        let h = TemporalMetric::parse(dims(), &["exp(t[1])", "0.1", "0.1", "1 + t[2]^2"]).unwrap();
        let phi = SpatialMetric::parse(dims(), &["1", "0", "0", "sin(x[1])^2"]).unwrap();
        let conn = NLinearConnection::berwald_from_metrics(h, phi)
            .at(&point())
            .unwrap();
        let df = deflections(&conn, &point()).unwrap();
        assert!(df.temporal.max_abs() < 1e-12);
        assert!(df.spatial.max_abs() < 1e-12);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(df.vertical.get(&[r, c]), if r == c { 1.0 } else { 0.0 });
            }
        }
        let lc = LinearConnectionCoeffs::parse(dims(), &["t[1]"; 8], &["x[2]"; 8]).unwrap();
        let conn = NLinearConnection::berwald_from_linear(lc)
            .at(&point())
            .unwrap();
        assert!(deflections_closed_form(&conn, &point()).temporal.max_abs() < 1e-12);
    }
}

use nalgebra::DMatrix;

use super::{NlcAt, NonlinearConnection};
use crate::bundle::{Block, DTensor, Dims, IndexKind, Point};
use crate::error::Result;

/// Adapted frame and coframe in natural components.
///
/// Row `α` of `frame` holds the natural components of `e_α` (order
/// `δ/δt^a`, `δ/δx^i`, `∂/∂p_i^a`); row `α` of `coframe` those of
/// `dt^a`, `dx^i`, `δp_i^a`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub dims: Dims,
    pub frame: DMatrix<f64>,
    pub coframe: DMatrix<f64>,
}

impl AdaptedFrame {
    /// Pairing matrix `⟨e_α, θ^β⟩`; the identity for a dual pair.
    pub fn pairing(&self) -> DMatrix<f64> {
        &self.frame * self.coframe.transpose()
    }
}

pub fn adapted_frame(nlc: &NlcAt) -> AdaptedFrame {
    let d = nlc.dims;
    let (m, n, q) = (d.m, d.n, d.len(Block::P));
    let dd = d.total();
    let po = m + n;
    let mut frame = DMatrix::<f64>::identity(dd, dd);
    let mut coframe = DMatrix::<f64>::identity(dd, dd);
    for r in 0..q {
        for b in 0..m {
            let v = nlc.n1[[r, b]].value();
            frame[(b, po + r)] = -v;
            coframe[(po + r, b)] = v;
        }
        for j in 0..n {
            let v = nlc.n2[[r, j]].value();
            frame[(m + j, po + r)] = -v;
            coframe[(po + r, m + j)] = v;
        }
    }
    AdaptedFrame {
        dims: d,
        frame,
        coframe,
    }
}

/// Poisson-bracket coefficients of the adapted frame:
/// `[δ/δt^b, δ/δt^c] = R^{(a)}_{(i)bc} ∂/∂p_i^a`,
/// `[δ/δt^b, δ/δx^k] = R^{(a)}_{(i)bk} ∂/∂p_i^a`,
/// `[δ/δx^j, δ/δx^k] = R^{(a)}_{(i)jk} ∂/∂p_i^a`,
/// `[δ/δt^b, ∂/∂p_k^c] = B^{(a)(k)}_{(i)b(c)} ∂/∂p_i^a`,
/// `[δ/δx^j, ∂/∂p_k^c] = B^{(a)(k)}_{(i)j(c)} ∂/∂p_i^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Brackets {
    /// Kinds `[PVec, TDown, TDown]`.
    pub r_tt: DTensor,
    /// Kinds `[PVec, TDown, SDown]`.
    pub r_ts: DTensor,
    /// Kinds `[PVec, SDown, SDown]`.
    pub r_ss: DTensor,
    /// Kinds `[PVec, TDown, PForm]`; not a d-tensor on its own.
    pub b_t: DTensor,
    /// Kinds `[PVec, SDown, PForm]`; not a d-tensor on its own.
    pub b_s: DTensor,
}

pub fn bracket_coefficients(nlc: &NlcAt) -> Brackets {
    use IndexKind::*;
    let d = nlc.dims;
    let (n1, n2) = (&nlc.n1, &nlc.n2);
    Brackets {
        r_tt: DTensor::from_fn(d, &[PVec, TDown, TDown], |ix| {
            let (q, b, c) = (ix[0], ix[1], ix[2]);
            nlc.delta_t(&n1[[q, b]], c) - nlc.delta_t(&n1[[q, c]], b)
        }),
        r_ts: DTensor::from_fn(d, &[PVec, TDown, SDown], |ix| {
            let (q, b, k) = (ix[0], ix[1], ix[2]);
            nlc.delta_x(&n1[[q, b]], k) - nlc.delta_t(&n2[[q, k]], b)
        }),
        r_ss: DTensor::from_fn(d, &[PVec, SDown, SDown], |ix| {
            let (q, j, k) = (ix[0], ix[1], ix[2]);
            nlc.delta_x(&n2[[q, j]], k) - nlc.delta_x(&n2[[q, k]], j)
        }),
        b_t: DTensor::from_fn(d, &[PVec, TDown, PForm], |ix| {
            nlc.d_p(&n1[[ix[0], ix[1]]], ix[2])
        }),
        b_s: DTensor::from_fn(d, &[PVec, SDown, PForm], |ix| {
            nlc.d_p(&n2[[ix[0], ix[1]]], ix[2])
        }),
    }
}

/// The projectors `h_T`, `h_M`, `w` onto the three distributions.
#[derive(Debug, Clone)]
pub struct Projectors {
    /// Diagonal 0/1 matrices in the adapted frame.
    pub adapted: [DMatrix<f64>; 3],
    /// The same operators acting on natural components.
    pub natural: [DMatrix<f64>; 3],
}

impl Projectors {
    /// Largest entry of `h_T + h_M + w − I`, of `π² − π` and of `π σ` for
    /// `π ≠ σ`, in the adapted frame.
    pub fn adapted_residual(&self) -> f64 {
        residual(&self.adapted)
    }

    pub fn natural_residual(&self) -> f64 {
        residual(&self.natural)
    }
}

fn residual(ps: &[DMatrix<f64>; 3]) -> f64 {
    let dd = ps[0].nrows();
    let mut r = (&ps[0] + &ps[1] + &ps[2] - DMatrix::identity(dd, dd)).amax();
    for (i, a) in ps.iter().enumerate() {
        r = r.max((a * a - a).amax());
        for (j, b) in ps.iter().enumerate() {
            if i != j {
                r = r.max((a * b).amax());
            }
        }
    }
    r
}

fn selector(d: Dims, b: Block) -> DMatrix<f64> {
    let dd = d.total();
    let (lo, len) = (d.offset(b), d.len(b));
    DMatrix::from_fn(dd, dd, |r, c| {
        if r == c && r >= lo && r < lo + len {
            1.0
        } else {
            0.0
        }
    })
}

/// Operator on natural components corresponding to the adapted-frame matrix `s`.
fn to_natural(fr: &AdaptedFrame, s: &DMatrix<f64>) -> DMatrix<f64> {
    fr.frame.transpose() * s * &fr.coframe
}

pub fn projectors(nlc: &NlcAt) -> Projectors {
    let d = nlc.dims;
    let fr = adapted_frame(nlc);
    let adapted = Block::ALL.map(|b| selector(d, b));
    let natural = [0, 1, 2].map(|k| to_natural(&fr, &adapted[k]));
    Projectors { adapted, natural }
}

/// The almost product structure `P = I − 2w`.
#[derive(Debug, Clone)]
pub struct AlmostProduct {
    pub dims: Dims,
    pub adapted: DMatrix<f64>,
    pub natural: DMatrix<f64>,
}

impl AlmostProduct {
    /// Largest entry of `P² − I` (natural components).
    pub fn square_residual(&self) -> f64 {
        let dd = self.natural.nrows();
        (&self.natural * &self.natural - DMatrix::identity(dd, dd)).amax()
    }

    /// Dimensions of the `+1` and `−1` eigenspaces.
    pub fn multiplicities(&self) -> (usize, usize) {
        let dd = self.natural.nrows();
        let id = DMatrix::<f64>::identity(dd, dd);
        let kernel = |a: DMatrix<f64>| dd - a.rank(1e-9 * (1.0 + a.amax()));
        (kernel(&self.natural - &id), kernel(&self.natural + &id))
    }

    pub fn trace(&self) -> f64 {
        self.natural.trace()
    }
}

pub fn almost_product(nlc: &NlcAt) -> AlmostProduct {
    let d = nlc.dims;
    let dd = d.total();
    let adapted = DMatrix::identity(dd, dd) - selector(d, Block::P) * 2.0;
    let natural = to_natural(&adapted_frame(nlc), &adapted);
    AlmostProduct {
        dims: d,
        adapted,
        natural,
    }
}

/// Outcome of the integrability criterion for the horizontal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    /// Largest `|R|` over all three families and all probes.
    pub max_violation: f64,
    /// Largest `|R^{(a)}_{(i)bc}|`, `|R^{(a)}_{(i)bk}|`, `|R^{(a)}_{(i)jk}|`.
    pub max_by_family: [f64; 3],
}

pub const INTEGRABILITY_TOL: f64 = 1e-9;

pub fn integrability_check(
    nlc: &NonlinearConnection,
    pts: &[Point],
) -> Result<IntegrabilityReport> {
    let mut fam = [0.0f64; 3];
    for pt in pts {
        let br = bracket_coefficients(&nlc.at(pt)?);
        for (slot, t) in [&br.r_tt, &br.r_ts, &br.r_ss].into_iter().enumerate() {
            let v = t.max_abs();
            fam[slot] = if v.is_nan() || fam[slot].is_nan() {
                f64::NAN
            } else {
                fam[slot].max(v)
            };
        }
    }
    let max_violation = fam.iter().cloned().fold(0.0, |a: f64, b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    });
    Ok(IntegrabilityReport {
        integrable: fam.iter().all(|v| *v < INTEGRABILITY_TOL),
        max_violation,
        max_by_family: fam,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarField;
    use crate::grid::Grid;
    use crate::metrics::{SpatialMetric, TemporalMetric};
    use approx::assert_relative_eq;

    #[test]
    fn duality_for_constant_n() {
        let d = Dims::new(1, 1).unwrap();
        let n1 = Grid::from_fn(&[1, 1], |_| ScalarField::parse("5", d).unwrap());
        let n2 = Grid::from_fn(&[1, 1], |_| ScalarField::parse("7", d).unwrap());
        let nlc = NonlinearConnection::custom(d, n1, n2).unwrap();
        let at = nlc
            .at(&Point::new(d, &[0.0], &[0.0], &[vec![1.0]]).unwrap())
            .unwrap();
        let fr = adapted_frame(&at);
        assert_eq!(fr.frame[(0, 2)], -5.0);
        assert_eq!(fr.coframe[(2, 0)], 5.0);
        assert_eq!(fr.coframe[(2, 1)], 7.0);
        assert_eq!(fr.pairing(), DMatrix::identity(3, 3));
    }

    #[test]
    fn sphere_not_integrable() {
        let d = Dims::new(1, 2).unwrap();
        let h = TemporalMetric::parse(d, &["1"]).unwrap();
        let phi = SpatialMetric::parse(d, &["1", "0", "0", "sin(x[1])^2"]).unwrap();
        let nlc = NonlinearConnection::canonical(h, phi);
        let x1 = std::f64::consts::FRAC_PI_3;
        let pt = Point::new(d, &[0.0], &[x1, 0.0], &[vec![0.0], vec![1.0]]).unwrap();
        let rep = integrability_check(&nlc, &[pt]).unwrap();
        assert!(!rep.integrable);
        // R^{(1)}_{(1)12} = −r^2_{112} p_2 = sin² x¹... only the (s=2) term survives
        assert_relative_eq!(rep.max_by_family[2], 1.0, epsilon = 1e-10);
        let flat = NonlinearConnection::canonical(
            TemporalMetric::parse(d, &["2"]).unwrap(),
            SpatialMetric::parse(d, &["1", "0", "0", "3"]).unwrap(),
        );
        let pt = Point::new(d, &[0.3], &[0.1, 0.2], &[vec![1.0], vec![2.0]]).unwrap();
        assert!(integrability_check(&flat, &[pt]).unwrap().integrable);
    }

    #[test]
    fn almost_product_structure() {
        let d = Dims::new(2, 2).unwrap();
        let n1 = Grid::from_fn(&[4, 2], |ix| {
            ScalarField::parse(&format!("{}*p[1][1]", ix[0] + ix[1]), d).unwrap()
        });
        let n2 = Grid::from_fn(&[4, 2], |ix| {
            ScalarField::parse(&format!("x[1] - {}", ix[0]), d).unwrap()
        });
        let nlc = NonlinearConnection::custom(d, n1, n2).unwrap();
        let pt = Point::new(
            d,
            &[0.1, 0.2],
            &[0.3, 0.4],
            &[vec![0.5, 0.6], vec![0.7, 0.8]],
        )
        .unwrap();
        let at = nlc.at(&pt).unwrap();
        let ap = almost_product(&at);
        assert!(ap.square_residual() < 1e-12);
        assert_eq!(ap.multiplicities(), (4, 4));
        assert_relative_eq!(ap.trace(), 0.0, epsilon = 1e-12);
        let pr = projectors(&at);
        assert_eq!(pr.adapted_residual(), 0.0);
        assert!(pr.natural_residual() < 1e-12);
    }
}

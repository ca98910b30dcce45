use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Block, Dims, IndexKind, Point};
use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::jet::Jet;
use crate::num::{det_value, invert};

/// Threshold on `|det|` below which a Jacobian block is treated as singular.
pub const SINGULAR_DET: f64 = 1e-10;

/// A change of coordinates `t̃ = t̃(t)`, `x̃ = x̃(x)` together with closed-form
/// inverse maps. The induced momentum law is
/// `p̃_j^b = (∂x^i/∂x̃^j)(∂t̃^b/∂t^a) p_i^a`.
///
/// Inverse maps are written in the tilde coordinates using the same names
/// `t[a]`, `x[i]`.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    dims: Dims,
    id: String,
    tmap: Arc<Vec<ScalarField>>,
    xmap: Arc<Vec<ScalarField>>,
    tinv: Arc<Vec<ScalarField>>,
    xinv: Arc<Vec<ScalarField>>,
}

/// Jacobian blocks at one point of the original chart.
#[derive(Debug, Clone)]
pub struct ChangeJacobians {
    /// `∂t̃^a/∂t^b` at `[a][b]`.
    pub jt: DMatrix<f64>,
    /// `∂t^a/∂t̃^b` at `[a][b]`.
    pub jt_inv: DMatrix<f64>,
    /// `∂x̃^i/∂x^j` at `[i][j]`.
    pub jx: DMatrix<f64>,
    /// `∂x^i/∂x̃^j` at `[i][j]`.
    pub jx_inv: DMatrix<f64>,
}

impl ChangeJacobians {
    /// Row-major `new × old` matrix sending components of one slot kind
    /// to the tilde chart.
    pub fn factor(&self, kind: IndexKind) -> Vec<f64> {
        let m = self.jt.nrows();
        let n = self.jx.nrows();
        let square = |f: &dyn Fn(usize, usize) -> f64, len: usize| -> Vec<f64> {
            (0..len * len).map(|k| f(k / len, k % len)).collect()
        };
        match kind {
            IndexKind::TUp => square(&|a, b| self.jt[(a, b)], m),
            IndexKind::TDown => square(&|a, b| self.jt_inv[(b, a)], m),
            IndexKind::SUp => square(&|i, j| self.jx[(i, j)], n),
            IndexKind::SDown => square(&|i, j| self.jx_inv[(j, i)], n),
            IndexKind::PVec => square(
                &|new, old| {
                    let (i, a) = (new / m, new % m);
                    let (j, b) = (old / m, old % m);
                    self.jt[(a, b)] * self.jx_inv[(j, i)]
                },
                m * n,
            ),
            IndexKind::PForm => square(
                &|new, old| {
                    let (i, a) = (new / m, new % m);
                    let (j, b) = (old / m, old % m);
                    self.jt_inv[(b, a)] * self.jx[(i, j)]
                },
                m * n,
            ),
        }
    }
}

fn parse_all(src: &[&str], dims: Dims) -> Result<Vec<ScalarField>> {
    src.iter().map(|s| ScalarField::parse(s, dims)).collect()
}

impl CoordinateChange {
    pub fn new(
        dims: Dims,
        id: impl Into<String>,
        tmap: Vec<ScalarField>,
        xmap: Vec<ScalarField>,
        tinv: Vec<ScalarField>,
        xinv: Vec<ScalarField>,
    ) -> Result<CoordinateChange> {
        for (name, maps, len, block) in [
            ("temporal map", &tmap, dims.m, Block::T),
            ("spatial map", &xmap, dims.n, Block::S),
            ("temporal inverse", &tinv, dims.m, Block::T),
            ("spatial inverse", &xinv, dims.n, Block::S),
        ] {
            if maps.len() != len {
                return Err(Error::dims(
                    format!("{len} components in {name}"),
                    maps.len(),
                ));
            }
            if let Some(f) = maps
                .iter()
                .find(|f| f.dims() != dims || !f.depends_only_on(&[block]))
            {
                return Err(Error::Invalid(format!(
                    "{name} component `{f}` must depend only on the {} coordinates",
                    if block == Block::T {
                        "temporal"
                    } else {
                        "spatial"
                    }
                )));
            }
        }
        Ok(CoordinateChange {
            dims,
            id: id.into(),
            tmap: Arc::new(tmap),
            xmap: Arc::new(xmap),
            tinv: Arc::new(tinv),
            xinv: Arc::new(xinv),
        })
    }

    /// Builds a change from expression strings.
    pub fn parse(
        dims: Dims,
        id: impl Into<String>,
        tmap: &[&str],
        xmap: &[&str],
        tinv: &[&str],
        xinv: &[&str],
    ) -> Result<CoordinateChange> {
        CoordinateChange::new(
            dims,
            id,
            parse_all(tmap, dims)?,
            parse_all(xmap, dims)?,
            parse_all(tinv, dims)?,
            parse_all(xinv, dims)?,
        )
    }

    pub fn identity(dims: Dims) -> CoordinateChange {
        let t: Vec<String> = (1..=dims.m).map(|a| format!("t[{a}]")).collect();
        let x: Vec<String> = (1..=dims.n).map(|i| format!("x[{i}]")).collect();
        let t: Vec<&str> = t.iter().map(String::as_str).collect();
        let x: Vec<&str> = x.iter().map(String::as_str).collect();
        CoordinateChange::parse(dims, "identity", &t, &x, &t, &x).expect("identity change")
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tmap(&self) -> &[ScalarField] {
        &self.tmap
    }

    pub fn xmap(&self) -> &[ScalarField] {
        &self.xmap
    }

    pub fn tinv(&self) -> &[ScalarField] {
        &self.tinv
    }

    pub fn xinv(&self) -> &[ScalarField] {
        &self.xinv
    }

    /// The change going the other way.
    pub fn inverse(&self) -> CoordinateChange {
        CoordinateChange {
            dims: self.dims,
            id: format!("{}^-1", self.id),
            tmap: self.tinv.clone(),
            xmap: self.xinv.clone(),
            tinv: self.tmap.clone(),
            xinv: self.xmap.clone(),
        }
    }

    /// Forward maps as jets in the original coordinates at `pt`:
    /// `(t̃, x̃, p̃)` with `t̃, x̃` of `order` and `p̃` of `order − 1`.
    pub(crate) fn forward_jets(&self, pt: &Point, order: u8) -> Result<Vec<Jet>> {
        let d = self.dims;
        let z = Jet::seed(pt.coords(), order);
        let tt: Vec<Jet> = self
            .tmap
            .iter()
            .map(|f| f.eval_with(&z))
            .collect::<Result<_>>()?;
        let xt: Vec<Jet> = self
            .xmap
            .iter()
            .map(|f| f.eval_with(&z))
            .collect::<Result<_>>()?;
        let jt: Vec<Jet> = (0..d.m * d.m)
            .map(|k| tt[k / d.m].diff(d.t(k % d.m)))
            .collect();
        let jx: Vec<Jet> = (0..d.n * d.n)
            .map(|k| xt[k / d.n].diff(d.x(k % d.n)))
            .collect();
        check_det(&jt, d.m)?;
        let (jx_inv, _) = invert(&jx, d.n).ok_or(Error::SingularJacobian { det: 0.0 })?;
        check_det(&jx, d.n)?;
        let mut out = tt;
        out.extend(xt);
        for j in 0..d.n {
            for b in 0..d.m {
                let mut acc = Jet::constant(z[0].space(), order - 1, 0.0);
                for i in 0..d.n {
                    for a in 0..d.m {
                        acc = acc + &(&jx_inv[i * d.n + j] * &jt[b * d.m + a]) * &z[d.p(i, a)];
                    }
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    /// Image of a point of the original chart.
    pub fn push_point(&self, pt: &Point) -> Result<Point> {
        self.check_point(pt)?;
        let z = self.forward_jets(pt, 1)?;
        Point::from_flat(self.dims, z.iter().map(Jet::value).collect())
    }

    /// Preimage of a point of the tilde chart.
    pub fn pull_point(&self, pt: &Point) -> Result<Point> {
        self.inverse().push_point(pt)
    }

    /// Jacobian blocks at a point of the original chart.
    pub fn jacobians(&self, pt: &Point) -> Result<ChangeJacobians> {
        self.check_point(pt)?;
        let d = self.dims;
        let z = Jet::seed(pt.coords(), 1);
        let grads = |maps: &[ScalarField], off: usize, len: usize| -> Result<DMatrix<f64>> {
            let mut j = DMatrix::zeros(len, len);
            for (r, f) in maps.iter().enumerate() {
                let v = f.eval_with(&z)?;
                for c in 0..len {
                    j[(r, c)] = v.d1(off + c);
                }
            }
            Ok(j)
        };
        let jt = grads(&self.tmap, 0, d.m)?;
        let jx = grads(&self.xmap, d.m, d.n)?;
        let inv = |j: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            let det = j.determinant();
            if det.abs() <= SINGULAR_DET {
                return Err(Error::SingularJacobian { det });
            }
            j.clone()
                .try_inverse()
                .ok_or(Error::SingularJacobian { det })
        };
        Ok(ChangeJacobians {
            jt_inv: inv(&jt)?,
            jx_inv: inv(&jx)?,
            jt,
            jx,
        })
    }

    /// Full `D × D` Jacobian `∂z̃/∂z` of the induced map on the total space,
    /// rows indexed by tilde coordinates and columns by original ones.
    pub fn natural_frame_jacobians(&self, pt: &Point) -> Result<DMatrix<f64>> {
        self.check_point(pt)?;
        let z = self.forward_jets(pt, 2)?;
        let n = self.dims.total();
        Ok(DMatrix::from_fn(n, n, |r, c| z[r].d1(c)))
    }

    fn check_point(&self, pt: &Point) -> Result<()> {
        if pt.dims() != self.dims {
            return Err(Error::dims(
                format!("{:?}", self.dims),
                format!("{:?}", pt.dims()),
            ));
        }
        Ok(())
    }
}

fn check_det(j: &[Jet], n: usize) -> Result<()> {
    let det = det_value(j, n);
    if det.abs() <= SINGULAR_DET {
        return Err(Error::SingularJacobian { det });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn change() -> CoordinateChange {
        let d = Dims::new(1, 2).unwrap();
        CoordinateChange::parse(
            d,
            "probe",
            &["t[1] + t[1]^2/4"],
            &["sinh(x[1])", "x[2] + 0.5*x[1]"],
            &["2*sqrt(1 + t[1]) - 2"],
            &[
                "log(x[1] + sqrt(x[1]^2 + 1))",
                "x[2] - 0.5*log(x[1] + sqrt(x[1]^2 + 1))",
            ],
        )
        .unwrap()
    }

    #[test]
    fn push_pull_round_trip() {
        let c = change();
        let pt = Point::new(c.dims(), &[0.4], &[0.3, -0.2], &[vec![0.7], vec![-1.1]]).unwrap();
        let back = c.pull_point(&c.push_point(&pt).unwrap()).unwrap();
        for (a, b) in pt.coords().iter().zip(back.coords()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_blocks_are_inverse() {
        let c = change();
        let pt = Point::new(c.dims(), &[0.4], &[0.3, -0.2], &[vec![0.7], vec![-1.1]]).unwrap();
        let j = c.jacobians(&pt).unwrap();
        assert_relative_eq!(j.jt[(0, 0)], 1.2, epsilon = 1e-12);
        let id = &j.jx * &j.jx_inv;
        assert_relative_eq!(id, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn natural_jacobian_inverts_through_inverse_change() {
        let c = change();
        let pt = Point::new(c.dims(), &[0.4], &[0.3, -0.2], &[vec![0.7], vec![-1.1]]).unwrap();
        let fwd = c.natural_frame_jacobians(&pt).unwrap();
        let back = c
            .inverse()
            .natural_frame_jacobians(&c.push_point(&pt).unwrap())
            .unwrap();
        let n = c.dims().total();
        assert_relative_eq!(&back * &fwd, DMatrix::identity(n, n), epsilon = 1e-10);
    }

    #[test]
    fn natural_jacobian_matches_finite_differences() {
        let c = change();
        let z0 = [0.4, 0.3, -0.2, 0.7, -1.1];
        let pt = Point::from_flat(c.dims(), z0.to_vec()).unwrap();
        let j = c.natural_frame_jacobians(&pt).unwrap();
        let h = 1e-6;
        for col in 0..5 {
            let mut zp = z0;
            let mut zm = z0;
            zp[col] += h;
            zm[col] -= h;
            let fp = c
                .push_point(&Point::from_flat(c.dims(), zp.to_vec()).unwrap())
                .unwrap();
            let fm = c
                .push_point(&Point::from_flat(c.dims(), zm.to_vec()).unwrap())
                .unwrap();
            for row in 0..5 {
                let fd = (fp.coords()[row] - fm.coords()[row]) / (2.0 * h);
                assert_relative_eq!(j[(row, col)], fd, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn rejects_mixed_blocks() {
        let d = Dims::new(1, 1).unwrap();
        let r =
            CoordinateChange::parse(d, "bad", &["t[1] + x[1]"], &["x[1]"], &["t[1]"], &["x[1]"]);
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn singular_jacobian() {
        let d = Dims::new(1, 1).unwrap();
        let c = CoordinateChange::parse(d, "fold", &["t[1]^3"], &["x[1]"], &["t[1]"], &["x[1]"])
            .unwrap();
        let pt = Point::new(d, &[0.0], &[0.0], &[vec![1.0]]).unwrap();
        assert!(matches!(
            c.jacobians(&pt),
            Err(Error::SingularJacobian { .. })
        ));
    }
}

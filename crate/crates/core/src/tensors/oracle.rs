use nalgebra::DMatrix;

use super::Slots;
use crate::bundle::{Block, DTensor, Dims, IndexKind};
use crate::connections::{adapted_frame, Brackets, Coeff, ConnectionAt, NlcAt};
use crate::jet::Jet;

/// The adapted frame as vector fields (jets of their natural components),
/// the coframe at the point, and the structure constants
/// `[e_X, e_Y] = c^γ_{XY} e_γ` obtained by differentiating the frame.
pub struct FrameFields {
    dims: Dims,
    /// `E[X][μ]`, row-major `D × D`.
    e: Vec<Jet>,
    /// `c[X][Y][γ]`, row-major `D × D × D`.
    c: Vec<f64>,
}

impl FrameFields {
    pub fn new(nlc: &NlcAt) -> FrameFields {
        let d = nlc.dims;
        let dd = d.total();
        let (m, n) = (d.m, d.n);
        let po = d.offset(Block::P);
        let proto = &nlc.n1.data()[0];
        let one = Jet::constant(proto.space(), proto.order(), 1.0);
        let zero = proto.lift_zero();
        let mut e = vec![zero; dd * dd];
        for a in 0..dd {
            e[a * dd + a] = one.clone();
        }
        for q in 0..d.len(Block::P) {
            for b in 0..m {
                e[d.t(b) * dd + po + q] = -nlc.n1[[q, b]].clone();
            }
            for j in 0..n {
                e[d.x(j) * dd + po + q] = -nlc.n2[[q, j]].clone();
            }
        }
        let theta: DMatrix<f64> = adapted_frame(nlc).coframe;
        let mut c = vec![0.0; dd * dd * dd];
        let mut lie = vec![0.0; dd];
        for x in 0..dd {
            for y in 0..dd {
                for (mu, l) in lie.iter_mut().enumerate() {
                    *l = (0..dd)
                        .map(|nu| {
                            e[x * dd + nu].value() * e[y * dd + mu].d1(nu)
                                - e[y * dd + nu].value() * e[x * dd + mu].d1(nu)
                        })
                        .sum();
                }
                for g in 0..dd {
                    c[(x * dd + y) * dd + g] = (0..dd).map(|mu| theta[(g, mu)] * lie[mu]).sum();
                }
            }
        }
        FrameFields { dims: d, e, c }
    }

    /// `e_X(f)`.
    pub fn apply(&self, x: usize, f: &Jet) -> f64 {
        let dd = self.dims.total();
        (0..dd)
            .map(|mu| self.e[x * dd + mu].value() * f.d1(mu))
            .sum()
    }

    /// `c^γ_{XY}`.
    pub fn structure(&self, x: usize, y: usize, g: usize) -> f64 {
        let dd = self.dims.total();
        self.c[(x * dd + y) * dd + g]
    }
}

fn local(d: Dims, g: usize) -> (Block, usize) {
    let b = d.block_of(g);
    (b, g - d.offset(b))
}

/// `Ω[μ][ν][ρ]` with `D_{e_μ} e_ν = Ω[μ][ν][ρ] e_ρ`, as a signed jet.
fn omega(conn: &ConnectionAt, mu: usize, nu: usize, rho: usize) -> Option<(f64, &Jet)> {
    let d = conn.dims;
    let (bm, lm) = local(d, mu);
    let (bn, ln) = local(d, nu);
    let (br, lr) = local(d, rho);
    if bn != br {
        return None;
    }
    let sign = if bn == Block::P { -1.0 } else { 1.0 };
    Some((sign, &conn.coeffs.get(Coeff::of(bn, bm))[[lr, ln, lm]]))
}

fn omega_v(conn: &ConnectionAt, mu: usize, nu: usize, rho: usize) -> f64 {
    omega(conn, mu, nu, rho).map_or(0.0, |(s, j)| s * j.value())
}

fn global(d: Dims, b: Block, i: usize) -> usize {
    d.offset(b) + i
}

/// Torsion family from `T(X, Y) = D_X Y − D_Y X − [X, Y]` on frame fields.
pub fn torsion_oracle(conn: &ConnectionAt, frame: &FrameFields, s: Slots) -> DTensor {
    let d = conn.dims;
    DTensor::from_fn(d, &s.torsion_kinds(), |ix| {
        let g = global(d, s.out, ix[0]);
        let y = global(d, s.y, ix[1]);
        let x = global(d, s.x, ix[2]);
        omega_v(conn, x, y, g) - omega_v(conn, y, x, g) - frame.structure(x, y, g)
    })
}

/// Curvature family from
/// `R(X, Y) Z = D_X D_Y Z − D_Y D_X Z − D_{[X, Y]} Z` on frame fields.
pub fn curvature_oracle(conn: &ConnectionAt, frame: &FrameFields, s: Slots) -> DTensor {
    let d = conn.dims;
    let dd = d.total();
    let sign = if s.out == Block::P { -1.0 } else { 1.0 };
    let ex = |x: usize, mu: usize, nu: usize, rho: usize| {
        omega(conn, mu, nu, rho).map_or(0.0, |(sg, j)| sg * frame.apply(x, j))
    };
    DTensor::from_fn(d, &s.curvature_kinds(), |ix| {
        let dl = global(d, s.out, ix[0]);
        let z = global(d, s.out, ix[1]);
        let y = global(d, s.y, ix[2]);
        let x = global(d, s.x, ix[3]);
        let mut r = ex(x, y, z, dl) - ex(y, x, z, dl);
        for g in 0..dd {
            r += omega_v(conn, y, z, g) * omega_v(conn, x, g, dl)
                - omega_v(conn, x, z, g) * omega_v(conn, y, g, dl);
            r -= frame.structure(x, y, g) * omega_v(conn, g, z, dl);
        }
        sign * r
    })
}

/// Poisson-bracket coefficients read off the frame commutators.
pub fn bracket_oracle(frame: &FrameFields) -> Brackets {
    use IndexKind::*;
    let d = frame.dims;
    let fam = |kinds: [IndexKind; 3]| {
        DTensor::from_fn(d, &kinds, |ix| {
            let g = global(d, Block::P, ix[0]);
            let y = global(d, kinds[1].block(), ix[1]);
            let x = global(d, kinds[2].block(), ix[2]);
            frame.structure(y, x, g)
        })
    };
    Brackets {
        r_tt: fam([PVec, TDown, TDown]),
        r_ts: fam([PVec, TDown, SDown]),
        r_ss: fam([PVec, SDown, SDown]),
        b_t: fam([PVec, TDown, PForm]),
        b_s: fam([PVec, SDown, PForm]),
    }
}

use super::{all_slots, torsion_table, Entry, Slots, Table};
use crate::bundle::{Block, DTensor, IndexKind};
use crate::connections::{bracket_coefficients, covariant_derivative, Coeff, ConnectionAt};
use crate::error::Result;

/// The 18 curvature families from their local expressions. With `F_Y`,
/// `F_X`, `F_p` the coefficient families acting on the block of `Z` along the
/// blocks of `Y`, `X` and the vertical block:
///
/// * horizontal rows (`R^d_{abc}`, `R^d_{abk}`, `R^d_{ajk}`, …):
///   `e_X F_Y − e_Y F_X ± (F_Y F_X − F_X F_Y) + F_p R`, with `R` the
///   Poisson-bracket coefficient of the row;
/// * mixed rows (`P^{d(k)}_{ab(c)}`, `P^{d(k)}_{aj(c)}`, …):
///   `∂F_Y/∂p − F_p{}_{/Y} + F_p P`, with `F_p{}_{/Y}` the covariant
///   derivative of `F_p` along `Y` and `P` the matching vertical torsion
///   family (`P^{(f)(k)}_{(r)b(c)}` resp. `P^{(f)(k)}_{(r)j(c)}`);
/// * vertical row (`S`): `∂F_p/∂p − ∂F_p/∂p ± (F_p F_p − F_p F_p)`.
///
/// The product sign is `+` for the `T` and `S` blocks of `Z` and `−` for the
/// vertical one.
pub fn curvature_table(conn: &ConnectionAt) -> Result<Table> {
    let d = conn.dims;
    let br = bracket_coefficients(&conn.nlc);
    let tors = torsion_table(conn);
    let mut entries = Vec::with_capacity(18);
    for s in all_slots() {
        let tau = s.out;
        let sign = if tau == Block::P { -1.0 } else { 1.0 };
        let fy = conn.coeffs.get(Coeff::of(tau, s.y));
        let fx = conn.coeffs.get(Coeff::of(tau, s.x));
        let fp = conn.coeffs.get(Coeff::of(tau, Block::P));
        let nt = d.len(tau);
        let nq = d.len(Block::P);
        let ev = |b: Block, f: &crate::jet::Jet, g: usize| conn.nlc.along(b, f, g);
        let products = |o: usize, z: usize, y: usize, x: usize| -> f64 {
            (0..nt)
                .map(|g| {
                    fy[[g, z, y]].value() * fx[[o, g, x]].value()
                        - fx[[g, z, x]].value() * fy[[o, g, y]].value()
                })
                .sum::<f64>()
                * sign
        };
        let tensor = match (s.y, s.x) {
            (Block::P, Block::P) => DTensor::from_fn(d, &s.curvature_kinds(), |ix| {
                let (o, z, y, x) = (ix[0], ix[1], ix[2], ix[3]);
                ev(Block::P, &fp[[o, z, y]], x) - ev(Block::P, &fp[[o, z, x]], y)
                    + products(o, z, y, x)
            }),
            (yb, Block::P) => {
                let kinds = [IndexKind::up(tau), IndexKind::down(tau), IndexKind::PForm];
                let dfp = covariant_derivative(conn, &kinds, fp.data(), yb)?;
                let ptors = tors.get(Slots {
                    out: Block::P,
                    y: yb,
                    x: Block::P,
                });
                DTensor::from_fn(d, &s.curvature_kinds(), |ix| {
                    let (o, z, y, x) = (ix[0], ix[1], ix[2], ix[3]);
                    let coupling: f64 = (0..nq)
                        .map(|r| fp[[o, z, r]].value() * ptors.get(&[r, y, x]))
                        .sum();
                    ev(Block::P, &fy[[o, z, y]], x) - dfp.get(&[o, z, x, y]) + coupling
                })
            }
            (yb, xb) => {
                let rbr = match (yb, xb) {
                    (Block::T, Block::T) => &br.r_tt,
                    (Block::T, Block::S) => &br.r_ts,
                    _ => &br.r_ss,
                };
                DTensor::from_fn(d, &s.curvature_kinds(), |ix| {
                    let (o, z, y, x) = (ix[0], ix[1], ix[2], ix[3]);
                    let coupling: f64 = (0..nq)
                        .map(|q| fp[[o, z, q]].value() * rbr.get(&[q, y, x]))
                        .sum();
                    ev(xb, &fy[[o, z, y]], x) - ev(yb, &fx[[o, z, x]], y)
                        + products(o, z, y, x)
                        + coupling
                })
            }
        };
        entries.push(Entry {
            slots: s,
            label: s.curvature_label(),
            structural_zero: false,
            tensor,
        });
    }
    Ok(Table { entries })
}

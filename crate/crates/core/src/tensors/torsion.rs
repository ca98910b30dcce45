use super::{all_slots, Entry, Slots, Table};
use crate::bundle::{Block, DTensor};
use crate::connections::{bracket_coefficients, Coeff, ConnectionAt};

/// The torsion families from their local expressions:
///
/// `T^c_{ab} = A^c_{ab} − A^c_{ba}`, `R^{(f)}_{(r)ab}`, `T^c_{aj} = H^c_{aj}`,
/// `T^k_{aj} = −A^k_{ja}`, `R^{(f)}_{(r)aj}`, `P^{c(j)}_{a(b)} = C^{c(j)}_{a(b)}`,
/// `P^{(f)(j)}_{(r)a(b)} = B^{(f)(j)}_{(r)a(b)} + A^{(f)(j)}_{(r)(b)a}`,
/// `T^k_{ij} = H^k_{ij} − H^k_{ji}`, `R^{(f)}_{(r)ij}`, `P^{k(j)}_{i(b)} = C^{k(j)}_{i(b)}`,
/// `P^{(f)(j)}_{(r)i(b)} = B^{(f)(j)}_{(r)i(b)} + H^{(f)(j)}_{(r)(b)i}`,
/// `S^{(f)(i)(j)}_{(r)(a)(b)} = C^{(f)(j)(i)}_{(r)(b)(a)} − C^{(f)(i)(j)}_{(r)(a)(b)}`,
/// with `R` and `B` the Poisson-bracket coefficients of `N`.
pub fn torsion_table(conn: &ConnectionAt) -> Table {
    let d = conn.dims;
    let br = bracket_coefficients(&conn.nlc);
    let v = |c: Coeff, i: usize, j: usize, k: usize| conn.v(c, [i, j, k]);
    let entries = all_slots()
        .into_iter()
        .map(|s| {
            let kinds = s.torsion_kinds();
            let tensor = if s.torsion_structural_zero() {
                DTensor::zeros(d, &kinds)
            } else {
                DTensor::from_fn(d, &kinds, |ix| {
                    let (o, y, x) = (ix[0], ix[1], ix[2]);
                    formula(s, o, y, x, &v, &br)
                })
            };
            Entry {
                slots: s,
                label: s.torsion_label(),
                structural_zero: s.torsion_structural_zero(),
                tensor,
            }
        })
        .collect();
    Table { entries }
}

fn formula(
    s: Slots,
    o: usize,
    y: usize,
    x: usize,
    v: &dyn Fn(Coeff, usize, usize, usize) -> f64,
    br: &crate::connections::Brackets,
) -> f64 {
    use Block::*;
    match (s.y, s.x, s.out) {
        (T, T, T) => v(Coeff::Att, o, y, x) - v(Coeff::Att, o, x, y),
        (T, T, P) => br.r_tt.get(&[o, y, x]),
        (T, S, T) => v(Coeff::Htt, o, y, x),
        (T, S, S) => -v(Coeff::Ass, o, x, y),
        (T, S, P) => br.r_ts.get(&[o, y, x]),
        (T, P, T) => v(Coeff::Ctt, o, y, x),
        (T, P, P) => br.b_t.get(&[o, y, x]) + v(Coeff::App, o, x, y),
        (S, S, S) => v(Coeff::Hss, o, y, x) - v(Coeff::Hss, o, x, y),
        (S, S, P) => br.r_ss.get(&[o, y, x]),
        (S, P, S) => v(Coeff::Css, o, y, x),
        (S, P, P) => br.b_s.get(&[o, y, x]) + v(Coeff::Hpp, o, x, y),
        (P, P, P) => v(Coeff::Cpp, o, x, y) - v(Coeff::Cpp, o, y, x),
        _ => 0.0,
    }
}

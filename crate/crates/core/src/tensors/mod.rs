//! Torsion and curvature d-tensors of an N-linear connection, from their
//! closed-form expressions and from the frame-field definitions.
//!
//! A family is addressed by the blocks of its arguments. Torsion families
//! hold the components of `T(X, Y)` with `X` the later frame vector, stored
//! `[out][Y][X]`; e.g. `T(δ/δx^j, δ/δt^a) = T^c_{aj} δ/δt^c + …` puts
//! `T^c_{aj}` at `[c][a][j]`. Curvature families hold `R(X, Y) Z` stored
//! `[out][Z][Y][X]`, so `R(δ/δt^c, δ/δt^b) δ/δt^a = R^d_{abc} δ/δt^d`.
//! Components along `∂/∂p` enter with a minus sign
//! (`R(X, Y) ∂/∂p_i^a = −R^{(d)(i)}_{(l)(a)YX} ∂/∂p_l^d`), matching the
//! sign of the vertical connection coefficients.

mod curvature;
mod oracle;
mod torsion;

pub use curvature::curvature_table;
pub use oracle::{bracket_oracle, curvature_oracle, torsion_oracle, FrameFields};
pub use torsion::torsion_table;

use crate::bundle::{Block, DTensor, IndexKind};

/// Argument blocks of one torsion or curvature family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slots {
    /// Output block (for curvature also the block of `Z`).
    pub out: Block,
    /// Earlier argument.
    pub y: Block,
    /// Later argument.
    pub x: Block,
}

/// `(Y, X)` argument pairs in table order.
pub const ROWS: [(Block, Block); 6] = [
    (Block::T, Block::T),
    (Block::T, Block::S),
    (Block::T, Block::P),
    (Block::S, Block::S),
    (Block::S, Block::P),
    (Block::P, Block::P),
];

/// All 18 slot triples in table order (rows of [`ROWS`], output `T`, `S`, `P`).
pub fn all_slots() -> Vec<Slots> {
    ROWS.iter()
        .flat_map(|&(y, x)| Block::ALL.map(|out| Slots { out, y, x }))
        .collect()
}

impl Slots {
    fn position(&self) -> usize {
        all_slots().iter().position(|s| s == self).unwrap()
    }

    pub fn torsion_label(&self) -> &'static str {
        TORSION_LABELS[self.position()]
    }

    pub fn curvature_label(&self) -> &'static str {
        CURVATURE_LABELS[self.position()]
    }

    /// Torsion families the N-linear structure forces to vanish.
    pub fn torsion_structural_zero(&self) -> bool {
        use Block::*;
        matches!(
            (self.y, self.x, self.out),
            (T, T, S) | (T, P, S) | (S, S, T) | (S, P, T) | (P, P, T) | (P, P, S)
        )
    }

    pub fn torsion_kinds(&self) -> Vec<IndexKind> {
        vec![
            IndexKind::up(self.out),
            IndexKind::down(self.y),
            IndexKind::down(self.x),
        ]
    }

    pub fn curvature_kinds(&self) -> Vec<IndexKind> {
        vec![
            IndexKind::up(self.out),
            IndexKind::down(self.out),
            IndexKind::down(self.y),
            IndexKind::down(self.x),
        ]
    }
}

const TORSION_LABELS: [&str; 18] = [
    "T_ab^c",
    "T_ab^k",
    "R_(r)ab^(f)",
    "T_aj^c",
    "T_aj^k",
    "R_(r)aj^(f)",
    "P_a(b)^c(j)",
    "P_a(b)^k(j)",
    "P_(r)a(b)^(f)(j)",
    "T_ij^c",
    "T_ij^k",
    "R_(r)ij^(f)",
    "P_i(b)^c(j)",
    "P_i(b)^k(j)",
    "P_(r)i(b)^(f)(j)",
    "S_(a)(b)^c(i)(j)",
    "S_(a)(b)^k(i)(j)",
    "S_(r)(a)(b)^(f)(i)(j)",
];

const CURVATURE_LABELS: [&str; 18] = [
    "R_abc^d",
    "R_ibc^l",
    "R_(l)(a)bc^(d)(i)",
    "R_abk^d",
    "R_ibk^l",
    "R_(l)(a)bk^(d)(i)",
    "P_ab(c)^d(k)",
    "P_ib(c)^l(k)",
    "P_(l)(a)b(c)^(d)(i)(k)",
    "R_ajk^d",
    "R_ijk^l",
    "R_(l)(a)jk^(d)(i)",
    "P_aj(c)^d(k)",
    "P_ij(c)^l(k)",
    "P_(l)(a)j(c)^(d)(i)(k)",
    "S_a(b)(c)^d(j)(k)",
    "S_i(b)(c)^l(j)(k)",
    "S_(l)(a)(b)(c)^(d)(i)(j)(k)",
];

/// One labelled family of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub slots: Slots,
    pub label: &'static str,
    /// Identically zero by construction (torsion only).
    pub structural_zero: bool,
    pub tensor: DTensor,
}

/// 18 families in table order; for torsion, 6 of them are structural zeros
/// and the remaining 12 are the effective d-tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub entries: Vec<Entry>,
}

impl Table {
    pub fn get(&self, slots: Slots) -> &DTensor {
        &self
            .entries
            .iter()
            .find(|e| e.slots == slots)
            .unwrap()
            .tensor
    }

    pub fn by_label(&self, label: &str) -> Option<&DTensor> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.tensor)
    }
}

#[cfg(test)]
mod tests;

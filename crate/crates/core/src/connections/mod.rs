//! Nonlinear connections, N-linear connections, adapted frames, Poisson
//! brackets, h- and v-covariant derivatives and deflection d-tensors.

mod covariant;
mod frame;
mod nlinear;
mod nonlinear;

pub use covariant::{covariant_derivative, deflections, deflections_closed_form, Deflections};
pub use frame::{
    adapted_frame, almost_product, bracket_coefficients, integrability_check, projectors,
    AdaptedFrame, AlmostProduct, Brackets, IntegrabilityReport, Projectors, INTEGRABILITY_TOL,
};
pub use nlinear::{ConnectionAt, NLinearConnection, NLinearSource};
pub use nonlinear::{NlcAt, NlcSource, NonlinearConnection};

use crate::bundle::{Block, Dims, IndexKind};
use crate::grid::Grid;

/// The nine coefficient families of an N-linear connection, named by the
/// block of the frame vector being differentiated (target) and the block of
/// the direction: `A` (temporal directions), `H` (spatial), `C` (vertical).
///
/// Storage is `[out][in][dir]`:
/// `A^a_{bc}` at `[a][b][c]`, `A^i_{jc}` at `[i][j][c]`,
/// `A^{(a)(j)}_{(i)(b)c}` at `[(i,a)][(j,b)][c]`, and likewise for `H`, `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coeff {
    Att,
    Ass,
    App,
    Htt,
    Hss,
    Hpp,
    Ctt,
    Css,
    Cpp,
}

impl Coeff {
    pub const ALL: [Coeff; 9] = [
        Coeff::Att,
        Coeff::Ass,
        Coeff::App,
        Coeff::Htt,
        Coeff::Hss,
        Coeff::Hpp,
        Coeff::Ctt,
        Coeff::Css,
        Coeff::Cpp,
    ];

    pub fn of(target: Block, dir: Block) -> Coeff {
        use Block::*;
        match (dir, target) {
            (T, T) => Coeff::Att,
            (T, S) => Coeff::Ass,
            (T, P) => Coeff::App,
            (S, T) => Coeff::Htt,
            (S, S) => Coeff::Hss,
            (S, P) => Coeff::Hpp,
            (P, T) => Coeff::Ctt,
            (P, S) => Coeff::Css,
            (P, P) => Coeff::Cpp,
        }
    }

    pub fn target(&self) -> Block {
        match self {
            Coeff::Att | Coeff::Htt | Coeff::Ctt => Block::T,
            Coeff::Ass | Coeff::Hss | Coeff::Css => Block::S,
            _ => Block::P,
        }
    }

    pub fn dir(&self) -> Block {
        match self {
            Coeff::Att | Coeff::Ass | Coeff::App => Block::T,
            Coeff::Htt | Coeff::Hss | Coeff::Hpp => Block::S,
            _ => Block::P,
        }
    }

    fn slot(&self) -> usize {
        Coeff::ALL.iter().position(|c| c == self).unwrap()
    }

    /// Short key used in scenario files: `A_tt`, `H_pp`, ….
    pub fn key(&self) -> &'static str {
        [
            "A_tt", "A_ss", "A_pp", "H_tt", "H_ss", "H_pp", "C_tt", "C_ss", "C_pp",
        ][self.slot()]
    }

    pub fn from_key(s: &str) -> Option<Coeff> {
        Coeff::ALL.into_iter().find(|c| c.key() == s)
    }

    /// Index label in the `symbol_lower^upper` style.
    pub fn label(&self) -> &'static str {
        [
            "A_bc^a",
            "A_jc^i",
            "A_(i)(b)c^(a)(j)",
            "H_bk^a",
            "H_jk^i",
            "H_(i)(b)k^(a)(j)",
            "C_b(c)^a(k)",
            "C_j(c)^i(k)",
            "C_(i)(b)(c)^(a)(j)(k)",
        ][self.slot()]
    }

    pub fn kinds(&self) -> [IndexKind; 3] {
        [
            IndexKind::up(self.target()),
            IndexKind::down(self.target()),
            IndexKind::down(self.dir()),
        ]
    }

    pub fn shape(&self, d: Dims) -> [usize; 3] {
        let t = d.len(self.target());
        [t, t, d.len(self.dir())]
    }
}

/// One value per coefficient family.
#[derive(Debug, Clone)]
pub struct Nine<T> {
    grids: Vec<Grid<T>>,
}

impl<T> Nine<T> {
    pub fn from_fn(mut f: impl FnMut(Coeff) -> Grid<T>) -> Nine<T> {
        Nine {
            grids: Coeff::ALL.iter().map(|c| f(*c)).collect(),
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Coeff) -> Result<Grid<T>, E>) -> Result<Nine<T>, E> {
        Ok(Nine {
            grids: Coeff::ALL.iter().map(|c| f(*c)).collect::<Result<_, E>>()?,
        })
    }

    pub fn get(&self, c: Coeff) -> &Grid<T> {
        &self.grids[c.slot()]
    }

    pub fn get_mut(&mut self, c: Coeff) -> &mut Grid<T> {
        &mut self.grids[c.slot()]
    }

    /// Family acting on frame vectors of `target` along directions of `dir`.
    pub fn family(&self, target: Block, dir: Block) -> &Grid<T> {
        self.get(Coeff::of(target, dir))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Nine<U> {
        Nine {
            grids: self.grids.iter().map(|g| g.map(&mut f)).collect(),
        }
    }
}

/// What a [`Perturbation`] corrupts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    N1,
    N2,
    Coeff(Coeff),
}

/// A constant offset added to one flat component of one family, in the
/// chart where the connection is evaluated. Moving a perturbed connection to
/// another chart starts again from the uncorrupted source, so a perturbation
/// models bad data in one chart; covariance checks must catch it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub target: Target,
    pub index: usize,
    pub delta: f64,
}

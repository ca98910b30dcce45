//! Tensor calculus on the dual 1-jet bundle `J^{1*}(T, M)`.
//!
//! Coordinates are `(t^a, x^i, p_i^a)` with `a = 1..m`, `i = 1..n`. Scalar
//! fields are parsed expressions; all derivatives come from truncated Taylor
//! arithmetic ([`jet`]).

pub mod bundle;
pub mod connections;
pub mod error;
pub mod expr;
pub mod grid;
pub mod jet;
pub mod metrics;
pub mod num;
pub mod tensors;
pub mod verify;

pub use bundle::{Block, CoordinateChange, DTensor, Dims, IndexKind, Point};
pub use error::{Error, Result};
pub use expr::{Coord, ScalarField};
pub use grid::Grid;
pub use jet::Jet;

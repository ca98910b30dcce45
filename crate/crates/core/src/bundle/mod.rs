//! Dimensions, points, charts and distinguished tensors of the bundle.

mod change;
pub(crate) mod chart;
mod dtensor;
mod fields;

pub use change::{ChangeJacobians, CoordinateChange};
pub use dtensor::{DTensor, IndexKind};
pub use fields::{
    fundamental_metric, h_normalization_tensor, liouville_hamilton, polymomentum_hamilton_tensor,
};

use crate::error::{Error, Result};

/// `m = dim T` (temporal) and `n = dim M` (spatial); the total space has
/// `m + n + m·n` coordinates `(t^a, x^i, p_i^a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

/// Coordinate blocks: temporal `t`, spatial `x`, momenta `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    T,
    S,
    P,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::T, Block::S, Block::P];
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Result<Dims> {
        if m == 0 || n == 0 {
            return Err(Error::Invalid(format!(
                "dimensions must be positive (m={m}, n={n})"
            )));
        }
        Ok(Dims { m, n })
    }

    pub fn total(&self) -> usize {
        self.m + self.n + self.m * self.n
    }

    pub fn t(&self, a: usize) -> usize {
        a
    }

    pub fn x(&self, i: usize) -> usize {
        self.m + i
    }

    /// Flat position of `p_i^a`.
    pub fn p(&self, i: usize, a: usize) -> usize {
        self.m + self.n + i * self.m + a
    }

    /// Index of the pair `(i, a)` inside the momentum block.
    pub fn pair(&self, i: usize, a: usize) -> usize {
        i * self.m + a
    }

    /// Inverse of [`Dims::pair`]: `(i, a)`.
    pub fn unpair(&self, k: usize) -> (usize, usize) {
        (k / self.m, k % self.m)
    }

    pub fn len(&self, b: Block) -> usize {
        match b {
            Block::T => self.m,
            Block::S => self.n,
            Block::P => self.m * self.n,
        }
    }

    pub fn offset(&self, b: Block) -> usize {
        match b {
            Block::T => 0,
            Block::S => self.m,
            Block::P => self.m + self.n,
        }
    }

    pub fn block_of(&self, var: usize) -> Block {
        if var < self.m {
            Block::T
        } else if var < self.m + self.n {
            Block::S
        } else {
            Block::P
        }
    }
}

/// A point `(t, x, p)` stored as the flat coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    dims: Dims,
    z: Vec<f64>,
}

impl Point {
    /// `p` is indexed `p[i][a]` (spatial index first).
    pub fn new(dims: Dims, t: &[f64], x: &[f64], p: &[Vec<f64>]) -> Result<Point> {
        if t.len() != dims.m {
            return Err(Error::dims(
                format!("{} temporal coordinates", dims.m),
                t.len(),
            ));
        }
        if x.len() != dims.n {
            return Err(Error::dims(
                format!("{} spatial coordinates", dims.n),
                x.len(),
            ));
        }
        if p.len() != dims.n || p.iter().any(|row| row.len() != dims.m) {
            return Err(Error::dims(
                format!("momenta of shape {}x{}", dims.n, dims.m),
                format!("{} rows", p.len()),
            ));
        }
        let mut z = Vec::with_capacity(dims.total());
        z.extend_from_slice(t);
        z.extend_from_slice(x);
        for row in p {
            z.extend_from_slice(row);
        }
        Ok(Point { dims, z })
    }

    pub fn from_flat(dims: Dims, z: Vec<f64>) -> Result<Point> {
        if z.len() != dims.total() {
            return Err(Error::dims(dims.total(), z.len()));
        }
        Ok(Point { dims, z })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coords(&self) -> &[f64] {
        &self.z
    }

    pub fn t(&self) -> &[f64] {
        &self.z[..self.dims.m]
    }

    pub fn x(&self) -> &[f64] {
        &self.z[self.dims.m..self.dims.m + self.dims.n]
    }

    pub fn p(&self, i: usize, a: usize) -> f64 {
        self.z[self.dims.p(i, a)]
    }

    /// Momenta as rows `p[i][a]`.
    pub fn p_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dims.n)
            .map(|i| (0..self.dims.m).map(|a| self.p(i, a)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_layout() {
        let d = Dims::new(2, 3).unwrap();
        assert_eq!(d.total(), 11);
        assert_eq!(d.p(1, 0), 2 + 3 + 2);
        assert_eq!(d.unpair(d.pair(2, 1)), (2, 1));
        let pt = Point::new(
            d,
            &[1.0, 2.0],
            &[3.0, 4.0, 5.0],
            &[vec![6.0, 7.0], vec![8.0, 9.0], vec![10.0, 11.0]],
        )
        .unwrap();
        assert_eq!(pt.p(2, 1), 11.0);
        assert_eq!(pt.x(), &[3.0, 4.0, 5.0]);
        assert!(Point::new(d, &[1.0], &[0.0; 3], &[]).is_err());
    }
}

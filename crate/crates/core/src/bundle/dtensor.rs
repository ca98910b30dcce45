use std::fmt;

use super::{Block, ChangeJacobians, Dims};
use crate::error::{Error, Result};
use crate::grid::Grid;

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Slot type of a d-tensor index.
///
/// `PVec` is the paired slot of `p_i^a` (upper temporal `(a)`, lower spatial
/// `(i)`) and `PForm` its dual (lower `(a)`, upper `(i)`). Both are flattened
/// to the pair index `i·m + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    TUp,
    TDown,
    SUp,
    SDown,
    PVec,
    PForm,
}

impl IndexKind {
    pub fn len(&self, d: Dims) -> usize {
        d.len(self.block())
    }

    pub fn block(&self) -> Block {
        match self {
            IndexKind::TUp | IndexKind::TDown => Block::T,
            IndexKind::SUp | IndexKind::SDown => Block::S,
            IndexKind::PVec | IndexKind::PForm => Block::P,
        }
    }

    pub fn up(b: Block) -> IndexKind {
        match b {
            Block::T => IndexKind::TUp,
            Block::S => IndexKind::SUp,
            Block::P => IndexKind::PVec,
        }
    }

    pub fn down(b: Block) -> IndexKind {
        match b {
            Block::T => IndexKind::TDown,
            Block::S => IndexKind::SDown,
            Block::P => IndexKind::PForm,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IndexKind::TUp => "TUp",
            IndexKind::TDown => "TDown",
            IndexKind::SUp => "SUp",
            IndexKind::SDown => "SDown",
            IndexKind::PVec => "PVec",
            IndexKind::PForm => "PForm",
        }
    }

    fn dual(&self) -> IndexKind {
        match self {
            IndexKind::TUp => IndexKind::TDown,
            IndexKind::TDown => IndexKind::TUp,
            IndexKind::SUp => IndexKind::SDown,
            IndexKind::SDown => IndexKind::SUp,
            IndexKind::PVec => IndexKind::PForm,
            IndexKind::PForm => IndexKind::PVec,
        }
    }
}

/// Components of a d-tensor at one point, in the adapted frame of one chart.
#[derive(Clone, PartialEq)]
pub struct DTensor {
    dims: Dims,
    kinds: Vec<IndexKind>,
    data: Grid<f64>,
}

impl fmt::Debug for DTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DTensor")
            .field("kinds", &self.kinds)
            .field("data", &self.data.data())
            .finish()
    }
}

impl DTensor {
    pub fn shape_of(dims: Dims, kinds: &[IndexKind]) -> Vec<usize> {
        kinds.iter().map(|k| k.len(dims)).collect()
    }

    pub fn zeros(dims: Dims, kinds: &[IndexKind]) -> DTensor {
        DTensor {
            dims,
            kinds: kinds.to_vec(),
            data: Grid::filled(&Self::shape_of(dims, kinds), 0.0),
        }
    }

    pub fn from_fn(dims: Dims, kinds: &[IndexKind], f: impl FnMut(&[usize]) -> f64) -> DTensor {
        DTensor {
            dims,
            kinds: kinds.to_vec(),
            data: Grid::from_fn(&Self::shape_of(dims, kinds), f),
        }
    }

    pub fn from_vec(dims: Dims, kinds: &[IndexKind], data: Vec<f64>) -> Result<DTensor> {
        let shape = Self::shape_of(dims, kinds);
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::dims(len, data.len()));
        }
        Ok(DTensor {
            dims,
            kinds: kinds.to_vec(),
            data: Grid::from_vec(&shape, data),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn kinds(&self) -> &[IndexKind] {
        &self.kinds
    }

    pub fn shape(&self) -> &[usize] {
        self.data.shape()
    }

    pub fn data(&self) -> &[f64] {
        self.data.data()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data.data()[self.data.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.data.offset(idx);
        self.data.data_mut()[k] = v;
    }

    pub fn map(&self, f: impl FnMut(&f64) -> f64) -> DTensor {
        DTensor {
            dims: self.dims,
            kinds: self.kinds.clone(),
            data: self.data.map(f),
        }
    }

    /// Largest `|component|`; NaN if any component is NaN.
    pub fn max_abs(&self) -> f64 {
        self.data().iter().fold(0.0, |m, v| nan_max(m, v.abs()))
    }

    /// Largest componentwise difference; fails if the index kinds differ.
    pub fn max_abs_diff(&self, other: &DTensor) -> Result<f64> {
        if self.kinds != other.kinds || self.dims != other.dims {
            return Err(Error::dims(
                format!("{:?}", self.kinds),
                format!("{:?}", other.kinds),
            ));
        }
        Ok(self
            .data()
            .iter()
            .zip(other.data())
            .fold(0.0, |m, (a, b)| nan_max(m, (a - b).abs())))
    }

    /// Components in the tilde chart from components in the original chart,
    /// contracting every slot with the appropriate Jacobian block.
    pub fn transform(&self, jac: &ChangeJacobians) -> DTensor {
        let mut cur = self.data.data().to_vec();
        let shape = self.shape().to_vec();
        for (ax, kind) in self.kinds.iter().enumerate() {
            let f = jac.factor(*kind);
            let len = shape[ax];
            let inner: usize = shape[ax + 1..].iter().product();
            let outer: usize = shape[..ax].iter().product();
            let mut next = vec![0.0; cur.len()];
            for o in 0..outer {
                for new in 0..len {
                    for old in 0..len {
                        let c = f[new * len + old];
                        if c == 0.0 {
                            continue;
                        }
                        let src = (o * len + old) * inner;
                        let dst = (o * len + new) * inner;
                        for k in 0..inner {
                            next[dst + k] += c * cur[src + k];
                        }
                    }
                }
            }
            cur = next;
        }
        DTensor {
            dims: self.dims,
            kinds: self.kinds.clone(),
            data: Grid::from_vec(&shape, cur),
        }
    }

    /// Contracts slot `up` with slot `down`; they must be dual kinds.
    pub fn contract(&self, up: usize, down: usize) -> Result<DTensor> {
        if up == down || up >= self.kinds.len() || down >= self.kinds.len() {
            return Err(Error::Invalid(format!(
                "cannot contract slots {up} and {down}"
            )));
        }
        if self.kinds[up].dual() != self.kinds[down] {
            return Err(Error::Invalid(format!(
                "slots {} and {} are not dual",
                self.kinds[up].name(),
                self.kinds[down].name()
            )));
        }
        let kinds: Vec<IndexKind> = self
            .kinds
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != up && *k != down)
            .map(|(_, k)| *k)
            .collect();
        let len = self.shape()[up];
        let mut full = vec![0; self.kinds.len()];
        Ok(DTensor::from_fn(self.dims, &kinds, |idx| {
            let mut it = idx.iter();
            for (k, slot) in full.iter_mut().enumerate() {
                if k != up && k != down {
                    *slot = *it.next().unwrap();
                }
            }
            (0..len)
                .map(|s| {
                    full[up] = s;
                    full[down] = s;
                    self.get(&full)
                })
                .sum()
        }))
    }

    pub fn tensor_product(&self, other: &DTensor) -> Result<DTensor> {
        if self.dims != other.dims {
            return Err(Error::dims(
                format!("{:?}", self.dims),
                format!("{:?}", other.dims),
            ));
        }
        let mut kinds = self.kinds.clone();
        kinds.extend_from_slice(&other.kinds);
        let data = self
            .data()
            .iter()
            .flat_map(|a| other.data().iter().map(move |b| a * b))
            .collect();
        DTensor::from_vec(self.dims, &kinds, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_of_product() {
        let d = Dims::new(2, 1).unwrap();
        let v = DTensor::from_vec(d, &[IndexKind::PVec], vec![1.0, 2.0]).unwrap();
        let w = DTensor::from_vec(d, &[IndexKind::PForm], vec![3.0, -1.0]).unwrap();
        let s = v.tensor_product(&w).unwrap().contract(0, 1).unwrap();
        assert_eq!(s.data(), &[1.0]);
        assert!(v.tensor_product(&v).unwrap().contract(0, 1).is_err());
    }
}

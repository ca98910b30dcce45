//! Dense row-major arrays used for coefficient families.

use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(shape: &[usize], value: T) -> Grid<T> {
        let len = shape.iter().product();
        Grid {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Grid<T> {
        let len: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Grid {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn try_from_fn<E>(
        shape: &[usize],
        mut f: impl FnMut(&[usize]) -> Result<T, E>,
    ) -> Result<Grid<T>, E> {
        let mut err = None;
        let g = Grid::from_fn(shape, |i| match f(i) {
            Ok(v) => Some(v),
            Err(e) => {
                if err.is_none() {
                    err = Some(e);
                }
                None
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(Grid {
                shape: g.shape,
                data: g.data.into_iter().map(Option::unwrap).collect(),
            }),
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Grid<T> {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "grid shape mismatch"
        );
        Grid {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut k = 0;
        for (i, n) in idx.iter().zip(&self.shape) {
            debug_assert!(i < n, "index {idx:?} out of shape {:?}", self.shape);
            k = k * n + i;
        }
        k
    }

    /// Element at a runtime-length index.
    pub fn at(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Grid<U>, E> {
        Ok(Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect::<Result<_, E>>()?,
        })
    }
}

impl<T, const R: usize> Index<[usize; R]> for Grid<T> {
    type Output = T;
    fn index(&self, idx: [usize; R]) -> &T {
        &self.data[self.offset(&idx)]
    }
}

impl<T, const R: usize> IndexMut<[usize; R]> for Grid<T> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut T {
        let k = self.offset(&idx);
        &mut self.data[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major() {
        let g = Grid::from_fn(&[2, 3], |i| i[0] * 10 + i[1]);
        assert_eq!(g.data(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(g[[1, 2]], 12);
    }
}

//! Scalar abstraction shared by plain floats and jets, plus small dense
//! linear algebra that works over either.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::jet::Jet;

pub trait Num:
    Clone
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn value(&self) -> f64;
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn scale(&self, k: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, e: f64) -> Self;
    /// Whether derivatives are carried (a square root at 0 is then singular).
    fn has_derivatives(&self) -> bool;
}

impl Num for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn scale(&self, k: f64) -> f64 {
        self * k
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn tan(&self) -> f64 {
        f64::tan(*self)
    }
    fn sinh(&self) -> f64 {
        f64::sinh(*self)
    }
    fn cosh(&self) -> f64 {
        f64::cosh(*self)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn recip(&self) -> f64 {
        1.0 / self
    }
    fn powi(&self, n: i32) -> f64 {
        f64::powi(*self, n)
    }
    fn powf(&self, e: f64) -> f64 {
        f64::powf(*self, e)
    }
    fn has_derivatives(&self) -> bool {
        false
    }
}

impl Num for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, c: f64) -> Jet {
        Jet::constant(self.space(), self.order(), c)
    }
    fn scale(&self, k: f64) -> Jet {
        Jet::scale(self, k)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn tan(&self) -> Jet {
        Jet::tan(self)
    }
    fn sinh(&self) -> Jet {
        Jet::sinh(self)
    }
    fn cosh(&self) -> Jet {
        Jet::cosh(self)
    }
    fn sqrt(&self) -> Jet {
        Jet::sqrt(self)
    }
    fn recip(&self) -> Jet {
        Jet::recip(self)
    }
    fn powi(&self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
    fn powf(&self, e: f64) -> Jet {
        Jet::powf(self, e)
    }
    fn has_derivatives(&self) -> bool {
        self.order() > 0
    }
}

/// Inverse and determinant (value) of a row-major `n × n` matrix by
/// Gauss–Jordan elimination with partial pivoting on values.
///
/// Returns `None` when a pivot vanishes relative to the matrix scale.
pub fn invert<N: Num>(a: &[N], n: usize) -> Option<(Vec<N>, f64)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Some((Vec::new(), 1.0));
    }
    let one = a[0].lift(1.0);
    let zero = a[0].lift(0.0);
    let mut m: Vec<N> = a.to_vec();
    let mut inv: Vec<N> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                one.clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    let scale = a.iter().map(|x| x.value().abs()).fold(0.0, f64::max);
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| {
                m[r * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[s * n + col].value().abs())
            })
            .unwrap();
        let pv = m[piv * n + col].value();
        if pv.abs() <= 1e-14 * scale || !pv.is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        let r = m[col * n + col].recip();
        for k in 0..n {
            m[col * n + k] = m[col * n + k].clone() * r.clone();
            inv[col * n + k] = inv[col * n + k].clone() * r.clone();
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col].clone();
            if f.value() == 0.0 && !f.has_derivatives() {
                continue;
            }
            for k in 0..n {
                m[row * n + k] = m[row * n + k].clone() - f.clone() * m[col * n + k].clone();
                inv[row * n + k] = inv[row * n + k].clone() - f.clone() * inv[col * n + k].clone();
            }
        }
    }
    Some((inv, det))
}

/// Determinant of the value part of a row-major matrix.
pub fn det_value<N: Num>(a: &[N], n: usize) -> f64 {
    let vals: Vec<f64> = a.iter().map(Num::value).collect();
    nalgebra::DMatrix::from_row_slice(n, n, &vals).determinant()
}

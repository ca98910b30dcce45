//! Truncated multivariate Taylor expansions (forward-mode AD up to order 3).
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function
//! of `V` variables for every monomial of total degree `≤ order`. Monomials are
//! sorted by degree, so a lower-order jet is a prefix of a higher-order one and
//! mixed-order arithmetic simply truncates to the smaller order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, LazyLock, Mutex};

/// Highest supported expansion order.
pub const MAX_ORDER: u8 = 3;

type Mono = [u16; 3];

/// Monomial bookkeeping and product tables for one number of variables.
pub struct JetSpace {
    nvars: usize,
    len: [usize; 4],
    index: HashMap<(u8, Mono), usize>,
    mul: Vec<(u32, u32, u32)>,
    mul_end: [usize; 4],
    diff: Vec<Vec<(u32, f64)>>,
}

static SPACES: LazyLock<Mutex<HashMap<usize, Arc<JetSpace>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

impl JetSpace {
    /// Shared space for `nvars` variables.
    pub fn get(nvars: usize) -> Arc<JetSpace> {
        let mut map = SPACES.lock().expect("jet space cache poisoned");
        map.entry(nvars)
            .or_insert_with(|| Arc::new(JetSpace::build(nvars)))
            .clone()
    }

    fn build(nvars: usize) -> JetSpace {
        let mut monos: Vec<(u8, Mono)> = vec![(0, [0; 3])];
        let mut len = [1usize; 4];
        for v in 0..nvars {
            monos.push((1, [v as u16, 0, 0]));
        }
        len[1] = monos.len();
        for v in 0..nvars {
            for w in v..nvars {
                monos.push((2, [v as u16, w as u16, 0]));
            }
        }
        len[2] = monos.len();
        for v in 0..nvars {
            for w in v..nvars {
                for u in w..nvars {
                    monos.push((3, [v as u16, w as u16, u as u16]));
                }
            }
        }
        len[3] = monos.len();
        let index: HashMap<(u8, Mono), usize> =
            monos.iter().enumerate().map(|(k, m)| (*m, k)).collect();

        let merge = |a: &(u8, Mono), b: &(u8, Mono)| -> (u8, Mono) {
            let mut vars: Vec<u16> = a.1[..a.0 as usize]
                .iter()
                .chain(b.1[..b.0 as usize].iter())
                .copied()
                .collect();
            vars.sort_unstable();
            let mut m = [0u16; 3];
            m[..vars.len()].copy_from_slice(&vars);
            (vars.len() as u8, m)
        };

        let mut mul = Vec::new();
        for (ia, a) in monos.iter().enumerate() {
            for (ib, b) in monos.iter().enumerate() {
                if a.0 + b.0 > MAX_ORDER {
                    continue;
                }
                let out = merge(a, b);
                mul.push((index[&out] as u32, ia as u32, ib as u32));
            }
        }
        mul.sort_by_key(|&(o, _, _)| monos[o as usize].0);
        let mut mul_end = [0usize; 4];
        for (d, end) in mul_end.iter_mut().enumerate() {
            *end = mul
                .iter()
                .take_while(|&&(o, _, _)| monos[o as usize].0 as usize <= d)
                .count();
        }

        let mut diff = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let unit = (1u8, [v as u16, 0, 0]);
            let table: Vec<(u32, f64)> = monos[..len[2]]
                .iter()
                .map(|m| {
                    let up = merge(m, &unit);
                    let count = up.1[..up.0 as usize]
                        .iter()
                        .filter(|&&x| x == v as u16)
                        .count();
                    (index[&up] as u32, count as f64)
                })
                .collect();
            diff.push(table);
        }

        JetSpace {
            nvars,
            len,
            index,
            mul,
            mul_end,
            diff,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: u8) -> usize {
        self.len[order as usize]
    }

    /// Coefficient slot of the monomial `Π z_v` for the (unsorted) variable list.
    pub fn slot(&self, vars: &[usize]) -> usize {
        let mut m = [0u16; 3];
        let mut sorted: Vec<u16> = vars.iter().map(|&v| v as u16).collect();
        sorted.sort_unstable();
        m[..sorted.len()].copy_from_slice(&sorted);
        self.index[&(sorted.len() as u8, m)]
    }
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .finish()
    }
}

/// Truncated Taylor expansion of a scalar function.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: u8,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.c[0])
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, order: u8, value: f64) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet {
            space: space.clone(),
            order,
            c,
        }
    }

    /// The coordinate function `z_var` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, order: u8, value: f64, var: usize) -> Jet {
        let mut j = Jet::constant(space, order, value);
        if order > 0 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Identity jets for every variable of `space` around `point`.
    pub fn seed(point: &[f64], order: u8) -> Vec<Jet> {
        let space = JetSpace::get(point.len());
        point
            .iter()
            .enumerate()
            .map(|(v, &x)| Jet::variable(&space, order, x, v))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// First partial derivative at the expansion point (0 for order-0 jets).
    pub fn d1(&self, var: usize) -> f64 {
        if self.order == 0 {
            0.0
        } else {
            self.c[1 + var]
        }
    }

    /// Mixed partial derivative `∂^k f / ∂z_{v1}…∂z_{vk}` at the expansion point.
    pub fn derivative(&self, vars: &[usize]) -> f64 {
        if vars.len() > self.order as usize {
            return f64::NAN;
        }
        if vars.is_empty() {
            return self.c[0];
        }
        let slot = self.space.slot(vars);
        let mut sorted = vars.to_vec();
        sorted.sort_unstable();
        let mut factorial = 1.0;
        let mut run = 1.0;
        for k in 1..sorted.len() {
            if sorted[k] == sorted[k - 1] {
                run += 1.0;
                factorial *= run;
            } else {
                run = 1.0;
            }
        }
        self.c[slot] * factorial
    }

    pub fn truncate(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            space: self.space.clone(),
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    /// Partial derivative with respect to `var`; the result has one order less.
    pub fn diff(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let n = self.space.len(order);
        let table = &self.space.diff[var];
        let c = (0..n)
            .map(|k| {
                let (src, f) = table[k];
                f * self.c[src as usize]
            })
            .collect();
        Jet {
            space: self.space.clone(),
            order,
            c,
        }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            order: self.order,
            c: self.c.iter().map(|x| x * k).collect(),
        }
    }

    pub fn add_const(&self, k: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += k;
        j
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jet spaces differ");
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        let c = (0..n).map(|k| f(self.c[k], other.c[k])).collect();
        Jet {
            space: self.space.clone(),
            order,
            c,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jet spaces differ");
        let order = self.order.min(other.order);
        let sp = &self.space;
        let mut c = vec![0.0; sp.len(order)];
        for &(o, a, b) in &sp.mul[..sp.mul_end[order as usize]] {
            c[o as usize] += self.c[a as usize] * other.c[b as usize];
        }
        Jet {
            space: sp.clone(),
            order,
            c,
        }
    }

    /// `f(self)` given the Taylor coefficients `f^{(k)}(u0)/k!` of `f` at the value.
    pub fn compose(&self, taylor: [f64; 4]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut out = Jet::constant(&self.space, self.order, taylor[0]);
        let mut power = h.clone();
        for (k, &tk) in taylor.iter().enumerate().skip(1) {
            if k > self.order as usize {
                break;
            }
            for (o, p) in out.c.iter_mut().zip(&power.c) {
                *o += tk * p;
            }
            if k < self.order as usize {
                power = power.product(&h);
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose([e, e, e / 2.0, e / 6.0])
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Jet {
        let u = self.c[0];
        self.compose([u.ln(), 1.0 / u, -0.5 / (u * u), 1.0 / (3.0 * u * u * u)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0])
    }

    pub fn tan(&self) -> Jet {
        let t = self.c[0].tan();
        let sec2 = 1.0 + t * t;
        self.compose([t, sec2, t * sec2, sec2 * (1.0 + 3.0 * t * t) / 3.0])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([s, c, s / 2.0, c / 6.0])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([c, s, c / 2.0, s / 6.0])
    }

    /// Square root; the value must be positive unless the jet has order 0.
    pub fn sqrt(&self) -> Jet {
        let r = self.c[0].sqrt();
        let r3 = r * r * r;
        self.compose([r, 0.5 / r, -0.125 / r3, 0.0625 / (r3 * r * r)])
    }

    pub fn recip(&self) -> Jet {
        let u = self.c[0];
        let i = 1.0 / u;
        self.compose([i, -i * i, i * i * i, -i * i * i * i])
    }

    /// Real power with a constant exponent; the value must be positive.
    pub fn powf(&self, e: f64) -> Jet {
        let u = self.c[0];
        let f0 = u.powf(e);
        self.compose([
            f0,
            e * u.powf(e - 1.0),
            e * (e - 1.0) / 2.0 * u.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) / 6.0 * u.powf(e - 3.0),
        ])
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(&self.space, self.order, 1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.product(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.product(&base);
            }
        }
        acc
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.product(o)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        self.product(&o.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet { (&self).$m(&o) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn third_derivative_of_quartic() {
        let z = Jet::seed(&[2.0], 3);
        let f = z[0].powi(4);
        assert_relative_eq!(f.derivative(&[0, 0, 0]), 48.0, epsilon = 1e-12);
        assert_relative_eq!(f.derivative(&[0, 0]), 48.0, epsilon = 1e-12);
        assert_relative_eq!(f.derivative(&[0]), 32.0, epsilon = 1e-12);
    }

    #[test]
    fn mixed_partials() {
        let z = Jet::seed(&[0.3, -0.7], 3);
        let f = (&z[0] * &z[1]).sin();
        let (x, y) = (0.3f64, -0.7f64);
        let u = x * y;
        assert_relative_eq!(
            f.derivative(&[0, 1]),
            u.cos() - u * u.sin(),
            epsilon = 1e-12
        );
        let fxxy = -2.0 * y * u.sin() - x * y * y * u.cos();
        assert_relative_eq!(f.derivative(&[0, 0, 1]), fxxy, epsilon = 1e-12);
    }

    #[test]
    fn diff_lowers_order() {
        let z = Jet::seed(&[0.5, 1.5], 3);
        let f = (&z[0] * &z[0]) * z[1].exp();
        let g = f.diff(0);
        assert_eq!(g.order(), 2);
        assert_relative_eq!(g.value(), 2.0 * 0.5 * 1.5f64.exp(), epsilon = 1e-12);
        assert_relative_eq!(g.derivative(&[1, 1]), 1.0 * 1.5f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn mixed_order_truncates() {
        let z = Jet::seed(&[1.0], 3);
        let a = z[0].truncate(1);
        let s = &a + &z[0];
        assert_eq!(s.order(), 1);
        assert_eq!(s.coeffs().len(), 2);
    }

    #[test]
    fn elementary_identities() {
        let z = Jet::seed(&[0.4, 0.9], 3);
        let u = &z[0] * &z[1];
        let one = &(&u.sin() * &u.sin()) + &(&u.cos() * &u.cos());
        let lg = u.exp().ln();
        let ch = &(&u.cosh() * &u.cosh()) - &(&u.sinh() * &u.sinh());
        let sq = &u.sqrt() * &u.sqrt();
        let q = &u.tan() - &(&u.sin() / &u.cos());
        let pw = &u.powf(2.5) - &(&u.powi(2) * &u.sqrt());
        for k in 0..one.coeffs().len() {
            let unit = if k == 0 { 1.0 } else { 0.0 };
            assert_relative_eq!(one.coeffs()[k], unit, epsilon = 1e-12);
            assert_relative_eq!(ch.coeffs()[k], unit, epsilon = 1e-12);
            assert_relative_eq!(lg.coeffs()[k], u.coeffs()[k], epsilon = 1e-12);
            assert_relative_eq!(sq.coeffs()[k], u.coeffs()[k], epsilon = 1e-12);
            assert_relative_eq!(q.coeffs()[k], 0.0, epsilon = 1e-12);
            assert_relative_eq!(pw.coeffs()[k], 0.0, epsilon = 1e-12);
        }
    }
}

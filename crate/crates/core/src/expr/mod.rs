//! Scalar expressions in the bundle coordinates.
//!
//! Grammar: numeric constants, `pi`, coordinates `t[a]`, `x[i]`, `p[i][a]`
//! (1-based), binary `+ - * / ^` (`^` binds tightest and is right
//! associative), unary `-`, and the functions `sin cos tan exp log sqrt sinh
//! cosh`. Expressions evaluate over plain floats or over jets.

mod parse;

use std::fmt;
use std::sync::Arc;

use crate::bundle::{Block, Dims, Point};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace, MAX_ORDER};
use crate::num::Num;

/// A bundle coordinate, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    T(usize),
    X(usize),
    /// `p_i^a` as `P(i, a)`.
    P(usize, usize),
}

impl Coord {
    pub fn flat(&self, dims: Dims) -> usize {
        match *self {
            Coord::T(a) => dims.t(a),
            Coord::X(i) => dims.x(i),
            Coord::P(i, a) => dims.p(i, a),
        }
    }

    pub fn from_flat(dims: Dims, k: usize) -> Coord {
        match dims.block_of(k) {
            Block::T => Coord::T(k),
            Block::S => Coord::X(k - dims.m),
            Block::P => {
                let (i, a) = dims.unpair(k - dims.m - dims.n);
                Coord::P(i, a)
            }
        }
    }

    pub fn block(&self) -> Block {
        match self {
            Coord::T(_) => Block::T,
            Coord::X(_) => Block::S,
            Coord::P(..) => Block::P,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Coord::T(a) => write!(f, "t[{}]", a + 1),
            Coord::X(i) => write!(f, "x[{}]", i + 1),
            Coord::P(i, a) => write!(f, "p[{}][{}]", i + 1, a + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Coord(Coord),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn visit_coords(&self, f: &mut impl FnMut(Coord)) {
        match self {
            Node::Const(_) => {}
            Node::Coord(c) => f(*c),
            Node::Neg(e) | Node::Call(_, e) => e.visit_coords(f),
            Node::Bin(_, l, r) => {
                l.visit_coords(f);
                r.visit_coords(f);
            }
        }
    }

    fn domain(&self, value: f64) -> Error {
        Error::Domain {
            node: self.to_string(),
            value,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Coord(c) => write!(f, "{c}"),
            Node::Neg(e) => write!(f, "(-{e})"),
            Node::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// A parsed expression bound to bundle dimensions.
///
/// Coordinates are stored as flat indices so evaluation can read any vector
/// of scalars laid out like [`Point::coords`].
#[derive(Clone)]
pub struct ScalarField {
    dims: Dims,
    root: Arc<Node>,
    flat: Arc<FlatNode>,
}

// Node with coordinates replaced by flat indices.
#[derive(Debug)]
enum FlatNode {
    Const(f64),
    Var(usize),
    Neg(Box<FlatNode>),
    Bin(BinOp, Box<FlatNode>, Box<FlatNode>, Box<Node>),
    Call(Func, Box<FlatNode>, Box<Node>),
}

impl FlatNode {
    fn from(node: &Node, dims: Dims) -> FlatNode {
        match node {
            Node::Const(c) => FlatNode::Const(*c),
            Node::Coord(c) => FlatNode::Var(c.flat(dims)),
            Node::Neg(e) => FlatNode::Neg(Box::new(FlatNode::from(e, dims))),
            Node::Bin(op, l, r) => FlatNode::Bin(
                *op,
                Box::new(FlatNode::from(l, dims)),
                Box::new(FlatNode::from(r, dims)),
                Box::new(node.clone()),
            ),
            Node::Call(func, e) => FlatNode::Call(
                *func,
                Box::new(FlatNode::from(e, dims)),
                Box::new(node.clone()),
            ),
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            FlatNode::Const(c) => Some(*c),
            FlatNode::Neg(e) => e.constant_value().map(|c| -c),
            _ => None,
        }
    }

    fn eval<N: Num>(&self, z: &[N]) -> Result<N> {
        Ok(match self {
            FlatNode::Const(c) => z[0].lift(*c),
            FlatNode::Var(k) => z[*k].clone(),
            FlatNode::Neg(e) => -e.eval(z)?,
            FlatNode::Bin(op, l, r, src) => {
                let a = l.eval(z)?;
                if *op == BinOp::Pow {
                    return pow_checked(a, r, z, src);
                }
                let b = r.eval(z)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(src.domain(b.value()));
                        }
                        a / b
                    }
                    BinOp::Pow => unreachable!(),
                }
            }
            FlatNode::Call(func, e, src) => {
                let u = e.eval(z)?;
                call_checked(*func, u, src)?
            }
        })
    }
}

fn pow_checked<N: Num>(base: N, exponent: &FlatNode, z: &[N], src: &Node) -> Result<N> {
    let b = base.value();
    if let Some(e) = exponent.constant_value() {
        if e.fract() == 0.0 && e.abs() <= 64.0 {
            if e < 0.0 && b == 0.0 {
                return Err(src.domain(b));
            }
            return Ok(base.powi(e as i32));
        }
        if b < 0.0 || (b == 0.0 && (e < 0.0 || base.has_derivatives())) {
            return Err(src.domain(b));
        }
        return Ok(base.powf(e));
    }
    if b <= 0.0 {
        return Err(src.domain(b));
    }
    let e = exponent.eval(z)?;
    Ok((e * base.ln()).exp())
}

fn call_checked<N: Num>(func: Func, u: N, src: &Node) -> Result<N> {
    let v = u.value();
    Ok(match func {
        Func::Sin => u.sin(),
        Func::Cos => u.cos(),
        Func::Exp => u.exp(),
        Func::Sinh => u.sinh(),
        Func::Cosh => u.cosh(),
        Func::Tan => {
            if v.cos().abs() < 1e-12 {
                return Err(src.domain(v));
            }
            u.tan()
        }
        Func::Log => {
            if v <= 0.0 {
                return Err(src.domain(v));
            }
            u.ln()
        }
        Func::Sqrt => {
            if v < 0.0 || (v == 0.0 && u.has_derivatives()) {
                return Err(src.domain(v));
            }
            u.sqrt()
        }
    })
}

impl ScalarField {
    pub fn parse(text: &str, dims: Dims) -> Result<ScalarField> {
        let node = parse::parse(text, dims)?;
        Ok(ScalarField::from_node(node, dims))
    }

    pub fn from_node(node: Node, dims: Dims) -> ScalarField {
        let flat = FlatNode::from(&node, dims);
        ScalarField {
            dims,
            root: Arc::new(node),
            flat: Arc::new(flat),
        }
    }

    pub fn constant(c: f64, dims: Dims) -> ScalarField {
        ScalarField::from_node(Node::Const(c), dims)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    /// Value at a point.
    pub fn eval(&self, pt: &Point) -> Result<f64> {
        if pt.dims() != self.dims {
            return Err(Error::dims(
                format!("{:?}", self.dims),
                format!("{:?}", pt.dims()),
            ));
        }
        self.flat.eval(pt.coords())
    }

    /// Evaluates with each coordinate replaced by the given scalar, e.g. jets
    /// of the coordinates in some other chart.
    pub fn eval_with<N: Num>(&self, z: &[N]) -> Result<N> {
        if z.len() != self.dims.total() {
            return Err(Error::dims(self.dims.total(), z.len()));
        }
        self.flat.eval(z)
    }

    /// Mixed partial derivative `∂^k f / ∂c_1…∂c_k` at `pt` (k ≤ 3).
    pub fn partial(&self, coords: &[Coord], pt: &Point) -> Result<f64> {
        if coords.len() > MAX_ORDER as usize {
            return Err(Error::OrderTooHigh(coords.len()));
        }
        if coords.is_empty() {
            return self.eval(pt);
        }
        let mut seeds: Vec<usize> = Vec::new();
        let mut vars = Vec::with_capacity(coords.len());
        for c in coords {
            let k = self.check_coord(c)?;
            let v = match seeds.iter().position(|&s| s == k) {
                Some(v) => v,
                None => {
                    seeds.push(k);
                    seeds.len() - 1
                }
            };
            vars.push(v);
        }
        let space = JetSpace::get(seeds.len());
        let order = coords.len() as u8;
        let z: Vec<Jet> = pt
            .coords()
            .iter()
            .enumerate()
            .map(|(k, &x)| match seeds.iter().position(|&s| s == k) {
                Some(v) => Jet::variable(&space, order, x, v),
                None => Jet::constant(&space, order, x),
            })
            .collect();
        Ok(self.flat.eval(&z)?.derivative(&vars))
    }

    /// Jet of the field in all coordinates at `pt`.
    pub fn jet(&self, pt: &Point, order: u8) -> Result<Jet> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh(order as usize));
        }
        self.flat.eval(&Jet::seed(pt.coords(), order))
    }

    fn check_coord(&self, c: &Coord) -> Result<usize> {
        let ok = match *c {
            Coord::T(a) => a < self.dims.m,
            Coord::X(i) => i < self.dims.n,
            Coord::P(i, a) => i < self.dims.n && a < self.dims.m,
        };
        if !ok {
            return Err(Error::UnknownCoordinate {
                name: c.to_string(),
                valid: parse::valid_ranges(self.dims),
            });
        }
        Ok(c.flat(self.dims))
    }

    /// Coordinates the expression mentions.
    pub fn coords(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        self.root.visit_coords(&mut |c| {
            if !out.contains(&c) {
                out.push(c)
            }
        });
        out
    }

    /// Whether every coordinate used lies in one of `blocks`.
    pub fn depends_only_on(&self, blocks: &[Block]) -> bool {
        self.coords().iter().all(|c| blocks.contains(&c.block()))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d22() -> Dims {
        Dims::new(2, 2).unwrap()
    }

    fn pt22(t: [f64; 2], x: [f64; 2], p: [[f64; 2]; 2]) -> Point {
        Point::new(d22(), &t, &x, &[p[0].to_vec(), p[1].to_vec()]).unwrap()
    }

    #[test]
    fn evaluates_mixed_coordinates() {
        let f = ScalarField::parse("p[1][1]*t[1] + exp(x[2])", d22()).unwrap();
        let pt = pt22([1.0, 0.0], [0.0, 1.0], [[1.0, 0.0], [0.0, 0.0]]);
        assert_relative_eq!(f.eval(&pt).unwrap(), 1.0 + 1f64.exp(), epsilon = 1e-12);
        assert_relative_eq!(f.eval(&pt).unwrap(), 3.718281828, epsilon = 1e-9);
    }

    #[test]
    fn third_partial() {
        let d = Dims::new(1, 1).unwrap();
        let f = ScalarField::parse("t[1]^4", d).unwrap();
        let pt = Point::new(d, &[2.0], &[0.0], &[vec![0.0]]).unwrap();
        let c = [Coord::T(0); 3];
        assert_relative_eq!(f.partial(&c, &pt).unwrap(), 48.0, epsilon = 1e-12);
        assert!(matches!(
            f.partial(&[Coord::T(0); 4], &pt),
            Err(Error::OrderTooHigh(4))
        ));
    }

    #[test]
    fn mixed_partial_across_blocks() {
        let f = ScalarField::parse("sin(t[1]*p[2][1]) * x[1]^2", d22()).unwrap();
        let pt = pt22([0.4, 0.0], [1.5, 0.0], [[0.0, 0.0], [0.7, 0.0]]);
        let got = f
            .partial(&[Coord::T(0), Coord::P(1, 0), Coord::X(0)], &pt)
            .unwrap();
        let u = 0.4 * 0.7;
        let want = 2.0 * 1.5 * (u.cos() - u * u.sin());
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn domain_errors() {
        let d = d22();
        let pt = pt22([-1.0, 0.0], [0.0; 2], [[0.0; 2]; 2]);
        for src in [
            "log(t[1])",
            "sqrt(t[1])",
            "1/t[2]",
            "t[1]^0.5",
            "tan(1.5707963267948966)",
        ] {
            let f = ScalarField::parse(src, d).unwrap();
            assert!(matches!(f.eval(&pt), Err(Error::Domain { .. })), "{src}");
        }
        let f = ScalarField::parse("t[1]^3", d).unwrap();
        assert_relative_eq!(f.eval(&pt).unwrap(), -1.0);
    }

    #[test]
    fn round_trip_display() {
        let d = d22();
        let src = "-x[1]^2^0.5 + 3*sin(t[2]) / (1 - p[2][1]) - -2";
        let f = ScalarField::parse(src, d).unwrap();
        let g = ScalarField::parse(&f.to_string(), d).unwrap();
        assert_eq!(f.node(), g.node());
    }

    #[test]
    fn precedence() {
        let d = d22();
        let pt = pt22([2.0, 3.0], [0.0; 2], [[0.0; 2]; 2]);
        let v = |s: &str| ScalarField::parse(s, d).unwrap().eval(&pt).unwrap();
        assert_relative_eq!(v("-t[1]^2"), -4.0);
        assert_relative_eq!(v("t[1]^t[2]^0"), 2.0);
        assert_relative_eq!(v("2^3^2"), 512.0);
        assert_relative_eq!(v("1 - 2 - 3"), -4.0);
        assert_relative_eq!(v("12 / 3 / 2"), 2.0);
        assert_relative_eq!(v("2^-1"), 0.5);
        assert_relative_eq!(v("1.5e1 + pi"), 15.0 + std::f64::consts::PI);
    }
}

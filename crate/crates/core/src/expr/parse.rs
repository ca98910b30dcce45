use super::{BinOp, Coord, Func, Node};
use crate::bundle::Dims;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let pos = k + 1;
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let lit: String = chars[start..k].iter().collect();
            let v = lit.parse::<f64>().map_err(|_| Error::Syntax {
                pos,
                expected: vec!["number".into()],
                found: format!("`{lit}`"),
            })?;
            out.push((Tok::Num(v), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push((Tok::Ident(chars[start..k].iter().collect()), pos));
        } else if "+-*/^()[],".contains(c) {
            out.push((Tok::Sym(c), pos));
            k += 1;
        } else {
            return Err(Error::Syntax {
                pos,
                expected: vec!["operator, operand or parenthesis".into()],
                found: format!("`{c}`"),
            });
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

pub(super) fn valid_ranges(d: Dims) -> String {
    format!("t[1..{m}], x[1..{n}], p[1..{n}][1..{m}]", m = d.m, n = d.n)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    k: usize,
    dims: Dims,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> usize {
        self.toks[self.k].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.k].0.clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exp = self.exponent()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Node> {
        let start = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Const(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "t" | "x" | "p" => self.coord(&name),
                    _ => {
                        if *self.peek() == Tok::Sym('(') {
                            match Func::from_name(&name) {
                                Some(f) => self.call(f),
                                None => Err(Error::Syntax {
                                    pos: start,
                                    expected: Func::ALL
                                        .iter()
                                        .map(|f| format!("`{}`", f.name()))
                                        .collect(),
                                    found: format!("`{name}`"),
                                }),
                            }
                        } else if Func::from_name(&name).is_some() {
                            self.fail(&["`(`"])
                        } else {
                            Err(Error::UnknownCoordinate {
                                name,
                                valid: valid_ranges(self.dims),
                            })
                        }
                    }
                }
            }
            _ => self.fail(&["number", "coordinate", "function", "`(`", "`-`"]),
        }
    }

    fn call(&mut self, f: Func) -> Result<Node> {
        self.expect('(')?;
        let mut args = Vec::new();
        if *self.peek() != Tok::Sym(')') {
            args.push(self.expr()?);
            while *self.peek() == Tok::Sym(',') {
                self.bump();
                args.push(self.expr()?);
            }
        }
        if *self.peek() != Tok::Sym(')') {
            return self.fail(&["`,`", "`)`"]);
        }
        self.bump();
        if args.len() != 1 {
            return Err(Error::Arity {
                func: f.name().into(),
                expected: 1,
                found: args.len(),
            });
        }
        Ok(Node::Call(f, Box::new(args.pop().unwrap())))
    }

    fn index(&mut self) -> Result<usize> {
        self.expect('[')?;
        let v = match self.peek() {
            Tok::Num(v) if v.fract() == 0.0 && *v >= 0.0 => *v as usize,
            _ => return self.fail(&["integer index"]),
        };
        self.bump();
        self.expect(']')?;
        Ok(v)
    }

    fn coord(&mut self, name: &str) -> Result<Node> {
        let d = self.dims;
        let first = self.index()?;
        let (coord, label, ok) = match name {
            "t" => (
                Coord::T(first.wrapping_sub(1)),
                format!("t[{first}]"),
                first >= 1 && first <= d.m,
            ),
            "x" => (
                Coord::X(first.wrapping_sub(1)),
                format!("x[{first}]"),
                first >= 1 && first <= d.n,
            ),
            _ => {
                let second = self.index()?;
                (
                    Coord::P(first.wrapping_sub(1), second.wrapping_sub(1)),
                    format!("p[{first}][{second}]"),
                    first >= 1 && first <= d.n && second >= 1 && second <= d.m,
                )
            }
        };
        if !ok {
            return Err(Error::UnknownCoordinate {
                name: label,
                valid: valid_ranges(d),
            });
        }
        Ok(Node::Coord(coord))
    }
}

pub(super) fn parse(text: &str, dims: Dims) -> Result<Node> {
    let mut p = Parser {
        toks: lex(text)?,
        k: 0,
        dims,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d() -> Dims {
        Dims::new(2, 2).unwrap()
    }

    #[test]
    fn syntax_error_position() {
        match parse("t[1] + * x[1]", d()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("{other:?}"),
        }
        match parse("sin(t[1]", d()) {
            Err(Error::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 9);
                assert!(expected.contains(&"`)`".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("t[1] $", d()),
            Err(Error::Syntax { pos: 6, .. })
        ));
        assert!(matches!(
            parse("foo(t[1])", d()),
            Err(Error::Syntax { pos: 1, .. })
        ));
    }

    #[test]
    fn unknown_coordinates() {
        for s in ["x[3]", "t[0]", "p[1][3]", "y[1]", "q"] {
            assert!(
                matches!(parse(s, d()), Err(Error::UnknownCoordinate { .. })),
                "{s}"
            );
        }
    }

    #[test]
    fn arity() {
        assert!(matches!(
            parse("sin(t[1], x[1])", d()),
            Err(Error::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse("cos()", d()),
            Err(Error::Arity { found: 0, .. })
        ));
    }
}

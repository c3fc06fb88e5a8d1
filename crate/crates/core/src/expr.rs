//! Arithmetic expressions over chart variables with forward-mode gradients.
//!
//! Grammar (`^` binds tightest and is right-associative, unary minus binds
//! looser than `^` so `-x^2 = -(x^2)`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `u1 .. u<dim>`; `t` aliases the last one. `pi` is a constant.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Byte offset into the source.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Exp,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "sqrt" => Self::Sqrt,
            "exp" => Self::Exp,
            _ => return None,
        })
    }

    /// `(f(x), f'(x))`.
    fn eval(self, x: f64) -> (f64, f64) {
        match self {
            Self::Sin => (x.sin(), x.cos()),
            Self::Cos => (x.cos(), -x.sin()),
            Self::Sinh => (x.sinh(), x.cosh()),
            Self::Cosh => (x.cosh(), x.sinh()),
            Self::Sqrt => {
                let r = x.sqrt();
                (r, 0.5 / r)
            }
            Self::Exp => {
                let e = x.exp();
                (e, e)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Value and gradient with respect to the chart variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; dim],
        }
    }

    fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0)
    }

    fn map(self, value: f64, slope: f64) -> Self {
        Self {
            value,
            grad: self.grad.into_iter().map(|g| g * slope).collect(),
        }
    }

    fn combine(a: Self, b: Self, value: f64, da: f64, db: f64) -> Self {
        Self {
            value,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(x, y)| da * x + db * y)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
    source: String,
}

impl Expr {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            dim,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            root,
            dim,
            source: source.to_string(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        eval_value(&self.root, u)
    }

    pub fn eval_dual(&self, u: &[f64]) -> Dual {
        eval_dual(&self.root, u, self.dim)
    }
}

fn eval_value(n: &Node, u: &[f64]) -> f64 {
    match n {
        Node::Const(c) => *c,
        Node::Var(i) => u[*i],
        Node::Neg(a) => -eval_value(a, u),
        Node::Add(a, b) => eval_value(a, u) + eval_value(b, u),
        Node::Sub(a, b) => eval_value(a, u) - eval_value(b, u),
        Node::Mul(a, b) => eval_value(a, u) * eval_value(b, u),
        Node::Div(a, b) => eval_value(a, u) / eval_value(b, u),
        Node::Pow(a, b) => eval_value(a, u).powf(eval_value(b, u)),
        Node::Call(f, a) => f.eval(eval_value(a, u)).0,
    }
}

fn eval_dual(n: &Node, u: &[f64], dim: usize) -> Dual {
    match n {
        Node::Const(c) => Dual::constant(*c, dim),
        Node::Var(i) => {
            let mut d = Dual::constant(u[*i], dim);
            d.grad[*i] = 1.0;
            d
        }
        Node::Neg(a) => {
            let a = eval_dual(a, u, dim);
            let v = -a.value;
            a.map(v, -1.0)
        }
        Node::Add(a, b) => {
            let (a, b) = (eval_dual(a, u, dim), eval_dual(b, u, dim));
            let v = a.value + b.value;
            Dual::combine(a, b, v, 1.0, 1.0)
        }
        Node::Sub(a, b) => {
            let (a, b) = (eval_dual(a, u, dim), eval_dual(b, u, dim));
            let v = a.value - b.value;
            Dual::combine(a, b, v, 1.0, -1.0)
        }
        Node::Mul(a, b) => {
            let (a, b) = (eval_dual(a, u, dim), eval_dual(b, u, dim));
            let (x, y) = (a.value, b.value);
            Dual::combine(a, b, x * y, y, x)
        }
        Node::Div(a, b) => {
            let (a, b) = (eval_dual(a, u, dim), eval_dual(b, u, dim));
            let (x, y) = (a.value, b.value);
            Dual::combine(a, b, x / y, 1.0 / y, -x / (y * y))
        }
        Node::Pow(a, b) => {
            let (a, b) = (eval_dual(a, u, dim), eval_dual(b, u, dim));
            let (x, y) = (a.value, b.value);
            let v = x.powf(y);
            if b.is_constant() {
                // keeps x^2 differentiable at x <= 0
                let slope = if y == 0.0 { 0.0 } else { y * x.powf(y - 1.0) };
                a.map(v, slope)
            } else {
                Dual::combine(a, b, v, y * x.powf(y - 1.0), v * x.ln())
            }
        }
        Node::Call(f, a) => {
            let a = eval_dual(a, u, dim);
            let (v, s) = f.eval(a.value);
            a.map(v, s)
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            message: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                self.pos = p;
                digits(&mut self.pos);
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ParseError {
                pos: start,
                message: format!("bad number `{text}`"),
            })
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(f) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Node::Call(f, Box::new(arg)));
        }
        let unknown = || ParseError {
            pos: start,
            message: format!("unknown identifier `{name}`"),
        };
        match name {
            "pi" => Ok(Node::Const(std::f64::consts::PI)),
            "t" if self.dim > 0 => Ok(Node::Var(self.dim - 1)),
            _ => {
                let idx: usize = name
                    .strip_prefix('u')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(unknown)?;
                if idx == 0 || idx > self.dim {
                    return Err(ParseError {
                        pos: start,
                        message: format!("variable `{name}` out of range u1..u{}", self.dim),
                    });
                }
                Ok(Node::Var(idx - 1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, u: &[f64]) -> f64 {
        Expr::parse(s, u.len()).unwrap().eval(u)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("-2^2", &[]), -4.0);
        assert_eq!(ev("2^3^2", &[]), 512.0);
        assert_eq!(ev("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(ev("8 / 4 / 2", &[]), 1.0);
        assert_eq!(ev("2^-1", &[]), 0.5);
        assert_eq!(ev("1.5e1 - 5", &[]), 10.0);
    }

    #[test]
    fn variables_and_alias() {
        assert_eq!(ev("u1 * u2 + t", &[2.0, 3.0]), 9.0);
        assert!(Expr::parse("u3", 2).is_err());
        assert!(Expr::parse("u0", 2).is_err());
        assert!(Expr::parse("x", 2).is_err());
    }

    #[test]
    fn errors_carry_position() {
        let e = Expr::parse("1 + * 2", 0).unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(Expr::parse("sin 1", 0).is_err());
        assert!(Expr::parse("(1", 0).is_err());
        assert!(Expr::parse("1 2", 0).is_err());
    }

    #[test]
    fn gradients() {
        let e = Expr::parse("cosh(u1) * sin(u2) + u1^2 / sqrt(u2) + exp(u1 - u2)", 2).unwrap();
        let u = [0.3, 0.8];
        let d = e.eval_dual(&u);
        assert_eq!(d.value, e.eval(&u));
        let h = 1e-6;
        for a in 0..2 {
            let mut p = u;
            let mut m = u;
            p[a] += h;
            m[a] -= h;
            let fd = (e.eval(&p) - e.eval(&m)) / (2.0 * h);
            assert!((fd - d.grad[a]).abs() < 1e-8);
        }
    }

    #[test]
    fn variable_exponent() {
        let e = Expr::parse("u1^u2", 2).unwrap();
        let d = e.eval_dual(&[2.0, 3.0]);
        assert_eq!(d.value, 8.0);
        assert!((d.grad[0] - 12.0).abs() < 1e-12);
        assert!((d.grad[1] - 8.0 * 2f64.ln()).abs() < 1e-12);
    }
}

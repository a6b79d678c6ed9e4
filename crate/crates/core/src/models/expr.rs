//! Expression trees for user-defined dynamics.
//!
//! The grammar is ordinary infix arithmetic over states `x1..xn`, inputs
//! `u1..up`, numeric literals, `pi`, the functions `sin`, `cos`, `exp`,
//! `sqrt` and non-negative integer powers `a^k`. Indices are 1-based in the
//! text and 0-based in the tree.

use std::fmt;

use crate::error::LabError;
use crate::jets::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    State(usize),
    Input(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, LabError> {
        let mut p = Parser { src, chars: src.char_indices().collect(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<S: Scalar>(&self, x: &[S], u: &[S]) -> S {
        match self {
            Expr::Const(c) => S::from_f64(*c),
            Expr::State(i) => x[*i].clone(),
            Expr::Input(i) => u[*i].clone(),
            Expr::Neg(a) => -a.eval(x, u),
            Expr::Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Expr::Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Expr::Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Expr::Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Expr::Pow(a, k) => a.eval(x, u).powi(*k),
            Expr::Sin(a) => a.eval(x, u).sin(),
            Expr::Cos(a) => a.eval(x, u).cos(),
            Expr::Exp(a) => a.eval(x, u).exp(),
            Expr::Sqrt(a) => a.eval(x, u).sqrt(),
        }
    }

    /// Largest state and input index referenced, if any.
    pub fn max_indices(&self) -> (Option<usize>, Option<usize>) {
        fn merge(a: (Option<usize>, Option<usize>), b: (Option<usize>, Option<usize>)) -> (Option<usize>, Option<usize>) {
            (a.0.max(b.0), a.1.max(b.1))
        }
        match self {
            Expr::Const(_) => (None, None),
            Expr::State(i) => (Some(*i), None),
            Expr::Input(i) => (None, Some(*i)),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) | Expr::Sqrt(a) => {
                a.max_indices()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                merge(a.max_indices(), b.max_indices())
            }
        }
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn state(i: usize) -> Expr {
        Expr::State(i)
    }

    pub fn input(i: usize) -> Expr {
        Expr::Input(i)
    }

    /// `sum_j coeffs[j] * x_j`, skipping zero coefficients.
    pub fn linear(coeffs: &[f64]) -> Expr {
        let mut terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| if *c == 1.0 { Expr::State(j) } else { Expr::Const(*c) * Expr::State(j) });
        match terms.next() {
            None => Expr::Const(0.0),
            Some(first) => terms.fold(first, |acc, t| acc + t),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;

    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::State(i) => write!(f, "x{}", i + 1),
            Expr::Input(i) => write!(f, "u{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> LabError {
        let col = self.chars.get(self.pos).map_or(self.src.len(), |(i, _)| *i);
        LabError::Parse { expr: self.src.to_string(), column: col + 1, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, LabError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, LabError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, LabError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, LabError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("exponent must be a non-negative integer"));
            }
            let text: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
            let k = text.parse::<u32>().map_err(|_| self.error("exponent out of range"))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, LabError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<Expr, LabError> {
        let start = self.pos;
        let mut prev = ' ';
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            let exp_sign = (c == '-' || c == '+') && (prev == 'e' || prev == 'E');
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                prev = c;
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
        text.parse::<f64>().map(Expr::Const).map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }

    fn ident(&mut self) -> Result<Expr, LabError> {
        let start = self.pos;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
        let func = |p: &mut Self, wrap: fn(Box<Expr>) -> Expr| -> Result<Expr, LabError> {
            if !p.eat('(') {
                return Err(p.error("expected '(' after function name"));
            }
            let arg = p.expr()?;
            if !p.eat(')') {
                return Err(p.error("expected ')'"));
            }
            Ok(wrap(Box::new(arg)))
        };
        match name.as_str() {
            "sin" => func(self, Expr::Sin),
            "cos" => func(self, Expr::Cos),
            "exp" => func(self, Expr::Exp),
            "sqrt" => func(self, Expr::Sqrt),
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            _ => {
                let (kind, digits) = name.split_at(1);
                let index = digits.parse::<usize>().ok().filter(|i| *i >= 1);
                match (kind, index) {
                    ("x", Some(i)) => Ok(Expr::State(i - 1)),
                    ("u", Some(i)) => Ok(Expr::Input(i - 1)),
                    _ => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier '{name}'")))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence_and_functions() {
        let e = Expr::parse("-x1 - x2 + u1*(1 + x1)").unwrap();
        let v: f64 = e.eval(&[0.5, -1.0], &[2.0]);
        assert!((v - (-0.5 + 1.0 + 3.0)).abs() < 1e-15);

        let e = Expr::parse("2*x1^2/4 + sin(x2) - exp(-x1) + sqrt(4)").unwrap();
        let v: f64 = e.eval(&[3.0, 0.2], &[]);
        let want = 2.0 * 9.0 / 4.0 + 0.2f64.sin() - (-3.0f64).exp() + 2.0;
        assert!((v - want).abs() < 1e-14);
        assert_eq!(Expr::parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
    }

    #[test]
    fn reports_column_of_error() {
        match Expr::parse("x1 + y2") {
            Err(LabError::Parse { column, .. }) => assert_eq!(column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::parse("x0").is_err());
        assert!(Expr::parse("x1 ^ 1.5").is_err());
        assert!(Expr::parse("(x1").is_err());
        assert!(Expr::parse("x1 x2").is_err());
    }

    #[test]
    fn index_bookkeeping() {
        let e = Expr::parse("x3*u2 + x1").unwrap();
        assert_eq!(e.max_indices(), (Some(2), Some(1)));
        assert_eq!(Expr::linear(&[0.0, -2.0]).eval::<f64>(&[5.0, 1.0], &[]), -2.0);
    }
}

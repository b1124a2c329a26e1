//! Tiny arithmetic expression language for user-supplied Hamiltonians.
//!
//! Grammar: `+ - * /`, `pow(a, b)`, `exp(a)`, `cos(a)`, `sin(a)`, numeric
//! literals and the variables `x1`, `x2`. No dynamic code loading; the
//! expression is parsed to an AST and evaluated with second-order forward
//! jets so gradients and Hessians are exact.

use crate::{Error, Result};

/// Value with first and second derivatives in two variables.
#[derive(Debug, Clone, Copy)]
pub struct Jet2 {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            gx: 0.0,
            gy: 0.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    pub fn var_x(v: f64) -> Self {
        Jet2 {
            v,
            gx: 1.0,
            gy: 0.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    pub fn var_y(v: f64) -> Self {
        Jet2 {
            v,
            gx: 0.0,
            gy: 1.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            gx: self.gx + o.gx,
            gy: self.gy + o.gy,
            hxx: self.hxx + o.hxx,
            hxy: self.hxy + o.hxy,
            hyy: self.hyy + o.hyy,
        }
    }

    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            gx: self.gx - o.gx,
            gy: self.gy - o.gy,
            hxx: self.hxx - o.hxx,
            hxy: self.hxy - o.hxy,
            hyy: self.hyy - o.hyy,
        }
    }

    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            gx: self.gx * o.v + self.v * o.gx,
            gy: self.gy * o.v + self.v * o.gy,
            hxx: self.hxx * o.v + 2.0 * self.gx * o.gx + self.v * o.hxx,
            hxy: self.hxy * o.v + self.gx * o.gy + self.gy * o.gx + self.v * o.hxy,
            hyy: self.hyy * o.v + 2.0 * self.gy * o.gy + self.v * o.hyy,
        }
    }

    /// Chain rule for a scalar function with derivatives `d1`, `d2` at `self.v`.
    fn chain(self, v: f64, d1: f64, d2: f64) -> Jet2 {
        Jet2 {
            v,
            gx: d1 * self.gx,
            gy: d1 * self.gy,
            hxx: d2 * self.gx * self.gx + d1 * self.hxx,
            hxy: d2 * self.gx * self.gy + d1 * self.hxy,
            hyy: d2 * self.gy * self.gy + d1 * self.hyy,
        }
    }

    fn recip(self) -> Jet2 {
        let iv = 1.0 / self.v;
        self.chain(iv, -iv * iv, 2.0 * iv * iv * iv)
    }

    fn div(self, o: Jet2) -> Jet2 {
        self.mul(o.recip())
    }

    fn exp(self) -> Jet2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Jet2 {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    fn cos(self) -> Jet2 {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    fn sin(self) -> Jet2 {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    fn powi(self, n: i64) -> Jet2 {
        match n {
            0 => Jet2::constant(1.0),
            _ if n < 0 => self.powi(-n).recip(),
            _ => {
                // binary exponentiation keeps the jet arithmetic exact
                let mut base = self;
                let mut acc: Option<Jet2> = None;
                let mut k = n;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = Some(match acc {
                            Some(a) => a.mul(base),
                            None => base,
                        });
                    }
                    base = base.mul(base);
                    k >>= 1;
                }
                acc.unwrap()
            }
        }
    }

    fn pow(self, o: Jet2) -> Jet2 {
        let is_const_int = o.gx == 0.0
            && o.gy == 0.0
            && o.hxx == 0.0
            && o.hxy == 0.0
            && o.hyy == 0.0
            && o.v.fract() == 0.0
            && o.v.abs() <= 64.0;
        if is_const_int {
            self.powi(o.v as i64)
        } else {
            // a^b = exp(b ln a); requires a > 0
            o.mul(self.ln()).exp()
        }
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Num(f64),
    X1,
    X2,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
}

impl Expr {
    fn eval(&self, x: Jet2, y: Jet2) -> Jet2 {
        match self {
            Expr::Num(c) => Jet2::constant(*c),
            Expr::X1 => x,
            Expr::X2 => y,
            Expr::Neg(a) => Jet2::constant(0.0).sub(a.eval(x, y)),
            Expr::Add(a, b) => a.eval(x, y).add(b.eval(x, y)),
            Expr::Sub(a, b) => a.eval(x, y).sub(b.eval(x, y)),
            Expr::Mul(a, b) => a.eval(x, y).mul(b.eval(x, y)),
            Expr::Div(a, b) => a.eval(x, y).div(b.eval(x, y)),
            Expr::Pow(a, b) => a.eval(x, y).pow(b.eval(x, y)),
            Expr::Exp(a) => a.eval(x, y).exp(),
            Expr::Cos(a) => a.eval(x, y).cos(),
            Expr::Sin(a) => a.eval(x, y).sin(),
        }
    }
}

/// Parsed expression in the variables `x1`, `x2`.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Expr,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Expression> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::BadExpression(format!(
                "unexpected trailing token {:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(Expression { root })
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.root.eval(Jet2::constant(x1), Jet2::constant(x2)).v
    }

    pub fn eval_jet(&self, x1: f64, x2: f64) -> Jet2 {
        self.root.eval(Jet2::var_x(x1), Jet2::var_y(x2))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse()
                    .map_err(|_| Error::BadExpression(format!("bad number `{s}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::BadExpression(format!(
                    "unexpected character `{other}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            other => Err(Error::BadExpression(format!(
                "expected {t:?}, got {other:?}"
            ))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Minus) => Ok(Expr::Neg(Box::new(self.factor()?))),
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x1" => Ok(Expr::X1),
                "x2" => Ok(Expr::X2),
                "pow" => {
                    self.expect(Tok::LParen)?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma)?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Pow(Box::new(a), Box::new(b)))
                }
                "exp" | "cos" | "sin" => {
                    self.expect(Tok::LParen)?;
                    let a = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(Box::new(a)),
                        "cos" => Expr::Cos(Box::new(a)),
                        _ => Expr::Sin(Box::new(a)),
                    })
                }
                other => Err(Error::BadExpression(format!(
                    "unknown identifier `{other}`"
                ))),
            },
            other => Err(Error::BadExpression(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expression::parse("pow(x1, 2) / 2 + pow(x2, 2) / 2").unwrap();
        assert!((e.eval(3.0, 4.0) - 12.5).abs() < 1e-14);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let e = Expression::parse(
            "pow(pow(x1,2) - 1, 2) + pow(x2, 2) + 0.1 * sin(x1 * x2) + exp(x2 / 4)",
        )
        .unwrap();
        let (x, y) = (0.7, -0.3);
        let j = e.eval_jet(x, y);
        let h = 1e-5;
        let fd_gx = (e.eval(x + h, y) - e.eval(x - h, y)) / (2.0 * h);
        let fd_gy = (e.eval(x, y + h) - e.eval(x, y - h)) / (2.0 * h);
        assert!((j.gx - fd_gx).abs() < 1e-8);
        assert!((j.gy - fd_gy).abs() < 1e-8);
        let fd_hxx = (e.eval(x + h, y) - 2.0 * e.eval(x, y) + e.eval(x - h, y)) / (h * h);
        let fd_hxy = (e.eval(x + h, y + h) - e.eval(x + h, y - h) - e.eval(x - h, y + h)
            + e.eval(x - h, y - h))
            / (4.0 * h * h);
        assert!((j.hxx - fd_hxx).abs() < 1e-4);
        assert!((j.hxy - fd_hxy).abs() < 1e-4);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expression::parse("x3 + 1").is_err());
        assert!(Expression::parse("pow(x1)").is_err());
        assert!(Expression::parse("1 +").is_err());
        assert!(Expression::parse("foo(2)").is_err());
    }
}

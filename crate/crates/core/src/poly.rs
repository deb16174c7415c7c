//! Infix polynomial expressions and their sparse expanded form.
//!
//! Variables are `x1 … xn` plus an optional time variable `t`, stored at
//! index `n`. Coefficients are exact rationals; decimal literals are read as
//! the rational they denote.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, q_to_f64, Scalar, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Q),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Division by an expression that must reduce to a nonzero constant.
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Num(usize, usize),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

fn tokenize(src: &str, n: usize, allow_t: bool) -> Result<Vec<Tok>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            't' if allow_t => Some(Tok::Var(n)),
            _ => None,
        };
        if let Some(tok) = single {
            toks.push(tok);
            i += 1;
            continue;
        }
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                toks.push(Tok::Num(start, i));
            }
            'x' => {
                let start = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let k: usize = src[start..i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("variable without index at byte {}", start - 1)))?;
                if k == 0 || k > n {
                    return Err(Error::Parse(format!("variable x{k} out of range 1..={n}")));
                }
                toks.push(Tok::Var(k - 1));
            }
            _ => return Err(Error::Parse(format!("unexpected character {c:?} at byte {i} in {src:?}"))),
        }
    }
    Ok(toks)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at token {} in {:?}", self.pos, self.src))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == Tok::Plus {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ (Tok::Star | Tok::Slash)) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == Tok::Star {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(Tok::Caret) {
            self.pos += 1;
            let Some(Tok::Num(a, b)) = self.bump() else {
                return Err(self.error("expected integer exponent"));
            };
            let e: u32 = self.src[a..b].parse().map_err(|_| self.error("exponent must be a non-negative integer"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Tok::Num(a, b)) => parse_rational(&self.src[a..b])
                .map(Expr::Const)
                .ok_or_else(|| self.error("bad number")),
            Some(Tok::Var(k)) => Ok(Expr::Var(k)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                if self.bump() != Some(Tok::RParen) {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            _ => Err(self.error("expected number, variable or '('")),
        }
    }
}

/// Parses a polynomial in `x1..xn` (and `t` when `allow_t`).
pub fn parse_expr(src: &str, n: usize, allow_t: bool) -> Result<Expr> {
    let toks = tokenize(src, n, allow_t)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

/// Sparse polynomial: exponent vector ↦ coefficient, zero terms never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, Q::one());
        p
    }

    pub fn from_expr(e: &Expr, nvars: usize) -> Result<Self> {
        Ok(match e {
            Expr::Const(c) => Self::constant(nvars, c.clone()),
            Expr::Var(k) => Self::var(nvars, *k),
            Expr::Neg(a) => -&Self::from_expr(a, nvars)?,
            Expr::Add(a, b) => &Self::from_expr(a, nvars)? + &Self::from_expr(b, nvars)?,
            Expr::Sub(a, b) => &Self::from_expr(a, nvars)? - &Self::from_expr(b, nvars)?,
            Expr::Mul(a, b) => &Self::from_expr(a, nvars)? * &Self::from_expr(b, nvars)?,
            Expr::Div(a, b) => {
                let d = Self::from_expr(b, nvars)?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => Self::from_expr(a, nvars)?.scale(&(Q::one() / c)),
                    _ => return Err(Error::Parse("division by a non-constant or zero expression".into())),
                }
            }
            Expr::Pow(a, k) => Self::from_expr(a, nvars)?.pow(*k),
        })
    }

    pub fn parse(src: &str, n: usize, allow_t: bool) -> Result<Self> {
        Self::from_expr(&parse_expr(src, n, allow_t)?, n + allow_t as usize)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    fn insert_add(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, Q::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.insert_add(e2, c * Q::from_integer(e[k].into()));
        }
        out
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut term = T::from_rational(c);
            for (xi, &p) in x.iter().zip(e) {
                for _ in 0..p {
                    term = term * xi.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Replaces variable `k` by the constant `value`.
    pub fn substitute_var(&self, k: usize, value: &Q) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let p = std::mem::replace(&mut e2[k], 0);
            let mut v = c.clone();
            for _ in 0..p {
                v *= value;
            }
            out.insert_add(e2, v);
        }
        out
    }

    /// `p(M y)` as a polynomial in `y` (`cols` variables); `m` is
    /// `nvars × cols`, row-major.
    pub fn compose_linear(&self, m: &[Q], cols: usize) -> Self {
        let images: Vec<Polynomial> = (0..self.nvars)
            .map(|i| {
                let mut row = Self::zero(cols);
                for j in 0..cols {
                    row = &row + &Self::var(cols, j).scale(&m[i * cols + j]);
                }
                row
            })
            .collect();
        let mut out = Self::zero(cols);
        for (e, c) in &self.terms {
            let mut term = Self::constant(cols, c.clone());
            for (img, &p) in images.iter().zip(e) {
                if p > 0 {
                    term = &term * &img.pow(p);
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Drops trailing variables that do not occur, e.g. `t` after slicing.
    pub fn truncate_vars(&self, nvars: usize) -> Option<Self> {
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            if e[nvars..].iter().any(|&p| p != 0) {
                return None;
            }
            out.terms.insert(e[..nvars].to_vec(), c.clone());
        }
        Some(out)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| q_to_f64(&c.abs())).fold(0.0, f64::max)
    }

    fn var_name(&self, k: usize, time_var: bool) -> String {
        if time_var && k + 1 == self.nvars {
            "t".into()
        } else {
            format!("x{}", k + 1)
        }
    }

    /// Infix text that [`Polynomial::parse`] reads back to the same value.
    pub fn to_infix(&self, time_var: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&p| p == 0);
            if !a.is_one() || is_const {
                let s = format_rational(&a);
                factors.push(if s.contains('/') { format!("({s})") } else { s });
            }
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(self.var_name(k, time_var)),
                    _ => factors.push(format!("{}^{p}", self.var_name(k, time_var))),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix(false))
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut acc: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Q::zero) += ca * cb;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Polynomial {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q_frac, q_int};

    fn p(src: &str, n: usize) -> Polynomial {
        Polynomial::parse(src, n, false).unwrap()
    }

    #[test]
    fn parses_and_expands() {
        let a = p("(x1 - 1)^2", 1);
        let b = p("x1^2 - 2*x1 + 1", 1);
        assert_eq!(a, b);
        assert_eq!(p("3/4*x1", 1).eval(&[q_int(2)]), q_frac(3, 2));
        assert_eq!(p("0.5*x1 - -x1", 1), p("3/2*x1", 1));
        assert_eq!(p("x1*x2/2", 2).eval(&[3.0, 4.0]), 6.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Polynomial::parse("x3", 2, false).is_err());
        assert!(Polynomial::parse("t", 2, false).is_err());
        assert!(Polynomial::parse("x1^-1", 1, false).is_err());
        assert!(Polynomial::parse("x1/x1", 1, false).is_err());
        assert!(Polynomial::parse("(x1", 1, false).is_err());
        assert!(Polynomial::parse("", 1, false).is_err());
    }

    #[test]
    fn derivative_of_cubic() {
        let f = p("x1^3 - 4*x1", 1);
        assert_eq!(f.derivative(0), p("3*x1^2 - 4", 1));
        assert_eq!(f.derivative(0).eval(&[2.0]), 8.0);
    }

    #[test]
    fn time_variable_slices() {
        let h = Polynomial::parse("x1^3 - (4 + t/2)*x1", 1, true).unwrap();
        let s = h.substitute_var(1, &q_int(1)).truncate_vars(1).unwrap();
        assert_eq!(s, p("x1^3 - 9/2*x1", 1));
    }

    #[test]
    fn compose_with_linear_map() {
        // (x1² − 1 − x2², x1 x2) on the line x = (u, 0)
        let f = p("x1^2 - 1 - x2^2", 2);
        let m = vec![q_int(1), q_int(0)];
        assert_eq!(f.compose_linear(&m, 1), p("x1^2 - 1", 1));
    }

    #[test]
    fn infix_round_trip() {
        for src in ["x1^5 - 10*x1^3*x2^2 + 5*x1*x2^4 - 16*x1", "-1/3 + x2", "0", "-x1*x2"] {
            let a = p(src, 2);
            assert_eq!(p(&a.to_infix(false), 2), a);
        }
        let h = Polynomial::parse("(1 + t)*x1", 1, true).unwrap();
        assert_eq!(Polynomial::parse(&h.to_infix(true), 1, true).unwrap(), h);
    }
}

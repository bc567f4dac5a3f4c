//! Sparse multivariate polynomials over the parameter `x`, the lower-level
//! variable `y` and the path parameter `t`, plus a small expression parser.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A polynomial variable. Indices are zero-based; text uses `x1`, `y1`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
            Var::T => write!(f, "t"),
        }
    }
}

/// Product of variable powers, sorted by variable, exponents positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut acc: BTreeMap<Var, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *acc.entry(*v).or_insert(0) += e;
        }
        Monomial(acc.into_iter().collect())
    }

    fn eval(&self, vals: &Values<'_>) -> f64 {
        self.0
            .iter()
            .map(|(v, e)| vals.get(*v).powi(*e as i32))
            .product()
    }
}

/// Variable assignment used for evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Values<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub t: f64,
}

impl<'a> Values<'a> {
    pub fn x(x: &'a [f64]) -> Self {
        Self { x, y: &[], t: 0.0 }
    }

    pub fn xy(x: &'a [f64], y: &'a [f64]) -> Self {
        Self { x, y, t: 0.0 }
    }

    pub fn t(t: f64) -> Self {
        Self { x: &[], y: &[], t }
    }

    fn get(&self, v: Var) -> f64 {
        match v {
            Var::X(i) => self.x[i],
            Var::Y(i) => self.y[i],
            Var::T => self.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), 1.0);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (f64, Monomial)>) -> Self {
        let mut p = Self::zero();
        for (c, m) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, vals: &Values<'_>) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(vals)).sum()
    }

    /// Shorthand for polynomials in `x` only.
    pub fn eval_x(&self, x: &[f64]) -> f64 {
        self.eval(&Values::x(x))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let mut seen: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| *v))
            .collect();
        seen.sort();
        seen.dedup();
        seen.into_iter()
    }

    /// Value of the polynomial if it has no variables.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some(pos) = m.0.iter().position(|(w, _)| *w == v) {
                let e = m.0[pos].1;
                let mut factors = m.0.clone();
                if e == 1 {
                    factors.remove(pos);
                } else {
                    factors[pos].1 = e - 1;
                }
                out.add_term(Monomial(factors), c * e as f64);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Parses a polynomial; `scope` decides which variables may appear.
    pub fn parse(text: &str, scope: &Scope) -> Result<Poly> {
        Self::parse_at(text, scope, 1, 1)
    }

    /// Like [`Poly::parse`], reporting positions relative to `line`/`column`.
    pub fn parse_at(text: &str, scope: &Scope, line: usize, column: usize) -> Result<Poly> {
        let tokens = tokenize(text, line, column)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            scope,
            line,
            end_col: column + text.chars().count(),
        };
        let p = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(Error::Syntax {
                line,
                column: tok.col,
                message: format!("unexpected '{}'", tok.kind.describe()),
            });
        }
        Ok(p)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = *c < 0.0;
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let mut need_star = false;
            if m.is_one() || a != 1.0 {
                write!(f, "{a}")?;
                need_star = true;
            }
            for (v, e) in &m.0 {
                if need_star {
                    write!(f, "*")?;
                }
                write!(f, "{v}")?;
                if *e != 1 {
                    write!(f, "^{e}")?;
                }
                need_star = true;
            }
        }
        Ok(())
    }
}

/// Which variables a parsed polynomial may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scope {
    pub x: usize,
    pub y: usize,
    pub t: bool,
}

impl Scope {
    pub fn x(n: usize) -> Self {
        Self { x: n, y: 0, t: false }
    }

    pub fn xy(n: usize, m: usize) -> Self {
        Self { x: n, y: m, t: false }
    }

    pub fn t() -> Self {
        Self { x: 0, y: 0, t: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => v.to_string(),
            TokKind::Ident(s) => s.clone(),
            TokKind::Plus => "+".into(),
            TokKind::Minus => "-".into(),
            TokKind::Star => "*".into(),
            TokKind::Slash => "/".into(),
            TokKind::Caret => "^".into(),
            TokKind::LParen => "(".into(),
            TokKind::RParen => ")".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    col: usize,
    /// Literal text, kept for exponent checks.
    text: String,
}

fn tokenize(text: &str, line: usize, column: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = column + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(TokKind::Plus),
            '-' | '\u{2212}' => Some(TokKind::Minus),
            '*' => Some(TokKind::Star),
            '/' => Some(TokKind::Slash),
            '^' => Some(TokKind::Caret),
            '(' => Some(TokKind::LParen),
            ')' => Some(TokKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token {
                kind,
                col,
                text: c.to_string(),
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value: f64 = lit.parse().map_err(|_| Error::Syntax {
                line,
                column: col,
                message: format!("malformed number '{lit}'"),
            })?;
            out.push(Token {
                kind: TokKind::Num(value),
                col,
                text: lit,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            out.push(Token {
                kind: TokKind::Ident(ident.clone()),
                col,
                text: ident,
            });
            continue;
        }
        return Err(Error::Syntax {
            line,
            column: col,
            message: format!("unexpected character '{c}'"),
        });
    }
    Ok(out)
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'s Scope,
    line: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn syntax(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: col,
            message: message.into(),
        }
    }

    fn non_poly(&self, col: usize, message: impl Into<String>) -> Error {
        Error::NonPolynomial {
            line: self.line,
            column: col,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokKind::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                TokKind::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokKind::Star => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                TokKind::Slash => {
                    let col = tok.col;
                    self.pos += 1;
                    let divisor = self.unary()?;
                    match divisor.as_constant() {
                        Some(d) if d != 0.0 => acc = acc.scale(1.0 / d),
                        Some(_) => return Err(self.non_poly(col, "division by zero")),
                        None => {
                            return Err(self.non_poly(col, "division by a non-constant expression"))
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek().map(|t| &t.kind) {
            Some(TokKind::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(TokKind::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if let Some(TokKind::Caret) = self.peek().map(|t| &t.kind) {
            let caret_col = self.peek().unwrap().col;
            self.pos += 1;
            let Some(tok) = self.next() else {
                return Err(self.syntax(self.end_col, "missing exponent"));
            };
            return match tok.kind {
                TokKind::Num(_) if tok.text.chars().all(|c| c.is_ascii_digit()) => {
                    let e: u32 = tok
                        .text
                        .parse()
                        .map_err(|_| self.non_poly(tok.col, "exponent too large"))?;
                    if e > 64 {
                        return Err(self.non_poly(tok.col, "exponent too large"));
                    }
                    Ok(base.pow(e))
                }
                TokKind::Num(_) => Err(self.non_poly(tok.col, "exponent must be a nonnegative integer")),
                TokKind::Minus => Err(self.non_poly(tok.col, "negative exponent")),
                _ => Err(self.non_poly(caret_col, "exponent must be an integer literal")),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let Some(tok) = self.next() else {
            return Err(self.syntax(self.end_col, "unexpected end of expression"));
        };
        match tok.kind {
            TokKind::Num(v) => Ok(Poly::constant(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token {
                        kind: TokKind::RParen,
                        ..
                    }) => Ok(inner),
                    Some(t) => Err(self.syntax(t.col, format!("expected ')', found '{}'", t.kind.describe()))),
                    None => Err(self.syntax(self.end_col, "unclosed '('")),
                }
            }
            TokKind::Ident(name) => {
                if let Some(Token {
                    kind: TokKind::LParen,
                    ..
                }) = self.peek()
                {
                    return Err(self.non_poly(tok.col, format!("function '{name}' is not allowed")));
                }
                self.variable(&name, tok.col)
            }
            other => Err(self.syntax(tok.col, format!("unexpected '{}'", other.describe()))),
        }
    }

    fn variable(&self, name: &str, col: usize) -> Result<Poly> {
        if name == "t" {
            return if self.scope.t {
                Ok(Poly::var(Var::T))
            } else {
                Err(Error::Dimension(format!(
                    "line {}, column {col}: 't' is not allowed here",
                    self.line
                )))
            };
        }
        let (kind, rest) = name.split_at(1);
        let index: Option<usize> = rest.parse().ok().filter(|&i| i >= 1);
        let (Some(i), "x" | "y") = (index, kind) else {
            return Err(self.non_poly(col, format!("unknown symbol '{name}'")));
        };
        let limit = if kind == "x" { self.scope.x } else { self.scope.y };
        if i > limit {
            return Err(Error::Dimension(format!(
                "line {}, column {col}: '{name}' is out of range (only {limit} {kind}-variables here)",
                self.line
            )));
        }
        Ok(Poly::var(if kind == "x" { Var::X(i - 1) } else { Var::Y(i - 1) }))
    }
}

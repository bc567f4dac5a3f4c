//! Bilevel model data and the section-based model file format.
//!
//! ```text
//! [dims]
//! n=1 m=1 q=2
//! [upper]
//! F = -x1 + y1
//! X: x1 - 2 <= 0
//! [lower.objective]
//! c[1] = -x1^2
//! [lower.constraints]
//! A[1] = 0
//! B[1][1] = -1
//! A[2] = -1
//! B[2][1] = 1
//! [candidate]
//! x = (0), y = (0)
//! [path]
//! x[1](t) = t, y[1](t) = 0
//! t = harmonic(2, 20) dyadic(5, 20)
//! ```
//!
//! The lower level reads `min_y { c(x)ᵀy | A(x) + B(x)y <= 0 }`. Missing
//! `c`, `A` and `B` entries default to zero.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::lp::{dot, Matrix};
use crate::poly::{Poly, Scope, Values};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperConstraint {
    pub poly: Poly,
    pub relation: Relation,
}

/// Structural class of the lower level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormTag {
    /// `c(x)`, `A(x)`, `B(x)` arbitrary.
    LinearInY,
    /// `c`, `B` constant, `A(x)` arbitrary.
    RhsPerturbed,
    /// `A`, `B` constant, `c(x)` affine.
    ObjectivePerturbed,
    /// `c`, `B` constant, `A(x)` affine.
    FullyLinear,
}

impl FormTag {
    pub fn name(self) -> &'static str {
        match self {
            FormTag::LinearInY => "linear-in-y",
            FormTag::RhsPerturbed => "rhs-perturbed",
            FormTag::ObjectivePerturbed => "objective-perturbed",
            FormTag::FullyLinear => "fully-linear",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            FormTag::LinearInY,
            FormTag::RhsPerturbed,
            FormTag::ObjectivePerturbed,
            FormTag::FullyLinear,
        ]
        .into_iter()
        .find(|t| t.name() == s)
    }

    /// True when `c` and `B` do not depend on `x`.
    pub fn has_fixed_coefficients(self) -> bool {
        matches!(self, FormTag::RhsPerturbed | FormTag::FullyLinear)
    }
}

impl fmt::Display for FormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }
}

/// One segment of a decreasing `t` schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    /// `1/k` for `k = from..=to`.
    Harmonic(u32, u32),
    /// `2^-k` for `k = from..=to`.
    Dyadic(u32, u32),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub segments: Vec<Segment>,
}

impl Default for Schedule {
    /// `t_k = 2^-k`, `k = 1..=20`.
    fn default() -> Self {
        Self {
            segments: vec![Segment::Dyadic(1, 20)],
        }
    }
}

impl Schedule {
    pub fn harmonic(from: u32, to: u32) -> Self {
        Self {
            segments: vec![Segment::Harmonic(from, to)],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s {
                Segment::Harmonic(a, b) => out.extend((*a..=*b).map(|k| 1.0 / k as f64)),
                Segment::Dyadic(a, b) => out.extend((*a..=*b).map(|k| 0.5f64.powi(k as i32))),
                Segment::List(v) => out.extend(v.iter().copied()),
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::Config("empty t schedule".into()));
        }
        if v.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config("t schedule must be positive".into()));
        }
        if v.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("t schedule must be strictly decreasing".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match s {
                Segment::Harmonic(a, b) => write!(f, "harmonic({a}, {b})")?,
                Segment::Dyadic(a, b) => write!(f, "dyadic({a}, {b})")?,
                Segment::List(v) => write!(f, "list({})", join(v))?,
            }
        }
        Ok(())
    }
}

/// `t ↦ (x(t), y(t))` with the schedule along which it is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricPath {
    pub x: Vec<Poly>,
    pub y: Vec<Poly>,
    pub schedule: Schedule,
}

impl ParametricPath {
    pub fn eval(&self, t: f64) -> Point {
        let v = Values::t(t);
        Point {
            x: self.x.iter().map(|p| p.eval(&v)).collect(),
            y: self.y.iter().map(|p| p.eval(&v)).collect(),
        }
    }

    /// Path that stays at `p` for every `t`.
    pub fn constant(p: &Point, schedule: Schedule) -> Self {
        Self {
            x: p.x.iter().map(|&v| Poly::constant(v)).collect(),
            y: p.y.iter().map(|&v| Poly::constant(v)).collect(),
            schedule,
        }
    }
}

/// `eval_path`: componentwise polynomial evaluation at `t`.
pub fn eval_path(path: &ParametricPath, t: f64) -> Point {
    path.eval(t)
}

/// Lower-level data `(c, A, B)` at a fixed parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerLevelData {
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    /// `q × m`.
    pub b: Matrix,
}

impl LowerLevelData {
    pub fn objective(&self, y: &[f64]) -> f64 {
        dot(&self.c, y)
    }

    /// `A + B y`.
    pub fn constraint_values(&self, y: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, row)| a + dot(row, y))
            .collect()
    }

    pub fn max_violation(&self, y: &[f64]) -> f64 {
        self.constraint_values(y)
            .into_iter()
            .fold(0.0, |m: f64, g| m.max(g))
    }

    pub fn is_feasible(&self, y: &[f64], tol: f64) -> bool {
        self.max_violation(y) <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilevelModel {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    /// Upper-level objective `F(x, y)`.
    pub upper_objective: Poly,
    /// Constraints describing `X`.
    pub upper_constraints: Vec<UpperConstraint>,
    /// `c(x)`, length `m`.
    pub ll_objective: Vec<Poly>,
    /// `A(x)`, length `q`.
    pub ll_a: Vec<Poly>,
    /// `B(x)`, `q × m`.
    pub ll_b: Vec<Vec<Poly>>,
    pub form: FormTag,
    pub candidate: Option<Point>,
    pub paths: Vec<ParametricPath>,
}

impl BilevelModel {
    /// Evaluates `c(x)`, `A(x)` and `B(x)`.
    pub fn instantiate(&self, x: &[f64]) -> LowerLevelData {
        debug_assert_eq!(x.len(), self.n);
        LowerLevelData {
            c: self.ll_objective.iter().map(|p| p.eval_x(x)).collect(),
            a: self.ll_a.iter().map(|p| p.eval_x(x)).collect(),
            b: self
                .ll_b
                .iter()
                .map(|row| row.iter().map(|p| p.eval_x(x)).collect())
                .collect(),
        }
    }

    pub fn upper_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.upper_violation(x) <= tol
    }

    /// Largest violation of the `X` constraints at `x`.
    pub fn upper_violation(&self, x: &[f64]) -> f64 {
        self.upper_constraints.iter().fold(0.0, |m: f64, c| {
            let v = c.poly.eval_x(x);
            match c.relation {
                Relation::LessEq => m.max(v),
                Relation::Eq => m.max(v.abs()),
            }
        })
    }

    #[allow(non_snake_case)]
    pub fn eval_F(&self, p: &Point) -> f64 {
        self.upper_objective.eval(&Values::xy(&p.x, &p.y))
    }

    /// Lower-level objective `f(x, y) = c(x)ᵀy`.
    pub fn eval_f(&self, p: &Point) -> f64 {
        self.instantiate(&p.x).objective(&p.y)
    }

    /// Strongest form tag the coefficient maps satisfy.
    pub fn infer_form(&self) -> FormTag {
        infer_form(&self.ll_objective, &self.ll_a, &self.ll_b)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.x.len() != self.n || p.y.len() != self.m {
            return Err(Error::Dimension(format!(
                "point has dimensions ({}, {}), model expects ({}, {})",
                p.x.len(),
                p.y.len(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }

    /// Model file text; parses back to an equal model.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[dims]");
        let _ = writeln!(s, "n={} m={} q={} form={}", self.n, self.m, self.q, self.form);
        let _ = writeln!(s, "[upper]");
        let _ = writeln!(s, "F = {}", self.upper_objective);
        for c in &self.upper_constraints {
            let rel = match c.relation {
                Relation::LessEq => "<=",
                Relation::Eq => "=",
            };
            let _ = writeln!(s, "X: {} {rel} 0", c.poly);
        }
        let _ = writeln!(s, "[lower.objective]");
        for (i, c) in self.ll_objective.iter().enumerate() {
            let _ = writeln!(s, "c[{}] = {c}", i + 1);
        }
        let _ = writeln!(s, "[lower.constraints]");
        for j in 0..self.q {
            let _ = writeln!(s, "A[{}] = {}", j + 1, self.ll_a[j]);
            for (i, b) in self.ll_b[j].iter().enumerate() {
                if !b.is_zero() {
                    let _ = writeln!(s, "B[{}][{}] = {b}", j + 1, i + 1);
                }
            }
        }
        if let Some(p) = &self.candidate {
            let _ = writeln!(s, "[candidate]");
            let _ = writeln!(s, "x = ({}), y = ({})", join(&p.x), join(&p.y));
        }
        for path in &self.paths {
            let _ = writeln!(s, "[path]");
            for (i, p) in path.x.iter().enumerate() {
                let _ = writeln!(s, "x[{}](t) = {p}", i + 1);
            }
            for (i, p) in path.y.iter().enumerate() {
                let _ = writeln!(s, "y[{}](t) = {p}", i + 1);
            }
            let _ = writeln!(s, "t = {}", path.schedule);
        }
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn infer_form(c: &[Poly], a: &[Poly], b: &[Vec<Poly>]) -> FormTag {
    let c_const = c.iter().all(Poly::is_constant);
    let b_const = b.iter().flatten().all(Poly::is_constant);
    let a_const = a.iter().all(Poly::is_constant);
    if c_const && b_const {
        if a.iter().all(Poly::is_affine) {
            FormTag::FullyLinear
        } else {
            FormTag::RhsPerturbed
        }
    } else if a_const && b_const && c.iter().all(Poly::is_affine) {
        FormTag::ObjectivePerturbed
    } else {
        FormTag::LinearInY
    }
}

/// Whether data inferred as `actual` may be labelled `claimed`.
fn form_admits(actual: FormTag, claimed: FormTag) -> bool {
    use FormTag::*;
    match claimed {
        LinearInY => true,
        RhsPerturbed => matches!(actual, RhsPerturbed | FullyLinear),
        FullyLinear => actual == FullyLinear,
        ObjectivePerturbed => actual == ObjectivePerturbed,
    }
}

fn form_admits_data(claimed: FormTag, c: &[Poly], a: &[Poly], b: &[Vec<Poly>]) -> bool {
    let actual = infer_form(c, a, b);
    if form_admits(actual, claimed) {
        return true;
    }
    // Constant data is both fully linear and objective-perturbed.
    claimed == FormTag::ObjectivePerturbed
        && a.iter().all(Poly::is_constant)
        && b.iter().flatten().all(Poly::is_constant)
        && c.iter().all(Poly::is_affine)
}

struct Line<'a> {
    number: usize,
    text: &'a str,
    /// 1-based column of `text[0]` in the source line.
    offset: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Splits `s` at top-level commas, keeping column offsets.
fn split_top_level(s: &str, offset: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push((&s[start..i], offset + s[..start].chars().count()));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((&s[start..], offset + s[..start].chars().count()));
    out.into_iter()
        .filter_map(|(part, col)| {
            let lead = part.len() - part.trim_start().len();
            let trimmed = part.trim();
            (!trimmed.is_empty()).then(|| (trimmed, col + part[..lead].chars().count()))
        })
        .collect()
}

/// `key = value` with the value's column.
fn split_assign(text: &str, offset: usize, line: usize) -> Result<(&str, &str, usize)> {
    let Some(eq) = text.find('=') else {
        return Err(syntax(line, offset, "expected 'key = value'"));
    };
    let key = text[..eq].trim();
    let rest = &text[eq + 1..];
    let lead = rest.len() - rest.trim_start().len();
    let col = offset + text[..eq + 1].chars().count() + rest[..lead].chars().count();
    Ok((key, rest.trim(), col))
}

/// Parses `name[i]` or `name[i][j]` into 1-based indices.
fn parse_indices(key: &str, name: &str) -> Option<Vec<usize>> {
    let rest = key.strip_prefix(name)?;
    let mut out = Vec::new();
    let mut rest = rest.trim();
    while let Some(r) = rest.strip_prefix('[') {
        let close = r.find(']')?;
        out.push(r[..close].trim().parse().ok()?);
        rest = r[close + 1..].trim_start();
    }
    rest.is_empty().then_some(out)
}

fn parse_tuple(text: &str, line: usize, col: usize) -> Result<Vec<f64>> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| syntax(line, col, "expected a parenthesized tuple"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| syntax(line, col, format!("'{}' is not a number", v.trim())))
        })
        .collect()
}

fn parse_schedule(text: &str, line: usize, col: usize) -> Result<Schedule> {
    let mut segments = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| syntax(line, col, "expected harmonic(a, b), dyadic(a, b) or list(...)"))?;
        let close = rest
            .find(')')
            .ok_or_else(|| syntax(line, col, "unclosed schedule segment"))?;
        let name = rest[..open].trim();
        let args = &rest[open + 1..close];
        let seg = match name {
            "harmonic" | "dyadic" => {
                let bounds: Vec<u32> = args
                    .split(',')
                    .map(|a| a.trim().parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| syntax(line, col, "schedule bounds must be integers"))?;
                let [a, b] = bounds[..] else {
                    return Err(syntax(line, col, "schedule segment takes two bounds"));
                };
                if a == 0 && name == "harmonic" || a > b {
                    return Err(syntax(line, col, "invalid schedule bounds"));
                }
                if name == "harmonic" {
                    Segment::Harmonic(a, b)
                } else {
                    Segment::Dyadic(a, b)
                }
            }
            "list" => Segment::List(parse_tuple(&format!("({args})"), line, col)?),
            other => return Err(syntax(line, col, format!("unknown schedule segment '{other}'"))),
        };
        segments.push(seg);
        rest = rest[close + 1..].trim_start();
    }
    let schedule = Schedule { segments };
    schedule
        .validate()
        .map_err(|e| syntax(line, col, e.to_string()))?;
    Ok(schedule)
}

fn point_at(text: &str, number: usize, offset: usize) -> Result<Point> {
    let mut x = None;
    let mut y = None;
    for (part, col) in split_top_level(text, offset) {
        let (key, value, vcol) = split_assign(part, col, number)?;
        let v = parse_tuple(value, number, vcol)?;
        match key {
            "x" => x = Some(v),
            "y" => y = Some(v),
            other => return Err(syntax(number, col, format!("unexpected key '{other}'"))),
        }
    }
    let (Some(x), Some(y)) = (x, y) else {
        return Err(syntax(number, offset, "a point needs both x and y"));
    };
    Ok(Point { x, y })
}

/// Parses `x = (..), y = (..)` as written in a `[candidate]` section.
pub fn parse_point(text: &str) -> Result<Point> {
    point_at(text, 1, 1)
}

#[derive(Default)]
struct PathDraft {
    x: Vec<Option<Poly>>,
    y: Vec<Option<Poly>>,
    schedule: Option<Schedule>,
}

/// Parses a model file.
pub fn parse_model(text: &str) -> Result<BilevelModel> {
    let mut section: Option<(String, usize)> = None;
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut claimed_form: Option<FormTag> = None;
    let mut upper_objective: Option<Poly> = None;
    let mut upper_constraints = Vec::new();
    let mut c: Vec<Option<Poly>> = Vec::new();
    let mut a: Vec<Option<Poly>> = Vec::new();
    let mut b: Vec<Vec<Option<Poly>>> = Vec::new();
    let mut candidate: Option<Point> = None;
    let mut paths: Vec<PathDraft> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let code = raw.split('#').next().unwrap_or("");
        let lead = code.len() - code.trim_start().len();
        let line = Line {
            number,
            text: code.trim(),
            offset: 1 + code[..lead].chars().count(),
        };
        if line.text.is_empty() {
            continue;
        }
        if let Some(name) = line.text.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            match name.as_str() {
                "dims" => {}
                "upper" | "lower.objective" | "lower.constraints" | "candidate" | "path" => {
                    if dims.is_none() {
                        return Err(syntax(number, 1, "[dims] must come first"));
                    }
                }
                other => return Err(syntax(number, 2, format!("unknown section '{other}'"))),
            }
            if name == "path" {
                let (n, m, _) = dims.unwrap();
                paths.push(PathDraft {
                    x: vec![None; n],
                    y: vec![None; m],
                    schedule: None,
                });
            }
            section = Some((name, number));
            continue;
        }
        let Some((name, _)) = &section else {
            return Err(syntax(number, line.offset, "content before any section header"));
        };
        match name.as_str() {
            "dims" => {
                let (n, m, q, form) = parse_dims(&line, dims)?;
                dims = Some((n, m, q));
                if form.is_some() {
                    claimed_form = form;
                }
                c = vec![None; m];
                a = vec![None; q];
                b = vec![vec![None; m]; q];
            }
            "upper" => {
                let (n, m, _) = dims.unwrap();
                if let Some(rest) = line.text.strip_prefix("X:") {
                    let col = line.offset + 2;
                    upper_constraints.push(parse_upper_constraint(rest, col, number, n)?);
                } else {
                    let (key, value, col) = split_assign(line.text, line.offset, number)?;
                    if key != "F" {
                        return Err(syntax(number, line.offset, format!("unexpected key '{key}'")));
                    }
                    if upper_objective.is_some() {
                        return Err(syntax(number, line.offset, "F given twice"));
                    }
                    upper_objective = Some(Poly::parse_at(value, &Scope::xy(n, m), number, col)?);
                }
            }
            "lower.objective" => {
                let (n, m, _) = dims.unwrap();
                let (key, value, col) = split_assign(line.text, line.offset, number)?;
                let i = single_index(key, "c", m, number, line.offset)?;
                set_once(&mut c[i], Poly::parse_at(value, &Scope::x(n), number, col)?, number, line.offset)?;
            }
            "lower.constraints" => {
                let (n, m, q) = dims.unwrap();
                let (key, value, col) = split_assign(line.text, line.offset, number)?;
                let poly = Poly::parse_at(value, &Scope::x(n), number, col)?;
                if let Some(ix) = parse_indices(key, "A") {
                    let j = check_indices(&ix, &[q], number, line.offset)?[0];
                    set_once(&mut a[j], poly, number, line.offset)?;
                } else if let Some(ix) = parse_indices(key, "B") {
                    let ij = check_indices(&ix, &[q, m], number, line.offset)?;
                    set_once(&mut b[ij[0]][ij[1]], poly, number, line.offset)?;
                } else {
                    return Err(syntax(number, line.offset, format!("unexpected key '{key}'")));
                }
            }
            "candidate" => {
                let (n, m, _) = dims.unwrap();
                let Point { x, y } = point_at(line.text, number, line.offset)?;
                if x.len() != n || y.len() != m {
                    return Err(Error::Dimension(format!(
                        "line {number}: candidate has dimensions ({}, {}), expected ({n}, {m})",
                        x.len(),
                        y.len()
                    )));
                }
                candidate = Some(Point { x, y });
            }
            "path" => {
                let (n, m, _) = dims.unwrap();
                let draft = paths.last_mut().unwrap();
                let (key, value, col) = split_assign(line.text, line.offset, number)?;
                if key == "t" {
                    draft.schedule = Some(parse_schedule(value, number, col)?);
                    continue;
                }
                for (part, pcol) in split_top_level(line.text, line.offset) {
                    let (key, value, col) = split_assign(part, pcol, number)?;
                    let key = key.strip_suffix("(t)").unwrap_or(key).trim();
                    let poly = Poly::parse_at(value, &Scope::t(), number, col)?;
                    if let Some(ix) = parse_indices(key, "x") {
                        let i = check_indices(&ix, &[n], number, pcol)?[0];
                        set_once(&mut draft.x[i], poly, number, pcol)?;
                    } else if let Some(ix) = parse_indices(key, "y") {
                        let i = check_indices(&ix, &[m], number, pcol)?[0];
                        set_once(&mut draft.y[i], poly, number, pcol)?;
                    } else {
                        return Err(syntax(number, pcol, format!("unexpected key '{key}'")));
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    let (n, m, q) = dims.ok_or_else(|| Error::Dimension("missing [dims] section".into()))?;
    let upper_objective = upper_objective.unwrap_or_default();
    let ll_objective: Vec<Poly> = c.into_iter().map(Option::unwrap_or_default).collect();
    let ll_a: Vec<Poly> = a.into_iter().map(Option::unwrap_or_default).collect();
    let ll_b: Vec<Vec<Poly>> = b
        .into_iter()
        .map(|row| row.into_iter().map(Option::unwrap_or_default).collect())
        .collect();
    let form = match claimed_form {
        Some(tag) => {
            if !form_admits_data(tag, &ll_objective, &ll_a, &ll_b) {
                return Err(Error::Dimension(format!(
                    "declared form '{tag}' does not match the coefficient data (looks {})",
                    infer_form(&ll_objective, &ll_a, &ll_b)
                )));
            }
            tag
        }
        None => infer_form(&ll_objective, &ll_a, &ll_b),
    };
    let paths = paths
        .into_iter()
        .map(|d| ParametricPath {
            x: d.x.into_iter().map(Option::unwrap_or_default).collect(),
            y: d.y.into_iter().map(Option::unwrap_or_default).collect(),
            schedule: d.schedule.unwrap_or_default(),
        })
        .collect();
    Ok(BilevelModel {
        n,
        m,
        q,
        upper_objective,
        upper_constraints,
        ll_objective,
        ll_a,
        ll_b,
        form,
        candidate,
        paths,
    })
}

type DimsLine = (usize, usize, usize, Option<FormTag>);

fn parse_dims(line: &Line<'_>, previous: Option<(usize, usize, usize)>) -> Result<DimsLine> {
    if previous.is_some() {
        return Err(syntax(line.number, line.offset, "dimensions given twice"));
    }
    // Normalize "n = 1" into "n=1".
    let compact: String = {
        let mut s = String::new();
        let mut pending_space = false;
        for ch in line.text.chars() {
            if ch.is_whitespace() {
                pending_space = true;
                continue;
            }
            if pending_space && ch != '=' && !s.ends_with('=') && !s.is_empty() {
                s.push(' ');
            }
            pending_space = false;
            s.push(ch);
        }
        s
    };
    let (mut n, mut m, mut q, mut form) = (None, None, None, None);
    for tok in compact.split_whitespace() {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(syntax(line.number, line.offset, format!("expected key=value, found '{tok}'")));
        };
        let num = || -> Result<usize> {
            v.parse()
                .map_err(|_| syntax(line.number, line.offset, format!("'{v}' is not a count")))
        };
        match k {
            "n" => n = Some(num()?),
            "m" => m = Some(num()?),
            "q" => q = Some(num()?),
            "form" => {
                form = Some(FormTag::from_name(v).ok_or_else(|| {
                    syntax(line.number, line.offset, format!("unknown form '{v}'"))
                })?)
            }
            other => return Err(syntax(line.number, line.offset, format!("unknown key '{other}'"))),
        }
    }
    let (Some(n), Some(m), Some(q)) = (n, m, q) else {
        return Err(Error::Dimension(format!(
            "line {}: [dims] needs n, m and q",
            line.number
        )));
    };
    if n == 0 || m == 0 {
        return Err(Error::Dimension("n and m must be positive".into()));
    }
    if q == 0 {
        return Err(Error::Dimension(
            "the lower level needs at least one constraint (q = 0)".into(),
        ));
    }
    Ok((n, m, q, form))
}

fn parse_upper_constraint(rest: &str, col: usize, line: usize, n: usize) -> Result<UpperConstraint> {
    let lead = rest.len() - rest.trim_start().len();
    let body = rest.trim();
    let col = col + rest[..lead].chars().count();
    let (lhs, rhs, rel, flip, rhs_off) = if let Some(i) = body.find("<=") {
        (&body[..i], &body[i + 2..], Relation::LessEq, false, i + 2)
    } else if let Some(i) = body.find(">=") {
        (&body[..i], &body[i + 2..], Relation::LessEq, true, i + 2)
    } else if let Some(i) = body.find('=') {
        (&body[..i], &body[i + 1..], Relation::Eq, false, i + 1)
    } else {
        return Err(syntax(line, col, "expected '<= 0' or '= 0'"));
    };
    let scope = Scope::x(n);
    let l = Poly::parse_at(lhs, &scope, line, col)?;
    let r = Poly::parse_at(rhs, &scope, line, col + body[..rhs_off].chars().count())?;
    let poly = if flip { &r - &l } else { &l - &r };
    Ok(UpperConstraint { poly, relation: rel })
}

fn single_index(key: &str, name: &str, len: usize, line: usize, col: usize) -> Result<usize> {
    let ix = parse_indices(key, name)
        .ok_or_else(|| syntax(line, col, format!("expected {name}[i], found '{key}'")))?;
    Ok(check_indices(&ix, &[len], line, col)?[0])
}

fn check_indices(ix: &[usize], bounds: &[usize], line: usize, col: usize) -> Result<Vec<usize>> {
    if ix.len() != bounds.len() {
        return Err(syntax(line, col, "wrong number of indices"));
    }
    ix.iter()
        .zip(bounds)
        .map(|(&i, &b)| {
            if i == 0 || i > b {
                Err(Error::Dimension(format!(
                    "line {line}: index {i} out of range 1..={b}"
                )))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn set_once(slot: &mut Option<Poly>, value: Poly, line: usize, col: usize) -> Result<()> {
    if slot.is_some() {
        return Err(syntax(line, col, "entry given twice"));
    }
    *slot = Some(value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX42: &str = "\
[dims]
n=1 m=1 q=2
[upper]
F = -x1 + y1
X: x1 - 2 <= 0
[lower.objective]
c[1] = -x1^2
[lower.constraints]
A[1] = 0
B[1][1] = -1
A[2] = -1
B[2][1] = 1
[candidate]
x = (0), y = (0)
[path]
x[1](t) = t, y[1](t) = 0
";

    #[test]
    fn parses_linear_in_y_model() {
        let m = parse_model(EX42).unwrap();
        assert_eq!((m.n, m.m, m.q), (1, 1, 2));
        assert_eq!(m.form, FormTag::LinearInY);
        let d = m.instantiate(&[3.0]);
        assert_eq!(d.c, vec![-9.0]);
        assert_eq!(d.a, vec![0.0, -1.0]);
        assert_eq!(d.b, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(m.eval_F(&Point::new(vec![2.0], vec![1.0])), -1.0);
        assert_eq!(m.paths[0].schedule, Schedule::default());
        let p = m.paths[0].eval(0.1);
        assert_eq!(p, Point::new(vec![0.1], vec![0.0]));
    }

    #[test]
    fn round_trip() {
        let m = parse_model(EX42).unwrap();
        assert_eq!(parse_model(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn zero_constraints_rejected() {
        let err = parse_model("[dims]\nn=1 m=1 q=0\n").unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn declared_form_is_validated() {
        let text = EX42.replace("n=1 m=1 q=2", "n=1 m=1 q=2 form=fully-linear");
        assert!(matches!(parse_model(&text), Err(Error::Dimension(_))));
        let text = EX42.replace("n=1 m=1 q=2", "n=1 m = 1 q=2 form=linear-in-y");
        assert_eq!(parse_model(&text).unwrap().form, FormTag::LinearInY);
    }

    #[test]
    fn error_positions() {
        let text = EX42.replace("c[1] = -x1^2", "c[1] = -x1^^2");
        match parse_model(&text).unwrap_err() {
            Error::Syntax { line, .. } | Error::NonPolynomial { line, .. } => assert_eq!(line, 7),
            e => panic!("{e:?}"),
        }
        let text = EX42.replace("c[1] = -x1^2", "c[1] = -x1 * y1");
        assert!(matches!(parse_model(&text), Err(Error::Dimension(_))));
        let text = EX42.replace("c[1] = -x1^2", "c[1] = 1/x1");
        assert!(matches!(parse_model(&text), Err(Error::NonPolynomial { line: 7, column: 9, .. })));
        let text = EX42.replace("[upper]", "[uper]");
        assert!(matches!(parse_model(&text), Err(Error::Syntax { line: 3, .. })));
    }

    #[test]
    fn schedules() {
        let s = parse_schedule("harmonic(2, 4) dyadic(3, 4)", 1, 1).unwrap();
        assert_eq!(s.values(), vec![0.5, 1.0 / 3.0, 0.25, 0.125, 0.0625]);
        assert!(parse_schedule("harmonic(2, 4) dyadic(1, 2)", 1, 1).is_err());
        assert!(parse_schedule("list(0.5, 0.5)", 1, 1).is_err());
        assert_eq!(s.to_string(), "harmonic(2, 4) dyadic(3, 4)");
    }

    #[test]
    fn form_inference() {
        let x = Scope::x(2);
        let p = |s: &str| Poly::parse(s, &x).unwrap();
        let c = vec![p("1")];
        let b = vec![vec![p("-1")]];
        assert_eq!(infer_form(&c, &[p("x1 + 2")], &b), FormTag::FullyLinear);
        assert_eq!(infer_form(&c, &[p("x1^2")], &b), FormTag::RhsPerturbed);
        assert_eq!(infer_form(&[p("x1")], &[p("1")], &b), FormTag::ObjectivePerturbed);
        assert_eq!(infer_form(&[p("x1^2")], &[p("1")], &b), FormTag::LinearInY);
        assert!(form_admits_data(FormTag::ObjectivePerturbed, &c, &[p("1")], &b));
        assert!(form_admits_data(FormTag::RhsPerturbed, &c, &[p("x1")], &b));
    }
}

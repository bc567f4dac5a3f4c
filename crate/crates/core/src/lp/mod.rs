//! Dense linear-programming kernel.
//!
//! Everything here works on small, dense, row-major matrices: a two-phase
//! primal simplex with Bland's rule ([`solve_lp`]), brute-force vertex
//! enumeration ([`enumerate_vertices`]) and a tolerance-aware rank
//! ([`numerical_rank`]).

mod dense;
mod rank;
mod simplex;
mod vertices;

pub use dense::{mat_vec, solve_square, transpose};
pub use rank::{numerical_rank, RankPolicy};
pub use simplex::solve_lp;
pub use vertices::{enumerate_vertices, VertexSet, DEFAULT_BASIS_CAP};

use crate::error::{Error, Result};

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

/// Sign restriction on a single variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Free,
    NonPositive,
    NonNegative,
}

/// `{ v | eq_matrix v = eq_rhs, ineq_matrix v <= ineq_rhs, sign(v_j) }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub num_vars: usize,
    pub eq_matrix: Matrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: Matrix,
    pub ineq_rhs: Vec<f64>,
    pub signs: Vec<Sign>,
}

impl Polyhedron {
    /// Unconstrained space with `num_vars` free variables.
    pub fn free(num_vars: usize) -> Self {
        Self {
            num_vars,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_matrix: Vec::new(),
            ineq_rhs: Vec::new(),
            signs: vec![Sign::Free; num_vars],
        }
    }

    pub fn with_eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn with_ineq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    pub fn with_signs(mut self, signs: Vec<Sign>) -> Self {
        self.signs = signs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if self.signs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} sign flags for {n} variables",
                self.signs.len()
            )));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() {
            return Err(Error::DimensionMismatch(
                "equality rhs length differs from row count".into(),
            ));
        }
        if self.ineq_matrix.len() != self.ineq_rhs.len() {
            return Err(Error::DimensionMismatch(
                "inequality rhs length differs from row count".into(),
            ));
        }
        for row in self.eq_matrix.iter().chain(&self.ineq_matrix) {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint row has {} columns, expected {n}",
                    row.len()
                )));
            }
        }
        Ok(())
    }

    /// Largest constraint violation at `point` (0 when feasible).
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, rhs) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, point) - rhs).abs());
        }
        for (row, rhs) in self.ineq_matrix.iter().zip(&self.ineq_rhs) {
            worst = worst.max(dot(row, point) - rhs);
        }
        for (v, s) in point.iter().zip(&self.signs) {
            match s {
                Sign::Free => {}
                Sign::NonPositive => worst = worst.max(*v),
                Sign::NonNegative => worst = worst.max(-v),
            }
        }
        worst
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.num_vars && self.max_violation(point) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub region: Polyhedron,
}

impl LpProblem {
    pub fn minimize(objective: Vec<f64>, region: Polyhedron) -> Self {
        Self {
            objective,
            sense: Sense::Minimize,
            region,
        }
    }

    pub fn maximize(objective: Vec<f64>, region: Polyhedron) -> Self {
        Self {
            objective,
            sense: Sense::Maximize,
            region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// Dual multipliers follow the convention `value = eq_rhs·eq_duals +
/// ineq_rhs·ineq_duals`. For a minimization, inequality duals are `<= 0`;
/// for a maximization they are `>= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal value, `+inf` when infeasible, `-inf`/`+inf` when unbounded
    /// below/above.
    pub value: f64,
    pub primal: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub ineq_duals: Vec<f64>,
    /// Indices of the basic columns of the internal standard form.
    pub basis: Vec<usize>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `b·y` for the reported multipliers.
    pub fn dual_value(&self, p: &LpProblem) -> f64 {
        dot(&p.region.eq_rhs, &self.eq_duals) + dot(&p.region.ineq_rhs, &self.ineq_duals)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_norm_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

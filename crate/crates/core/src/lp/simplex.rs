use super::dense::solve_square;
use super::{dot, LpOutcome, LpProblem, LpStatus, Sense, Sign};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

const MAX_ITERATIONS: usize = 50_000;
const OPT_TOL: f64 = 1e-10;

/// Structural column of the standard form: `x[var] += sign * v`.
#[derive(Debug, Clone, Copy)]
struct Column {
    var: usize,
    sign: f64,
}

struct StandardForm {
    /// Constraint rows over all columns (structural, slack, artificial), rhs
    /// last. Rows are already flipped to a nonnegative rhs.
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    structural: Vec<Column>,
    num_slack: usize,
    num_artificial: usize,
    flips: Vec<f64>,
    basis: Vec<usize>,
}

impl StandardForm {
    fn num_cols(&self) -> usize {
        self.structural.len() + self.num_slack + self.num_artificial
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.structural.len() + self.num_slack
    }

    fn build(p: &LpProblem) -> Self {
        let region = &p.region;
        let mut structural = Vec::new();
        let sense = if p.sense == Sense::Minimize { 1.0 } else { -1.0 };
        let mut cost = Vec::new();
        for (var, s) in region.signs.iter().enumerate() {
            match s {
                Sign::NonNegative => structural.push(Column { var, sign: 1.0 }),
                Sign::NonPositive => structural.push(Column { var, sign: -1.0 }),
                Sign::Free => {
                    structural.push(Column { var, sign: 1.0 });
                    structural.push(Column { var, sign: -1.0 });
                }
            }
        }
        for col in &structural {
            cost.push(sense * col.sign * p.objective[col.var]);
        }
        let n_eq = region.eq_matrix.len();
        let n_in = region.ineq_matrix.len();
        let m = n_eq + n_in;
        let n_struct = structural.len();

        let mut flips = vec![1.0; m];
        let mut needs_artificial = vec![false; m];
        for r in 0..m {
            let rhs = if r < n_eq {
                region.eq_rhs[r]
            } else {
                region.ineq_rhs[r - n_eq]
            };
            if rhs < 0.0 {
                flips[r] = -1.0;
            }
            needs_artificial[r] = r < n_eq || rhs < 0.0;
        }
        let num_artificial = needs_artificial.iter().filter(|&&a| a).count();
        let width = n_struct + n_in + num_artificial;

        let mut rows = Vec::with_capacity(m);
        let mut basis = vec![0; m];
        let mut next_art = n_struct + n_in;
        for r in 0..m {
            let mut row = vec![0.0; width + 1];
            let (src, rhs) = if r < n_eq {
                (&region.eq_matrix[r], region.eq_rhs[r])
            } else {
                (&region.ineq_matrix[r - n_eq], region.ineq_rhs[r - n_eq])
            };
            for (j, col) in structural.iter().enumerate() {
                row[j] = flips[r] * col.sign * src[col.var];
            }
            if r >= n_eq {
                row[n_struct + (r - n_eq)] = flips[r];
            }
            row[width] = flips[r] * rhs;
            if needs_artificial[r] {
                row[next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            } else {
                basis[r] = n_struct + (r - n_eq);
            }
            rows.push(row);
        }
        cost.extend(std::iter::repeat_n(0.0, n_in + num_artificial));
        Self {
            rows,
            cost,
            structural,
            num_slack: n_in,
            num_artificial,
            flips,
            basis,
        }
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// Runs primal simplex iterations with Bland's rule on `tab` until optimal or
/// unbounded. Columns for which `allowed` is false never enter.
fn run_phase(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    allowed: &dyn Fn(usize) -> bool,
    pivot_tol: f64,
) -> Result<PhaseEnd> {
    let width = cost.len();
    for _ in 0..MAX_ITERATIONS {
        let mut entering = None;
        for j in 0..width {
            if !allowed(j) || basis.contains(&j) {
                continue;
            }
            let reduced = cost[j]
                - tab
                    .iter()
                    .zip(basis.iter())
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum::<f64>();
            if reduced < -OPT_TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(PhaseEnd::Optimal);
        };
        let mut leave: Option<(usize, f64)> = None;
        for (r, row) in tab.iter().enumerate() {
            if row[j] > pivot_tol {
                let ratio = row[width] / row[j];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, best)) => {
                        let slack = 1e-12 * (1.0 + best.abs());
                        if ratio < best - slack
                            || (ratio <= best + slack && basis[r] < basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, best))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return Ok(PhaseEnd::Unbounded);
        };
        pivot(tab, basis, r, j);
    }
    Err(Error::NumericalBreakdown(format!(
        "simplex did not terminate within {MAX_ITERATIONS} pivots"
    )))
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], r: usize, j: usize) {
    let p = tab[r][j];
    for v in tab[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[j];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[j] = 0.0;
        }
    }
    basis[r] = j;
}

/// Solves a dense LP by the two-phase primal simplex method with Bland's
/// anti-cycling rule.
///
/// On an optimal basis the primal point and the dual multipliers are
/// recomputed from the original data by a fresh factorization of the basis
/// matrix, so accumulated tableau drift does not leak into the outcome.
pub fn solve_lp(p: &LpProblem, tol: &Tolerances) -> Result<LpOutcome> {
    p.region.validate()?;
    if p.objective.len() != p.region.num_vars {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} entries for {} variables",
            p.objective.len(),
            p.region.num_vars
        )));
    }
    let sf = StandardForm::build(p);
    let width = sf.num_cols();
    let m = sf.rows.len();
    let original = sf.rows.clone();
    let mut tab = sf.rows.clone();
    let mut basis = sf.basis.clone();

    let rhs_scale = 1.0 + original.iter().fold(0.0f64, |a, r| a.max(r[width].abs()));

    if sf.num_artificial > 0 {
        let phase1_cost: Vec<f64> = (0..width)
            .map(|j| if sf.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        run_phase(&mut tab, &mut basis, &phase1_cost, &|_| true, tol.pivot)?;
        let infeasibility: f64 = tab
            .iter()
            .zip(&basis)
            .filter(|(_, &b)| sf.is_artificial(b))
            .map(|(row, _)| row[width])
            .sum();
        if infeasibility > tol.feas * rhs_scale {
            return Ok(infeasible(basis));
        }
        // Drive remaining (zero-level) artificials out of the basis where a
        // structural or slack column can replace them.
        for r in 0..m {
            if !sf.is_artificial(basis[r]) {
                continue;
            }
            let replacement = (0..width)
                .filter(|&j| !sf.is_artificial(j) && !basis.contains(&j))
                .find(|&j| tab[r][j].abs() > tol.pivot.max(1e-9));
            if let Some(j) = replacement {
                pivot(&mut tab, &mut basis, r, j);
            }
        }
    }

    // Pricing runs on the cost normalized to unit max norm.
    let cost_scale = sf.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let priced: Vec<f64> = if cost_scale > 0.0 {
        sf.cost.iter().map(|c| c / cost_scale).collect()
    } else {
        sf.cost.clone()
    };
    let end = run_phase(
        &mut tab,
        &mut basis,
        &priced,
        &|j| !sf.is_artificial(j),
        tol.pivot,
    )?;
    if let PhaseEnd::Unbounded = end {
        let value = match p.sense {
            Sense::Minimize => f64::NEG_INFINITY,
            Sense::Maximize => f64::INFINITY,
        };
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            value,
            primal: Vec::new(),
            eq_duals: Vec::new(),
            ineq_duals: Vec::new(),
            basis,
        });
    }

    // Refactor the optimal basis against the original rows.
    let basis_matrix: Vec<Vec<f64>> = (0..m)
        .map(|r| basis.iter().map(|&b| original[r][b]).collect())
        .collect();
    let rhs: Vec<f64> = original.iter().map(|r| r[width]).collect();
    let mut levels = match solve_square(&basis_matrix, &rhs, 1e-13) {
        Some(x) => x,
        None => tab.iter().map(|r| r[width]).collect(),
    };
    for v in levels.iter_mut() {
        if *v < 0.0 && *v > -tol.feas * rhs_scale {
            *v = 0.0;
        }
    }
    let basis_t: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|r| basis_matrix[r][i]).collect())
        .collect();
    let cost_b: Vec<f64> = basis.iter().map(|&b| sf.cost[b]).collect();
    let y = if m == 0 {
        Vec::new()
    } else {
        solve_square(&basis_t, &cost_b, 1e-13).ok_or_else(|| {
            Error::NumericalBreakdown("optimal basis matrix is numerically singular".into())
        })?
    };

    let mut primal = vec![0.0; p.region.num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < sf.structural.len() {
            let col = sf.structural[b];
            primal[col.var] += col.sign * levels[r];
        }
    }
    let value = dot(&p.objective, &primal);
    let sense = if p.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let n_eq = p.region.eq_matrix.len();
    let duals: Vec<f64> = y
        .iter()
        .zip(&sf.flips)
        .map(|(yi, f)| sense * yi * f)
        .collect();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        value,
        primal,
        eq_duals: duals[..n_eq].to_vec(),
        ineq_duals: duals[n_eq..].to_vec(),
        basis,
    })
}

fn infeasible(basis: Vec<usize>) -> LpOutcome {
    LpOutcome {
        status: LpStatus::Infeasible,
        value: f64::INFINITY,
        primal: Vec::new(),
        eq_duals: Vec::new(),
        ineq_duals: Vec::new(),
        basis,
    }
}

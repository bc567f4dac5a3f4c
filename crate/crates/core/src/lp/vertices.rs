use super::rank::{numerical_rank, RankPolicy};
use super::{max_norm_dist, solve_lp, LpProblem, LpStatus, Polyhedron, Sign};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Default cap on the number of candidate bases examined.
pub const DEFAULT_BASIS_CAP: u128 = 2_000_000;

/// Vertices of a polyhedron together with one defining basis each.
///
/// A basis is the list of inequality-type constraints held tight: indices
/// `0..ineq_rows` name inequality rows, `ineq_rows + j` names the sign
/// bound of variable `j`. Equalities are always tight and not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    pub vertices: Vec<Vec<f64>>,
    pub bases: Vec<Vec<usize>>,
    /// Set when the polyhedron itself has no feasible point.
    pub polyhedron_empty: bool,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic
/// order. Returns false after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves `rows · v = rhs` for a system of full column rank (possibly with
/// redundant consistent rows). Returns `None` when rank-deficient or
/// inconsistent.
fn solve_full_rank(rows: &[Vec<f64>], rhs: &[f64], n: usize, rel_tol: f64) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(*b);
            row
        })
        .collect();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return if n == 0 { Some(Vec::new()) } else { None };
    }
    let threshold = rel_tol * scale;
    let total = m.len();
    let mut rank = 0;
    for col in 0..n {
        if rank == total {
            break;
        }
        let piv = (rank..total)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= threshold {
            return None;
        }
        m.swap(rank, piv);
        for r in rank + 1..total {
            let f = m[r][col] / m[rank][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    if rank < n {
        return None;
    }
    let rhs_scale = 1.0 + rhs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    for row in &m[rank..] {
        if row[n].abs() > 1e-9 * rhs_scale {
            return None;
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = m[r][n];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Some(x)
}

/// Enumerates the vertices of `poly` by brute force over candidate bases.
///
/// Candidate bases are the subsets of inequality-type constraints (rows and
/// sign bounds) of size `num_vars - rank(eq_matrix)`, visited in
/// lexicographic order. Points equal within `tol.vertex` are reported once,
/// keeping the first basis encountered. Unbounded polyhedra are fine; only
/// their vertices are returned.
pub fn enumerate_vertices(poly: &Polyhedron, tol: &Tolerances, cap: u128) -> Result<VertexSet> {
    poly.validate()?;
    let n = poly.num_vars;
    let mut tight_rows: Vec<Vec<f64>> = poly.ineq_matrix.clone();
    let mut tight_rhs: Vec<f64> = poly.ineq_rhs.clone();
    let mut labels: Vec<usize> = (0..poly.ineq_matrix.len()).collect();
    for (j, s) in poly.signs.iter().enumerate() {
        let mut unit = vec![0.0; n];
        match s {
            Sign::Free => continue,
            Sign::NonPositive => unit[j] = 1.0,
            Sign::NonNegative => unit[j] = -1.0,
        }
        tight_rows.push(unit);
        tight_rhs.push(0.0);
        labels.push(poly.ineq_matrix.len() + j);
    }

    let eq_rank = numerical_rank(&poly.eq_matrix, RankPolicy::Echelon, tol.rank);
    let mut out = VertexSet {
        vertices: Vec::new(),
        bases: Vec::new(),
        polyhedron_empty: false,
    };
    if eq_rank <= n {
        let k = n - eq_rank;
        let total = tight_rows.len();
        let candidates = binomial(total, k);
        if candidates > cap {
            return Err(Error::CombinatorialBlowup { candidates, cap });
        }
        if k <= total {
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                let mut rows = poly.eq_matrix.clone();
                let mut rhs = poly.eq_rhs.clone();
                for &i in &idx {
                    rows.push(tight_rows[i].clone());
                    rhs.push(tight_rhs[i]);
                }
                if let Some(point) = solve_full_rank(&rows, &rhs, n, tol.rank) {
                    if poly.max_violation(&point) <= tol.feas * (1.0 + super::max_norm(&point))
                        && !out
                            .vertices
                            .iter()
                            .any(|v| max_norm_dist(v, &point) <= tol.vertex)
                    {
                        out.vertices.push(point);
                        out.bases.push(idx.iter().map(|&i| labels[i]).collect());
                    }
                }
                if !next_combination(&mut idx, total) {
                    break;
                }
            }
        }
    }
    if out.vertices.is_empty() {
        let probe = LpProblem::minimize(vec![0.0; n], poly.clone());
        out.polyhedron_empty = solve_lp(&probe, tol)?.status == LpStatus::Infeasible;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn reflected_simplex_edge() {
        // xi1, xi2 <= 0, -xi1 - xi2 = 1
        let poly = Polyhedron::free(2)
            .with_eq(vec![-1.0, -1.0], 1.0)
            .with_signs(vec![Sign::NonPositive; 2]);
        let vs = enumerate_vertices(&poly, &tol(), DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(vs.vertices, vec![vec![0.0, -1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn unit_box_has_four_corners() {
        let poly = Polyhedron::free(2)
            .with_ineq(vec![1.0, 0.0], 1.0)
            .with_ineq(vec![-1.0, 0.0], 0.0)
            .with_ineq(vec![0.0, 1.0], 1.0)
            .with_ineq(vec![0.0, -1.0], 0.0);
        let vs = enumerate_vertices(&poly, &tol(), DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(vs.len(), 4);
        assert_eq!(vs.bases.len(), 4);
    }

    #[test]
    fn degenerate_apex_is_reported_once() {
        // Pyramid apex where three facets and a redundant fourth meet.
        let poly = Polyhedron::free(2)
            .with_ineq(vec![1.0, 1.0], 1.0)
            .with_ineq(vec![-1.0, 1.0], 1.0)
            .with_ineq(vec![0.0, 1.0], 1.0)
            .with_ineq(vec![0.0, -1.0], 0.0);
        let vs = enumerate_vertices(&poly, &tol(), DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(vs.len(), 3);
        assert_eq!(vs.bases[0], vec![0, 1]);
    }

    #[test]
    fn empty_and_lineal_polyhedra() {
        let empty = Polyhedron::free(1)
            .with_ineq(vec![1.0], -1.0)
            .with_ineq(vec![-1.0], -1.0);
        let vs = enumerate_vertices(&empty, &tol(), DEFAULT_BASIS_CAP).unwrap();
        assert!(vs.is_empty() && vs.polyhedron_empty);

        let halfplane = Polyhedron::free(2).with_ineq(vec![0.0, 1.0], 0.0);
        let vs = enumerate_vertices(&halfplane, &tol(), DEFAULT_BASIS_CAP).unwrap();
        assert!(vs.is_empty() && !vs.polyhedron_empty);
    }

    #[test]
    fn cap_is_enforced() {
        let mut poly = Polyhedron::free(4).with_signs(vec![Sign::NonNegative; 4]);
        for _ in 0..4 {
            poly = poly.with_ineq(vec![1.0; 4], 1.0);
        }
        let err = enumerate_vertices(&poly, &tol(), 5).unwrap_err();
        assert!(matches!(err, Error::CombinatorialBlowup { .. }));
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap(), &vec![2, 3]);
        assert_eq!(binomial(11, 7), 330);
    }
}

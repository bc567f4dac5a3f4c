use crate::error::{Error, Result};
use crate::lp::{numerical_rank, Matrix, RankPolicy};
use crate::model::{BilevelModel, Point};
use crate::poly::Poly;
use crate::sampling;
use crate::tol::Tolerances;

/// Largest number of rows of `ℬ` whose subsets are enumerated.
pub const DEFAULT_SUBSET_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetResult {
    /// 1-based rows of `ℬ`; row 1 is the lower-level objective.
    pub subset: Vec<usize>,
    /// Rank at the center followed by the rank at every sampled `x`.
    pub ranks: Vec<usize>,
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankVerdict {
    ConstantRankHolds,
    Violated {
        subset: Vec<usize>,
        x_center: Vec<f64>,
        x_witness: Vec<f64>,
        rank_center: usize,
        rank_witness: usize,
    },
}

impl RankVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            RankVerdict::ConstantRankHolds => "ConstantRankHolds",
            RankVerdict::Violated { .. } => "Violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub center: Point,
    /// 1-based indices of the active lower-level constraints.
    pub active_set: Vec<usize>,
    /// Rows of `ℬ(x) = [c(x)ᵀ; B(x)_I]`.
    pub rows: Vec<Vec<Poly>>,
    pub sampled_x: Vec<Vec<f64>>,
    pub subset_results: Vec<SubsetResult>,
    pub verdict: RankVerdict,
}

impl RankProfile {
    pub fn matrix_at(&self, x: &[f64]) -> Matrix {
        eval_rows(&self.rows, x)
    }
}

fn eval_rows(rows: &[Vec<Poly>], x: &[f64]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|p| p.eval_x(x)).collect())
        .collect()
}

/// Nonempty subsets of `0..k`, by size and then lexicographically.
fn subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity((1usize << k).saturating_sub(1));
    for size in 1..=k {
        let mut comb: Vec<usize> = (0..size).collect();
        loop {
            out.push(comb.clone());
            let mut i = size;
            while i > 0 && comb[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..size {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    out
}

/// Checks that every row subset of `ℬ(x)` keeps its rank over sampled `x`
/// in the max-norm ball of `radius` around the center.
pub fn constant_rank_check(
    model: &BilevelModel,
    center: &Point,
    radius: f64,
    x_samples: usize,
    seed: u64,
    tol: &Tolerances,
    subset_cap: usize,
) -> Result<RankProfile> {
    model.check_point(center)?;
    let data = model.instantiate(&center.x);
    let active_set: Vec<usize> = data
        .constraint_values(&center.y)
        .iter()
        .enumerate()
        .filter(|(_, g)| g.abs() <= tol.feas)
        .map(|(i, _)| i + 1)
        .collect();
    let mut rows = vec![model.ll_objective.clone()];
    rows.extend(active_set.iter().map(|&i| model.ll_b[i - 1].clone()));
    if rows.len() > subset_cap {
        return Err(Error::SubsetCapExceeded {
            rows: rows.len(),
            cap: subset_cap,
        });
    }

    let mut rng = sampling::rng(seed);
    let sampled_x: Vec<Vec<f64>> = (0..x_samples)
        .map(|_| {
            sampling::unit_offset(&mut rng, model.n)
                .iter()
                .zip(&center.x)
                .map(|(u, c)| c + radius * u)
                .collect()
        })
        .collect();
    let mut matrices = vec![eval_rows(&rows, &center.x)];
    matrices.extend(sampled_x.iter().map(|x| eval_rows(&rows, x)));

    let mut subset_results = Vec::new();
    let mut verdict = RankVerdict::ConstantRankHolds;
    for subset in subsets(rows.len()) {
        let ranks: Vec<usize> = matrices
            .iter()
            .map(|mat| {
                let sub: Matrix = subset.iter().map(|&r| mat[r].clone()).collect();
                numerical_rank(&sub, RankPolicy::Echelon, tol.rank)
            })
            .collect();
        let constant = ranks.iter().all(|&r| r == ranks[0]);
        let subset: Vec<usize> = subset.iter().map(|r| r + 1).collect();
        if !constant && verdict == RankVerdict::ConstantRankHolds {
            let k = ranks.iter().position(|&r| r != ranks[0]).expect("rank differs");
            verdict = RankVerdict::Violated {
                subset: subset.clone(),
                x_center: center.x.clone(),
                x_witness: sampled_x[k - 1].clone(),
                rank_center: ranks[0],
                rank_witness: ranks[k],
            };
        }
        subset_results.push(SubsetResult {
            subset,
            ranks,
            constant,
        });
    }
    Ok(RankProfile {
        center: center.clone(),
        active_set,
        rows,
        sampled_x,
        subset_results,
        verdict,
    })
}

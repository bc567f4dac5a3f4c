use super::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankPolicy {
    /// Row echelon form with partial pivoting; threshold relative to the
    /// largest entry.
    #[default]
    Echelon,
    /// Singular values; threshold relative to the largest one.
    SingularValues,
}

/// Numerical rank of a dense matrix under a relative tolerance.
///
/// The all-zeros matrix (and the empty matrix) has rank 0.
pub fn numerical_rank(mat: &Matrix, policy: RankPolicy, rel_tol: f64) -> usize {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0;
    }
    match policy {
        RankPolicy::Echelon => echelon_rank(mat, rel_tol),
        RankPolicy::SingularValues => {
            let m = nalgebra::DMatrix::from_fn(rows, cols, |i, j| mat[i][j]);
            let sv = m.singular_values();
            let largest = sv.iter().cloned().fold(0.0f64, f64::max);
            if largest == 0.0 {
                return 0;
            }
            sv.iter().filter(|&&s| s > rel_tol * largest).count()
        }
    }
}

fn echelon_rank(mat: &Matrix, rel_tol: f64) -> usize {
    let mut m = mat.clone();
    let rows = m.len();
    let cols = m[0].len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let threshold = rel_tol * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let piv = (rank..rows)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= threshold {
            continue;
        }
        m.swap(rank, piv);
        for r in rank + 1..rows {
            let f = m[r][col] / m[rank][col];
            if f != 0.0 {
                for c in col..cols {
                    m[r][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

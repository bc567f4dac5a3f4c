//! Seeded sampling on max-norm balls around a point of `(x, y)` space.
//!
//! Every attempt consumes the same number of random draws, so reseeding per
//! radius yields common random numbers: the sample at radius `ε` is the
//! same unit offset scaled by `ε`. Ratio sequences across radii are then
//! comparable sample by sample.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::max_norm_dist;
use crate::model::{BilevelModel, LowerLevelData, Point, Relation};
use crate::poly::Var;

/// Default fraction of samples pushed onto a lower-level constraint.
pub const BOUNDARY_FRACTION: f64 = 0.25;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform vector in `[-1, 1]^dim`.
pub fn unit_offset(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    /// Require `x ∈ X`, repairing equality constraints by Gauss-Newton.
    pub upper_feasible: bool,
    /// Require `A(x) + B(x)y <= 0`.
    pub lower_feasible: bool,
    pub boundary_fraction: f64,
}

/// A sample together with its instantiated lower-level data.
#[derive(Debug, Clone)]
pub struct Sample {
    pub point: Point,
    pub data: LowerLevelData,
    pub on_boundary: bool,
}

/// Projects `x` onto the equality constraints of `X` (min-norm Gauss-Newton).
pub fn repair_equalities(model: &BilevelModel, x: &[f64], tol: f64) -> Option<Vec<f64>> {
    let eqs: Vec<_> = model
        .upper_constraints
        .iter()
        .filter(|c| c.relation == Relation::Eq)
        .collect();
    if eqs.is_empty() {
        return Some(x.to_vec());
    }
    let grads: Vec<Vec<_>> = eqs
        .iter()
        .map(|c| (0..model.n).map(|i| c.poly.derivative(Var::X(i))).collect())
        .collect();
    let mut x = x.to_vec();
    for _ in 0..50 {
        let h = DVector::from_iterator(eqs.len(), eqs.iter().map(|c| c.poly.eval_x(&x)));
        if h.amax() <= tol * 1e-3 {
            return Some(x);
        }
        let jac = DMatrix::from_fn(eqs.len(), model.n, |r, i| grads[r][i].eval_x(&x));
        let pinv = jac.pseudo_inverse(1e-12).ok()?;
        let step = pinv * h;
        for (xi, s) in x.iter_mut().zip(step.iter()) {
            *xi -= s;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    let residual = eqs.iter().fold(0.0f64, |m, c| m.max(c.poly.eval_x(&x).abs()));
    (residual <= tol).then_some(x)
}

/// Moves `y` onto the hyperplane of constraint `row` along its normal.
fn project_on_constraint(data: &LowerLevelData, y: &[f64], row: usize) -> Option<Vec<f64>> {
    let b = &data.b[row];
    let norm2: f64 = b.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return None;
    }
    let g = data.a[row] + crate::lp::dot(b, y);
    Some(y.iter().zip(b).map(|(yi, bi)| yi - g / norm2 * bi).collect())
}

/// One sampling attempt in the ball of radius `radius` around `center`.
pub fn attempt(
    model: &BilevelModel,
    center: &Point,
    radius: f64,
    spec: &SampleSpec,
    tol: f64,
    rng: &mut impl Rng,
) -> Option<Sample> {
    let ux = unit_offset(rng, model.n);
    let uy = unit_offset(rng, model.m);
    let coin: f64 = rng.gen();
    let row = rng.gen_range(0..model.q);

    let mut x: Vec<f64> = center.x.iter().zip(&ux).map(|(c, u)| c + radius * u).collect();
    if spec.upper_feasible {
        x = repair_equalities(model, &x, tol)?;
        if max_norm_dist(&x, &center.x) > radius || !model.upper_feasible(&x, tol) {
            return None;
        }
    }
    let data = model.instantiate(&x);
    let mut y: Vec<f64> = center.y.iter().zip(&uy).map(|(c, u)| c + radius * u).collect();
    let mut on_boundary = false;
    if coin < spec.boundary_fraction {
        y = project_on_constraint(&data, &y, row)?;
        if max_norm_dist(&y, &center.y) > radius {
            return None;
        }
        on_boundary = true;
    }
    if spec.lower_feasible && !data.is_feasible(&y, tol) {
        return None;
    }
    Some(Sample {
        point: Point { x, y },
        data,
        on_boundary,
    })
}

/// Draws up to `count` accepted samples, giving up after
/// `count * max_attempt_factor` attempts. Returns the samples and the number
/// of attempts made.
pub fn draw(
    model: &BilevelModel,
    center: &Point,
    radius: f64,
    spec: &SampleSpec,
    count: usize,
    max_attempt_factor: usize,
    tol: f64,
    seed: u64,
) -> (Vec<Sample>, usize) {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    let limit = count.saturating_mul(max_attempt_factor).max(count);
    let mut attempts = 0;
    while out.len() < count && attempts < limit {
        attempts += 1;
        if let Some(s) = attempt(model, center, radius, spec, tol, &mut rng) {
            out.push(s);
        }
    }
    (out, attempts)
}

//! Lower-level value function, solution sets and max-norm distances.
//!
//! The distance `dist(y, S(x))` is computed twice per call: once as
//! `min σ` over `{ -σe <= y - z <= σe, cᵀz <= φ(x), A + Bz <= 0 }` and once as
//! the maximum of `yᵀ(ξ₁ - ξ₂) + φ(x)ξ₃ - Aᵀξ₄` over the polyhedron
//! `Q = { ξ₁ - ξ₂ + cξ₃ + Bᵀξ₄ = 0, -eᵀξ₁ - eᵀξ₂ = 1, ξ <= 0 }`.
//! Both values must agree.

use crate::error::{Error, Result};
use crate::lp::{dot, solve_lp, LpProblem, LpStatus, Polyhedron, Sign};
use crate::model::{BilevelModel, LowerLevelData};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiValue {
    Finite(f64),
    /// Infeasible lower level.
    PlusInfinity,
    /// Unbounded lower level.
    MinusInfinity,
}

impl PhiValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PhiValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PhiValue::Finite(_) => "finite",
            PhiValue::PlusInfinity => "+inf",
            PhiValue::MinusInfinity => "-inf",
        }
    }
}

/// `min_y { cᵀy | By <= -A }` with `y` free.
pub fn lower_level_lp(data: &LowerLevelData) -> LpProblem {
    let m = data.c.len();
    let mut region = Polyhedron::free(m);
    for (row, a) in data.b.iter().zip(&data.a) {
        region = region.with_ineq(row.clone(), -a);
    }
    LpProblem::minimize(data.c.clone(), region)
}

/// φ and one optimal lower-level point (when finite).
pub fn phi_with_point(data: &LowerLevelData, tol: &Tolerances) -> Result<(PhiValue, Option<Vec<f64>>)> {
    let out = solve_lp(&lower_level_lp(data), tol)?;
    Ok(match out.status {
        LpStatus::Optimal => (PhiValue::Finite(out.value), Some(out.primal)),
        LpStatus::Infeasible => (PhiValue::PlusInfinity, None),
        LpStatus::Unbounded => (PhiValue::MinusInfinity, None),
    })
}

pub fn phi(model: &BilevelModel, x: &[f64], tol: &Tolerances) -> Result<PhiValue> {
    check_x(model, x)?;
    Ok(phi_with_point(&model.instantiate(x), tol)?.0)
}

fn check_x(model: &BilevelModel, x: &[f64]) -> Result<()> {
    if x.len() != model.n {
        return Err(Error::Dimension(format!(
            "parameter has length {}, model expects {}",
            x.len(),
            model.n
        )));
    }
    Ok(())
}

fn require_finite(v: PhiValue, x: &[f64]) -> Result<f64> {
    v.finite().ok_or_else(|| Error::PhiNotFinite {
        x: x.to_vec(),
        status: v.label().into(),
    })
}

/// `S(x)` as the face `{ y | B(x)y <= -A(x), c(x)ᵀy = φ(x) }`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFace {
    pub base_x: Vec<f64>,
    pub phi: f64,
    pub face: Polyhedron,
}

impl SolutionFace {
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.face.contains(y, tol)
    }
}

pub fn solution_face(model: &BilevelModel, x: &[f64], tol: &Tolerances) -> Result<SolutionFace> {
    check_x(model, x)?;
    let data = model.instantiate(x);
    let (value, _) = phi_with_point(&data, tol)?;
    let phi = require_finite(value, x)?;
    let face = lower_level_lp(&data).region.with_eq(data.c.clone(), phi);
    Ok(SolutionFace {
        base_x: x.to_vec(),
        phi,
        face,
    })
}

/// Optimal multipliers of the distance LP's dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMultipliers {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub xi3: f64,
    pub xi4: Vec<f64>,
}

impl DualMultipliers {
    fn from_flat(v: &[f64], m: usize) -> Self {
        Self {
            xi1: v[..m].to_vec(),
            xi2: v[m..2 * m].to_vec(),
            xi3: v[2 * m],
            xi4: v[2 * m + 1..].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCertificate {
    /// `dist(y, S(x))` in the max norm.
    pub sigma: f64,
    /// Nearest solution `z ∈ S(x)`.
    pub z: Vec<f64>,
    pub primal_value: f64,
    pub dual: DualMultipliers,
    pub dual_value: f64,
    /// `f(x, y) - φ(x)`.
    pub slack_u: f64,
}

/// `Q(c, B)` over `(ξ₁ ∈ ℝᵐ, ξ₂ ∈ ℝᵐ, ξ₃ ∈ ℝ, ξ₄ ∈ ℝ^q)`, all nonpositive.
pub fn q_polyhedron(c: &[f64], b: &[Vec<f64>]) -> Polyhedron {
    let m = c.len();
    let q = b.len();
    let dim = 2 * m + 1 + q;
    let mut poly = Polyhedron::free(dim).with_signs(vec![Sign::NonPositive; dim]);
    for i in 0..m {
        let mut row = vec![0.0; dim];
        row[i] = 1.0;
        row[m + i] = -1.0;
        row[2 * m] = c[i];
        for (j, brow) in b.iter().enumerate() {
            row[2 * m + 1 + j] = brow[i];
        }
        poly = poly.with_eq(row, 0.0);
    }
    let mut norm_row = vec![0.0; dim];
    for v in norm_row.iter_mut().take(2 * m) {
        *v = -1.0;
    }
    poly.with_eq(norm_row, 1.0)
}

/// Distance certificate from already-instantiated data and a finite φ.
pub fn distance_from_data(
    data: &LowerLevelData,
    phi: f64,
    y: &[f64],
    tol: &Tolerances,
) -> Result<DistanceCertificate> {
    let m = data.c.len();
    if y.len() != m {
        return Err(Error::Dimension(format!(
            "y has length {}, model expects {m}",
            y.len()
        )));
    }
    // The cut cᵀz <= φ is normalized by |c|∞ and relaxed by τ_feas; Q is
    // built from the same normalized c and ξ₃ is mapped back at the end.
    let scale = crate::lp::max_norm(&data.c);
    let (c_hat, phi_hat) = if scale > 0.0 {
        (data.c.iter().map(|v| v / scale).collect::<Vec<_>>(), phi / scale)
    } else {
        (data.c.clone(), phi)
    };
    let phi_relaxed = phi_hat + tol.feas;

    let mut region = Polyhedron::free(m + 1);
    for i in 0..m {
        let mut lo = vec![0.0; m + 1];
        lo[0] = -1.0;
        lo[1 + i] = -1.0;
        region = region.with_ineq(lo, -y[i]);
        let mut hi = vec![0.0; m + 1];
        hi[0] = -1.0;
        hi[1 + i] = 1.0;
        region = region.with_ineq(hi, y[i]);
    }
    let mut cut = vec![0.0];
    cut.extend_from_slice(&c_hat);
    region = region.with_ineq(cut, phi_relaxed);
    for (row, a) in data.b.iter().zip(&data.a) {
        let mut r = vec![0.0];
        r.extend_from_slice(row);
        region = region.with_ineq(r, -a);
    }
    let mut objective = vec![0.0; m + 1];
    objective[0] = 1.0;
    let primal = solve_lp(&LpProblem::minimize(objective, region), tol)?;
    if primal.status != LpStatus::Optimal {
        return Err(Error::NumericalBreakdown(format!(
            "distance LP ended {:?} although φ is finite",
            primal.status
        )));
    }

    let q = data.b.len();
    let mut dual_obj = Vec::with_capacity(2 * m + 1 + q);
    dual_obj.extend(y.iter().copied());
    dual_obj.extend(y.iter().map(|v| -v));
    dual_obj.push(phi_relaxed);
    dual_obj.extend(data.a.iter().map(|a| -a));
    let dual = solve_lp(
        &LpProblem::maximize(dual_obj, q_polyhedron(&c_hat, &data.b)),
        tol,
    )?;
    if dual.status != LpStatus::Optimal {
        return Err(Error::NumericalBreakdown(format!(
            "dual distance LP ended {:?}",
            dual.status
        )));
    }
    if (primal.value - dual.value).abs() > tol.dual {
        return Err(Error::NumericalBreakdown(format!(
            "distance LP duality gap {:e}",
            (primal.value - dual.value).abs()
        )));
    }
    let mut multipliers = DualMultipliers::from_flat(&dual.primal, m);
    if scale > 0.0 {
        multipliers.xi3 /= scale;
    }
    Ok(DistanceCertificate {
        sigma: primal.value.max(0.0),
        z: primal.primal[1..].to_vec(),
        primal_value: primal.value,
        dual: multipliers,
        dual_value: dual.value,
        slack_u: dot(&data.c, y) - phi,
    })
}

pub fn dist_to_solutions(
    model: &BilevelModel,
    x: &[f64],
    y: &[f64],
    tol: &Tolerances,
) -> Result<DistanceCertificate> {
    check_x(model, x)?;
    let data = model.instantiate(x);
    let (value, _) = phi_with_point(&data, tol)?;
    let phi = require_finite(value, x)?;
    distance_from_data(&data, phi, y, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn ex42() -> BilevelModel {
        parse_model(
            "[dims]\nn=1 m=1 q=2\n[upper]\nF = -x1 + y1\nX: x1 - 2 <= 0\n\
             [lower.objective]\nc[1] = -x1^2\n[lower.constraints]\n\
             A[1] = 0\nB[1][1] = -1\nA[2] = -1\nB[2][1] = 1\n",
        )
        .unwrap()
    }

    #[test]
    fn phi_closed_form() {
        let t = Tolerances::default();
        assert_eq!(phi(&ex42(), &[0.5], &t).unwrap(), PhiValue::Finite(-0.25));
    }

    #[test]
    fn faces_of_example_model() {
        let t = Tolerances::default();
        let face = solution_face(&ex42(), &[1.0], &t).unwrap();
        assert!(face.contains(&[1.0], t.feas));
        assert!(!face.contains(&[0.5], t.feas));
        let face = solution_face(&ex42(), &[0.0], &t).unwrap();
        assert!(face.contains(&[0.0], t.feas) && face.contains(&[1.0], t.feas));
        assert!(!face.contains(&[1.5], t.feas));
    }

    #[test]
    fn distance_and_certificate_invariants() {
        let t = Tolerances::default();
        let cert = dist_to_solutions(&ex42(), &[1.0], &[0.0], &t).unwrap();
        assert!((cert.sigma - 1.0).abs() < 1e-9);
        assert!((cert.primal_value - cert.dual_value).abs() <= t.dual);
        let d = &cert.dual;
        let s: f64 = d.xi1.iter().chain(&d.xi2).sum();
        assert!((s + 1.0).abs() < 1e-9);
        assert!(d.xi1.iter().chain(&d.xi2).chain(&d.xi4).all(|&v| v <= 1e-12) && d.xi3 <= 1e-12);
        assert!((cert.z[0] - 1.0).abs() < 1e-9);

        let zero = dist_to_solutions(&ex42(), &[0.0], &[0.3], &t).unwrap();
        assert!(zero.sigma <= t.feas);
    }

    #[test]
    fn infeasible_lower_level() {
        let model = parse_model(
            "[dims]\nn=1 m=1 q=2\n[lower.objective]\nc[1] = 1\n[lower.constraints]\n\
             A[1] = x1\nB[1][1] = 1\nA[2] = 1\nB[2][1] = -1\n",
        )
        .unwrap();
        let t = Tolerances::default();
        // y <= -x and y >= 1: empty for x > -1.
        assert_eq!(phi(&model, &[0.0], &t).unwrap(), PhiValue::PlusInfinity);
        assert!(matches!(
            dist_to_solutions(&model, &[0.0], &[0.0], &t),
            Err(Error::PhiNotFinite { .. })
        ));
        assert_eq!(phi(&model, &[-2.0], &t).unwrap(), PhiValue::Finite(1.0));
    }
}

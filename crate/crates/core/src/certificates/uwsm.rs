use rand::Rng;

use crate::error::{Error, Result};
use crate::lp::{dot, enumerate_vertices, VertexSet};
use crate::model::{BilevelModel, LowerLevelData};
use crate::sampling;
use crate::tol::Tolerances;
use crate::value_function::{distance_from_data, phi_with_point, q_polyhedron};

#[derive(Debug, Clone, PartialEq)]
pub struct WsmCertificate {
    /// `M = max |ξ₃|` over the vertices of `Q`.
    pub modulus: f64,
    /// Vertices of `Q` (of `Q(x)` at the maximizing sample for sweeps).
    pub witness_vertices: VertexSet,
    /// `(x, M(x))` per sample; empty for fixed-coefficient certificates.
    pub per_x_moduli: Vec<(Vec<f64>, f64)>,
    /// `M(x)` differs across samples by more than a factor `1 + 1e-6`.
    pub growing: bool,
}

fn modulus_of(vertices: &VertexSet, m: usize) -> f64 {
    vertices
        .vertices
        .iter()
        .map(|v| v[2 * m].abs())
        .fold(0.0, f64::max)
}

/// Weak-sharp modulus of `min { cᵀy | A + By <= 0 }` for constant `c`, `B`.
pub fn uwsm_modulus(c: &[f64], b: &[Vec<f64>], tol: &Tolerances, cap: u128) -> Result<WsmCertificate> {
    if b.iter().any(|row| row.len() != c.len()) {
        return Err(Error::DimensionMismatch("rows of B must match the length of c".into()));
    }
    let vertices = enumerate_vertices(&q_polyhedron(c, b), tol, cap)?;
    Ok(WsmCertificate {
        modulus: modulus_of(&vertices, c.len()),
        witness_vertices: vertices,
        per_x_moduli: Vec::new(),
        growing: false,
    })
}

/// [`uwsm_modulus`] for a model whose `c` and `B` do not depend on `x`.
pub fn uwsm_modulus_for_model(model: &BilevelModel, tol: &Tolerances, cap: u128) -> Result<WsmCertificate> {
    let constant = |p: &crate::poly::Poly| p.as_constant();
    let c: Option<Vec<f64>> = model.ll_objective.iter().map(constant).collect();
    let b: Option<Vec<Vec<f64>>> = model
        .ll_b
        .iter()
        .map(|row| row.iter().map(constant).collect())
        .collect();
    match (c, b) {
        (Some(c), Some(b)) => uwsm_modulus(&c, &b, tol, cap),
        _ => Err(Error::FormNotSupported(format!(
            "form {} has x-dependent c or B; use the sweep",
            model.infer_form()
        ))),
    }
}

/// `M(x)` from `Q(c(x), B(x))` at every sample.
pub fn uwsm_modulus_sweep(
    model: &BilevelModel,
    x_samples: &[Vec<f64>],
    tol: &Tolerances,
    cap: u128,
) -> Result<WsmCertificate> {
    if x_samples.is_empty() {
        return Err(Error::Config("modulus sweep needs at least one x sample".into()));
    }
    let mut per_x = Vec::with_capacity(x_samples.len());
    let mut best: Option<(f64, VertexSet)> = None;
    for x in x_samples {
        if x.len() != model.n {
            return Err(Error::Dimension(format!(
                "x sample has length {}, model expects {}",
                x.len(),
                model.n
            )));
        }
        let data = model.instantiate(x);
        let (phi, _) = phi_with_point(&data, tol)?;
        if phi.finite().is_none() {
            return Err(Error::PhiNotFinite {
                x: x.clone(),
                status: phi.label().into(),
            });
        }
        let vertices = enumerate_vertices(&q_polyhedron(&data.c, &data.b), tol, cap)?;
        let mx = modulus_of(&vertices, model.m);
        per_x.push((x.clone(), mx));
        if best.as_ref().is_none_or(|(b, _)| mx > *b) {
            best = Some((mx, vertices));
        }
    }
    let (modulus, witness_vertices) = best.expect("at least one sample");
    let min = per_x.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(WsmCertificate {
        modulus,
        witness_vertices,
        per_x_moduli: per_x,
        growing: modulus > min * (1.0 + 1e-6),
    })
}

/// Outcome of sampling the inequality `dist(y, S(x)) <= M (cᵀy - φ(x)) + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct UwsmCheck {
    pub samples: usize,
    pub attempts: usize,
    pub violations: usize,
    /// Largest `dist - M u` seen.
    pub max_excess: f64,
    /// Largest primal/dual disagreement of the distance LP.
    pub max_duality_gap: f64,
    /// Largest `|ξ₃|` of an optimal dual multiplier.
    pub max_xi3: f64,
}

/// Samples lower-level-feasible pairs and tests the weak-sharp inequality.
///
/// `x` is drawn uniformly from the max-norm ball of `radius` around
/// `center_x`; `y` moves from a lower-level solution along a random
/// direction, clipped at the feasible boundary (a quarter of the samples
/// land exactly on it).
pub fn check_uwsm_inequality(
    model: &BilevelModel,
    modulus: f64,
    center_x: &[f64],
    radius: f64,
    count: usize,
    slack: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<UwsmCheck> {
    let mut rng = sampling::rng(seed);
    let mut out = UwsmCheck {
        samples: 0,
        attempts: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        max_duality_gap: 0.0,
        max_xi3: 0.0,
    };
    let limit = count.saturating_mul(50).max(count);
    while out.samples < count && out.attempts < limit {
        out.attempts += 1;
        let ux = sampling::unit_offset(&mut rng, model.n);
        let d = sampling::unit_offset(&mut rng, model.m);
        let coin: f64 = rng.gen();
        let frac: f64 = rng.gen();
        let x: Vec<f64> = center_x.iter().zip(&ux).map(|(c, u)| c + radius * u).collect();
        let data = model.instantiate(&x);
        let (phi, z0) = phi_with_point(&data, tol)?;
        let (Some(phi), Some(z0)) = (phi.finite(), z0) else {
            continue;
        };
        let y = ray_point(&data, &z0, &d, radius, coin < sampling::BOUNDARY_FRACTION, frac);
        if !data.is_feasible(&y, tol.feas) {
            continue;
        }
        let cert = distance_from_data(&data, phi, &y, tol)?;
        out.samples += 1;
        let u = dot(&data.c, &y) - phi;
        let excess = cert.sigma - modulus * u;
        out.max_excess = out.max_excess.max(excess);
        if excess > slack {
            out.violations += 1;
        }
        out.max_duality_gap = out
            .max_duality_gap
            .max((cert.primal_value - cert.dual_value).abs());
        out.max_xi3 = out.max_xi3.max(cert.dual.xi3.abs());
    }
    if out.samples == 0 {
        return Err(Error::AllSamplesSkipped(
            "no lower-level-feasible sample with finite φ".into(),
        ));
    }
    Ok(out)
}

fn ray_point(data: &LowerLevelData, z0: &[f64], d: &[f64], scale: f64, boundary: bool, frac: f64) -> Vec<f64> {
    let d: Vec<f64> = d.iter().map(|v| v * scale).collect();
    let g = data.constraint_values(z0);
    let mut s_max = f64::INFINITY;
    for (row, gj) in data.b.iter().zip(&g) {
        let slope = dot(row, &d);
        if slope > 1e-14 {
            s_max = s_max.min((-gj).max(0.0) / slope);
        }
    }
    let s_hi = s_max.min(1.0);
    let s = if boundary { s_hi } else { frac * s_hi };
    z0.iter().zip(&d).map(|(z, di)| z + s * di).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::DEFAULT_BASIS_CAP;

    #[test]
    fn single_sided_bound() {
        let t = Tolerances::default();
        let cert = uwsm_modulus(&[1.0], &[vec![-1.0]], &t, DEFAULT_BASIS_CAP).unwrap();
        assert!((cert.modulus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_objective_gives_zero_modulus() {
        let t = Tolerances::default();
        let cert = uwsm_modulus(&[0.0], &[vec![-1.0], vec![1.0]], &t, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(cert.modulus, 0.0);
        assert!(!cert.witness_vertices.is_empty());
    }
}

use crate::error::{Error, Result};
use crate::lp::max_norm;
use crate::model::{BilevelModel, Point};
use crate::sampling;
use crate::tol::Tolerances;
use crate::value_function::dist_to_solutions;

#[derive(Debug, Clone, PartialEq)]
pub enum Directions {
    Explicit(Vec<Vec<f64>>),
    /// `±e_i` for every coordinate plus this many seeded random directions.
    CoordinateAndRandom(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IscVerdict {
    Consistent,
    /// Index into [`IscReport::directions`].
    Violated(usize),
}

impl IscVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            IscVerdict::Consistent => "Consistent",
            IscVerdict::Violated(_) => "Violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IscReport {
    pub center: Point,
    pub schedule: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// `dist(ȳ, S(x̄ + t d))` per direction and `t`; `None` where φ is not finite.
    pub distances: Vec<Vec<Option<f64>>>,
    /// Sup over directions per `t`.
    pub sup_per_t: Vec<f64>,
    /// `(direction, t)` pairs where φ is not finite.
    pub non_finite: Vec<(usize, f64)>,
    pub verdict: IscVerdict,
}

fn expand(directions: &Directions, n: usize, seed: u64) -> Vec<Vec<f64>> {
    match directions {
        Directions::Explicit(d) => d.clone(),
        Directions::CoordinateAndRandom(count) => {
            let mut out = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    out.push(e);
                }
            }
            let mut rng = sampling::rng(seed);
            while out.len() < 2 * n + count {
                let d = sampling::unit_offset(&mut rng, n);
                let norm = max_norm(&d);
                if norm > 1e-3 {
                    out.push(d.iter().map(|v| v / norm).collect());
                }
            }
            out
        }
    }
}

/// Distances from `ȳ` to `S(x̄ + t d)` along rays.
///
/// A direction is consistent when its distance at the smallest `t` is below
/// `max(10 τ_feas, distance at the largest t / 10)`.
pub fn inner_semicontinuity_probe(
    model: &BilevelModel,
    center: &Point,
    schedule: &[f64],
    directions: &Directions,
    seed: u64,
    tol: &Tolerances,
) -> Result<IscReport> {
    model.check_point(center)?;
    if schedule.is_empty() {
        return Err(Error::Config("empty t schedule".into()));
    }
    let at_center = dist_to_solutions(model, &center.x, &center.y, tol)?;
    if at_center.sigma > tol.feas {
        return Err(Error::CenterNotOptimal(at_center.sigma));
    }
    let directions = expand(directions, model.n, seed);
    if directions.iter().any(|d| d.len() != model.n) {
        return Err(Error::Dimension(format!("directions must have length {}", model.n)));
    }
    let mut distances = Vec::with_capacity(directions.len());
    let mut non_finite = Vec::new();
    for (k, d) in directions.iter().enumerate() {
        let mut row = Vec::with_capacity(schedule.len());
        for &t in schedule {
            let x: Vec<f64> = center.x.iter().zip(d).map(|(c, di)| c + t * di).collect();
            match dist_to_solutions(model, &x, &center.y, tol) {
                Ok(cert) => row.push(Some(cert.sigma)),
                Err(Error::PhiNotFinite { .. }) => {
                    non_finite.push((k, t));
                    row.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        distances.push(row);
    }
    let sup_per_t = (0..schedule.len())
        .map(|j| {
            distances
                .iter()
                .filter_map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut verdict = IscVerdict::Consistent;
    for (k, row) in distances.iter().enumerate() {
        let finite: Vec<f64> = row.iter().flatten().copied().collect();
        let (Some(&first), Some(&last)) = (finite.first(), finite.last()) else {
            continue;
        };
        if last >= (10.0 * tol.feas).max(first / 10.0) {
            verdict = IscVerdict::Violated(k);
            break;
        }
    }
    Ok(IscReport {
        center: center.clone(),
        schedule: schedule.to_vec(),
        directions,
        distances,
        sup_per_t,
        non_finite,
        verdict,
    })
}

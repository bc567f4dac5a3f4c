//! Negative evidence for partial calmness: the penalty parameter a candidate
//! needs, measured over sampled neighbours and along witness paths.
//!
//! The free variable `u` of the penalized problem is fixed to
//! `f(x, y) - φ(x)`, the smallest admissible value, so the required penalty
//! for a neighbour is `max(0, (F(x̄, ȳ) - F(x, y)) / u)`.

use std::fmt;

use crate::certificates::{classify_trend, validate_radii, Trend};
use crate::error::{Error, Result};
use crate::lp::max_norm_dist;
use crate::model::{BilevelModel, ParametricPath, Point};
use crate::sampling::{self, SampleSpec, BOUNDARY_FRACTION};
use crate::tol::Tolerances;
use crate::value_function::{distance_from_data, phi_with_point};

pub const DEFAULT_KAPPA_GRID: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
pub const DEFAULT_RADII: [f64; 4] = [0.4, 0.1, 0.025, 0.00625];

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyConfig {
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    pub kappa_grid: Vec<f64>,
    pub max_attempt_factor: usize,
    /// Ball in which `verify_center` looks for better feasible points.
    pub center_radius: f64,
    pub center_samples: usize,
    pub tol: Tolerances,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII.to_vec(),
            samples_per_radius: 2500,
            seed: 0,
            kappa_grid: DEFAULT_KAPPA_GRID.to_vec(),
            max_attempt_factor: 200,
            center_radius: 0.1,
            center_samples: 400,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Falsified,
    NotFalsified,
    CenterRejected,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Falsified => "Falsified",
            Verdict::NotFalsified => "NotFalsified",
            Verdict::CenterRejected => "CenterRejected",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "Falsified" => Some(Verdict::Falsified),
            "NotFalsified" => Some(Verdict::NotFalsified),
            "CenterRejected" => Some(Verdict::CenterRejected),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CenterCheck {
    Ok,
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedSample {
    pub point: Point,
    /// `f(x, y) - φ(x)`.
    pub u: f64,
    /// `F(x̄, ȳ) - F(x, y)`.
    pub f_gap: f64,
    /// `+∞` when `u` vanishes within tolerance while `F` is strictly lower.
    pub required_kappa: f64,
}

/// `max(0, f_gap / u)`, `+∞` for `u <= τ < f_gap`, and 0 when neither `u`
/// nor `f_gap` exceeds `τ`.
pub fn required_kappa(u: f64, f_gap: f64, tol: f64) -> f64 {
    if u > tol {
        (f_gap / u).max(0.0)
    } else if f_gap > tol {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub point: Point,
    /// Path points outside the feasible set are kept with `feasible = false`
    /// and NaN values.
    pub feasible: bool,
    pub f_value: f64,
    pub u: f64,
    /// `F + κ u` for every `κ` of the grid.
    pub penalized: Vec<f64>,
    pub required_kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// `None` for sweep witnesses (one worst sample per radius, `t = ε`).
    pub path: Option<ParametricPath>,
    pub kappa_grid: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaRadius {
    pub epsilon: f64,
    pub attempts: usize,
    pub sample_count: usize,
    pub skipped_phi: usize,
    /// Samples carrying the `+∞` flag.
    pub infinite_count: usize,
    pub sup_required_kappa: f64,
    pub worst: Option<PenalizedSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalmnessVerdict {
    pub center: Point,
    pub verdict: Verdict,
    /// Sup of the required penalty over every evaluated sample or path point.
    pub kappa_hat: f64,
    pub trend: Trend,
    pub witness: Option<Witness>,
    pub radius_schedule: Vec<f64>,
    pub per_radius: Vec<KappaRadius>,
    pub samples: usize,
}

/// Nondecreasing sequence (infinite entries allowed) whose trend diverges.
fn diverges(values: &[f64]) -> (Trend, bool) {
    let trend = classify_trend(values);
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    (trend, trend == Trend::Diverging && monotone)
}

fn penalized(model: &BilevelModel, center_f: f64, p: &Point, data_phi: f64, tol: &Tolerances) -> PenalizedSample {
    let u = model.eval_f(p) - data_phi;
    let f_gap = center_f - model.eval_F(p);
    PenalizedSample {
        point: p.clone(),
        u,
        f_gap,
        required_kappa: required_kappa(u, f_gap, tol.feas),
    }
}

/// Feasibility of the center for the bilevel problem plus a sampled search
/// for better feasible points nearby.
///
/// Candidates are drawn on the fiber `x = x̄` and around `x̄` in `X`; each
/// sampled `y` is replaced by its nearest lower-level solution `z`, and
/// `(x, z)` counts only when `z` stays in the ball.
pub fn verify_center(model: &BilevelModel, center: &Point, cfg: &FalsifyConfig) -> Result<CenterCheck> {
    model.check_point(center)?;
    let tol = &cfg.tol;
    if !model.upper_feasible(&center.x, tol.feas) {
        return Ok(CenterCheck::Rejected(format!(
            "x̄ violates X by {:e}",
            model.upper_violation(&center.x)
        )));
    }
    let data = model.instantiate(&center.x);
    if !data.is_feasible(&center.y, tol.feas) {
        return Ok(CenterCheck::Rejected(format!(
            "ȳ violates the lower-level constraints by {:e}",
            data.max_violation(&center.y)
        )));
    }
    let (phi, _) = phi_with_point(&data, tol)?;
    let Some(phi) = phi.finite() else {
        return Ok(CenterCheck::Rejected(format!("φ(x̄) is {}", phi.label())));
    };
    let dist = distance_from_data(&data, phi, &center.y, tol)?.sigma;
    if dist > tol.feas {
        return Ok(CenterCheck::Rejected(format!(
            "ȳ is not a lower-level solution (dist {dist:e})"
        )));
    }

    let center_f = model.eval_F(center);
    // Projected points sit on the τ-relaxed solution face.
    let margin = 10.0 * tol.feas * (1.0 + center_f.abs());
    let r = cfg.center_radius;
    let mut rng = sampling::rng(cfg.seed ^ 0x5eed_ce17);
    let spec = SampleSpec {
        upper_feasible: true,
        lower_feasible: false,
        boundary_fraction: BOUNDARY_FRACTION,
    };
    for k in 0..cfg.center_samples {
        let candidate = if k % 2 == 0 {
            let uy = sampling::unit_offset(&mut rng, model.m);
            let y = center.y.iter().zip(&uy).map(|(c, u)| c + r * u).collect();
            Some((center.x.clone(), data.clone(), y))
        } else {
            sampling::attempt(model, center, r, &spec, tol.feas, &mut rng)
                .map(|s| (s.point.x, s.data, s.point.y))
        };
        let Some((x, data, y)) = candidate else {
            continue;
        };
        let (phi, _) = phi_with_point(&data, tol)?;
        let Some(phi) = phi.finite() else {
            continue;
        };
        let z = distance_from_data(&data, phi, &y, tol)?.z;
        if max_norm_dist(&z, &center.y) > r || !data.is_feasible(&z, tol.feas) {
            continue;
        }
        let p = Point::new(x, z);
        let f = model.eval_F(&p);
        if f < center_f - margin {
            return Ok(CenterCheck::Rejected(format!(
                "feasible point x = {:?}, y = {:?} has F = {f} < F(x̄, ȳ) = {center_f}",
                p.x, p.y
            )));
        }
    }
    Ok(CenterCheck::Ok)
}

/// Required penalty over lower-level-feasible samples `x ∈ X` in shrinking
/// balls. The center is not re-verified.
pub fn required_kappa_sweep(model: &BilevelModel, center: &Point, cfg: &FalsifyConfig) -> Result<CalmnessVerdict> {
    validate_radii(&cfg.radii)?;
    model.check_point(center)?;
    let tol = &cfg.tol;
    let center_f = model.eval_F(center);
    let spec = SampleSpec {
        upper_feasible: true,
        lower_feasible: true,
        boundary_fraction: BOUNDARY_FRACTION,
    };
    let mut per_radius = Vec::with_capacity(cfg.radii.len());
    let mut total = 0;
    for &eps in &cfg.radii {
        let (samples, attempts) = sampling::draw(
            model,
            center,
            eps,
            &spec,
            cfg.samples_per_radius,
            cfg.max_attempt_factor,
            tol.feas,
            cfg.seed,
        );
        let mut stats = KappaRadius {
            epsilon: eps,
            attempts,
            sample_count: 0,
            skipped_phi: 0,
            infinite_count: 0,
            sup_required_kappa: 0.0,
            worst: None,
        };
        for s in &samples {
            let (phi, _) = phi_with_point(&s.data, tol)?;
            let Some(phi) = phi.finite() else {
                stats.skipped_phi += 1;
                continue;
            };
            stats.sample_count += 1;
            let ps = penalized(model, center_f, &s.point, phi, tol);
            if ps.required_kappa.is_infinite() {
                stats.infinite_count += 1;
            }
            if stats.worst.is_none() || ps.required_kappa > stats.sup_required_kappa {
                stats.sup_required_kappa = ps.required_kappa;
                stats.worst = Some(ps);
            }
        }
        total += stats.sample_count;
        per_radius.push(stats);
    }
    if total == 0 {
        return Err(Error::AllSamplesSkipped(
            "no feasible sample with finite φ in any radius".into(),
        ));
    }
    let sups: Vec<f64> = per_radius
        .iter()
        .map(|s| if s.sample_count == 0 { f64::NAN } else { s.sup_required_kappa })
        .collect();
    let (trend, falsified) = diverges(&sups);
    let kappa_hat = per_radius.iter().map(|s| s.sup_required_kappa).fold(0.0, f64::max);
    let trace = per_radius
        .iter()
        .filter_map(|s| s.worst.as_ref().map(|w| (s.epsilon, w)))
        .map(|(eps, w)| trace_row(model, eps, w, &cfg.kappa_grid))
        .collect();
    Ok(CalmnessVerdict {
        center: center.clone(),
        verdict: if falsified { Verdict::Falsified } else { Verdict::NotFalsified },
        kappa_hat,
        trend,
        witness: Some(Witness {
            path: None,
            kappa_grid: cfg.kappa_grid.clone(),
            trace,
        }),
        radius_schedule: cfg.radii.clone(),
        per_radius,
        samples: total,
    })
}

fn trace_row(model: &BilevelModel, t: f64, s: &PenalizedSample, grid: &[f64]) -> TraceRow {
    let f = model.eval_F(&s.point);
    TraceRow {
        t,
        point: s.point.clone(),
        feasible: true,
        f_value: f,
        u: s.u,
        penalized: grid.iter().map(|k| f + k * s.u).collect(),
        required_kappa: s.required_kappa,
    }
}

/// Penalized objective and required penalty along `path`.
///
/// Path points outside `X`, outside the lower-level feasible set or with
/// non-finite φ stay in the trace flagged infeasible.
pub fn path_falsify(
    model: &BilevelModel,
    center: &Point,
    path: &ParametricPath,
    kappa_grid: &[f64],
    tol: &Tolerances,
) -> Result<CalmnessVerdict> {
    model.check_point(center)?;
    path.schedule.validate()?;
    if path.x.len() != model.n || path.y.len() != model.m {
        return Err(Error::Dimension(format!(
            "path has dimensions ({}, {}), model expects ({}, {})",
            path.x.len(),
            path.y.len(),
            model.n,
            model.m
        )));
    }
    let center_f = model.eval_F(center);
    let mut trace = Vec::new();
    let mut kappas = Vec::new();
    for t in path.schedule.values() {
        let p = path.eval(t);
        let data = model.instantiate(&p.x);
        let phi = if model.upper_feasible(&p.x, tol.feas) && data.is_feasible(&p.y, tol.feas) {
            phi_with_point(&data, tol)?.0.finite()
        } else {
            None
        };
        let Some(phi) = phi else {
            trace.push(TraceRow {
                t,
                point: p,
                feasible: false,
                f_value: f64::NAN,
                u: f64::NAN,
                penalized: vec![f64::NAN; kappa_grid.len()],
                required_kappa: f64::NAN,
            });
            continue;
        };
        let ps = penalized(model, center_f, &p, phi, tol);
        kappas.push(ps.required_kappa);
        trace.push(trace_row(model, t, &ps, kappa_grid));
    }
    if kappas.is_empty() {
        return Err(Error::PathInfeasibleEverywhere);
    }
    let (trend, falsified) = diverges(&kappas);
    Ok(CalmnessVerdict {
        center: center.clone(),
        verdict: if falsified { Verdict::Falsified } else { Verdict::NotFalsified },
        kappa_hat: kappas.iter().cloned().fold(0.0, f64::max),
        trend,
        witness: Some(Witness {
            path: Some(path.clone()),
            kappa_grid: kappa_grid.to_vec(),
            trace,
        }),
        radius_schedule: path.schedule.values(),
        per_radius: Vec::new(),
        samples: kappas.len(),
    })
}

/// Center verification, sampled sweep and every supplied path.
#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyOutcome {
    pub center: Point,
    pub center_check: CenterCheck,
    pub sweep: Option<CalmnessVerdict>,
    pub paths: Vec<CalmnessVerdict>,
    pub verdict: Verdict,
}

pub fn falsify(
    model: &BilevelModel,
    center: &Point,
    paths: &[ParametricPath],
    cfg: &FalsifyConfig,
) -> Result<FalsifyOutcome> {
    let center_check = verify_center(model, center, cfg)?;
    if center_check != CenterCheck::Ok {
        return Ok(FalsifyOutcome {
            center: center.clone(),
            center_check,
            sweep: None,
            paths: Vec::new(),
            verdict: Verdict::CenterRejected,
        });
    }
    let sweep = required_kappa_sweep(model, center, cfg)?;
    let paths = paths
        .iter()
        .map(|p| path_falsify(model, center, p, &cfg.kappa_grid, &cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    let falsified = sweep.verdict == Verdict::Falsified
        || paths.iter().any(|p| p.verdict == Verdict::Falsified);
    Ok(FalsifyOutcome {
        center: center.clone(),
        center_check,
        sweep: Some(sweep),
        paths,
        verdict: if falsified { Verdict::Falsified } else { Verdict::NotFalsified },
    })
}

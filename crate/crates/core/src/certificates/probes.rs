use crate::error::{Error, Result};
use crate::lp::dot;
use crate::model::{BilevelModel, Point};
use crate::sampling::{self, SampleSpec, BOUNDARY_FRACTION};
use crate::tol::Tolerances;
use crate::value_function::{dist_to_solutions, distance_from_data, phi_with_point};

use super::{classify_trend, validate_radii, Trend};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// Strictly decreasing radii.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    /// Attempts per wanted sample before giving up on a radius.
    pub max_attempt_factor: usize,
    pub tol: Tolerances,
}

impl ProbeConfig {
    pub fn new(radii: Vec<f64>, samples_per_radius: usize, seed: u64) -> Self {
        Self {
            radii,
            samples_per_radius,
            seed,
            max_attempt_factor: 200,
            tol: Tolerances::default(),
        }
    }
}

/// Parameter region an R-regularity probe ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega {
    FullSpace,
    DomPhi,
}

impl Omega {
    pub fn name(self) -> &'static str {
        match self {
            Omega::FullSpace => "full-space",
            Omega::DomPhi => "dom-phi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Luwsmc,
    RRegularity(Omega),
}

impl ProbeKind {
    pub fn name(self) -> String {
        match self {
            ProbeKind::Luwsmc => "luwsmc".into(),
            ProbeKind::RRegularity(o) => format!("r-regularity/{}", o.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusStats {
    pub epsilon: f64,
    pub attempts: usize,
    /// Accepted samples.
    pub sample_count: usize,
    /// Samples that produced a ratio.
    pub ratio_count: usize,
    /// NaN when no sample produced a ratio.
    pub worst_ratio: f64,
    pub alpha_estimate: f64,
    pub worst_point: Option<Point>,
    pub skipped_phi: usize,
    pub skipped_zero: usize,
    /// Distance above tolerance while the denominator vanishes.
    pub hard_violations: usize,
}

impl RadiusStats {
    fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            attempts: 0,
            sample_count: 0,
            ratio_count: 0,
            worst_ratio: f64::NAN,
            alpha_estimate: f64::NAN,
            worst_point: None,
            skipped_phi: 0,
            skipped_zero: 0,
            hard_violations: 0,
        }
    }

    fn record(&mut self, ratio: f64, point: &Point) {
        self.ratio_count += 1;
        if self.worst_ratio.is_nan() || ratio > self.worst_ratio {
            self.worst_ratio = ratio;
            self.worst_point = Some(point.clone());
        }
    }

    fn finish(&mut self) {
        if self.ratio_count == 0 && self.skipped_zero > 0 {
            self.worst_ratio = 0.0;
        }
        self.alpha_estimate = 1.0 / self.worst_ratio;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioProbeReport {
    pub kind: ProbeKind,
    pub center: Point,
    pub radius_schedule: Vec<f64>,
    pub per_radius: Vec<RadiusStats>,
    pub trend: Trend,
}

fn check_center(model: &BilevelModel, center: &Point, tol: &Tolerances) -> Result<()> {
    model.check_point(center)?;
    let data = model.instantiate(&center.x);
    let gap = data.max_violation(&center.y).max(0.0);
    let dist = match dist_to_solutions(model, &center.x, &center.y, tol) {
        Ok(cert) => cert.sigma,
        Err(Error::PhiNotFinite { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    if gap > tol.feas || dist > tol.feas {
        return Err(Error::CenterNotOptimal(dist.max(gap)));
    }
    Ok(())
}

fn finish(
    kind: ProbeKind,
    center: &Point,
    cfg: &ProbeConfig,
    mut per_radius: Vec<RadiusStats>,
) -> Result<RatioProbeReport> {
    for s in &mut per_radius {
        s.finish();
    }
    if per_radius.iter().all(|s| s.ratio_count == 0 && s.skipped_zero == 0) {
        return Err(Error::AllSamplesSkipped(format!(
            "{} probe produced no usable sample",
            kind.name()
        )));
    }
    let trend = classify_trend(&per_radius.iter().map(|s| s.worst_ratio).collect::<Vec<_>>());
    Ok(RatioProbeReport {
        kind,
        center: center.clone(),
        radius_schedule: cfg.radii.clone(),
        per_radius,
        trend,
    })
}

/// Sup of `dist(y, S(x)) / (f(x, y) - φ(x))` over lower-level-feasible
/// samples in shrinking balls around `center`.
pub fn luwsmc_probe(model: &BilevelModel, center: &Point, cfg: &ProbeConfig) -> Result<RatioProbeReport> {
    validate_radii(&cfg.radii)?;
    let tol = &cfg.tol;
    check_center(model, center, tol)?;
    let spec = SampleSpec {
        upper_feasible: false,
        lower_feasible: true,
        boundary_fraction: BOUNDARY_FRACTION,
    };
    let mut per_radius = Vec::with_capacity(cfg.radii.len());
    for &eps in &cfg.radii {
        let mut stats = RadiusStats::new(eps);
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
        stats.attempts = attempts;
        stats.sample_count = samples.len();
        for s in &samples {
            let (phi, _) = phi_with_point(&s.data, tol)?;
            let Some(phi) = phi.finite() else {
                stats.skipped_phi += 1;
                continue;
            };
            let cert = distance_from_data(&s.data, phi, &s.point.y, tol)?;
            let u = dot(&s.data.c, &s.point.y) - phi;
            if u <= tol.feas {
                if cert.sigma <= tol.feas {
                    stats.skipped_zero += 1;
                } else {
                    stats.hard_violations += 1;
                }
                continue;
            }
            stats.record(cert.sigma / u, &s.point);
        }
        per_radius.push(stats);
    }
    finish(ProbeKind::Luwsmc, center, cfg, per_radius)
}

/// Sup of `dist(y, Φ(x)) / max{0, f - φ, g₁, …, g_q}` over unconstrained
/// samples, where `Φ(x) = S(x)`.
///
/// With `Omega::FullSpace`, parameters where `Φ(x)` is empty contribute an
/// infinite ratio; with `Omega::DomPhi` they are skipped.
pub fn r_regularity_probe(
    model: &BilevelModel,
    center: &Point,
    cfg: &ProbeConfig,
    omega: Omega,
) -> Result<RatioProbeReport> {
    validate_radii(&cfg.radii)?;
    let tol = &cfg.tol;
    check_center(model, center, tol)?;
    let spec = SampleSpec {
        upper_feasible: false,
        lower_feasible: false,
        boundary_fraction: BOUNDARY_FRACTION,
    };
    let mut per_radius = Vec::with_capacity(cfg.radii.len());
    for &eps in &cfg.radii {
        let mut stats = RadiusStats::new(eps);
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
        stats.attempts = attempts;
        stats.sample_count = samples.len();
        for s in &samples {
            let (phi, _) = phi_with_point(&s.data, tol)?;
            let Some(phi) = phi.finite() else {
                match omega {
                    Omega::DomPhi => stats.skipped_phi += 1,
                    Omega::FullSpace => stats.record(f64::INFINITY, &s.point),
                }
                continue;
            };
            let cert = distance_from_data(&s.data, phi, &s.point.y, tol)?;
            let u = dot(&s.data.c, &s.point.y) - phi;
            let violation = s
                .data
                .constraint_values(&s.point.y)
                .into_iter()
                .fold(u.max(0.0), f64::max);
            if violation <= tol.feas {
                if cert.sigma <= tol.feas {
                    stats.skipped_zero += 1;
                } else {
                    stats.hard_violations += 1;
                }
                continue;
            }
            stats.record(cert.sigma / violation, &s.point);
        }
        per_radius.push(stats);
    }
    finish(ProbeKind::RRegularity(omega), center, cfg, per_radius)
}

//! Positive evidence: weak-sharp moduli, ratio probes, the constant-rank
//! check and an inner-semicontinuity probe.

mod isc;
mod probes;
mod rank;
mod uwsm;

pub use isc::{inner_semicontinuity_probe, Directions, IscReport, IscVerdict};
pub use probes::{
    luwsmc_probe, r_regularity_probe, Omega, ProbeConfig, ProbeKind, RadiusStats, RatioProbeReport,
};
pub use rank::{constant_rank_check, RankProfile, RankVerdict, SubsetResult, DEFAULT_SUBSET_CAP};
pub use uwsm::{
    check_uwsm_inequality, uwsm_modulus, uwsm_modulus_for_model, uwsm_modulus_sweep, UwsmCheck,
    WsmCertificate,
};

use std::fmt;

use crate::error::{Error, Result};

/// Absolute floor a diverging sequence has to exceed.
pub const DIVERGENCE_FLOOR: f64 = 1e3;
/// Growth between first and last entry that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Bounded,
    Diverging,
    Inconclusive,
}

impl Trend {
    pub fn name(self) -> &'static str {
        match self {
            Trend::Bounded => "Bounded",
            Trend::Diverging => "Diverging",
            Trend::Inconclusive => "Inconclusive",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "Bounded" => Some(Trend::Bounded),
            "Diverging" => Some(Trend::Diverging),
            "Inconclusive" => Some(Trend::Inconclusive),
            _ => None,
        }
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a sequence ordered from the largest radius (or `t`) to the
/// smallest.
///
/// Diverging: last entry exceeds 10× the first and the floor 1e3.
/// Bounded: all entries within a factor 2 of each other (all zero counts).
pub fn classify_trend(values: &[f64]) -> Trend {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return Trend::Inconclusive;
    }
    let first = values[0];
    let last = values[values.len() - 1];
    if last > DIVERGENCE_FACTOR * first && last > DIVERGENCE_FLOOR {
        return Trend::Diverging;
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || (max.is_finite() && min > 0.0 && max < 2.0 * min) {
        return Trend::Bounded;
    }
    Trend::Inconclusive
}

/// Checks that a radius list is nonempty, positive and strictly decreasing.
pub fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Config("empty radius schedule".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Config("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("radii must be strictly decreasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rule() {
        assert_eq!(classify_trend(&[1.0, 1.5, 1.2]), Trend::Bounded);
        assert_eq!(classify_trend(&[0.0, 0.0]), Trend::Bounded);
        assert_eq!(classify_trend(&[10.0, 200.0, 5000.0]), Trend::Diverging);
        assert_eq!(classify_trend(&[1.0, 50.0]), Trend::Inconclusive);
        assert_eq!(classify_trend(&[1.0, f64::INFINITY]), Trend::Diverging);
        assert_eq!(classify_trend(&[1.0, f64::NAN]), Trend::Inconclusive);
        assert_eq!(classify_trend(&[]), Trend::Inconclusive);
    }

    #[test]
    fn radii_validation() {
        assert!(validate_radii(&[0.5, 0.1]).is_ok());
        assert!(validate_radii(&[0.1, 0.5]).is_err());
        assert!(validate_radii(&[]).is_err());
        assert!(validate_radii(&[0.5, -0.1]).is_err());
    }
}

use crate::error::{Error, Result};

/// Numerical tolerances shared by every kernel and probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute primal feasibility tolerance.
    pub feas: f64,
    /// Primal/dual objective agreement.
    pub dual: f64,
    /// Point deduplication for vertex enumeration.
    pub vertex: f64,
    /// Relative rank threshold.
    pub rank: f64,
    /// Smallest admissible simplex pivot.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-9,
            dual: 1e-8,
            vertex: 1e-8,
            rank: 1e-8,
            pivot: 1e-11,
        }
    }
}

impl Tolerances {
    /// Applies a `key=value` override such as `feas=1e-10`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance override '{spec}' is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("tolerance value '{value}' is not a number")))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!("tolerance '{key}' must be positive")));
        }
        match key.trim() {
            "feas" => self.feas = value,
            "dual" => self.dual = value,
            "vertex" => self.vertex = value,
            "rank" => self.rank = value,
            "pivot" => self.pivot = value,
            other => return Err(Error::Config(format!("unknown tolerance key '{other}'"))),
        }
        Ok(())
    }
}

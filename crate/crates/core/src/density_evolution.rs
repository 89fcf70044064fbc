//! Density evolution on the binary erasure channel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DegreeDistribution, DegreeMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeError {
    #[error("erasure probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid density-evolution settings: {0}")]
    InvalidConfig(String),
    #[error("decoding succeeds at {fails_at} but not at the smaller {succeeds_at}")]
    NonMonotonePredicate { succeeds_at: f64, fails_at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Erased fraction counted as zero.
    pub tol: f64,
    pub max_iter: usize,
    pub bisect_tol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        // Just below a stability-limited threshold the erased fraction shrinks
        // by a factor close to 1 per step, so the cap has to be generous.
        Self { tol: 1e-10, max_iter: 1_000_000, bisect_tol: 1e-6 }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<(), DeError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(DeError::InvalidConfig(format!("tol = {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(DeError::InvalidConfig("max_iter = 0".into()));
        }
        if self.bisect_tol.is_nan() || self.bisect_tol <= 0.0 {
            return Err(DeError::InvalidConfig(format!("bisect_tol = {}", self.bisect_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeOutcome {
    pub success: bool,
    /// Erased fraction after the last step.
    pub residual: f64,
    pub iterations: usize,
}

/// Polynomial `sum_d c_d x^(d-1)` with the terms unpacked for tight loops.
struct Poly(Vec<(i32, f64)>);

impl Poly {
    fn new(map: &DegreeMap) -> Self {
        Poly(map.iter().map(|(&d, &c)| (d as i32 - 1, c)).collect())
    }

    fn at(&self, x: f64) -> f64 {
        self.0.iter().map(|&(e, c)| c * x.powi(e)).sum()
    }
}

/// Runs `x_l = eps * lambda(1 - rho(1 - x_{l-1}))` from `x_0 = eps`.
///
/// Succeeds once `x_l < tol`. Fails when `max_iter` steps pass or when the
/// sequence stops decreasing, which means it has reached a positive fixed point.
pub fn de_iterate(dd: &DegreeDistribution, epsilon: f64, cfg: &DeConfig) -> Result<DeOutcome, DeError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(DeError::InvalidProbability(epsilon));
    }
    cfg.validate()?;
    let (lambda, rho) = (Poly::new(dd.lambda()), Poly::new(dd.rho()));
    let mut x = epsilon;
    for it in 1..=cfg.max_iter {
        let next = epsilon * lambda.at(1.0 - rho.at(1.0 - x));
        if next < cfg.tol {
            return Ok(DeOutcome { success: true, residual: next, iterations: it });
        }
        if next >= x {
            return Ok(DeOutcome { success: false, residual: next, iterations: it });
        }
        x = next;
    }
    Ok(DeOutcome { success: false, residual: x, iterations: cfg.max_iter })
}

/// Largest erasure probability at which [`de_iterate`] succeeds, by bisection on `[0, 1]`.
pub fn decoding_threshold(dd: &DegreeDistribution, cfg: &DeConfig) -> Result<f64, DeError> {
    cfg.validate()?;
    let ok = |eps: f64| de_iterate(dd, eps, cfg).map(|o| o.success);
    if ok(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > cfg.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Spot check that success really is a down-set below the threshold.
    for frac in [0.25, 0.5, 0.75] {
        let eps = lo * frac;
        if !ok(eps)? {
            return Err(DeError::NonMonotonePredicate { succeeds_at: lo, fails_at: eps });
        }
    }
    Ok(lo)
}

/// Threshold divided by the capacity gap `1 - R`.
pub fn scaled_threshold(dd: &DegreeDistribution, epsilon_star: f64) -> Option<f64> {
    dd.design_rate().ok().map(|r| epsilon_star / (1.0 - r))
}

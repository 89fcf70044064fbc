//! Variable degree distribution design for check-regular ensembles.
//!
//! For a fixed check degree `d_c` and rate `R`, the edge fractions
//! `lambda_2..lambda_dmax` must satisfy
//!
//! ```text
//! sum_d lambda_d = 1
//! sum_d lambda_d / d = 1 / ((1 - R) d_c)
//! eps * lambda(1 - (1 - x)^(d_c - 1)) < x   for x in (0, eps]
//! ```
//!
//! The last condition is linear in `lambda`, so each `eps` is an LP feasibility
//! question and the best threshold is found by bisection over `eps`.

use std::ops::RangeInclusive;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density_evolution::{de_iterate, DeConfig};
use crate::graph::{DegreeDistribution, DegreeMap};

const CUT_ROUNDS: usize = 30;
const CHECK_POINTS: usize = 4000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("rate {rate} with d_c = {dc} needs sum lambda_d/d = {target:.6}, outside [{lo:.6}, 0.5]")]
    RateImpossible { rate: String, dc: u32, target: f64, lo: f64 },
    #[error("no distribution reaches eps = {epsilon}: worst constraint at x = {x:.6} off by {violation:.3e}")]
    Infeasible { epsilon: f64, x: f64, violation: f64 },
    #[error("invalid optimisation problem: {0}")]
    InvalidProblem(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    pub rate: Ratio<u64>,
    pub dc: u32,
    pub dmax: u32,
    pub grid_points: usize,
    /// Slack that turns the strict inequality into `<= x - margin`.
    pub margin: f64,
}

impl OptProblem {
    pub fn new(rate: Ratio<u64>, dc: u32) -> Self {
        Self { rate, dc, dmax: 16, grid_points: 200, margin: 1e-6 }
    }

    pub fn rate_f64(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }

    /// Required `sum_d lambda_d / d`.
    pub fn target_integral(&self) -> f64 {
        1.0 / ((1.0 - self.rate_f64()) * self.dc as f64)
    }

    pub fn validate(&self) -> Result<(), OptError> {
        let bad = |msg: String| Err(OptError::InvalidProblem(msg));
        if *self.rate.denom() == 0 || self.rate >= Ratio::from_integer(1) || *self.rate.numer() == 0 {
            return bad(format!("rate {} outside (0, 1)", self.rate));
        }
        if self.dc < 2 || self.dmax < 2 {
            return bad(format!("d_c = {}, d_max = {} (both need >= 2)", self.dc, self.dmax));
        }
        if self.grid_points < 50 {
            return bad(format!("{} grid points, need at least 50", self.grid_points));
        }
        if self.margin.is_nan() || self.margin < 0.0 {
            return bad(format!("margin {}", self.margin));
        }
        // Integral bounds: all mass on degree 2 gives 1/2, all on d_max gives 1/d_max.
        let target = self.target_integral();
        let lo = 1.0 / self.dmax as f64;
        if target > 0.5 + 1e-12 || target < lo - 1e-12 {
            return Err(OptError::RateImpossible {
                rate: self.rate.to_string(),
                dc: self.dc,
                target,
                lo,
            });
        }
        Ok(())
    }

    fn degrees(&self) -> RangeInclusive<u32> {
        2..=self.dmax
    }
}

/// `eps * (1 - (1 - x)^(d_c - 1))^(d - 1)` for every candidate degree `d`.
fn row(p: &OptProblem, eps: f64, x: f64) -> Vec<f64> {
    let y = 1.0 - (1.0 - x).powi(p.dc as i32 - 1);
    p.degrees().map(|d| eps * y.powi(d as i32 - 1)).collect()
}

/// Largest `eps * lambda(y(x)) - x` on a dense check grid, with its location.
fn worst_point(p: &OptProblem, eps: f64, lambda: &[f64]) -> (f64, f64) {
    // Geometric points near zero catch slope violations the uniform grid misses.
    let near_zero = (1..=40).map(|k| eps * 10f64.powf(-8.0 + 6.0 * k as f64 / 40.0));
    let uniform = (1..=CHECK_POINTS).map(|j| eps * j as f64 / CHECK_POINTS as f64);
    near_zero
        .chain(uniform)
        .map(|x| {
            let lhs: f64 = row(p, eps, x).iter().zip(lambda).map(|(a, l)| a * l).sum();
            (x, lhs - x)
        })
        .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// Least-norm correction of `lambda` onto both equality constraints, keeping zeros at zero.
fn project(p: &OptProblem, lambda: &mut [f64]) {
    let target = p.target_integral();
    let inv: Vec<f64> = p.degrees().map(|d| 1.0 / d as f64).collect();
    for _ in 0..4 {
        let support: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i] > 0.0).collect();
        let r1 = lambda.iter().sum::<f64>() - 1.0;
        let r2 = lambda.iter().zip(&inv).map(|(l, w)| l * w).sum::<f64>() - target;
        // Gram matrix of the rows (1, ..., 1) and (1/d) restricted to the support.
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        for &i in &support {
            a11 += 1.0;
            a12 += inv[i];
            a22 += inv[i] * inv[i];
        }
        let det = a11 * a22 - a12 * a12;
        let (t1, t2) = if det.abs() > 1e-14 {
            ((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det)
        } else {
            (r1 / a11, 0.0)
        };
        for &i in &support {
            lambda[i] = (lambda[i] - t1 - t2 * inv[i]).max(0.0);
        }
    }
}

/// Finds edge fractions that decode at erasure probability `epsilon`.
///
/// The LP minimises the constraint rows weighted by `1/x_j`, which pushes the
/// DE curve away from the diagonal. Points between grid nodes are checked on a
/// finer grid and the worst violator is added as a cut until none remain. The
/// result is projected back onto the equalities and confirmed by full DE.
pub fn feasible_lambda(p: &OptProblem, epsilon: f64) -> Result<DegreeMap, OptError> {
    p.validate()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(OptError::InvalidProblem(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let infeasible = |x: f64, violation: f64| OptError::Infeasible { epsilon, x, violation };
    let degrees: Vec<u32> = p.degrees().collect();
    let grid: Vec<f64> = (1..=p.grid_points).map(|j| epsilon * j as f64 / p.grid_points as f64).collect();

    let mut objective = vec![0.0; degrees.len()];
    for &x in &grid {
        for (o, a) in objective.iter_mut().zip(row(p, epsilon, x)) {
            *o += a / x;
        }
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = objective.iter().map(|&c| lp.add_var(c, (0.0, 1.0))).collect();
    let ones: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    let inv: Vec<_> = vars.iter().zip(&degrees).map(|(&v, &d)| (v, 1.0 / d as f64)).collect();
    lp.add_constraint(inv.as_slice(), ComparisonOp::Eq, p.target_integral());
    for &x in &grid {
        let terms: Vec<_> = vars.iter().copied().zip(row(p, epsilon, x)).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Le, x - p.margin);
    }

    let mut solution = lp.solve().map_err(|_| infeasible(grid[0], f64::NAN))?;
    let mut lambda: Vec<f64> = vars.iter().map(|&v| solution[v].max(0.0)).collect();
    for _ in 0..CUT_ROUNDS {
        let (x, gap) = worst_point(p, epsilon, &lambda);
        if gap < 0.0 {
            break;
        }
        let terms: Vec<_> = vars.iter().copied().zip(row(p, epsilon, x)).collect();
        let rhs = x - p.margin.min(0.5 * x);
        solution = solution
            .add_constraint(terms.as_slice(), ComparisonOp::Le, rhs)
            .map_err(|_| infeasible(x, gap))?;
        lambda = vars.iter().map(|&v| solution[v].max(0.0)).collect();
    }

    project(p, &mut lambda);
    let map: DegreeMap =
        degrees.iter().zip(&lambda).filter(|(_, &l)| l > 0.0).map(|(&d, &l)| (d, l)).collect();
    let dd = DegreeDistribution::check_regular(map.clone(), p.dc)
        .map_err(|e| OptError::InvalidProblem(e.to_string()))?;
    let de = de_iterate(&dd, epsilon, &DeConfig::default())
        .map_err(|e| OptError::InvalidProblem(e.to_string()))?;
    if !de.success {
        let (x, gap) = worst_point(p, epsilon, &lambda);
        return Err(infeasible(x, gap.max(de.residual)));
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub epsilon_star: f64,
    /// `epsilon_star / (1 - R)`.
    pub scaled: f64,
    pub lambda: DegreeMap,
    /// Average variable degree `1 / sum_d lambda_d / d`.
    pub dv: f64,
}

/// Bisects over `eps` in `(0, 1 - R)` for the largest value with a feasible distribution.
pub fn optimize_threshold(p: &OptProblem) -> Result<OptResult, OptError> {
    optimize_with_tolerance(p, 1e-5)
}

pub fn optimize_with_tolerance(p: &OptProblem, tol: f64) -> Result<OptResult, OptError> {
    p.validate()?;
    let cap = 1.0 - p.rate_f64();
    let (mut lo, mut hi) = (0.0f64, cap);
    let mut best: Option<(f64, DegreeMap)> = None;
    let mut last_err = None;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match feasible_lambda(p, mid) {
            Ok(lambda) => {
                lo = mid;
                best = Some((mid, lambda));
            }
            Err(e @ OptError::Infeasible { .. }) => {
                hi = mid;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let (epsilon_star, lambda) = best.ok_or_else(|| {
        last_err.unwrap_or(OptError::Infeasible { epsilon: tol, x: 0.0, violation: f64::NAN })
    })?;
    let integral: f64 = lambda.iter().map(|(&d, &l)| l / d as f64).sum();
    Ok(OptResult { epsilon_star, scaled: epsilon_star / cap, lambda, dv: 1.0 / integral })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    RateImpossible,
    Infeasible,
}

/// One point of the repair-bandwidth / threshold tradeoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub dc: u32,
    pub gamma: u32,
    pub status: RowStatus,
    pub epsilon_star: Option<f64>,
    pub scaled: Option<f64>,
    pub dv: Option<f64>,
}

/// Runs [`optimize_threshold`] for every `d_c` in `dcs`, in parallel.
pub fn tradeoff_curve(rate: Ratio<u64>, dcs: RangeInclusive<u32>, template: &OptProblem) -> Vec<TradeoffRow> {
    let dcs: Vec<u32> = dcs.collect();
    dcs.par_iter()
        .map(|&dc| {
            let p = OptProblem { rate, dc, ..template.clone() };
            let mut row = TradeoffRow {
                dc,
                gamma: dc.saturating_sub(1),
                status: RowStatus::Ok,
                epsilon_star: None,
                scaled: None,
                dv: None,
            };
            match optimize_threshold(&p) {
                Ok(r) => {
                    row.epsilon_star = Some(r.epsilon_star);
                    row.scaled = Some(r.scaled);
                    row.dv = Some(r.dv);
                }
                Err(OptError::RateImpossible { .. }) => row.status = RowStatus::RateImpossible,
                Err(_) => row.status = RowStatus::Infeasible,
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_evolution::decoding_threshold;

    fn problem(p: u64, q: u64, dc: u32) -> OptProblem {
        OptProblem::new(Ratio::new(p, q), dc)
    }

    fn check_witness(p: &OptProblem, lambda: &DegreeMap, eps: f64) {
        let sum: f64 = lambda.values().sum();
        let integral: f64 = lambda.iter().map(|(&d, &l)| l / d as f64).sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        assert!((integral - p.target_integral()).abs() < 1e-7, "integral {integral}");
        let dd = DegreeDistribution::check_regular(lambda.clone(), p.dc).unwrap();
        assert!(de_iterate(&dd, eps, &DeConfig::default()).unwrap().success);
    }

    #[test]
    fn half_rate_with_degree_three_checks_is_impossible() {
        assert!(matches!(feasible_lambda(&problem(1, 2, 3), 0.1), Err(OptError::RateImpossible { .. })));
    }

    #[test]
    fn half_rate_dc4_reaches_045() {
        let p = problem(1, 2, 5);
        let lambda = feasible_lambda(&p, 0.45).unwrap();
        check_witness(&p, &lambda, 0.45);
    }

    #[test]
    fn rate_equality_pins_cycle_code() {
        let p = OptProblem { dmax: 2, ..problem(2, 3, 6) };
        let lambda = feasible_lambda(&p, 0.19).unwrap();
        assert_eq!(lambda.len(), 1);
        assert!((lambda[&2] - 1.0).abs() < 1e-12);
        let r = optimize_threshold(&p).unwrap();
        assert!((r.epsilon_star - 0.2).abs() < 1e-4, "{}", r.epsilon_star);
        assert!((r.dv - 2.0).abs() < 1e-9);
    }

    #[test]
    fn half_rate_dc5_row() {
        let p = problem(1, 2, 5);
        let r = optimize_threshold(&p).unwrap();
        assert!((r.scaled - 0.9100).abs() < 0.02, "{}", r.scaled);
        assert!((r.dv - 2.5).abs() < 0.05);
        check_witness(&p, &r.lambda, r.epsilon_star);
        let dd = DegreeDistribution::check_regular(r.lambda.clone(), 5).unwrap();
        assert!(decoding_threshold(&dd, &DeConfig::default()).unwrap() >= r.epsilon_star - 1e-6);
    }

    #[test]
    fn three_quarter_dc9_row() {
        let r = optimize_threshold(&problem(3, 4, 9)).unwrap();
        assert!((r.scaled - 0.7480).abs() < 0.02, "{}", r.scaled);
        assert!((r.dv - 2.25).abs() < 0.05);
    }

    #[test]
    fn tradeoff_is_monotone() {
        let rows = tradeoff_curve(Ratio::new(1, 2), 3..=7, &problem(1, 2, 4));
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].status, RowStatus::RateImpossible);
        let scaled: Vec<f64> = rows[1..].iter().map(|r| r.scaled.unwrap()).collect();
        assert!(scaled.windows(2).all(|w| w[1] >= w[0]), "{scaled:?}");
        assert!((scaled[3] - 0.9840).abs() < 0.02, "{scaled:?}");
        let (lo, hi) = (5, 4);
        assert!(tradeoff_curve(Ratio::new(1, 2), lo..=hi, &problem(1, 2, 4)).is_empty());
    }

    #[test]
    fn validation() {
        assert!(problem(0, 1, 5).validate().is_err());
        assert!(OptProblem { grid_points: 10, ..problem(1, 2, 5) }.validate().is_err());
        assert!(matches!(
            OptProblem { dmax: 3, ..problem(1, 5, 4) }.validate(),
            Err(OptError::RateImpossible { .. })
        ));
    }
}

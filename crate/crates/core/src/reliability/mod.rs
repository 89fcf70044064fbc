//! Mean time to data loss of one stripe under the failure/repair Markov chain.
//!
//! State `i` counts failed blocks. From state `i < m` a further failure moves
//! to `i + 1` at rate `(n - i) lambda p_i` and to data loss at rate
//! `(n - i) lambda (1 - p_i)`; from state `m` every failure loses data. Each
//! state `i >= 1` repairs back to `i - 1` at rate `mu`.

mod system;

pub use system::{
    mttdl_for_graph, mttdl_mds, mttdl_replication, normalize_mttdl, reference_rows, repair_rate,
    Method, MttdlReport, ReferenceRow, StorageSystemParams, DAY, YEAR,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReliabilityError {
    #[error("invalid Markov model: {0}")]
    InvalidSpec(String),
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
    #[error("all loss terms vanish, MTTDL is unbounded")]
    ZeroDenominator,
    #[error("stopping index {s_star} is not usable: {reason}")]
    InvalidStoppingIndex { s_star: usize, reason: String },
    #[error("absorption time system is singular")]
    SingularSystem,
}

/// Birth-death chain of one stripe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSpec {
    pub n: usize,
    pub m: usize,
    /// Per-block failure rate, 1/s.
    pub fail_rate: f64,
    /// Repair rate, 1/s.
    pub repair_rate: f64,
    /// `p[i]`: probability that state `i` survives one more failure, `i = 0..m`.
    pub p: Vec<f64>,
}

impl MarkovSpec {
    /// MDS stripe: every pattern of up to `m` failures is recoverable.
    pub fn mds(n: usize, m: usize, fail_rate: f64, repair_rate: f64) -> Self {
        Self { n, m, fail_rate, repair_rate, p: vec![1.0; m] }
    }

    pub fn validate(&self) -> Result<(), ReliabilityError> {
        let bad = |msg: String| Err(ReliabilityError::InvalidSpec(msg));
        if self.m == 0 || self.n <= self.m {
            return bad(format!("need 1 <= m < n, got n = {}, m = {}", self.n, self.m));
        }
        if self.p.len() != self.m {
            return bad(format!("{} survival probabilities for m = {}", self.p.len(), self.m));
        }
        if let Some(x) = self.p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return bad(format!("probability {x} outside [0, 1]"));
        }
        if !(self.fail_rate >= 0.0 && self.fail_rate.is_finite()) {
            return bad(format!("failure rate {}", self.fail_rate));
        }
        if !(self.repair_rate > 0.0 && self.repair_rate.is_finite()) {
            return bad(format!("repair rate {}", self.repair_rate));
        }
        if self.fail_rate > self.repair_rate {
            log::warn!(
                "failure rate {:.3e} exceeds repair rate {:.3e}; asymptotic forms are unreliable",
                self.fail_rate,
                self.repair_rate
            );
        }
        Ok(())
    }

    /// `lambda / mu`.
    pub fn rate_ratio(&self) -> f64 {
        self.fail_rate / self.repair_rate
    }
}

/// Natural logs of the loss-path weights `t_0..t_m`, with `-inf` for vanishing ones.
///
/// `t_j = (lambda/mu)^j lambda (1 - p_j) prod_{i<=j} (n - i) prod_{i<j} p_i` for
/// `j < m`, and `t_m = (lambda/mu)^m lambda prod_{i<=m} (n - i) prod_{i<m} p_i`.
/// Their sum is the loss rate of the stripe to leading order in `lambda/mu`.
pub fn closed_form_log_terms(spec: &MarkovSpec) -> Result<Vec<f64>, ReliabilityError> {
    spec.validate()?;
    let (ln_ratio, ln_lambda) = (spec.rate_ratio().ln(), spec.fail_rate.ln());
    let mut acc = ln_lambda; // lambda (lambda/mu)^j prod_{i<j} p_i prod_{i<j} (n - i)
    let mut out = Vec::with_capacity(spec.m + 1);
    for j in 0..=spec.m {
        acc += ((spec.n - j) as f64).ln();
        let stop = if j < spec.m { 1.0 - spec.p[j] } else { 1.0 };
        out.push(acc + stop.ln());
        if j < spec.m {
            acc += ln_ratio + spec.p[j].ln();
        }
    }
    Ok(out)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Leading-order MTTDL in seconds: `1 / sum_j t_j`.
pub fn mttdl_closed_form(spec: &MarkovSpec) -> Result<f64, ReliabilityError> {
    let terms = closed_form_log_terms(spec)?;
    let total = log_sum_exp(&terms);
    if total == f64::NEG_INFINITY {
        return Err(ReliabilityError::ZeroDenominator);
    }
    Ok((-total).exp())
}

/// MTTDL from the single loss path through the first imperfect state.
///
/// `s_star` is the smallest erasure count that can lose data; `p_i = 1` is
/// assumed below it. `s_star = m + 1` covers MDS stripes.
pub fn mttdl_dominant(spec: &MarkovSpec, s_star: usize) -> Result<f64, ReliabilityError> {
    spec.validate()?;
    let invalid = |reason: &str| ReliabilityError::InvalidStoppingIndex {
        s_star,
        reason: reason.to_string(),
    };
    if s_star == 0 || s_star > spec.m + 1 {
        return Err(invalid("outside 1..=m+1"));
    }
    let j = s_star - 1;
    let stop = if j < spec.m { 1.0 - spec.p[j] } else { 1.0 };
    if stop <= 0.0 {
        return Err(invalid("p at s* - 1 equals 1"));
    }
    if spec.fail_rate == 0.0 {
        return Err(ReliabilityError::ZeroDenominator);
    }
    let ln_paths: f64 = (0..=j).map(|i| ((spec.n - i) as f64).ln()).sum();
    let ln_rate = j as f64 * spec.rate_ratio().ln() + spec.fail_rate.ln() + stop.ln() + ln_paths;
    Ok((-ln_rate).exp())
}

/// Exact mean absorption time from state 0, in seconds.
///
/// Solves the tridiagonal first-passage equations from the top state down,
/// writing `T_i = (1 - g_i) T_{i-1} + a_i`. Every quantity stays a sum of
/// positive terms, so there is no cancellation even at tiny `lambda / mu`.
pub fn mttdl_ctmc_oracle(spec: &MarkovSpec) -> Result<f64, ReliabilityError> {
    spec.validate()?;
    let (n, m, lam, mu) = (spec.n as f64, spec.m, spec.fail_rate, spec.repair_rate);
    let top = (n - m as f64) * lam;
    let mut g = top / (mu + top);
    let mut a = 1.0 / (mu + top);
    for i in (1..m).rev() {
        let up = (n - i as f64) * lam * spec.p[i];
        let down = (n - i as f64) * lam * (1.0 - spec.p[i]);
        let d = up * g + down + mu;
        g = (up * g + down) / d;
        a = (1.0 + up * a) / d;
    }
    let up = n * lam * spec.p[0];
    let down = n * lam * (1.0 - spec.p[0]);
    let denom = up * g + down;
    if denom.is_nan() || denom <= 0.0 || denom.is_infinite() {
        return Err(ReliabilityError::SingularSystem);
    }
    Ok((1.0 + up * a) / denom)
}

/// Probability that more than `m` of `n` blocks are erased when each goes
/// independently with probability `p`, the loss probability of an MDS code.
pub fn mds_loss_probability(n: usize, m: usize, p: f64) -> f64 {
    let mut coef = 1.0f64;
    let mut total = 0.0;
    for e in 0..=n {
        if e > m {
            total += coef * p.powi(e as i32) * (1.0 - p).powi((n - e) as i32);
        }
        coef = coef * (n - e) as f64 / (e + 1) as f64;
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mds_loss_tail() {
        assert_eq!(mds_loss_probability(15, 5, 0.0), 0.0);
        assert!((mds_loss_probability(3, 2, 0.1) - 1e-3).abs() < 1e-15);
        assert!((mds_loss_probability(15, 5, 1.0) - 1.0).abs() < 1e-12);
        let p = 0.2f64;
        let keep: f64 = (0..=5u32)
            .map(|e| {
                let c: f64 = (0..e).map(|j| (15 - j) as f64 / (j + 1) as f64).product();
                c * p.powi(e as i32) * (1.0 - p).powi(15 - e as i32)
            })
            .sum();
        assert!((mds_loss_probability(15, 5, p) - (1.0 - keep)).abs() < 1e-12);
    }

    fn spec(n: usize, m: usize, lam: f64, mu: f64, p: &[f64]) -> MarkovSpec {
        MarkovSpec { n, m, fail_rate: lam, repair_rate: mu, p: p.to_vec() }
    }

    /// Dense Gaussian elimination with partial pivoting on the generator, as an
    /// independent check of the recurrences at moderate rate ratios.
    fn dense_oracle(s: &MarkovSpec) -> f64 {
        let k = s.m + 1;
        let mut a = vec![vec![0.0f64; k + 1]; k];
        for i in 0..k {
            let left = (s.n - i) as f64 * s.fail_rate;
            let up = if i < s.m { left * s.p[i] } else { 0.0 };
            let repair = if i > 0 { s.repair_rate } else { 0.0 };
            a[i][i] = left + repair;
            if i + 1 < k {
                a[i][i + 1] = -up;
            }
            if i > 0 {
                a[i][i - 1] = -repair;
            }
            a[i][k] = 1.0;
        }
        for col in 0..k {
            let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    let pivot_row = a[col].clone();
                    for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= f * p;
                    }
                }
            }
        }
        a[0][k] / a[0][0]
    }

    #[test]
    fn mds_reduction() {
        let s = MarkovSpec::mds(14, 4, 1e-4, 1.0);
        let expect = 1.0 / (1e-4f64.powi(5) * (14.0 * 13.0 * 12.0 * 11.0 * 10.0));
        let got = mttdl_closed_form(&s).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-12);
        assert!((mttdl_dominant(&s, 5).unwrap() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_chain_against_oracle() {
        let s = spec(5, 2, 1e-3, 1.0, &[1.0, 0.5]);
        let (cf, oracle) = (mttdl_closed_form(&s).unwrap(), mttdl_ctmc_oracle(&s).unwrap());
        assert!((cf / oracle - 1.0).abs() < 0.02, "{cf} vs {oracle}");
    }

    #[test]
    fn two_state_chain_by_hand() {
        let (n, lam, mu) = (6.0, 2e-3, 0.7);
        let s = spec(6, 1, lam, mu, &[1.0]);
        let expect = (mu + n * lam + (n - 1.0) * lam) / (n * (n - 1.0) * lam * lam);
        assert!((mttdl_ctmc_oracle(&s).unwrap() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn immediate_loss() {
        let s = spec(8, 3, 0.01, 1.0, &[0.0, 0.3, 0.3]);
        assert!((mttdl_ctmc_oracle(&s).unwrap() - 1.0 / (8.0 * 0.01)).abs() < 1e-9);
        assert!((mttdl_dominant(&s, 1).unwrap() - 1.0 / (8.0 * 0.01)).abs() < 1e-9);
    }

    #[test]
    fn dominant_rejects_certain_survival() {
        let s = spec(8, 3, 0.01, 1.0, &[1.0, 1.0, 0.5]);
        assert!(matches!(mttdl_dominant(&s, 2), Err(ReliabilityError::InvalidStoppingIndex { .. })));
        assert!(mttdl_dominant(&s, 3).is_ok());
        assert!(mttdl_dominant(&s, 6).is_err());
    }

    #[test]
    fn dominant_step_ratio() {
        let (lam, mu) = (1e-6, 1.0);
        let two = spec(20, 5, lam, mu, &[1.0, 0.4, 0.5, 0.5, 0.5]);
        let three = spec(20, 5, lam, mu, &[1.0, 1.0, 0.4, 0.5, 0.5]);
        let ratio = mttdl_dominant(&three, 3).unwrap() / mttdl_dominant(&two, 2).unwrap();
        assert!((ratio / (mu / (lam * 18.0)) - 1.0).abs() < 1e-9);
        let cf = mttdl_closed_form(&three).unwrap();
        assert!((mttdl_dominant(&three, 3).unwrap() / cf - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_failure_rate() {
        let s = spec(5, 2, 0.0, 1.0, &[1.0, 1.0]);
        assert_eq!(mttdl_closed_form(&s), Err(ReliabilityError::ZeroDenominator));
        assert_eq!(mttdl_ctmc_oracle(&s), Err(ReliabilityError::SingularSystem));
    }

    #[test]
    fn validation() {
        assert!(spec(3, 3, 1e-3, 1.0, &[1.0, 1.0, 1.0]).validate().is_err());
        assert!(spec(5, 2, 1e-3, 1.0, &[1.0]).validate().is_err());
        assert!(spec(5, 2, 1e-3, 1.0, &[1.0, 1.5]).validate().is_err());
        assert!(spec(5, 2, 1e-3, 0.0, &[1.0, 1.0]).validate().is_err());
    }

    #[test]
    fn terms_decay_with_rate_ratio() {
        let s = spec(30, 6, 1e-7, 1.0, &[1.0, 0.9, 0.8, 0.7, 0.6, 0.5]);
        let t = closed_form_log_terms(&s).unwrap();
        assert_eq!(t[0], f64::NEG_INFINITY);
        for j in 1..t.len() - 1 {
            // Next/this is O(lambda/mu) up to the combinatorial factor n.
            assert!(t[j + 1] - t[j] < (30.0 * 1e-7 * 10.0f64).ln());
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_dense_solve(
            n in 4usize..30, m in 1usize..6, ratio_exp in -5.0f64..-1.0,
            p in proptest::collection::vec(0.0f64..=1.0, 6),
        ) {
            prop_assume!(m < n);
            let s = spec(n, m, 10f64.powf(ratio_exp), 1.0, &p[..m]);
            let (fast, dense) = (mttdl_ctmc_oracle(&s).unwrap(), dense_oracle(&s));
            prop_assert!((fast / dense - 1.0).abs() < 1e-9, "{} vs {}", fast, dense);
        }

        #[test]
        fn closed_form_converges(
            n in 4usize..60, m in 1usize..7,
            p in proptest::collection::vec(0.0f64..=1.0, 7),
        ) {
            prop_assume!(m < n);
            let mut p = p[..m].to_vec();
            p[0] = 1.0;
            let s = spec(n, m, 1e-6, 1.0, &p);
            let (cf, oracle) = (mttdl_closed_form(&s).unwrap(), mttdl_ctmc_oracle(&s).unwrap());
            prop_assert!((cf / oracle - 1.0).abs() < 0.01);
        }

        #[test]
        fn later_first_failure_lasts_longer(s_star in 2usize..6) {
            let mk = |s: usize| {
                let p: Vec<f64> = (0..8).map(|i| if i + 1 < s { 1.0 } else { 0.5 }).collect();
                spec(100, 8, 1e-5, 1.0, &p)
            };
            let (a, b) = (mk(s_star), mk(s_star + 1));
            prop_assert!(mttdl_dominant(&b, s_star + 1).unwrap() > mttdl_dominant(&a, s_star).unwrap());
            prop_assert!(mttdl_closed_form(&b).unwrap() > mttdl_closed_form(&a).unwrap());
        }
    }
}

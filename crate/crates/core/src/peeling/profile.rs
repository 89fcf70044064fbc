//! Tolerance profiles and i.i.d. data-loss estimates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PeelError, Peeler};
use crate::graph::FactorGraph;

const PROFILE_SALT: u64 = 0x7072_6f66_696c_6501;
const LOSS_SALT: u64 = 0x6c6f_7373_7072_6f62;

/// Independent stream for trial `t`; identical under any thread schedule.
fn trial_rng(seed: u64, salt: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(t);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Monte Carlo trials.
    pub n_s: u64,
    /// Levels up to this one are always enumerated exhaustively.
    pub exact_upto: usize,
    pub seed: u64,
    /// Enumerate any level with at most this many patterns; defaults to `max(n_s, 1e6)`.
    pub exhaustive_limit: Option<u64>,
}

impl ProfileConfig {
    pub fn new(n_s: u64, exact_upto: usize, seed: u64) -> Self {
        Self { n_s, exact_upto, seed, exhaustive_limit: None }
    }

    fn limit(&self) -> u64 {
        self.exhaustive_limit.unwrap_or(self.n_s.max(1_000_000))
    }
}

/// Per-level correctability of random erasure patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub n: usize,
    pub m: usize,
    /// Smallest level with `q < 1`, if any level up to `m` shows one.
    pub s_star: Option<usize>,
    /// `q[i]`: fraction of `i`-erasure patterns that peel completely, `i = 0..=m`.
    pub q: Vec<f64>,
    /// `p[i] = q[i+1] / q[i]`, listed while `q[i] > 0`.
    pub p: Vec<f64>,
    pub n_s: u64,
    pub exact_upto: usize,
    /// Whether each level was enumerated exhaustively.
    pub exact: Vec<bool>,
    /// First level with `q = 0`, after which `p` is undefined.
    pub truncated_at: Option<usize>,
}

impl ToleranceProfile {
    pub fn ratio(&self, i: usize) -> Result<f64, PeelError> {
        self.p.get(i).copied().ok_or(PeelError::DegenerateRatio { level: i })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j as u128 + 1);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

/// Number of `size`-subsets of `0..n` that peel completely.
fn count_decodable(g: &FactorGraph, size: usize) -> u64 {
    let n = g.n();
    if size == 0 {
        return 1;
    }
    (0..=n - size)
        .into_par_iter()
        .map_init(
            || Peeler::new(g),
            |peeler, first| {
                // Lexicographic walk over the remaining `size - 1` elements above `first`.
                let mut pattern: Vec<usize> = (first..first + size).collect();
                let mut good = 0u64;
                loop {
                    good += peeler.decodes(g, &pattern) as u64;
                    let mut j = size - 1;
                    while j > 0 && pattern[j] == n - size + j {
                        j -= 1;
                    }
                    if j == 0 {
                        break;
                    }
                    pattern[j] += 1;
                    for k in j + 1..size {
                        pattern[k] = pattern[k - 1] + 1;
                    }
                }
                good
            },
        )
        .sum()
}

/// Erases the VNs of one random permutation in order and returns the first
/// prefix length, at most `top`, that fails to peel (`top + 1` if none does).
fn first_failure(g: &FactorGraph, peeler: &mut Peeler, rng: &mut ChaCha8Rng, top: usize) -> usize {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    // Decodable prefixes are closed under shortening, so bisect.
    let (mut lo, mut hi) = (0usize, top + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if peeler.decodes(g, &order[..mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Estimates `q_0..q_m` and the ratios `p_i`.
///
/// Levels with `i <= exact_upto` or at most `exhaustive_limit` patterns are
/// enumerated. The rest come from `n_s` nested trials: trial `t` erases a
/// random permutation prefix by prefix, so the share of trials surviving `i`
/// erasures estimates `q_i`, scaled to the last exact level below it.
pub fn tolerance_profile(g: &FactorGraph, cfg: &ProfileConfig) -> Result<ToleranceProfile, PeelError> {
    if cfg.n_s == 0 {
        return Err(PeelError::InvalidSamples);
    }
    let (n, m) = (g.n(), g.m());
    let top = m.min(n);
    let limit = cfg.limit() as u128;
    let exact: Vec<bool> = (0..=top).map(|i| i == 0 || i <= cfg.exact_upto || binomial(n, i) <= limit).collect();

    let mut q = vec![0.0; top + 1];
    for i in (0..=top).filter(|&i| exact[i]) {
        q[i] = count_decodable(g, i) as f64 / binomial(n, i) as f64;
    }

    if let Some(mc_top) = (0..=top).rev().find(|&i| !exact[i]) {
        let mut survived = vec![0u64; mc_top + 2];
        let failures: Vec<usize> = (0..cfg.n_s)
            .into_par_iter()
            .map_init(
                || Peeler::new(g),
                |peeler, t| {
                    let mut rng = trial_rng(cfg.seed, PROFILE_SALT, t);
                    first_failure(g, peeler, &mut rng, mc_top)
                },
            )
            .collect();
        for f in failures {
            // Survives every level below its first failure.
            survived[f - 1] += 1;
        }
        for i in (0..=mc_top).rev() {
            survived[i] += survived[i + 1];
        }
        let mut anchor = 0;
        for i in 0..=mc_top {
            if exact[i] {
                anchor = i;
            } else if survived[anchor] > 0 {
                q[i] = q[anchor] * survived[i] as f64 / survived[anchor] as f64;
            }
        }
    }

    let mut p = Vec::with_capacity(top);
    let mut truncated_at = None;
    for i in 0..top {
        if q[i] <= 0.0 {
            truncated_at = Some(i);
            log::warn!("profile truncated: q_{i} estimated as zero, later ratios undefined");
            break;
        }
        p.push((q[i + 1] / q[i]).min(1.0));
    }
    let s_star = q.iter().position(|&x| x < 1.0);
    Ok(ToleranceProfile {
        n,
        m,
        s_star,
        q,
        p,
        n_s: cfg.n_s,
        exact_upto: cfg.exact_upto,
        exact,
        truncated_at,
    })
}

/// Monte Carlo data-loss probability with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub p_erase: f64,
    pub trials: u64,
    pub failures: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

fn wilson(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Share of trials in which erasing each block independently with probability
/// `p_erase` leaves a non-empty stopping set.
pub fn data_loss_probability(
    g: &FactorGraph,
    p_erase: f64,
    n_s: u64,
    seed: u64,
) -> Result<LossEstimate, PeelError> {
    if !(0.0..=1.0).contains(&p_erase) {
        return Err(PeelError::InvalidProbability(p_erase));
    }
    if n_s == 0 {
        return Err(PeelError::InvalidSamples);
    }
    let failures: u64 = (0..n_s)
        .into_par_iter()
        .map_init(
            || (Peeler::new(g), Vec::with_capacity(g.n())),
            |(peeler, pattern), t| {
                let mut rng = trial_rng(seed, LOSS_SALT, t);
                pattern.clear();
                pattern.extend((0..g.n()).filter(|_| rng.random::<f64>() < p_erase));
                !peeler.decodes(g, pattern) as u64
            },
        )
        .sum();
    let estimate = failures as f64 / n_s as f64;
    // Erasing nothing or everything has a certain outcome.
    let (ci_lo, ci_hi) = if p_erase == 0.0 || p_erase == 1.0 {
        (estimate, estimate)
    } else {
        wilson(failures, n_s, 1.959_963_984_540_054)
    };
    Ok(LossEstimate {
        p_erase,
        trials: n_s,
        failures,
        estimate,
        ci_lo,
        ci_hi,
    })
}

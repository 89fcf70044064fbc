//! Erasure decoding by peeling, stopping sets, and tolerance profiling.

mod profile;
mod stopping;

pub use profile::{
    data_loss_probability, tolerance_profile, LossEstimate, ProfileConfig, ToleranceProfile,
};
pub use stopping::{stopping_number_exact, StoppingNumber, DEFAULT_SEARCH_BUDGET};

use serde::Serialize;
use thiserror::Error;

use crate::graph::FactorGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeelError {
    #[error("erased index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("stopping-set search exceeded its budget of {limit} nodes")]
    BudgetExceeded { limit: u64 },
    #[error("weight cutoff must be at least 1")]
    InvalidCutoff,
    #[error("sample count must be at least 1")]
    InvalidSamples,
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("q_{level} estimated as zero, ratio undefined")]
    DegenerateRatio { level: usize },
}

/// Outcome of peeling one erasure pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub recovered: Vec<usize>,
    /// Largest stopping set inside the erased set; empty on success.
    pub residual: Vec<usize>,
    /// Passes that resolved at least one erasure.
    pub iterations: usize,
}

impl DecodeResult {
    pub fn success(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Peels `erased` in passes: every check with exactly one erased neighbour
/// resolves that neighbour, until a pass resolves nothing.
pub fn peel_decode(g: &FactorGraph, erased: &[usize]) -> Result<DecodeResult, PeelError> {
    let mut is_erased = vec![false; g.n()];
    for &u in erased {
        if u >= g.n() {
            return Err(PeelError::IndexOutOfRange { index: u, n: g.n() });
        }
        is_erased[u] = true;
    }
    let mut count: Vec<usize> =
        (0..g.m()).map(|r| g.cn_neighbors(r).iter().filter(|&&u| is_erased[u]).count()).collect();
    let mut recovered = Vec::new();
    let mut iterations = 0;
    loop {
        let fixed: Vec<usize> = (0..g.m())
            .filter(|&r| count[r] == 1)
            .filter_map(|r| g.cn_neighbors(r).iter().copied().find(|&u| is_erased[u]))
            .collect();
        if fixed.is_empty() {
            break;
        }
        iterations += 1;
        for u in fixed {
            if !is_erased[u] {
                continue;
            }
            is_erased[u] = false;
            recovered.push(u);
            for &r in g.vn_neighbors(u) {
                count[r] -= 1;
            }
        }
    }
    recovered.sort_unstable();
    let residual = (0..g.n()).filter(|&u| is_erased[u]).collect();
    Ok(DecodeResult { recovered, residual, iterations })
}

/// True when every check touching `set` touches it at least twice.
pub fn is_stopping_set(g: &FactorGraph, set: &[usize]) -> bool {
    let mut count = vec![0usize; g.m()];
    for &u in set {
        for &r in g.vn_neighbors(u) {
            count[r] += 1;
        }
    }
    count.iter().all(|&c| c != 1)
}

/// Reusable buffers for fast success-only peeling.
pub(crate) struct Peeler {
    erased: Vec<bool>,
    count: Vec<u32>,
    stack: Vec<usize>,
}

impl Peeler {
    pub(crate) fn new(g: &FactorGraph) -> Self {
        Self { erased: vec![false; g.n()], count: vec![0; g.m()], stack: Vec::new() }
    }

    /// Whether peeling recovers every index in `pattern` (indices must be distinct).
    pub(crate) fn decodes(&mut self, g: &FactorGraph, pattern: &[usize]) -> bool {
        self.erased.fill(false);
        self.count.fill(0);
        self.stack.clear();
        for &u in pattern {
            self.erased[u] = true;
            for &r in g.vn_neighbors(u) {
                self.count[r] += 1;
            }
        }
        self.stack.extend(pattern.iter().flat_map(|&u| g.vn_neighbors(u)).copied());
        let mut left = pattern.len();
        while let Some(r) = self.stack.pop() {
            if self.count[r] != 1 {
                continue;
            }
            let Some(u) = g.cn_neighbors(r).iter().copied().find(|&u| self.erased[u]) else {
                continue;
            };
            self.erased[u] = false;
            left -= 1;
            for &c in g.vn_neighbors(u) {
                self.count[c] -= 1;
                if self.count[c] == 1 {
                    self.stack.push(c);
                }
            }
        }
        left == 0
    }
}

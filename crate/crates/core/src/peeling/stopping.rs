//! Exact stopping-number search.

use serde::Serialize;

use super::PeelError;
use crate::graph::FactorGraph;

/// Search nodes allowed by default before giving up.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum StoppingNumber {
    Found(usize),
    /// No stopping set of size up to the cutoff exists.
    AboveCutoff,
}

struct Search<'a> {
    g: &'a FactorGraph,
    in_set: Vec<bool>,
    // Number of set members on each check.
    count: Vec<u32>,
    size: usize,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn add(&mut self, u: usize) {
        self.in_set[u] = true;
        self.size += 1;
        for &r in self.g.vn_neighbors(u) {
            self.count[r] += 1;
        }
    }

    fn remove(&mut self, u: usize) {
        self.in_set[u] = false;
        self.size -= 1;
        for &r in self.g.vn_neighbors(u) {
            self.count[r] -= 1;
        }
    }

    /// Extends the current set (minimum element `low`) to a stopping set of at most `limit` members.
    fn extend(&mut self, low: usize, limit: usize) -> Result<bool, PeelError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(PeelError::BudgetExceeded { limit: self.budget });
        }
        // Pick the deficient check with the fewest ways to repair it.
        let mut best: Option<(usize, usize)> = None;
        for r in 0..self.g.m() {
            if self.count[r] != 1 {
                continue;
            }
            let options = self
                .g
                .cn_neighbors(r)
                .iter()
                .filter(|&&u| u > low && !self.in_set[u])
                .count();
            if options == 0 {
                return Ok(false);
            }
            if best.is_none_or(|(_, o)| options < o) {
                best = Some((r, options));
            }
        }
        let Some((r, _)) = best else {
            return Ok(true);
        };
        if self.size == limit {
            return Ok(false);
        }
        for &u in self.g.cn_neighbors(r) {
            if u <= low || self.in_set[u] {
                continue;
            }
            self.add(u);
            if self.extend(low, limit)? {
                return Ok(true);
            }
            self.remove(u);
        }
        Ok(false)
    }
}

/// Size of the smallest stopping set, found by exhaustive branch search.
///
/// Sets are grown from their minimum element; each step picks a check touched
/// exactly once and branches over its other members, so checks that cannot
/// reach two members prune the branch. Sizes are tried in increasing order up
/// to `weight_cutoff`. `budget` bounds the total number of search nodes.
pub fn stopping_number_exact(
    g: &FactorGraph,
    weight_cutoff: usize,
    budget: u64,
) -> Result<StoppingNumber, PeelError> {
    if weight_cutoff == 0 {
        return Err(PeelError::InvalidCutoff);
    }
    let mut search = Search {
        g,
        in_set: vec![false; g.n()],
        count: vec![0; g.m()],
        size: 0,
        visited: 0,
        budget,
    };
    for limit in 1..=weight_cutoff.min(g.n()) {
        for v0 in 0..g.n() {
            search.add(v0);
            let found = search.extend(v0, limit)?;
            if found {
                return Ok(StoppingNumber::Found(search.size));
            }
            search.remove(v0);
        }
    }
    Ok(StoppingNumber::AboveCutoff)
}

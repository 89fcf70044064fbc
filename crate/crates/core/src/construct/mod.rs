//! Large-girth factor graph construction: progressive edge growth, circulant
//! lifting, and girth measurement.

mod peg;
mod qc;

pub use peg::peg_construct;
pub use qc::qc_lift;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{FactorGraph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("infeasible construction: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameters for a PEG build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub n: usize,
    pub m: usize,
    /// Target degree of each variable node, in placement order.
    pub vn_degrees: Vec<usize>,
    pub seed: u64,
    /// Lifting factor applied after PEG when set.
    pub circulant_size: Option<usize>,
    /// Cap every check at `E / m` edges so the result is check-regular.
    pub cn_regular: bool,
    /// Permit variable degrees below 2.
    pub allow_low_degree: bool,
}

impl ConstructionSpec {
    /// Every VN at degree `dv`, check-regular when `m` divides `n * dv`.
    pub fn regular(n: usize, m: usize, dv: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            vn_degrees: vec![dv; n],
            seed,
            circulant_size: None,
            cn_regular: m > 0 && (n * dv).is_multiple_of(m),
            allow_low_degree: false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.vn_degrees.iter().sum()
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        let bad = |msg: String| Err(ConstructError::InfeasibleSpec(msg));
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be positive".into());
        }
        if self.vn_degrees.len() != self.n {
            return bad(format!("{} degree targets for n = {}", self.vn_degrees.len(), self.n));
        }
        if let Some(&d) = self.vn_degrees.iter().find(|&&d| d > self.m) {
            return bad(format!("VN degree {d} exceeds m = {} without parallel edges", self.m));
        }
        let min_allowed = if self.allow_low_degree { 1 } else { 2 };
        if let Some(&d) = self.vn_degrees.iter().find(|&&d| d < min_allowed) {
            return bad(format!("VN degree {d} below {min_allowed}"));
        }
        if self.edge_count() < self.m {
            return bad(format!("{} edges cannot cover {} checks", self.edge_count(), self.m));
        }
        if self.cn_regular && !self.edge_count().is_multiple_of(self.m) {
            return bad(format!(
                "check-regular build needs m = {} to divide E = {}",
                self.m,
                self.edge_count()
            ));
        }
        if self.circulant_size == Some(0) {
            return bad("circulant size must be at least 1".into());
        }
        Ok(())
    }
}

/// Shortest cycle length of a factor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("inf"),
        }
    }
}

/// Adjacency over `n + m` nodes: VN `u` is node `u`, CN `r` is node `n + r`.
pub(crate) fn unified_adjacency(g: &FactorGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    (0..n)
        .map(|u| g.vn_neighbors(u).iter().map(|&r| n + r).collect())
        .chain((0..g.m()).map(|r| g.cn_neighbors(r).to_vec()))
        .collect()
}

/// Girth by breadth-first search from every variable node.
pub fn girth(g: &FactorGraph) -> Girth {
    let n = g.n();
    let total = n + g.m();
    let adj = unified_adjacency(g);
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut queue = VecDeque::new();
    let mut touched = Vec::new();
    for s in 0..n {
        for &x in &touched {
            dist[x] = usize::MAX;
            parent[x] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[s] = 0;
        touched.push(s);
        queue.push_back(s);
        'bfs: while let Some(x) = queue.pop_front() {
            // Any cycle closed from here has length at least 2 * dist[x].
            if 2 * dist[x] >= best {
                break;
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    touched.push(y);
                    queue.push_back(y);
                } else if parent[x] != y {
                    best = best.min(dist[x] + dist[y] + 1);
                    if best <= 4 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 4 {
            break;
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}

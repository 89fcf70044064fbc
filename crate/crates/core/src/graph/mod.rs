//! Factor-graph representation of a binary parity-check matrix.
//!
//! Variable nodes (VNs) are the coded blocks of a stripe, check nodes (CNs)
//! are the parity equations. Adjacency is kept sorted in both directions so
//! that every derived quantity is deterministic.

pub mod alist;
mod degree;
mod repair;

pub use degree::{DegreeDistribution, DegreeError, DegreeMap};
pub use repair::{min_repair_bandwidth, MinRepairBandwidth, RepairOption};

use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("variable index {index} out of range for n = {n} (check {check})")]
    IndexOutOfRange { check: usize, index: usize, n: usize },
    #[error("check {check} lists variable {index} more than once")]
    DuplicateEdge { check: usize, index: usize },
    #[error("graph has no variable nodes, no check nodes or no edges")]
    EmptyGraph,
    #[error("variable node {0} has no incident check node")]
    IsolatedNode(usize),
    #[error("rate must lie strictly between 0 and 1, got {0}")]
    InvalidRate(String),
}

/// Bipartite Tanner graph with `n` variable nodes and `m` check nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    n: usize,
    m: usize,
    vn_adj: Vec<Vec<usize>>,
    cn_adj: Vec<Vec<usize>>,
    edges: usize,
}

impl FactorGraph {
    /// Builds a graph from parity rows: `rows[r]` lists the variables checked by CN `r`.
    pub fn from_parity_rows(rows: &[Vec<usize>], n: usize) -> Result<Self, GraphError> {
        if n == 0 || rows.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut cn_adj = Vec::with_capacity(rows.len());
        let mut vn_adj = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge { check: r, index: w[0] });
                }
            }
            if let Some(&last) = sorted.last() {
                if last >= n {
                    return Err(GraphError::IndexOutOfRange { check: r, index: last, n });
                }
            }
            for &u in &sorted {
                vn_adj[u].push(r);
            }
            cn_adj.push(sorted);
        }
        Self::from_adjacency(n, vn_adj, cn_adj)
    }

    /// Builds a graph from an edge list of `(vn, cn)` pairs.
    pub fn from_edges(n: usize, m: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if m == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut rows = vec![Vec::new(); m];
        for &(u, r) in edges {
            if r >= m {
                return Err(GraphError::IndexOutOfRange { check: r, index: u, n });
            }
            rows[r].push(u);
        }
        Self::from_parity_rows(&rows, n)
    }

    // vn_adj rows are filled in increasing CN order by construction, cn_adj rows are sorted.
    fn from_adjacency(
        n: usize,
        vn_adj: Vec<Vec<usize>>,
        cn_adj: Vec<Vec<usize>>,
    ) -> Result<Self, GraphError> {
        let edges: usize = cn_adj.iter().map(Vec::len).sum();
        if edges == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if let Some(u) = vn_adj.iter().position(Vec::is_empty) {
            return Err(GraphError::IsolatedNode(u));
        }
        Ok(Self { n, m: cn_adj.len(), vn_adj, cn_adj, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total edge count `E`.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Sorted check neighbours of variable node `u`.
    pub fn vn_neighbors(&self, u: usize) -> &[usize] {
        &self.vn_adj[u]
    }

    /// Sorted variable neighbours of check node `r`.
    pub fn cn_neighbors(&self, r: usize) -> &[usize] {
        &self.cn_adj[r]
    }

    pub fn vn_degree(&self, u: usize) -> usize {
        self.vn_adj[u].len()
    }

    pub fn cn_degree(&self, r: usize) -> usize {
        self.cn_adj[r].len()
    }

    pub fn max_vn_degree(&self) -> usize {
        self.vn_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_cn_degree(&self) -> usize {
        self.cn_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Check rows in the same shape accepted by [`FactorGraph::from_parity_rows`].
    pub fn parity_rows(&self) -> &[Vec<usize>] {
        &self.cn_adj
    }

    /// All `(vn, cn)` edges, ordered by VN then CN.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vn_adj
            .iter()
            .enumerate()
            .flat_map(|(u, cns)| cns.iter().map(move |&r| (u, r)))
    }

    /// Edge-perspective degree distribution of this graph.
    pub fn degree_profile(&self) -> DegreeDistribution {
        let e = self.edges as f64;
        let mut lambda = DegreeMap::new();
        for adj in &self.vn_adj {
            *lambda.entry(adj.len() as u32).or_insert(0.0) += adj.len() as f64;
        }
        let mut rho = DegreeMap::new();
        for adj in &self.cn_adj {
            *rho.entry(adj.len() as u32).or_insert(0.0) += adj.len() as f64;
        }
        lambda.values_mut().for_each(|v| *v /= e);
        rho.values_mut().for_each(|v| *v /= e);
        DegreeDistribution::from_parts_unchecked(lambda, rho)
    }

    /// Design rate `1 - m/n`, exact.
    pub fn design_rate_exact(&self) -> Ratio<u64> {
        Ratio::new((self.n - self.m.min(self.n)) as u64, self.n as u64)
    }

    /// True if every check node has the same degree.
    pub fn is_cn_regular(&self) -> bool {
        self.cn_adj.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn is_vn_regular(&self) -> bool {
        self.vn_adj.windows(2).all(|w| w[0].len() == w[1].len())
    }
}

//! Progressive edge growth.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{qc_lift, ConstructError, ConstructionSpec};
use crate::graph::FactorGraph;

const UNREACHED: usize = usize::MAX;

struct Growth {
    vn_adj: Vec<Vec<usize>>,
    cn_adj: Vec<Vec<usize>>,
    // CN distance from the current VN, in edges.
    cn_dist: Vec<usize>,
    vn_seen: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Growth {
    fn new(n: usize, m: usize) -> Self {
        Self {
            vn_adj: vec![Vec::new(); n],
            cn_adj: vec![Vec::new(); m],
            cn_dist: vec![UNREACHED; m],
            vn_seen: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    /// Fills `cn_dist` with BFS distances from VN `v` through the partial graph.
    fn bfs_from(&mut self, v: usize) {
        self.cn_dist.fill(UNREACHED);
        self.vn_seen.fill(false);
        self.queue.clear();
        self.vn_seen[v] = true;
        self.queue.push_back(v);
        let mut vn_dist = 0usize;
        let mut level_end = 1usize;
        let mut popped = 0usize;
        while let Some(u) = self.queue.pop_front() {
            popped += 1;
            for &r in &self.vn_adj[u] {
                if self.cn_dist[r] != UNREACHED {
                    continue;
                }
                self.cn_dist[r] = vn_dist + 1;
                for &w in &self.cn_adj[r] {
                    if !self.vn_seen[w] {
                        self.vn_seen[w] = true;
                        self.queue.push_back(w);
                    }
                }
            }
            if popped == level_end {
                vn_dist += 2;
                level_end = popped + self.queue.len();
            }
        }
    }

    /// Frees a slot for `v` by moving some other VN `w` from a check `t` onto a
    /// check `r` with spare capacity, then returns `t` for `v`. Degrees are
    /// unchanged. With `clean` set, the swap must not close a 4-cycle.
    fn swap_in(&mut self, v: usize, cap: usize, rank: &[usize], clean: bool) -> Option<usize> {
        let spare: Vec<usize> =
            rank.iter().copied().filter(|&r| self.cn_adj[r].len() < cap).collect();
        // Prefer landing `v` far from its current tree.
        let mut targets = rank.to_vec();
        targets.sort_by_key(|&t| std::cmp::Reverse(self.cn_dist[t]));
        for &r in &spare {
            for &t in &targets {
                if t == r || self.vn_adj[v].contains(&t) || (clean && self.cn_dist[t] <= 3) {
                    continue;
                }
                let movable = |w: usize| {
                    w != v
                        && !self.vn_adj[w].contains(&r)
                        && (!clean
                            || self.vn_adj[w].iter().filter(|&&c| c != t).all(|&c| {
                                self.cn_adj[c].iter().all(|x| !self.cn_adj[r].contains(x))
                            }))
                };
                let Some(w) = self.cn_adj[t].iter().copied().find(|&w| movable(w)) else {
                    continue;
                };
                self.cn_adj[t].retain(|&x| x != w);
                self.vn_adj[w].retain(|&x| x != t);
                self.connect(w, r);
                return Some(t);
            }
        }
        None
    }

    fn connect(&mut self, u: usize, r: usize) {
        self.vn_adj[u].push(r);
        self.cn_adj[r].push(u);
    }
}

/// Builds a factor graph by progressive edge growth.
///
/// Edges are placed in rounds: round `k` adds the `k`-th edge of every VN whose
/// target degree exceeds `k`, in VN order. Each new edge goes to the check
/// farthest from the VN's current computation tree (unreachable checks count
/// as farthest). Ties go to the lowest current check degree, then to the
/// lowest position in a seeded permutation of check indices. With
/// `cn_regular` set, checks that already hold `E / m` edges are not eligible.
pub fn peg_construct(spec: &ConstructionSpec) -> Result<FactorGraph, ConstructError> {
    spec.validate()?;
    let (n, m) = (spec.n, spec.m);
    let mut rank: Vec<usize> = (0..m).collect();
    rank.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut priority = vec![0usize; m];
    for (pos, &r) in rank.iter().enumerate() {
        priority[r] = pos;
    }
    let cap = spec.cn_regular.then(|| spec.edge_count() / m);

    let mut growth = Growth::new(n, m);
    let rounds = spec.vn_degrees.iter().copied().max().unwrap_or(0);
    for round in 0..rounds {
        for v in (0..n).filter(|&v| spec.vn_degrees[v] > round) {
            growth.bfs_from(v);
            let pick = (0..m)
                .filter(|&r| growth.cn_dist[r] != 1)
                .filter(|&r| cap.is_none_or(|c| growth.cn_adj[r].len() < c))
                .max_by(|&a, &b| {
                    growth.cn_dist[a]
                        .cmp(&growth.cn_dist[b])
                        .then(growth.cn_adj[b].len().cmp(&growth.cn_adj[a].len()))
                        .then(priority[b].cmp(&priority[a]))
                });
            let pick = match (pick, cap) {
                // The best check would close a 4-cycle; try rearranging first.
                (Some(r), Some(c)) if growth.cn_dist[r] <= 3 => {
                    growth.swap_in(v, c, &rank, true).or(Some(r))
                }
                (None, Some(c)) => growth.swap_in(v, c, &rank, false),
                (pick, _) => pick,
            };
            match pick {
                Some(r) => growth.connect(v, r),
                None => {
                    return Err(ConstructError::InfeasibleSpec(format!(
                        "no eligible check for edge of VN {v} without a parallel edge"
                    )))
                }
            }
        }
    }

    let base = FactorGraph::from_parity_rows(&growth.cn_adj, n)?;
    match spec.circulant_size {
        Some(l) if l > 1 => Ok(qc_lift(&base, l, spec.seed)),
        _ => Ok(base),
    }
}

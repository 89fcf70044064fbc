//! Quasi-cyclic lifting with circulant permutation blocks.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::FactorGraph;

// Local cycles longer than this are all treated as equally good.
const SEARCH_DEPTH: usize = 20;

/// Replaces every base edge `(u, r)` by the circulant block connecting lifted
/// VN `u*L + a` to lifted CN `r*L + (a + s) mod L`.
///
/// Shifts are chosen greedily in base edge order: each candidate shift is
/// scored by the shortest cycle it closes through the new block, candidates
/// are visited in a seeded order, and the first best-scoring shift wins.
/// A shift closing a 4-cycle is taken only when every shift does.
pub fn qc_lift(base: &FactorGraph, circulant_size: usize, seed: u64) -> FactorGraph {
    let l = circulant_size.max(1);
    if l == 1 {
        return base.clone();
    }
    let (n, m) = (base.n() * l, base.m() * l);
    let mut vn_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cn_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut scratch = Scratch::new(n, m);

    for (u, r) in base.edges() {
        let mut shifts: Vec<usize> = (0..l).collect();
        shifts.shuffle(&mut rng);
        let mut best: Option<(usize, usize)> = None;
        for &s in &shifts {
            add_block(&mut vn_adj, &mut cn_adj, u, r, s, l);
            let local = scratch.local_girth(&vn_adj, &cn_adj, u * l, r * l + s % l);
            remove_block(&mut vn_adj, &mut cn_adj, u, r, s, l);
            if best.is_none_or(|(_, g)| local > g) {
                best = Some((s, local));
            }
            if local > SEARCH_DEPTH {
                break;
            }
        }
        let (s, _) = best.expect("at least one shift");
        add_block(&mut vn_adj, &mut cn_adj, u, r, s, l);
    }

    let rows: Vec<Vec<usize>> = cn_adj;
    FactorGraph::from_parity_rows(&rows, n).expect("lift of a valid graph is valid")
}

fn add_block(
    vn_adj: &mut [Vec<usize>],
    cn_adj: &mut [Vec<usize>],
    u: usize,
    r: usize,
    s: usize,
    l: usize,
) {
    for a in 0..l {
        let (v, c) = (u * l + a, r * l + (a + s) % l);
        vn_adj[v].push(c);
        cn_adj[c].push(v);
    }
}

fn remove_block(
    vn_adj: &mut [Vec<usize>],
    cn_adj: &mut [Vec<usize>],
    u: usize,
    r: usize,
    s: usize,
    l: usize,
) {
    for a in 0..l {
        let (v, c) = (u * l + a, r * l + (a + s) % l);
        vn_adj[v].pop();
        cn_adj[c].pop();
    }
}

struct Scratch {
    vn_dist: Vec<usize>,
    cn_dist: Vec<usize>,
    queue: VecDeque<(bool, usize)>,
}

impl Scratch {
    fn new(n: usize, m: usize) -> Self {
        Self { vn_dist: vec![usize::MAX; n], cn_dist: vec![usize::MAX; m], queue: VecDeque::new() }
    }

    /// Shortest cycle through edge `(v, c)`, or `SEARCH_DEPTH + 1` if none is found within reach.
    fn local_girth(&mut self, vn_adj: &[Vec<usize>], cn_adj: &[Vec<usize>], v: usize, c: usize) -> usize {
        self.vn_dist.fill(usize::MAX);
        self.cn_dist.fill(usize::MAX);
        self.queue.clear();
        self.vn_dist[v] = 0;
        self.queue.push_back((true, v));
        while let Some((is_vn, x)) = self.queue.pop_front() {
            let d = if is_vn { self.vn_dist[x] } else { self.cn_dist[x] };
            if d + 1 >= SEARCH_DEPTH {
                break;
            }
            if is_vn {
                for &y in &vn_adj[x] {
                    // Skip the edge under test itself.
                    if x == v && y == c {
                        continue;
                    }
                    if self.cn_dist[y] == usize::MAX {
                        self.cn_dist[y] = d + 1;
                        if y == c {
                            return d + 2;
                        }
                        self.queue.push_back((false, y));
                    }
                }
            } else {
                for &y in &cn_adj[x] {
                    if self.vn_dist[y] == usize::MAX {
                        self.vn_dist[y] = d + 1;
                        self.queue.push_back((true, y));
                    }
                }
            }
        }
        SEARCH_DEPTH + 1
    }
}

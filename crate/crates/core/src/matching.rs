//! Matching graphs over candidate extremities and an exact maximum-weight
//! matching on general graphs.

use std::collections::HashMap;

use petgraph::graph::{NodeIndex, UnGraph};
use serde::Serialize;

use crate::candidates::{CandidateEnd, CandidateSet};

/// Real weights are mapped onto an integer grid with this many units per 1.0.
pub const WEIGHT_SCALE: f64 = 1e12;

/// A maximum-weight matching: chosen edge indices (sorted) and total weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub weight: f64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Exact maximum-weight matching on an undirected graph with `n` vertices.
///
/// Edges with non-positive weight and self-loops are ignored; among parallel
/// edges only the heaviest (lowest index on ties) is kept. Weights are
/// rounded to [`WEIGHT_SCALE`]. Each edge also gets a small perturbation,
/// derived from its endpoints only, that cannot change the rounded optimum
/// but makes the returned matching independent of hash-map iteration order
/// inside the blossom solver in all but vanishingly rare cases.
pub fn max_weight_matching(n: usize, edges: &[(usize, usize, f64)]) -> Matching {
    let mut best: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, &(u, v, w)) in edges.iter().enumerate() {
        if u == v || w <= 0.0 || !w.is_finite() {
            continue;
        }
        let key = (u.min(v), u.max(v));
        match best.get(&key) {
            Some(&prev) if edges[prev].2 >= w => {}
            _ => {
                best.insert(key, k);
            }
        }
    }
    if best.is_empty() {
        return Matching { edges: Vec::new(), weight: 0.0 };
    }
    let mut kept: Vec<((usize, usize), usize)> = best.into_iter().collect();
    kept.sort_unstable();

    let count = kept.len() as i128;
    let spread: i128 = (count * count * 64).clamp(1024, 1 << 40);
    let multiplier: i128 = count * spread + 1;

    let mut graph: UnGraph<(), (i128, usize)> = UnGraph::with_capacity(n, kept.len());
    for _ in 0..n {
        graph.add_node(());
    }
    let mut lookup = HashMap::with_capacity(kept.len());
    for &((u, v), k) in &kept {
        let units = (edges[k].2 * WEIGHT_SCALE).round() as i128;
        let jitter = (splitmix(((u as u64) << 32) ^ v as u64) as i128).rem_euclid(spread);
        graph.add_edge(NodeIndex::new(u), NodeIndex::new(v), (units * multiplier + jitter, k));
        lookup.insert((u, v), k);
    }
    let pairs = rustworkx_core::max_weight_matching::max_weight_matching(
        &graph,
        false,
        |e| Ok::<i128, std::convert::Infallible>(e.weight().0),
        false,
    )
    .unwrap_or_else(|never| match never {});
    let mut chosen: Vec<usize> = pairs.into_iter().map(|(a, b)| lookup[&(a.min(b), a.max(b))]).collect();
    chosen.sort_unstable();
    let weight = chosen.iter().map(|&k| edges[k].2).sum();
    Matching { edges: chosen, weight }
}

/// Exhaustive maximum-weight matching, exponential; for testing only.
pub fn brute_force_matching(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    fn go(k: usize, used: &mut Vec<bool>, edges: &[(usize, usize, f64)]) -> f64 {
        if k == edges.len() {
            return 0.0;
        }
        let skip = go(k + 1, used, edges);
        let (u, v, w) = edges[k];
        if u == v || used[u] || used[v] || w <= 0.0 {
            return skip;
        }
        used[u] = true;
        used[v] = true;
        let take = w + go(k + 1, used, edges);
        used[u] = false;
        used[v] = false;
        skip.max(take)
    }
    go(0, &mut vec![false; n], edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// A conserved candidate adjacency, by index in the candidate set.
    Adjacency(usize),
    /// Artificial edge between the two extremities of a candidate gene.
    Conflict(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// Graph whose vertices are candidate extremities.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MatchGraph {
    pub vertices: Vec<CandidateEnd>,
    pub edges: Vec<MatchEdge>,
    #[serde(skip)]
    index: HashMap<CandidateEnd, usize>,
}

impl MatchGraph {
    pub fn vertex(&self, e: CandidateEnd) -> Option<usize> {
        self.index.get(&e).copied()
    }

    fn add_vertex(&mut self, e: CandidateEnd) -> usize {
        *self.index.entry(e).or_insert_with(|| {
            self.vertices.push(e);
            self.vertices.len() - 1
        })
    }

    pub fn add_edge(&mut self, a: CandidateEnd, b: CandidateEnd, weight: f64, kind: EdgeKind) {
        let u = self.add_vertex(a);
        let v = self.add_vertex(b);
        self.edges.push(MatchEdge { u, v, weight, kind });
    }

    pub fn mwm(&self) -> Matching {
        let raw: Vec<(usize, usize, f64)> = self.edges.iter().map(|e| (e.u, e.v, e.weight)).collect();
        max_weight_matching(self.vertices.len(), &raw)
    }
}

/// Graph Γ over the candidate genes selected by `allowed` (all when `None`):
/// one vertex per extremity and one edge per conserved candidate adjacency.
pub fn build_gamma(set: &CandidateSet, allowed: Option<&[bool]>) -> MatchGraph {
    let ok = |m: usize| allowed.is_none_or(|a| a[m]);
    let mut graph = MatchGraph::default();
    for (m, gene) in set.genes.iter().enumerate() {
        if ok(m) {
            for &end in gene.ends() {
                graph.add_vertex(CandidateEnd::new(m, end));
            }
        }
    }
    for (k, adj) in set.adjacencies.iter().enumerate() {
        if ok(adj.first.gene) && ok(adj.second.gene) {
            graph.add_edge(adj.first, adj.second, adj.weight(), EdgeKind::Adjacency(k));
        }
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangle_and_path() {
        let tri = max_weight_matching(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert_eq!(tri.edges.len(), 1);
        assert_eq!(tri.weight, 1.0);
        let path = max_weight_matching(3, &[(0, 1, 2.0), (1, 2, 1.0)]);
        assert_eq!(path.edges, vec![0]);
        assert_eq!(path.weight, 2.0);
    }

    #[test]
    fn parallel_edges_keep_heaviest() {
        let m = max_weight_matching(2, &[(0, 1, 1.0), (1, 0, 2.5), (0, 1, 2.0)]);
        assert_eq!(m.edges, vec![1]);
    }

    #[test]
    fn random_graphs_match_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(2..=10);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v, f64::from(rng.gen_range(1..=6)) / 2.0));
                    }
                }
            }
            let got = max_weight_matching(n, &edges);
            assert!((got.weight - brute_force_matching(n, &edges)).abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_calls_agree() {
        let edges: Vec<(usize, usize, f64)> = (0..12).flat_map(|u| (u + 1..12).map(move |v| (u, v, 1.0))).collect();
        let first = max_weight_matching(12, &edges);
        for _ in 0..20 {
            assert_eq!(max_weight_matching(12, &edges), first);
        }
    }

    #[test]
    fn gamma_weights() {
        let instance = crate::fixtures::toy_instance();
        let set = CandidateSet::build(&instance);
        let gamma = build_gamma(&set, None);
        assert_eq!(gamma.edges.len(), set.adjacencies.len());
        assert!(gamma.edges.iter().all(|e| e.weight > 0.0));
        assert!(gamma.edges.iter().any(|e| (e.weight - 3.0).abs() < 1e-12));
    }
}

//! Exhaustive reference solver for tiny candidate sets.
//!
//! Every maximal conflict-free subset of candidate genes is enumerated; for
//! a fixed gene set the best adjacency set is a maximum-weight matching on
//! its extremities.

use std::collections::HashMap;

use crate::candidates::{CandidateEnd, CandidateSet};
use crate::matching::max_weight_matching;

use super::{MedianSolution, SolveStatus, SolverError, EPS};

#[derive(Debug, Clone)]
pub struct OracleOptions {
    /// Refuse candidate sets larger than this.
    pub cap: usize,
    /// Drop the one-adjacency-per-extremity constraint: every adjacency
    /// between chosen genes counts.
    pub relaxed: bool,
    /// Adjacencies every reported solution must contain.
    pub forced: Vec<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { cap: 12, relaxed: false, forced: Vec::new() }
    }
}

fn maximal_subsets(set: &CandidateSet, required: &[bool], visit: &mut dyn FnMut(&[bool])) {
    fn go(set: &CandidateSet, m: usize, chosen: &mut Vec<bool>, required: &[bool], visit: &mut dyn FnMut(&[bool])) {
        let n = set.genes.len();
        if m == n {
            let maximal = (0..n).all(|o| chosen[o] || (0..n).any(|c| chosen[c] && set.conflicting(c, o)));
            if maximal {
                visit(chosen);
            }
            return;
        }
        let compatible = (0..m).all(|c| !chosen[c] || !set.conflicting(c, m));
        if compatible {
            chosen[m] = true;
            go(set, m + 1, chosen, required, visit);
            chosen[m] = false;
        }
        if !required[m] {
            go(set, m + 1, chosen, required, visit);
        }
    }
    let mut chosen = vec![false; set.genes.len()];
    go(set, 0, &mut chosen, required, visit);
}

pub fn brute_force_median(set: &CandidateSet, options: &OracleOptions) -> Result<MedianSolution, SolverError> {
    if set.genes.len() > options.cap {
        return Err(SolverError::OracleCap { count: set.genes.len(), cap: options.cap });
    }
    if set.genes.is_empty() {
        return Ok(MedianSolution::empty(SolveStatus::InfeasibleEmpty));
    }
    let mut required = vec![false; set.genes.len()];
    let mut consumed: HashMap<CandidateEnd, usize> = HashMap::new();
    for &k in &options.forced {
        let adj = &set.adjacencies[k];
        for e in [adj.first, adj.second] {
            required[e.gene] = true;
            if consumed.insert(e, k).is_some_and(|prev| prev != k) {
                return Err(SolverError::ForcedInfeasible);
            }
        }
    }
    let forced_weight: f64 = options.forced.iter().map(|&k| set.adjacencies[k].weight()).sum();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut visited = 0u64;
    maximal_subsets(set, &required, &mut |chosen| {
        visited += 1;
        let usable: Vec<usize> = (0..set.adjacencies.len())
            .filter(|&k| {
                let a = &set.adjacencies[k];
                chosen[a.first.gene]
                    && chosen[a.second.gene]
                    && !options.forced.contains(&k)
                    && !consumed.contains_key(&a.first)
                    && !consumed.contains_key(&a.second)
            })
            .collect();
        let (value, mut picked) = if options.relaxed {
            (usable.iter().map(|&k| set.adjacencies[k].weight()).sum::<f64>(), usable.clone())
        } else {
            let mut vertex = HashMap::new();
            let mut edges = Vec::with_capacity(usable.len());
            for &k in &usable {
                let a = &set.adjacencies[k];
                let mut id = |e: CandidateEnd| {
                    let next = vertex.len();
                    *vertex.entry(e).or_insert(next)
                };
                let (u, v) = (id(a.first), id(a.second));
                edges.push((u, v, a.weight()));
            }
            let m = max_weight_matching(vertex.len(), &edges);
            (m.weight, m.edges.iter().map(|&e| usable[e]).collect())
        };
        let value = value + forced_weight;
        picked.extend(options.forced.iter().copied());
        if best.as_ref().is_none_or(|(b, _)| value > b + EPS) {
            best = Some((value, picked));
        }
    });
    let Some((_, adjacencies)) = best else {
        return Err(SolverError::ForcedInfeasible);
    };
    let mut solution = MedianSolution::from_adjacencies(set, adjacencies, &[]);
    solution.bound = solution.objective;
    solution.nodes = visited;
    Ok(solution)
}

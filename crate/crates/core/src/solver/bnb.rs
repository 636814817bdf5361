//! Depth-first branch-and-bound over candidate genes.
//!
//! The instance is split into independent components (linked by conflicts
//! or adjacencies). Within a component, a node is a set of still allowed
//! candidate genes. Its upper bound is the smaller of
//!
//! * a column bound: every chosen adjacency is charged half to each of its
//!   two extremities, so a gene earns at most half its best head plus best
//!   tail weight; since chosen genes use distinct extant genes of each
//!   genome, summing the best earning per extant gene of one genome bounds
//!   the objective, and
//! * the maximum-weight matching on the allowed genes ignoring conflicts
//!   (computed only when the node is small enough).
//!
//! When no two allowed genes conflict the matching is the exact optimum of
//! the node. Otherwise the search branches on the allowed gene with the
//! highest earning that still has a conflict (fewer conflicts first on ties,
//! then lowest index): first including it, which removes its conflicts, then
//! excluding it.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::candidates::CandidateSet;
use crate::genome::End;
use crate::matching::max_weight_matching;

use super::{IlpModel, MedianSolution, SolveStatus, SolverError, EPS};

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub time_limit: Option<Duration>,
    pub threads: usize,
    /// Per-component cap on explored nodes, a stand-in for a memory cap.
    pub node_limit: u64,
    /// Nodes with at most this many allowed adjacencies also get the
    /// matching bound.
    pub matching_bound_edges: usize,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self { time_limit: None, threads: 1, node_limit: 50_000_000, matching_bound_edges: 4096 }
    }
}

struct LocalAdjacency {
    global: usize,
    u: usize,
    v: usize,
    u_slot: usize,
    v_slot: usize,
    weight: f64,
    self_pair: bool,
}

struct Component {
    genes: Vec<usize>,
    adjacencies: Vec<LocalAdjacency>,
    conflicts: Vec<Vec<usize>>,
    /// Non-self adjacencies per local gene and slot (head/telomere, tail),
    /// heaviest first.
    incident: Vec<[Vec<usize>; 2]>,
    self_pairs: Vec<Vec<usize>>,
    telomere: Vec<bool>,
    /// Column of each local gene in each genome, and column counts.
    columns: [Vec<usize>; 3],
    column_count: [usize; 3],
}

struct Outcome {
    adjacencies: Vec<usize>,
    bound: f64,
    complete: bool,
    nodes: u64,
}

fn slot(end: End) -> usize {
    match end {
        End::Head | End::Telomere => 0,
        End::Tail => 1,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

fn components(set: &CandidateSet) -> Vec<Component> {
    let n = set.genes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for (_, _, users) in set.conflict_index().contested() {
        for w in users.windows(2) {
            union(&mut parent, w[0], w[1]);
        }
    }
    for adj in &set.adjacencies {
        union(&mut parent, adj.first.gene, adj.second.gene);
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for m in 0..n {
        let root = find(&mut parent, m);
        groups.entry(root).or_default().push(m);
    }
    let mut adjacency_groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (k, adj) in set.adjacencies.iter().enumerate() {
        adjacency_groups.entry(find(&mut parent, adj.first.gene)).or_default().push(k);
    }
    let mut out = Vec::new();
    for (root, genes) in groups {
        let Some(adjacency_ids) = adjacency_groups.remove(&root) else { continue };
        let local: std::collections::HashMap<usize, usize> = genes.iter().enumerate().map(|(l, &m)| (m, l)).collect();
        let adjacencies: Vec<LocalAdjacency> = adjacency_ids
            .iter()
            .map(|&k| {
                let adj = &set.adjacencies[k];
                LocalAdjacency {
                    global: k,
                    u: local[&adj.first.gene],
                    v: local[&adj.second.gene],
                    u_slot: slot(adj.first.end),
                    v_slot: slot(adj.second.end),
                    weight: adj.weight(),
                    self_pair: adj.is_self_pairing(),
                }
            })
            .collect();
        let mut incident = vec![[Vec::new(), Vec::new()]; genes.len()];
        let mut self_pairs = vec![Vec::new(); genes.len()];
        for (j, la) in adjacencies.iter().enumerate() {
            if la.self_pair {
                self_pairs[la.u].push(j);
            } else {
                incident[la.u][la.u_slot].push(j);
                incident[la.v][la.v_slot].push(j);
            }
        }
        let by_weight = |list: &mut Vec<usize>| {
            list.sort_by(|&a, &b| adjacencies[b].weight.total_cmp(&adjacencies[a].weight).then(a.cmp(&b)))
        };
        for slots in incident.iter_mut() {
            slots.iter_mut().for_each(by_weight);
        }
        self_pairs.iter_mut().for_each(by_weight);
        let conflicts = genes
            .iter()
            .map(|&m| set.conflicts_of(m).into_iter().filter_map(|o| local.get(&o).copied()).collect())
            .collect();
        let mut columns: [Vec<usize>; 3] = Default::default();
        let mut column_count = [0; 3];
        for x in 0..3 {
            let mut ids = std::collections::HashMap::new();
            for &m in &genes {
                let next = ids.len();
                let id = *ids.entry(set.genes[m].members[x]).or_insert(next);
                columns[x].push(id);
            }
            column_count[x] = ids.len();
        }
        out.push(Component {
            telomere: genes.iter().map(|&m| set.genes[m].telomere).collect(),
            genes,
            adjacencies,
            conflicts,
            incident,
            self_pairs,
            columns,
            column_count,
        });
    }
    out
}

impl Component {
    fn adjacency_alive(&self, j: usize, alive: &[bool]) -> bool {
        let a = &self.adjacencies[j];
        alive[a.u] && alive[a.v]
    }

    fn best(&self, list: &[usize], alive: &[bool]) -> f64 {
        list.iter().find(|&&j| self.adjacency_alive(j, alive)).map_or(0.0, |&j| self.adjacencies[j].weight)
    }

    /// Upper bound on what gene `m` can earn.
    fn earning(&self, m: usize, alive: &[bool]) -> f64 {
        let head = self.best(&self.incident[m][0], alive);
        if self.telomere[m] {
            return head / 2.0;
        }
        let tail = self.best(&self.incident[m][1], alive);
        let own = self.best(&self.self_pairs[m], alive);
        ((head + tail) / 2.0).max(own)
    }

    fn column_bound(&self, earnings: &[f64], alive: &[bool]) -> f64 {
        (0..3)
            .map(|x| {
                let mut best = vec![0.0f64; self.column_count[x]];
                for m in (0..self.genes.len()).filter(|&m| alive[m]) {
                    let c = self.columns[x][m];
                    best[c] = best[c].max(earnings[m]);
                }
                best.iter().sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum-weight matching over the allowed adjacencies; returns local
    /// adjacency ids and total weight.
    fn matching(&self, alive: &[bool], allowed: &dyn Fn(usize) -> bool) -> (Vec<usize>, f64) {
        let ids: Vec<usize> = (0..self.adjacencies.len())
            .filter(|&j| {
                self.adjacency_alive(j, alive) && allowed(self.adjacencies[j].u) && allowed(self.adjacencies[j].v)
            })
            .collect();
        let vertex = |m: usize, end_slot: usize| 2 * m + end_slot;
        let edges: Vec<(usize, usize, f64)> = ids
            .iter()
            .map(|&j| {
                let a = &self.adjacencies[j];
                (vertex(a.u, a.u_slot), vertex(a.v, a.v_slot), a.weight)
            })
            .collect();
        let m = max_weight_matching(2 * self.genes.len(), &edges);
        (m.edges.iter().map(|&e| ids[e]).collect(), m.weight)
    }

    fn conflict_free(&self, chosen: &[usize]) -> bool {
        let mut mark = vec![false; self.genes.len()];
        for &m in chosen {
            mark[m] = true;
        }
        chosen.iter().all(|&m| self.conflicts[m].iter().all(|&o| !mark[o]))
    }

    fn touched(&self, matching: &[usize]) -> Vec<usize> {
        let mut genes: Vec<usize> =
            matching.iter().flat_map(|&j| [self.adjacencies[j].u, self.adjacencies[j].v]).collect();
        genes.sort_unstable();
        genes.dedup();
        genes
    }

    /// Greedy conflict-free gene set by decreasing earning, then the best
    /// adjacencies on it.
    fn heuristic(&self, earnings: &[f64], alive: &[bool]) -> (Vec<usize>, f64) {
        let mut order: Vec<usize> = (0..self.genes.len()).filter(|&m| alive[m] && earnings[m] > 0.0).collect();
        order.sort_by(|&a, &b| earnings[b].total_cmp(&earnings[a]).then(a.cmp(&b)));
        let mut picked = vec![false; self.genes.len()];
        let mut blocked = vec![false; self.genes.len()];
        for m in order {
            if !blocked[m] {
                picked[m] = true;
                for &o in &self.conflicts[m] {
                    blocked[o] = true;
                }
            }
        }
        self.matching(alive, &|m| picked[m])
    }

    fn solve(&self, options: &BnbOptions, deadline: Option<Instant>) -> Result<Outcome, SolverError> {
        let n = self.genes.len();
        let mut incumbent: (Vec<usize>, f64) = (Vec::new(), 0.0);
        let mut stack: Vec<(Vec<bool>, f64)> = vec![(vec![true; n], f64::INFINITY)];
        let mut nodes = 0u64;
        let mut open_bound: Option<f64> = None;
        let mut root_bound = 0.0;

        while let Some((alive, parent_bound)) = stack.pop() {
            nodes += 1;
            if nodes > options.node_limit {
                return Err(SolverError::NodeLimit(options.node_limit));
            }
            if nodes > 1 && deadline.is_some_and(|d| Instant::now() >= d) {
                let rest = stack.iter().map(|s| s.1).fold(parent_bound, f64::max);
                open_bound = Some(rest);
                break;
            }
            let earnings: Vec<f64> = (0..n).map(|m| if alive[m] { self.earning(m, &alive) } else { 0.0 }).collect();
            let mut bound = self.column_bound(&earnings, &alive).min(parent_bound);
            if nodes == 1 {
                root_bound = bound;
            }
            if bound <= incumbent.1 + EPS {
                continue;
            }
            let mut branch: Option<(usize, f64, usize)> = None;
            for m in (0..n).filter(|&m| alive[m]) {
                let live = self.conflicts[m].iter().filter(|&&o| alive[o]).count();
                if live == 0 {
                    continue;
                }
                let better = match branch {
                    None => true,
                    Some((_, e, c)) => earnings[m] > e + EPS || ((earnings[m] - e).abs() <= EPS && live < c),
                };
                if better {
                    branch = Some((m, earnings[m], live));
                }
            }
            let Some((pivot, _, _)) = branch else {
                let (matching, value) = self.matching(&alive, &|_| true);
                if value > incumbent.1 + EPS {
                    incumbent = (matching, value);
                }
                continue;
            };
            let live_edges = (0..self.adjacencies.len()).filter(|&j| self.adjacency_alive(j, &alive)).count();
            if live_edges <= options.matching_bound_edges {
                let (matching, value) = self.matching(&alive, &|_| true);
                bound = bound.min(value);
                if nodes == 1 {
                    root_bound = bound;
                }
                if bound <= incumbent.1 + EPS {
                    continue;
                }
                if self.conflict_free(&self.touched(&matching)) {
                    incumbent = (matching, value);
                    continue;
                }
            }
            let (matching, value) = self.heuristic(&earnings, &alive);
            if value > incumbent.1 + EPS {
                incumbent = (matching, value);
            }
            if bound <= incumbent.1 + EPS {
                continue;
            }
            let mut exclude = alive.clone();
            exclude[pivot] = false;
            let mut include = alive;
            for &o in &self.conflicts[pivot] {
                include[o] = false;
            }
            stack.push((exclude, bound));
            stack.push((include, bound));
        }
        let mut adjacencies: Vec<usize> = incumbent.0.iter().map(|&j| self.adjacencies[j].global).collect();
        adjacencies.sort_unstable();
        let complete = open_bound.is_none();
        let bound = match open_bound {
            Some(b) => b.min(root_bound).max(incumbent.1),
            None => incumbent.1,
        };
        Ok(Outcome { adjacencies, bound, complete, nodes })
    }
}

/// Solves the model exactly, or up to the time limit.
pub fn solve_branch_and_bound(model: &IlpModel, options: &BnbOptions) -> Result<MedianSolution, SolverError> {
    let set = &model.candidates;
    if set.genes.is_empty() {
        return Ok(MedianSolution::empty(SolveStatus::InfeasibleEmpty));
    }
    let deadline = options.time_limit.map(|t| Instant::now() + t);
    let parts = components(set);
    let run = || parts.par_iter().map(|c| c.solve(options, deadline)).collect::<Result<Vec<_>, _>>();
    let outcomes = match rayon::ThreadPoolBuilder::new().num_threads(options.threads).build() {
        Ok(pool) => pool.install(run)?,
        Err(_) => run()?,
    };
    let adjacencies: Vec<usize> = outcomes.iter().flat_map(|o| o.adjacencies.iter().copied()).collect();
    let mut solution = MedianSolution::from_adjacencies(set, adjacencies, &[]);
    solution.bound = outcomes.iter().map(|o| o.bound).sum::<f64>().max(solution.objective);
    solution.nodes = outcomes.iter().map(|o| o.nodes).sum();
    solution.status = if outcomes.iter().all(|o| o.complete) { SolveStatus::Optimal } else { SolveStatus::Feasible };
    if solution.status == SolveStatus::Optimal {
        solution.bound = solution.objective;
    }
    Ok(solution)
}

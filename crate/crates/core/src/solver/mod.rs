//! Exact solving of the median program: model construction and LP export,
//! branch-and-bound, a brute-force oracle, CAR assembly and independent
//! solution checks.

mod bnb;
mod cars;
mod ilp;
pub mod lp_format;
mod oracle;

pub use bnb::{solve_branch_and_bound, BnbOptions};
pub use cars::{assemble_cars, Car, CarEntry};
pub use ilp::{build_ilp, escape_name, size_bound, IlpModel, Row, RowKind};
pub use oracle::{brute_force_median, OracleOptions};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{CandidateEnd, CandidateSet};
use crate::genome::ExtremityRef;
use crate::instance::Instance;

/// Absolute tolerance for comparing objective values.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("search exceeded the node limit of {0}")]
    NodeLimit(u64),
    #[error("{count} candidate genes exceed the oracle cap of {cap}")]
    OracleCap { count: usize, cap: usize },
    #[error("forced adjacencies are mutually incompatible")]
    ForcedInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Search stopped early; `bound` holds a valid upper bound.
    Feasible,
    /// There were no candidate genes at all.
    InfeasibleEmpty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianSolution {
    /// Chosen candidate genes, ascending.
    pub genes: Vec<usize>,
    /// Chosen conserved candidate adjacencies, ascending.
    pub adjacencies: Vec<usize>,
    pub objective: f64,
    pub bound: f64,
    pub status: SolveStatus,
    pub nodes: u64,
}

impl MedianSolution {
    pub fn empty(status: SolveStatus) -> Self {
        Self { genes: Vec::new(), adjacencies: Vec::new(), objective: 0.0, bound: 0.0, status, nodes: 0 }
    }

    /// Builds a solution from adjacency choices; the genes are exactly those
    /// touched by an adjacency plus `extra_genes`.
    pub fn from_adjacencies(set: &CandidateSet, adjacencies: Vec<usize>, extra_genes: &[usize]) -> Self {
        let mut adjacencies = adjacencies;
        adjacencies.sort_unstable();
        adjacencies.dedup();
        let mut genes: Vec<usize> = adjacencies
            .iter()
            .flat_map(|&k| [set.adjacencies[k].first.gene, set.adjacencies[k].second.gene])
            .chain(extra_genes.iter().copied())
            .collect();
        genes.sort_unstable();
        genes.dedup();
        let objective = adjacencies.iter().map(|&k| set.adjacencies[k].weight()).sum();
        Self { genes, adjacencies, objective, bound: objective, status: SolveStatus::Optimal, nodes: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Constraint family C.01: an extant gene used twice.
    GeneReused {
        genome: usize,
        gene: usize,
    },
    /// C.02: an adjacency whose candidate gene was not chosen.
    MissingEndpoint {
        adjacency: usize,
        gene: usize,
    },
    /// C.03: a candidate extremity in two adjacencies.
    ExtremityReused(CandidateEnd),
    UnknownIndex,
}

/// Re-evaluates all constraints of the program directly from the raw data.
pub fn check_solution(set: &CandidateSet, solution: &MedianSolution) -> Result<(), Violation> {
    if solution.genes.iter().any(|&m| m >= set.genes.len())
        || solution.adjacencies.iter().any(|&k| k >= set.adjacencies.len())
    {
        return Err(Violation::UnknownIndex);
    }
    let mut used: [HashSet<usize>; 3] = Default::default();
    for &m in &solution.genes {
        for (x, used) in used.iter_mut().enumerate() {
            let gene = set.genes[m].members[x];
            if !used.insert(gene) {
                return Err(Violation::GeneReused { genome: x, gene });
            }
        }
    }
    let chosen: HashSet<usize> = solution.genes.iter().copied().collect();
    let mut ends = HashSet::new();
    for &k in &solution.adjacencies {
        let adj = &set.adjacencies[k];
        for e in [adj.first, adj.second] {
            if !chosen.contains(&e.gene) {
                return Err(Violation::MissingEndpoint { adjacency: k, gene: e.gene });
            }
            if !ends.insert(e) {
                return Err(Violation::ExtremityReused(e));
            }
        }
    }
    Ok(())
}

/// Objective recomputed from similarities and extant adjacencies: every
/// chosen adjacency contributes the sixth root of the product of the six
/// pairwise similarities of its two triples, once per genome in which its
/// projection is an extant adjacency.
pub fn recompute_objective(instance: &Instance, set: &CandidateSet, adjacencies: &[usize]) -> f64 {
    let mut total = 0.0;
    for &k in adjacencies {
        let adj = &set.adjacencies[k];
        let [p, q] = [set.genes[adj.first.gene].members, set.genes[adj.second.gene].members];
        let mut product = 1.0;
        for t in [p, q] {
            product *= instance.sigma_at(0, t[0], 1, t[1]);
            product *= instance.sigma_at(0, t[0], 2, t[2]);
            product *= instance.sigma_at(1, t[1], 2, t[2]);
        }
        let score = product.powf(1.0 / 6.0);
        for (x, genome) in instance.genomes.iter().enumerate() {
            let a = ExtremityRef::new(p[x], adj.first.end);
            let b = ExtremityRef::new(q[x], adj.second.end);
            if genome.adjacent(a, b) {
                total += score;
            }
        }
    }
    total
}

/// `|a - b| <= rel * max(|a|, |b|)`, with differences below [`EPS`]
/// always accepted so that two zeros compare equal.
pub fn close_relative(a: f64, b: f64, rel: f64) -> bool {
    let diff = (a - b).abs();
    diff <= EPS || diff <= rel * a.abs().max(b.abs())
}

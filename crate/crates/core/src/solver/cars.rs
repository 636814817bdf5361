//! Contiguous ancestral regions: the paths and cycles formed by the chosen
//! adjacencies. No adjacency is added to close or join them.

use std::collections::HashMap;

use serde::Serialize;

use crate::candidates::{CandidateEnd, CandidateSet};
use crate::genome::{End, Orientation};

use super::MedianSolution;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CarEntry {
    pub gene: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Car {
    pub circular: bool,
    pub genes: Vec<CarEntry>,
}

/// Walks from `start` (entered through `entry`) along chosen adjacencies
/// until an unlinked extremity, a telomere, or the start gene again.
fn walk(
    set: &CandidateSet,
    links: &HashMap<CandidateEnd, CandidateEnd>,
    visited: &mut HashMap<usize, bool>,
    start: usize,
    entry: End,
) -> Vec<CarEntry> {
    let mut out = Vec::new();
    let (mut gene, mut entry) = (start, entry);
    loop {
        visited.insert(gene, true);
        let orientation = if entry == End::Head { Orientation::Reverse } else { Orientation::Forward };
        out.push(CarEntry { gene, orientation });
        let exit = if set.genes[gene].telomere { End::Telomere } else { entry.opposite() };
        if set.genes[gene].telomere && out.len() > 1 {
            break;
        }
        let Some(next) = links.get(&CandidateEnd::new(gene, exit)) else { break };
        if next.gene == start || visited.get(&next.gene).copied().unwrap_or(false) {
            break;
        }
        gene = next.gene;
        entry = next.end;
    }
    out
}

pub fn assemble_cars(set: &CandidateSet, solution: &MedianSolution) -> Vec<Car> {
    let mut links = HashMap::new();
    for &k in &solution.adjacencies {
        let adj = &set.adjacencies[k];
        links.insert(adj.first, adj.second);
        links.insert(adj.second, adj.first);
    }
    let mut visited: HashMap<usize, bool> = solution.genes.iter().map(|&m| (m, false)).collect();
    let mut cars = Vec::new();
    for &m in &solution.genes {
        if visited[&m] {
            continue;
        }
        let gene = &set.genes[m];
        let entry = if gene.telomere {
            End::Telomere
        } else if !links.contains_key(&CandidateEnd::new(m, End::Tail)) {
            End::Tail
        } else if !links.contains_key(&CandidateEnd::new(m, End::Head)) {
            End::Head
        } else {
            continue;
        };
        let genes = walk(set, &links, &mut visited, m, entry);
        cars.push(Car { circular: false, genes });
    }
    for &m in &solution.genes {
        if visited[&m] {
            continue;
        }
        let genes = walk(set, &links, &mut visited, m, End::Tail);
        cars.push(Car { circular: true, genes });
    }
    cars
}

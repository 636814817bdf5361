//! Conserved segments and safe local-optimum extraction.
//!
//! A run is a chain of candidate genes joined by adjacencies conserved in
//! all three genomes. For each run `S`, a small matching graph over the
//! extremities of `S` is built in which every gene also carries a conflict
//! edge weighted by the best total potential its external conflicts could
//! earn. If the maximum-weight matching of that graph is exactly the run's
//! internal links, those links belong to some optimal median and can be
//! fixed, which deletes the external conflicts and shrinks the instance.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::candidates::{CandidateEnd, CandidateSet, Restricted};
use crate::genome::{End, Orientation, Shape};
use crate::instance::Instance;
use crate::matching::{EdgeKind, MatchGraph};
use crate::solver::{MedianSolution, SolveStatus};

/// Default cap on the number of external conflicts of one segment gene.
pub const DEFAULT_CONFLICT_CAP: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("candidate {gene} has {count} external conflicts, above the cap of {cap}; skip this segment")]
    TooManyConflicts { gene: usize, count: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    IcFree,
    Framed,
    Run,
}

/// Candidate genes in segment order plus the links joining consecutive
/// genes (and, for a whole circular chromosome, the closing link).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub genes: Vec<usize>,
    pub links: Vec<usize>,
    pub kind: SegmentKind,
}

/// Which candidate genes and adjacencies are still in play.
#[derive(Debug, Clone)]
pub struct SegmentState<'a> {
    set: &'a CandidateSet,
    alive: Vec<bool>,
    consumed: HashSet<CandidateEnd>,
    processed: Vec<bool>,
}

impl<'a> SegmentState<'a> {
    pub fn new(set: &'a CandidateSet) -> Self {
        Self {
            set,
            alive: vec![true; set.genes.len()],
            consumed: HashSet::new(),
            processed: vec![false; set.genes.len()],
        }
    }

    pub fn is_alive(&self, m: usize) -> bool {
        self.alive[m]
    }

    pub fn adjacency_live(&self, k: usize) -> bool {
        let a = &self.set.adjacencies[k];
        self.alive[a.first.gene]
            && self.alive[a.second.gene]
            && !self.consumed.contains(&a.first)
            && !self.consumed.contains(&a.second)
    }

    fn live_incident(&self, m: usize, end: End) -> impl Iterator<Item = usize> + '_ {
        self.set.incident(m, end).iter().copied().filter(move |&k| self.adjacency_live(k))
    }

    /// Live conflicts of `m`, sorted.
    pub fn conflicts_of(&self, m: usize) -> Vec<usize> {
        self.set.conflicts_of(m).into_iter().filter(|&o| self.alive[o]).collect()
    }

    /// Best total weight `m` could earn through its two extremities.
    pub fn potential(&self, m: usize) -> f64 {
        if !self.alive[m] {
            return 0.0;
        }
        let set = self.set;
        let mut best_self = 0.0f64;
        let mut best = [0.0f64; 2];
        for (slot, &end) in set.genes[m].ends().iter().enumerate() {
            for k in self.live_incident(m, end) {
                let adj = &set.adjacencies[k];
                if adj.is_self_pairing() {
                    best_self = best_self.max(adj.weight());
                } else {
                    best[slot] = best[slot].max(adj.weight());
                }
            }
        }
        (best[0] + best[1]).max(best_self)
    }

    /// Maximum of the summed potentials over conflict-free subsets of the
    /// live conflicts of `m`.
    pub fn conflict_weight(&self, m: usize, cap: usize) -> Result<f64, SegmentError> {
        let conflicts = self.conflicts_of(m);
        if conflicts.len() > cap {
            return Err(SegmentError::TooManyConflicts { gene: m, count: conflicts.len(), cap });
        }
        let mut items: Vec<(usize, f64)> =
            conflicts.into_iter().map(|o| (o, self.potential(o))).filter(|&(_, p)| p > 0.0).collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(best_independent_sum(self.set, &items))
    }

    /// Runs over the unprocessed live genes, scanning the first genome left
    /// to right.
    pub fn runs(&self, instance: &Instance) -> Vec<Segment> {
        let set = self.set;
        let g = &instance.genomes[0];
        let mut order: Vec<usize> =
            (0..set.genes.len()).filter(|&m| self.alive[m] && !self.processed[m] && !set.genes[m].telomere).collect();
        order.sort_by_key(|&m| {
            let gene = g.gene(set.genes[m].members[0]);
            (gene.chromosome, gene.position, m)
        });
        let mut used = self.processed.clone();
        let mut out = Vec::new();
        for &start in &order {
            if used[start] {
                continue;
            }
            used[start] = true;
            let (entry, mut exit) = g.gene(set.genes[start].members[0]).orientation.ends();
            let mut genes = vec![start];
            let mut links = Vec::new();
            let mut current = start;
            loop {
                let next = self
                    .strong_links(current, exit)
                    .filter(|&(_, other)| {
                        used.get(other.gene) == Some(&false)
                            && self.alive[other.gene]
                            && !set.genes[other.gene].telomere
                            && genes.iter().all(|&s| !set.conflicting(s, other.gene))
                    })
                    .min_by_key(|&(k, other)| (other.gene, k));
                let Some((k, other)) = next else { break };
                used[other.gene] = true;
                genes.push(other.gene);
                links.push(k);
                current = other.gene;
                exit = other.end.opposite();
            }
            if genes.len() < 2 {
                continue;
            }
            let closing = self
                .strong_links(current, exit)
                .filter(|&(_, other)| other == CandidateEnd::new(start, entry))
                .map(|(k, _)| k)
                .min();
            links.extend(closing);
            out.push(Segment { genes, links, kind: SegmentKind::Run });
        }
        out
    }

    /// Live adjacencies at `(m, end)` conserved in all three genomes, with
    /// the opposite extremity.
    fn strong_links(&self, m: usize, end: End) -> impl Iterator<Item = (usize, CandidateEnd)> + '_ {
        let here = CandidateEnd::new(m, end);
        self.live_incident(m, end).filter_map(move |k| {
            let adj = &self.set.adjacencies[k];
            if adj.conserved.count() < 3 || adj.is_self_pairing() {
                return None;
            }
            Some((k, if adj.first == here { adj.second } else { adj.first }))
        })
    }

    /// Matching graph over the segment's extremities: live adjacencies among
    /// its genes plus one conflict edge per gene.
    pub fn gamma_prime(&self, segment: &Segment, cap: usize) -> Result<MatchGraph, SegmentError> {
        let set = self.set;
        let inside: HashSet<usize> = segment.genes.iter().copied().collect();
        let mut graph = MatchGraph::default();
        let mut adjacencies: Vec<usize> = segment
            .genes
            .iter()
            .flat_map(|&m| set.genes[m].ends().iter().flat_map(move |&e| self.live_incident(m, e)))
            .filter(|&k| {
                inside.contains(&set.adjacencies[k].first.gene) && inside.contains(&set.adjacencies[k].second.gene)
            })
            .collect();
        adjacencies.sort_unstable();
        adjacencies.dedup();
        for &m in &segment.genes {
            let head = CandidateEnd::new(m, End::Head);
            let tail = CandidateEnd::new(m, End::Tail);
            graph.add_edge(head, tail, self.conflict_weight(m, cap)?, EdgeKind::Conflict(m));
        }
        for k in adjacencies {
            let adj = &set.adjacencies[k];
            graph.add_edge(adj.first, adj.second, adj.weight(), EdgeKind::Adjacency(k));
        }
        Ok(graph)
    }

    /// True iff the maximum-weight matching of the segment's graph is
    /// exactly its links.
    pub fn accepts(&self, segment: &Segment, cap: usize) -> Result<bool, SegmentError> {
        let graph = self.gamma_prime(segment, cap)?;
        let matching = graph.mwm();
        let mut chosen = Vec::with_capacity(matching.edges.len());
        for &e in &matching.edges {
            match graph.edges[e].kind {
                EdgeKind::Adjacency(k) => chosen.push(k),
                EdgeKind::Conflict(_) => return Ok(false),
            }
        }
        chosen.sort_unstable();
        let mut links = segment.links.clone();
        links.sort_unstable();
        Ok(chosen == links)
    }

    /// Fixes the segment's links: consumes their extremities and deletes
    /// every live candidate conflicting with a segment gene.
    pub fn commit(&mut self, segment: &Segment) {
        for &k in &segment.links {
            let adj = &self.set.adjacencies[k];
            self.consumed.insert(adj.first);
            self.consumed.insert(adj.second);
        }
        for &m in &segment.genes {
            for o in self.set.conflicts_of(m) {
                self.alive[o] = false;
            }
            self.processed[m] = true;
        }
    }

    /// Remaining instance: live genes and live adjacencies.
    pub fn reduced(&self) -> Restricted {
        let keep_adj: Vec<bool> = (0..self.set.adjacencies.len()).map(|k| self.adjacency_live(k)).collect();
        self.set.restrict(&self.alive, &keep_adj)
    }
}

/// Exact maximum-weight independent subset of `items` under the conflict
/// relation; `items` sorted by decreasing value.
fn best_independent_sum(set: &CandidateSet, items: &[(usize, f64)]) -> f64 {
    fn go(
        set: &CandidateSet,
        items: &[(usize, f64)],
        suffix: &[f64],
        at: usize,
        chosen: &mut Vec<usize>,
        value: f64,
        best: &mut f64,
    ) {
        if value > *best {
            *best = value;
        }
        if at == items.len() || value + suffix[at] <= *best {
            return;
        }
        let (m, w) = items[at];
        if chosen.iter().all(|&c| !set.conflicting(c, m)) {
            chosen.push(m);
            go(set, items, suffix, at + 1, chosen, value + w, best);
            chosen.pop();
        }
        go(set, items, suffix, at + 1, chosen, value, best);
    }
    let mut suffix = vec![0.0; items.len() + 1];
    for k in (0..items.len()).rev() {
        suffix[k] = suffix[k + 1] + items[k].1;
    }
    let mut best = 0.0;
    go(set, items, &suffix, 0, &mut Vec::new(), 0.0, &mut best);
    best
}

/// Potential of candidate `m` in the full candidate set.
pub fn potential(set: &CandidateSet, m: usize) -> f64 {
    SegmentState::new(set).potential(m)
}

/// Maximal runs of the full candidate set, leftmost in the first genome first.
pub fn detect_runs(set: &CandidateSet, instance: &Instance) -> Vec<Segment> {
    SegmentState::new(set).runs(instance)
}

/// Conflict-extended matching graph of a segment in the full candidate set.
pub fn build_gamma_prime(set: &CandidateSet, segment: &Segment, cap: usize) -> Result<MatchGraph, SegmentError> {
    SegmentState::new(set).gamma_prime(segment, cap)
}

/// Reads the projection of `genes` onto genome `x` as a contiguous block.
/// Returns candidate genes with their orientation in reading order, and
/// whether the block is a whole circular chromosome.
fn read_block(
    set: &CandidateSet,
    instance: &Instance,
    x: usize,
    genes: &[usize],
) -> Option<(Vec<(usize, Orientation)>, bool)> {
    let genome = &instance.genomes[x];
    let chromosome = genome.gene(set.genes[genes[0]].members[x]).chromosome;
    let members = genome.chromosome_members(chromosome);
    let owner = |extant: usize| genes.iter().copied().find(|&m| set.genes[m].members[x] == extant);
    let mut positions: Vec<usize> = Vec::with_capacity(genes.len());
    for &m in genes {
        let gene = genome.gene(set.genes[m].members[x]);
        if gene.chromosome != chromosome {
            return None;
        }
        positions.push(gene.position);
    }
    positions.sort_unstable();
    let len = members.len();
    let circular = genome.chromosomes()[chromosome].shape == Shape::Circular;
    let start = if positions.len() == len {
        positions[0]
    } else if circular {
        let gaps: Vec<usize> = (0..positions.len())
            .filter(|&k| (positions[(k + 1) % positions.len()] + len - positions[k]) % len != 1)
            .collect();
        if gaps.len() != 1 {
            return None;
        }
        positions[(gaps[0] + 1) % positions.len()]
    } else {
        if positions[positions.len() - 1] - positions[0] + 1 != positions.len() {
            return None;
        }
        positions[0]
    };
    let block = (0..positions.len())
        .map(|k| {
            let extant = members[(start + k) % len];
            (owner(extant).expect("position belongs to the segment"), genome.gene(extant).orientation)
        })
        .collect();
    Some((block, circular && positions.len() == len))
}

fn reversed(block: &[(usize, Orientation)]) -> Vec<(usize, Orientation)> {
    block.iter().rev().map(|&(m, o)| (m, o.flip())).collect()
}

/// Rotates a cyclic block to begin at candidate `first`.
fn rotated(block: &[(usize, Orientation)], first: usize) -> Vec<(usize, Orientation)> {
    let at = block.iter().position(|&(m, _)| m == first).unwrap_or(0);
    block[at..].iter().chain(&block[..at]).copied().collect()
}

/// Classifies a set of candidate genes: `None` when it has an internal
/// conflict, contains a telomere, or is not contiguous in some genome;
/// otherwise the most specific of run, framed and IC-free.
pub fn classify_segment(set: &CandidateSet, instance: &Instance, genes: &[usize]) -> Option<SegmentKind> {
    if genes.is_empty() || genes.iter().any(|&m| set.genes[m].telomere) || !set.is_conflict_free(genes) {
        return None;
    }
    let mut distinct = genes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != genes.len() {
        return None;
    }
    let mut blocks = Vec::with_capacity(3);
    for x in 0..3 {
        blocks.push(read_block(set, instance, x, genes)?);
    }
    let (reference, cyclic) = &blocks[0];
    let first = reference[0].0;
    let order = |b: &[(usize, Orientation)]| b.iter().map(|&(m, _)| m).collect::<Vec<_>>();
    let reference_order = order(reference);
    let aligned: Vec<Option<Vec<(usize, Orientation)>>> = blocks
        .iter()
        .map(|(block, _)| {
            let direct = if *cyclic { rotated(block, first) } else { block.clone() };
            if order(&direct) == reference_order {
                return Some(direct);
            }
            let back = reversed(block);
            let back = if *cyclic { rotated(&back, first) } else { back };
            (order(&back) == reference_order).then_some(back)
        })
        .collect();
    if aligned.iter().all(Option::is_some) {
        return Some(SegmentKind::Run);
    }
    if !*cyclic {
        let last = reference[reference.len() - 1];
        let framed = blocks.iter().all(|(block, _)| {
            let oriented = if block[0].0 == first { block.clone() } else { reversed(block) };
            oriented[0] == reference[0] && oriented[oriented.len() - 1] == last
        });
        if framed {
            return Some(SegmentKind::Framed);
        }
    }
    Some(SegmentKind::IcFree)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcfSegOptions {
    pub conflict_cap: usize,
}

impl Default for IcfSegOptions {
    fn default() -> Self {
        Self { conflict_cap: DEFAULT_CONFLICT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptedSegment {
    pub genes: Vec<usize>,
    pub adjacencies: Vec<usize>,
    pub weight: f64,
}

/// Outcome of [`icf_seg`]: accepted segments in acceptance order and the
/// remaining instance, whose indices map back through `reduced`.
#[derive(Debug, Clone)]
pub struct IcfSegResult {
    pub accepted: Vec<AcceptedSegment>,
    pub reduced: Restricted,
    /// Original indices of deleted candidate genes.
    pub deleted: Vec<usize>,
    pub rejected: usize,
    pub skipped: usize,
}

impl IcfSegResult {
    pub fn accepted_weight(&self) -> f64 {
        self.accepted.iter().map(|s| s.weight).sum()
    }

    pub fn accepted_adjacencies(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.accepted.iter().flat_map(|s| s.adjacencies.iter().copied()).collect();
        out.sort_unstable();
        out
    }

    /// Lifts a solution of the reduced instance back to the full candidate
    /// set and adds the accepted adjacencies.
    pub fn merge(&self, set: &CandidateSet, reduced: &MedianSolution) -> MedianSolution {
        let mut adjacencies = self.accepted_adjacencies();
        adjacencies.extend(reduced.adjacencies.iter().map(|&k| self.reduced.adjacency_origin[k]));
        let genes: Vec<usize> = reduced.genes.iter().map(|&m| self.reduced.gene_origin[m]).collect();
        let mut out = MedianSolution::from_adjacencies(set, adjacencies, &genes);
        let fixed = self.accepted_weight();
        out.bound = fixed + reduced.bound.max(reduced.objective);
        out.nodes = reduced.nodes;
        out.status = match reduced.status {
            SolveStatus::InfeasibleEmpty if out.genes.is_empty() => SolveStatus::InfeasibleEmpty,
            SolveStatus::InfeasibleEmpty => SolveStatus::Optimal,
            other => other,
        };
        out
    }
}

/// Repeatedly evaluates the unobserved runs of the current instance and
/// fixes the leftmost accepted one, until no run is accepted.
pub fn icf_seg(set: &CandidateSet, instance: &Instance, options: &IcfSegOptions) -> IcfSegResult {
    let mut state = SegmentState::new(set);
    let mut observed: HashSet<Vec<usize>> = HashSet::new();
    let mut accepted = Vec::new();
    let mut rejected = 0;
    let mut skipped = 0;
    loop {
        let runs: Vec<Segment> = state.runs(instance).into_iter().filter(|s| !observed.contains(&s.genes)).collect();
        if runs.is_empty() {
            break;
        }
        let verdicts: Vec<Result<bool, SegmentError>> =
            runs.par_iter().map(|s| state.accepts(s, options.conflict_cap)).collect();
        let mut progress = false;
        for (segment, verdict) in runs.iter().zip(verdicts) {
            observed.insert(segment.genes.clone());
            match verdict {
                Ok(true) => {
                    log::debug!("accepted run of {} genes", segment.genes.len());
                    let mut adjacencies = segment.links.clone();
                    adjacencies.sort_unstable();
                    let weight = adjacencies.iter().map(|&k| set.adjacencies[k].weight()).sum();
                    accepted.push(AcceptedSegment { genes: segment.genes.clone(), adjacencies, weight });
                    state.commit(segment);
                    progress = true;
                    break;
                }
                Ok(false) => rejected += 1,
                Err(e) => {
                    log::debug!("{e}");
                    skipped += 1;
                }
            }
        }
        if !progress {
            break;
        }
    }
    let deleted = (0..set.genes.len()).filter(|&m| !state.alive[m]).collect();
    IcfSegResult { accepted, reduced: state.reduced(), deleted, rejected, skipped }
}

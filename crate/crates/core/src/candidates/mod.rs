//! Candidate median genes (tripartite 3-cliques) and conserved candidate
//! adjacencies, with their scores and the conflict relation.

mod preprocess;
mod tsv;

pub use preprocess::{discard_nonclique, RemovalReport};
pub use tsv::write_candidates_tsv;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::genome::{End, ExtremityRef, Genome};
use crate::instance::Instance;

/// Adjacency score: geometric mean of two similarities.
pub fn adjacency_score(sigma_a: f64, sigma_b: f64) -> f64 {
    (sigma_a * sigma_b).sqrt()
}

/// Product of the three pairwise similarities of a triple.
pub fn triple_score(sigma_gh: f64, sigma_gi: f64, sigma_hi: f64) -> f64 {
    sigma_gh * sigma_gi * sigma_hi
}

/// Per-genome weight of a median adjacency between two candidate genes:
/// `(triple(m1) * triple(m2))^(1/6)`.
pub fn median_adjacency_weight(triple_a: f64, triple_b: f64) -> f64 {
    (triple_a * triple_b).powf(1.0 / 6.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGene {
    /// Extant gene indices in G, H and I.
    pub members: [usize; 3],
    pub triple_score: f64,
    pub gene_score: f64,
    pub telomere: bool,
}

impl CandidateGene {
    pub fn new(members: [usize; 3], triple_score: f64, telomere: bool) -> Self {
        Self { members, triple_score, gene_score: triple_score.cbrt(), telomere }
    }

    pub fn conflicts_with(&self, other: &CandidateGene) -> bool {
        self.members != other.members && (0..3).any(|x| self.members[x] == other.members[x])
    }

    pub fn ends(&self) -> &'static [End] {
        if self.telomere {
            &[End::Telomere]
        } else {
            &[End::Head, End::Tail]
        }
    }
}

/// Set of genomes (by position 0, 1, 2) in which an adjacency is conserved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Conservation(pub u8);

impl Conservation {
    pub fn with(self, genome: usize) -> Self {
        Self(self.0 | (1 << genome))
    }

    pub fn contains(self, genome: usize) -> bool {
        self.0 & (1 << genome) != 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn labels(self, labels: [&str; 3]) -> Vec<String> {
        (0..3).filter(|&x| self.contains(x)).map(|x| labels[x].to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateEnd {
    pub gene: usize,
    pub end: End,
}

impl CandidateEnd {
    pub fn new(gene: usize, end: End) -> Self {
        Self { gene, end }
    }
}

impl fmt::Display for CandidateEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}^{}", self.gene, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAdjacency {
    pub first: CandidateEnd,
    pub second: CandidateEnd,
    pub conserved: Conservation,
    /// Sixth-root factor, identical for every genome.
    pub factor: f64,
}

impl CandidateAdjacency {
    pub fn weight(&self) -> f64 {
        self.factor * f64::from(self.conserved.count())
    }

    pub fn is_self_pairing(&self) -> bool {
        self.first.gene == self.second.gene
    }

    pub fn touches(&self, e: CandidateEnd) -> bool {
        self.first == e || self.second == e
    }
}

/// For each extant gene, the candidate genes using it.
#[derive(Debug, Clone, Default)]
pub struct ConflictIndex {
    by_member: [BTreeMap<usize, Vec<usize>>; 3],
}

impl ConflictIndex {
    pub fn build(genes: &[CandidateGene]) -> Self {
        let mut index = Self::default();
        for (m, gene) in genes.iter().enumerate() {
            for x in 0..3 {
                index.by_member[x].entry(gene.members[x]).or_default().push(m);
            }
        }
        index
    }

    /// Candidates using extant gene `gene` of genome `x`.
    pub fn users(&self, x: usize, gene: usize) -> &[usize] {
        self.by_member[x].get(&gene).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Extant genes (genome, index) shared by at least two candidates.
    pub fn contested(&self) -> impl Iterator<Item = (usize, usize, &[usize])> {
        (0..3).flat_map(move |x| {
            self.by_member[x]
                .iter()
                .filter(|(_, users)| users.len() > 1)
                .map(move |(&g, users)| (x, g, users.as_slice()))
        })
    }

    pub fn by_genome(&self, x: usize) -> &BTreeMap<usize, Vec<usize>> {
        &self.by_member[x]
    }
}

/// Result of [`CandidateSet::restrict`].
#[derive(Debug, Clone)]
pub struct Restricted {
    pub set: CandidateSet,
    pub gene_origin: Vec<usize>,
    pub adjacency_origin: Vec<usize>,
}

/// Candidate genes, conserved candidate adjacencies and their indices.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub genes: Vec<CandidateGene>,
    pub adjacencies: Vec<CandidateAdjacency>,
    conflicts: ConflictIndex,
    incident: Vec<[Vec<usize>; 2]>,
}

fn end_slot(end: End) -> usize {
    match end {
        End::Head | End::Telomere => 0,
        End::Tail => 1,
    }
}

impl CandidateSet {
    /// Enumerates candidate genes and conserved adjacencies of an instance.
    pub fn build(instance: &Instance) -> Self {
        let genes = enumerate_candidates(instance);
        let adjacencies = enumerate_conserved_adjacencies(&genes, instance);
        Self::from_parts(genes, adjacencies)
    }

    pub fn from_parts(genes: Vec<CandidateGene>, adjacencies: Vec<CandidateAdjacency>) -> Self {
        let conflicts = ConflictIndex::build(&genes);
        let mut incident = vec![[Vec::new(), Vec::new()]; genes.len()];
        for (k, adj) in adjacencies.iter().enumerate() {
            incident[adj.first.gene][end_slot(adj.first.end)].push(k);
            if adj.second != adj.first {
                incident[adj.second.gene][end_slot(adj.second.end)].push(k);
            }
        }
        Self { genes, adjacencies, conflicts, incident }
    }

    pub fn conflict_index(&self) -> &ConflictIndex {
        &self.conflicts
    }

    pub fn conflicting(&self, a: usize, b: usize) -> bool {
        self.genes[a].conflicts_with(&self.genes[b])
    }

    /// Candidates conflicting with `m`, sorted.
    pub fn conflicts_of(&self, m: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..3)
            .flat_map(|x| self.conflicts.users(x, self.genes[m].members[x]).iter().copied())
            .filter(|&o| o != m)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_conflict_free(&self, set: &[usize]) -> bool {
        let mut used: [HashSet<usize>; 3] = Default::default();
        let mut seen = HashSet::new();
        for &m in set {
            if !seen.insert(m) {
                continue;
            }
            for (x, used) in used.iter_mut().enumerate() {
                if !used.insert(self.genes[m].members[x]) {
                    return false;
                }
            }
        }
        true
    }

    /// Conserved adjacencies incident to extremity `end` of candidate `m`.
    pub fn incident(&self, m: usize, end: End) -> &[usize] {
        &self.incident[m][end_slot(end)]
    }

    /// Sub-instance with the kept genes and adjacencies, re-indexed.
    /// Adjacencies touching a dropped gene are dropped. Returns the new set
    /// and, per new gene and per new adjacency, its old index.
    pub fn restrict(&self, keep_gene: &[bool], keep_adjacency: &[bool]) -> Restricted {
        let mut remap = vec![usize::MAX; self.genes.len()];
        let mut gene_origin = Vec::new();
        let mut genes = Vec::new();
        for (m, gene) in self.genes.iter().enumerate() {
            if keep_gene[m] {
                remap[m] = genes.len();
                gene_origin.push(m);
                genes.push(gene.clone());
            }
        }
        let mut adjacency_origin = Vec::new();
        let mut adjacencies = Vec::new();
        for (k, a) in self.adjacencies.iter().enumerate() {
            if keep_adjacency[k] && keep_gene[a.first.gene] && keep_gene[a.second.gene] {
                adjacency_origin.push(k);
                adjacencies.push(CandidateAdjacency {
                    first: CandidateEnd::new(remap[a.first.gene], a.first.end),
                    second: CandidateEnd::new(remap[a.second.gene], a.second.end),
                    ..a.clone()
                });
            }
        }
        Restricted { set: Self::from_parts(genes, adjacencies), gene_origin, adjacency_origin }
    }

    /// Qualified names of a candidate's extant genes.
    pub fn member_names(&self, instance: &Instance, m: usize) -> [String; 3] {
        let members = self.genes[m].members;
        [0, 1, 2].map(|x| instance.genomes[x].gene_id(members[x]).to_string())
    }
}

fn id_key(instance: &Instance, members: [usize; 3]) -> [&str; 3] {
    [0, 1, 2].map(|x| instance.genomes[x].gene(members[x]).name.as_str())
}

/// Indices of the explicit similarity neighbours of `gene` (of genome `x`)
/// inside genome `y`, with scores.
fn neighbours_in(instance: &Instance, x: usize, gene: usize, y: usize) -> Vec<(usize, f64)> {
    let id = instance.genomes[x].gene_id(gene);
    let target = &instance.genomes[y];
    instance
        .sigma
        .neighbors(&id)
        .iter()
        .filter(|(other, s)| other.genome == target.label() && *s > 0.0)
        .filter_map(|(other, s)| target.gene_index(&other.name).map(|idx| (idx, *s)))
        .collect()
}

/// All triples `(g, h, i)` with nonzero pairwise similarities, plus every
/// telomere triple. Sorted by `(g, h, i)` names.
pub fn enumerate_candidates(instance: &Instance) -> Vec<CandidateGene> {
    let [g_genome, h_genome, i_genome] = &instance.genomes;
    let g_genes: Vec<usize> = (0..g_genome.genes().len()).filter(|&g| !g_genome.is_telomere(g)).collect();
    let mut out: Vec<CandidateGene> = g_genes
        .par_iter()
        .flat_map_iter(|&g| {
            let hs = neighbours_in(instance, 0, g, 1);
            let is = neighbours_in(instance, 0, g, 2);
            let mut local = Vec::new();
            for &(h, s_gh) in &hs {
                for &(i, s_gi) in &is {
                    let s_hi = instance.sigma_at(1, h, 2, i);
                    if s_hi > 0.0 {
                        local.push(CandidateGene::new([g, h, i], triple_score(s_gh, s_gi, s_hi), false));
                    }
                }
            }
            local
        })
        .collect();
    let telomeres = |genome: &Genome| (0..genome.genes().len()).filter(|&k| genome.is_telomere(k)).collect::<Vec<_>>();
    for &tg in &telomeres(g_genome) {
        for &th in &telomeres(h_genome) {
            for &ti in &telomeres(i_genome) {
                out.push(CandidateGene::new([tg, th, ti], 1.0, true));
            }
        }
    }
    out.sort_by(|a, b| id_key(instance, a.members).cmp(&id_key(instance, b.members)));
    out
}

fn canonical(a: CandidateEnd, b: CandidateEnd) -> (CandidateEnd, CandidateEnd) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Every non-conflicting candidate pair projecting onto an extant adjacency
/// of at least one genome, with its conservation set.
pub fn enumerate_conserved_adjacencies(genes: &[CandidateGene], instance: &Instance) -> Vec<CandidateAdjacency> {
    let index = ConflictIndex::build(genes);
    let mut found: BTreeMap<(CandidateEnd, CandidateEnd), Conservation> = BTreeMap::new();
    for (x, genome) in instance.genomes.iter().enumerate() {
        for (e1, e2) in genome.adjacencies() {
            if genome.is_telomere(e1.gene) && genome.is_telomere(e2.gene) {
                // Only empty linear chromosomes produce these.
                continue;
            }
            for &m1 in index.users(x, e1.gene) {
                for &m2 in index.users(x, e2.gene) {
                    if m1 == m2 {
                        if e1.end == e2.end {
                            continue;
                        }
                    } else if genes[m1].conflicts_with(&genes[m2]) {
                        continue;
                    }
                    let key = canonical(CandidateEnd::new(m1, e1.end), CandidateEnd::new(m2, e2.end));
                    let slot = found.entry(key).or_default();
                    *slot = slot.with(x);
                }
            }
        }
    }
    found
        .into_iter()
        .map(|((first, second), conserved)| CandidateAdjacency {
            first,
            second,
            conserved,
            factor: median_adjacency_weight(genes[first.gene].triple_score, genes[second.gene].triple_score),
        })
        .collect()
}

/// Extremity of candidate `m` projected into genome `x`.
pub fn project(genes: &[CandidateGene], e: CandidateEnd, x: usize) -> ExtremityRef {
    ExtremityRef::new(genes[e.gene].members[x], e.end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy_instance;

    fn names(instance: &Instance, set: &CandidateSet, m: usize) -> [String; 3] {
        let members = set.genes[m].members;
        [0, 1, 2].map(|x| instance.genomes[x].gene(members[x]).name.clone())
    }

    #[test]
    fn score_helpers() {
        assert_eq!(adjacency_score(1.0, 1.0), 1.0);
        assert_eq!(adjacency_score(0.25, 0.25), 0.25);
        assert!((adjacency_score(0.8, 0.2) - 0.4).abs() < 1e-15);
        assert_eq!(median_adjacency_weight(1.0, 1.0), 1.0);
        assert!((median_adjacency_weight(1.0, 2f64.powi(-6)) - 0.5).abs() < 1e-15);
        let (t1, t2) = (0.3_f64, 0.07_f64);
        let via_gene_scores = t1.cbrt().sqrt() * t2.cbrt().sqrt();
        assert!((median_adjacency_weight(t1, t2) - via_gene_scores).abs() < 1e-15);
    }

    #[test]
    fn toy_instance_candidate_genes() {
        let instance = toy_instance();
        let set = CandidateSet::build(&instance);
        let genes: Vec<[String; 3]> =
            (0..set.genes.len()).filter(|&m| !set.genes[m].telomere).map(|m| names(&instance, &set, m)).collect();
        let want = [["g1", "h1", "i2"], ["g2", "h2", "i1"], ["g3", "h3", "i2"], ["g4", "h3", "i3"]];
        assert_eq!(genes, want.map(|t| t.map(String::from)).to_vec());
        assert_eq!(set.genes.iter().filter(|g| g.telomere).count(), 8);
    }

    #[test]
    fn toy_instance_conflicts_and_adjacencies() {
        let instance = toy_instance();
        let set = CandidateSet::build(&instance);
        let find = |g: &str| {
            (0..set.genes.len()).find(|&m| !set.genes[m].telomere && names(&instance, &set, m)[0] == g).unwrap()
        };
        let (m1, m2, m3, m4) = (find("g1"), find("g2"), find("g3"), find("g4"));
        assert!(set.conflicting(m1, m3));
        assert!(set.conflicting(m3, m4));
        assert!(!set.conflicting(m1, m2));
        assert!(!set.conflicting(m2, m2));
        for adj in &set.adjacencies {
            let pair = [adj.first.gene, adj.second.gene];
            assert!(!(pair.contains(&m1) && pair.contains(&m3)));
            assert!(!(pair.contains(&m3) && pair.contains(&m4)));
        }
        // m2^h - m3^t projects onto g2^h g3^t, h2^h h3^t and i1^h i2^t.
        let link = set
            .adjacencies
            .iter()
            .find(|a| a.first == CandidateEnd::new(m2.min(m3), if m2 < m3 { End::Head } else { End::Tail }))
            .filter(|a| a.second.gene == m2.max(m3))
            .unwrap();
        assert_eq!(link.conserved, Conservation(0b111));
    }

    #[test]
    fn empty_similarity_gives_only_telomeres() {
        let mut instance = toy_instance();
        instance.sigma = crate::similarity::SimilarityGraph::new();
        let set = CandidateSet::build(&instance);
        assert!(set.genes.iter().all(|g| g.telomere));
        assert_eq!(set.genes.len(), 8);
        // Telomere-gene adjacencies vanish with the genes.
        assert!(set.adjacencies.is_empty());
    }

    #[test]
    fn conflict_free_check_matches_pairwise() {
        let instance = toy_instance();
        let set = CandidateSet::build(&instance);
        let n = set.genes.len();
        for mask in 0u32..(1 << n.min(12)) {
            let members: Vec<usize> = (0..n.min(12)).filter(|b| mask & (1 << b) != 0).collect();
            let pairwise = members.iter().all(|&a| members.iter().all(|&b| a == b || !set.conflicting(a, b)));
            assert_eq!(set.is_conflict_free(&members), pairwise);
        }
    }

    #[test]
    fn weights_bounded() {
        let set = CandidateSet::build(&toy_instance());
        for adj in &set.adjacencies {
            assert!(adj.weight() > 0.0 && adj.weight() <= 3.0);
        }
    }
}

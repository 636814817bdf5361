//! Executable form of the hardness reduction: degree-3 graphs, their
//! transformation into median instances, the back-map from medians to
//! independent sets, and an exact maximum independent set oracle.
//!
//! For a graph with vertex set `V`, the first genome holds one circular
//! two-gene chromosome per vertex. Every edge becomes a circular chromosome
//! pairing an edge gene (associated with both endpoints) with an
//! unassociated filler; a proper 4-edge-colouring puts colours 0 and 1 into
//! the third genome and 2 and 3 into the second, so that no vertex has more
//! than two associated genes per genome. Filler chromosomes bring every
//! vertex to exactly two associated genes in both genomes. A star
//! chromosome shared by all three genomes completes the instance. The
//! optimal median value is `2 * MIS + 6`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::candidates::CandidateSet;
use crate::genome::{write_genome, Chromosome, GeneId, Genome, SignedGene};
use crate::instance::{Instance, InstanceError};
use crate::similarity::SimilarityGraph;
use crate::solver::MedianSolution;

/// Maximum vertex degree accepted by the reduction.
pub const MAX_DEGREE: usize = 3;
/// Largest graph the exhaustive independent set search accepts.
pub const MIS_VERTEX_CAP: usize = 24;
/// Similarity between unassociated filler genes.
pub const FILLER_SIMILARITY: f64 = 0.25;

#[derive(Debug, Error)]
pub enum HardnessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex name `{0}` must match [A-Za-z0-9_-]+")]
    BadVertexName(String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("vertex {vertex} has degree {degree}, above {MAX_DEGREE}")]
    DegreeExceeded { vertex: String, degree: usize },
    #[error("{vertices} vertices exceed the exhaustive search cap of {cap}")]
    TooLarge { vertices: usize, cap: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("association file line {line}: {message}")]
    Association { line: usize, message: String },
}

/// A simple undirected graph with maximum degree 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedGraph {
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
}

fn valid_vertex_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl BoundedGraph {
    /// Builds a graph from named vertices and index pairs. Duplicate edges
    /// collapse; self-loops and degrees above 3 are rejected.
    pub fn new(names: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, HardnessError> {
        if let Some(bad) = names.iter().find(|n| !valid_vertex_name(n)) {
            return Err(HardnessError::BadVertexName(bad.clone()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(HardnessError::SelfLoop(names[u].clone()));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut neighbours = vec![Vec::new(); names.len()];
        for &(u, v) in &set {
            neighbours[u].push(v);
            neighbours[v].push(u);
        }
        for (v, list) in neighbours.iter().enumerate() {
            if list.len() > MAX_DEGREE {
                return Err(HardnessError::DegreeExceeded { vertex: names[v].clone(), degree: list.len() });
            }
        }
        Ok(Self { names, edges: set.into_iter().collect(), neighbours })
    }

    /// Parses `u<TAB>v` lines; a line with a single name declares an
    /// isolated vertex. Vertices are numbered by first appearance.
    pub fn parse(text: &str) -> Result<Self, HardnessError> {
        let mut names: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut intern = |name: &str, names: &mut Vec<String>| {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            match fields.as_slice() {
                [v] => {
                    intern(v, &mut names);
                }
                [u, v] => {
                    let a = intern(u, &mut names);
                    let b = intern(v, &mut names);
                    edges.push((a, b));
                }
                _ => {
                    return Err(HardnessError::Parse {
                        line: k + 1,
                        message: format!("expected 1 or 2 tab-separated fields, found {}", fields.len()),
                    })
                }
            }
        }
        Self::new(names, edges)
    }

    /// Every vertex on its own line, in index order, then every edge.
    pub fn write(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            let _ = writeln!(out, "{name}");
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{}\t{}", self.names[u], self.names[v]);
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    pub fn is_independent(&self, vertices: &BTreeSet<usize>) -> bool {
        self.edges.iter().all(|(u, v)| !(vertices.contains(u) && vertices.contains(v)))
    }
}

/// The 4-vertex, 5-edge example graph `ab, ad, bc, bd, cd`.
pub fn example_graph() -> BoundedGraph {
    let names = ["a", "b", "c", "d"].map(String::from).to_vec();
    BoundedGraph::new(names, [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]).expect("valid example")
}

/// Random graph on `n` vertices: every pair is proposed in random order
/// with probability `p` and kept only while both endpoints have degree
/// below 3.
pub fn random_bounded_graph(seed: u64, n: usize, p: f64) -> BoundedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let mut degree = vec![0; n];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if rng.gen_bool(p) && degree[u] < MAX_DEGREE && degree[v] < MAX_DEGREE {
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v));
        }
    }
    let names = (0..n).map(|v| format!("v{v}")).collect();
    BoundedGraph::new(names, edges).expect("generated graph is bounded")
}

/// A maximum independent set by exhaustive branching on the vertex of
/// largest remaining degree.
pub fn mis_bruteforce(graph: &BoundedGraph) -> Result<BTreeSet<usize>, HardnessError> {
    let n = graph.vertex_count();
    if n > MIS_VERTEX_CAP {
        return Err(HardnessError::TooLarge { vertices: n, cap: MIS_VERTEX_CAP });
    }
    let masks: Vec<u32> = (0..n).map(|v| graph.neighbours(v).iter().fold(0u32, |m, &u| m | (1 << u))).collect();
    fn go(alive: u32, masks: &[u32]) -> u32 {
        if alive == 0 {
            return 0;
        }
        let mut pick = None;
        let mut best_degree = 0;
        let mut free = 0u32;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let degree = (masks[v] & alive).count_ones();
            if degree == 0 {
                free |= 1 << v;
            } else if degree > best_degree {
                best_degree = degree;
                pick = Some(v);
            }
        }
        let Some(v) = pick else { return free };
        let rest = alive & !free;
        let with = go(rest & !masks[v] & !(1 << v), masks) | (1 << v);
        let without = go(rest & !(1 << v), masks);
        free | if with.count_ones() >= without.count_ones() { with } else { without }
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let set = go(all, &masks);
    Ok((0..n).filter(|&v| set & (1 << v) != 0).collect())
}

/// Proper edge colouring with at most 4 colours, by backtracking over the
/// sorted edge list. Always succeeds for degree at most 3.
pub fn edge_coloring(graph: &BoundedGraph) -> Vec<u8> {
    fn go(k: usize, graph: &BoundedGraph, used: &mut [u8], colors: &mut [u8]) -> bool {
        if k == graph.edges.len() {
            return true;
        }
        let (u, v) = graph.edges[k];
        for c in 0..4u8 {
            let bit = 1 << c;
            if used[u] & bit == 0 && used[v] & bit == 0 {
                used[u] |= bit;
                used[v] |= bit;
                colors[k] = c;
                if go(k + 1, graph, used, colors) {
                    return true;
                }
                used[u] &= !bit;
                used[v] &= !bit;
            }
        }
        false
    }
    let mut used = vec![0u8; graph.vertex_count()];
    let mut colors = vec![0u8; graph.edges.len()];
    assert!(go(0, graph, &mut used, &mut colors), "degree-3 graphs are 4-edge-colourable");
    colors
}

/// A reduced instance together with its source graph and the vertex
/// association of every extant gene (empty for unassociated genes).
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub graph: BoundedGraph,
    pub instance: Instance,
    pub association: BTreeMap<GeneId, Vec<usize>>,
}

const STAR: &str = "s";
const STAR_BAR: &str = "sb";

/// Builds the median instance of a bounded-degree graph.
pub fn reduce_mis(graph: &BoundedGraph) -> Result<ReductionInstance, HardnessError> {
    let labels = ["G", "H", "I"];
    let mut association: BTreeMap<GeneId, Vec<usize>> = BTreeMap::new();
    let mut fillers: [Vec<String>; 3] = Default::default();
    let mut chromosomes: [Vec<Chromosome>; 3] = Default::default();
    // Associated genes per vertex and genome, in creation order.
    let mut slots: [Vec<Vec<String>>; 3] = Default::default();
    for s in &mut slots {
        *s = vec![Vec::new(); graph.vertex_count()];
    }
    let pair =
        |id: String, a: &str, b: &str| Chromosome::circular(id, vec![SignedGene::forward(a), SignedGene::forward(b)]);

    for (v, name) in graph.names.iter().enumerate() {
        let (g, gb) = (format!("g.{name}"), format!("gb.{name}"));
        chromosomes[0].push(pair(format!("v.{name}"), &g, &gb));
        for gene in [&g, &gb] {
            association.insert(GeneId::new("G", gene.as_str()), vec![v]);
            slots[0][v].push(gene.clone());
        }
    }
    let colors = edge_coloring(graph);
    for (k, &(u, v)) in graph.edges.iter().enumerate() {
        let x = if colors[k] < 2 { 2 } else { 1 };
        let (nu, nv) = (&graph.names[u], &graph.names[v]);
        let (gene, filler) = (format!("x.{nu}.{nv}"), format!("n.{nu}.{nv}"));
        chromosomes[x].push(pair(format!("e.{nu}.{nv}"), &gene, &filler));
        association.insert(GeneId::new(labels[x], gene.as_str()), vec![u, v]);
        association.insert(GeneId::new(labels[x], filler.as_str()), vec![]);
        slots[x][u].push(gene.clone());
        slots[x][v].push(gene);
        fillers[x].push(filler);
    }
    for x in 1..3 {
        for (v, name) in graph.names.iter().enumerate() {
            for j in slots[x][v].len()..2 {
                let (gene, filler) = (format!("f{}.{name}", j + 1), format!("n{}.{name}", j + 1));
                chromosomes[x].push(pair(format!("c{}.{name}", j + 1), &gene, &filler));
                association.insert(GeneId::new(labels[x], gene.as_str()), vec![v]);
                association.insert(GeneId::new(labels[x], filler.as_str()), vec![]);
                slots[x][v].push(gene);
                fillers[x].push(filler);
            }
        }
    }
    for (x, label) in labels.iter().enumerate() {
        chromosomes[x].push(pair("star".into(), STAR, STAR_BAR));
        for gene in [STAR, STAR_BAR] {
            association.insert(GeneId::new(*label, gene), vec![]);
        }
    }

    let mut edges = Vec::new();
    let mut triangle = |names: [&str; 3], score: f64| {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            edges.push((GeneId::new(labels[a], names[a]), GeneId::new(labels[b], names[b]), score));
        }
    };
    for ((g, h), i) in slots[0].iter().zip(&slots[1]).zip(&slots[2]) {
        for j in 0..2 {
            triangle([&g[j], &h[j], &i[j]], 1.0);
        }
    }
    triangle([STAR, STAR, STAR], 1.0);
    triangle([STAR_BAR, STAR_BAR, STAR_BAR], 1.0);
    let unassociated: [Vec<String>; 3] =
        [vec![STAR.to_string(), STAR_BAR.to_string()], fillers[1].clone(), fillers[2].clone()];
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        for a in &unassociated[x] {
            for b in &unassociated[y] {
                edges.push((GeneId::new(labels[x], a.as_str()), GeneId::new(labels[y], b.as_str()), FILLER_SIMILARITY));
            }
        }
    }
    let sigma = SimilarityGraph::from_edges(edges).expect("reduction similarities are valid");
    let [g, h, i] = chromosomes;
    let genomes = [
        Genome::build("G", g).expect("valid G"),
        Genome::build("H", h).expect("valid H"),
        Genome::build("I", i).expect("valid I"),
    ];
    let instance = Instance::new(genomes, sigma)?;
    Ok(ReductionInstance { graph: graph.clone(), instance, association })
}

impl ReductionInstance {
    /// Vertices associated with an extant gene.
    pub fn associated(&self, genome: usize, gene: usize) -> &[usize] {
        let id = self.instance.genomes[genome].gene_id(gene);
        self.association.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Writes `G.genome`, `H.genome`, `I.genome`, `similarity.sim`,
    /// `graph.tsv` and `association.tsv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), HardnessError> {
        let io = |path: &Path, source| HardnessError::Io { path: path.display().to_string(), source };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut files: Vec<(String, String)> = Vec::new();
        for genome in &self.instance.genomes {
            files.push((format!("{}.genome", genome.label()), write_genome(genome)));
        }
        files.push(("similarity.sim".into(), self.instance.sigma.write()));
        files.push(("graph.tsv".into(), self.graph.write()));
        let mut table = String::from("# gene\tvertices\n");
        for (id, vertices) in &self.association {
            let names: Vec<&str> = vertices.iter().map(|&v| self.graph.names[v].as_str()).collect();
            let _ = writeln!(table, "{id}\t{}", names.join(","));
        }
        files.push(("association.tsv".into(), table));
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, HardnessError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path)
                .map_err(|source| HardnessError::Io { path: path.display().to_string(), source })
        };
        let graph = BoundedGraph::parse(&read("graph.tsv")?)?;
        let instance = Instance::load(
            [&dir.join("G.genome"), &dir.join("H.genome"), &dir.join("I.genome")],
            &dir.join("similarity.sim"),
        )?;
        let mut association = BTreeMap::new();
        for (k, raw) in read("association.tsv")?.lines().enumerate() {
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |message: String| HardnessError::Association { line: k + 1, message };
            let (gene, vertices) = raw.split_once('\t').ok_or_else(|| bad("expected 2 tab-separated fields".into()))?;
            let id = GeneId::parse_qualified(gene).ok_or_else(|| bad(format!("`{gene}` is not genome:gene")))?;
            let vertices = vertices
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| graph.vertex(s).ok_or_else(|| bad(format!("unknown vertex `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            association.insert(id, vertices);
        }
        Ok(Self { graph, instance, association })
    }

    /// Vertices of the graph recovered from a median: the vertex of the
    /// first-genome gene of every chosen adjacency conserved there.
    pub fn backmap_solution(&self, set: &CandidateSet, solution: &MedianSolution) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &k in &solution.adjacencies {
            let adj = &set.adjacencies[k];
            if !adj.conserved.contains(0) {
                continue;
            }
            let g = set.genes[adj.first.gene].members[0];
            if let Some(&v) = self.associated(0, g).first() {
                out.insert(v);
            }
        }
        out
    }

    /// Checks the structural facts of a median of a reduced instance:
    /// each chosen candidate is either associated with one common vertex in
    /// all three genomes or fully unassociated, at most two are
    /// unassociated, and both star adjacencies are chosen.
    pub fn check_structure(&self, set: &CandidateSet, solution: &MedianSolution) -> Result<(), String> {
        let mut unassociated = 0;
        for &m in &solution.genes {
            let members = set.genes[m].members;
            let lists: Vec<&[usize]> = (0..3).map(|x| self.associated(x, members[x])).collect();
            if lists.iter().all(|l| l.is_empty()) {
                unassociated += 1;
                continue;
            }
            let common = lists[0].iter().any(|v| lists[1].contains(v) && lists[2].contains(v));
            if !common {
                return Err(format!("candidate {m} mixes associations {lists:?}"));
            }
        }
        if unassociated > 2 {
            return Err(format!("{unassociated} unassociated candidates chosen"));
        }
        let star = |name: &str| {
            (0..set.genes.len())
                .find(|&m| (0..3).all(|x| self.instance.genomes[x].gene(set.genes[m].members[x]).name == name))
        };
        let (Some(s), Some(sb)) = (star(STAR), star(STAR_BAR)) else {
            return Err("star candidates missing".into());
        };
        let star_links = solution
            .adjacencies
            .iter()
            .filter(|&&k| {
                let a = &set.adjacencies[k];
                let pair = [a.first.gene, a.second.gene];
                pair.contains(&s) && pair.contains(&sb) && a.conserved.count() == 3
            })
            .count();
        if star_links != 2 {
            return Err(format!("{star_links} star adjacencies chosen, expected 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Shape;

    fn graph(n: usize, edges: &[(usize, usize)]) -> BoundedGraph {
        BoundedGraph::new((0..n).map(|v| format!("v{v}")).collect(), edges.iter().copied()).unwrap()
    }

    #[test]
    fn mis_examples() {
        assert_eq!(mis_bruteforce(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap().len(), 1);
        assert_eq!(mis_bruteforce(&graph(4, &[(0, 1), (1, 2), (2, 3)])).unwrap().len(), 2);
        let example = example_graph();
        let set = mis_bruteforce(&example).unwrap();
        assert_eq!(set.len(), 2);
        assert!(example.is_independent(&set));
        assert_eq!(set, BTreeSet::from([0, 2]));
    }

    #[test]
    fn mis_matches_subset_enumeration() {
        for seed in 0..30 {
            let g = random_bounded_graph(seed, 9, 0.4);
            let mut best = 0;
            for mask in 0u32..(1 << 9) {
                let set: BTreeSet<usize> = (0..9).filter(|&v| mask & (1 << v) != 0).collect();
                if g.is_independent(&set) {
                    best = best.max(set.len());
                }
            }
            let found = mis_bruteforce(&g).unwrap();
            assert!(g.is_independent(&found));
            assert_eq!(found.len(), best, "seed {seed}");
        }
        assert!(matches!(mis_bruteforce(&graph(25, &[])), Err(HardnessError::TooLarge { .. })));
    }

    #[test]
    fn rejects_unbounded_graphs() {
        let err = BoundedGraph::parse("a\tb\na\tc\na\td\na\te\n").unwrap_err();
        assert!(matches!(err, HardnessError::DegreeExceeded { degree: 4, .. }));
        assert!(matches!(BoundedGraph::parse("a\ta\n"), Err(HardnessError::SelfLoop(_))));
        assert!(matches!(BoundedGraph::parse("a b\tc\n"), Err(HardnessError::BadVertexName(_))));
    }

    #[test]
    fn graph_text_round_trip() {
        let g = BoundedGraph::parse("# toy\nz\na\tb\nb\tc\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(BoundedGraph::parse(&g.write()).unwrap().edges().len(), 2);
    }

    #[test]
    fn colourings_are_proper() {
        for seed in 0..50 {
            let g = random_bounded_graph(seed, 10, 0.5);
            let colors = edge_coloring(&g);
            for (a, &(u, v)) in g.edges().iter().enumerate() {
                for (b, &(p, q)) in g.edges().iter().enumerate() {
                    if a != b && (u == p || u == q || v == p || v == q) {
                        assert_ne!(colors[a], colors[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn example_reduction_shape() {
        let r = reduce_mis(&example_graph()).unwrap();
        let [g, h, i] = &r.instance.genomes;
        assert_eq!(g.chromosomes().len(), 5);
        assert_eq!(g.gene_count(), 10);
        assert!(g.chromosomes().iter().all(|c| c.shape == Shape::Circular));
        let edge_chromosomes = |genome: &Genome| genome.chromosomes().iter().filter(|c| c.id.starts_with("e.")).count();
        assert_eq!(edge_chromosomes(h) + edge_chromosomes(i), 5);
        for x in 0..3 {
            for v in 0..4 {
                let count =
                    (0..r.instance.genomes[x].genes().len()).filter(|&k| r.associated(x, k).contains(&v)).count();
                assert_eq!(count, 2, "vertex {v} in genome {x}");
            }
        }
    }

    #[test]
    fn edgeless_and_single_edge() {
        let r = reduce_mis(&graph(3, &[])).unwrap();
        for x in 1..3 {
            let ids: Vec<&str> = r.instance.genomes[x].chromosomes().iter().map(|c| c.id.as_str()).collect();
            assert!(ids.iter().all(|id| id.starts_with('c') || *id == "star"));
        }
        let r = reduce_mis(&graph(2, &[(0, 1)])).unwrap();
        let count: usize =
            (1..3).map(|x| r.instance.genomes[x].chromosomes().iter().filter(|c| c.id == "e.v0.v1").count()).sum();
        assert_eq!(count, 1);
    }

    #[test]
    fn directory_round_trip() {
        let r = reduce_mis(&example_graph()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write_dir(dir.path()).unwrap();
        let back = ReductionInstance::read_dir(dir.path()).unwrap();
        assert_eq!(back.association, r.association);
        assert_eq!(back.graph, r.graph);
        assert_eq!(back.instance.sigma, r.instance.sigma);
    }
}

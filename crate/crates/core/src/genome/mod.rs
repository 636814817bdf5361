//! Extant genomes: genes, extremities, telomeres and adjacencies.
//!
//! A genome is a list of chromosomes of signed genes. Linear chromosomes are
//! capped by two freshly created telomeres, each with a single extremity.
//! The adjacency set is derived from the chromosome orders and is immutable
//! once the genome is built.

mod format;

pub use format::{parse_genome, parse_genomes, write_genome};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Telomere names start with this character; user gene names may not.
pub const TELOMERE_PREFIX: char = '@';

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenomeError {
    #[error("genome {genome}: duplicate gene name `{name}`")]
    DuplicateGene { genome: String, name: String },
    #[error("genome {genome}: duplicate chromosome id `{id}`")]
    DuplicateChromosome { genome: String, id: String },
    #[error("genome {genome}: invalid gene name `{name}`")]
    InvalidGeneName { genome: String, name: String },
    #[error("invalid genome label `{0}`")]
    InvalidLabel(String),
    #[error("genome {genome}: telomere `{name}` inside circular chromosome `{chromosome}`")]
    TelomereInCircular { genome: String, chromosome: String, name: String },
    #[error("genome {genome}: unknown gene `{name}`")]
    UnknownGene { genome: String, name: String },
    #[error("extremity {extremity} does not match gene kind")]
    BadExtremity { extremity: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected exactly one genome, found {0}")]
    GenomeCount(usize),
}

/// Fully qualified gene identifier, printed as `genome:name`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneId {
    pub genome: String,
    pub name: String,
}

impl GeneId {
    pub fn new(genome: impl Into<String>, name: impl Into<String>) -> Self {
        Self { genome: genome.into(), name: name.into() }
    }

    pub fn is_telomere(&self) -> bool {
        self.name.starts_with(TELOMERE_PREFIX)
    }

    /// Parses `genome:name`, splitting at the first colon.
    pub fn parse_qualified(token: &str) -> Option<Self> {
        let (genome, name) = token.split_once(':')?;
        if genome.is_empty() || name.is_empty() {
            return None;
        }
        Some(Self::new(genome, name))
    }
}

impl fmt::Display for GeneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.genome, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum End {
    #[serde(rename = "h")]
    Head,
    #[serde(rename = "t")]
    Tail,
    /// The single extremity of a telomere.
    #[serde(rename = "o")]
    Telomere,
}

impl End {
    pub fn symbol(self) -> char {
        match self {
            End::Head => 'h',
            End::Tail => 't',
            End::Telomere => 'o',
        }
    }

    pub fn opposite(self) -> End {
        match self {
            End::Head => End::Tail,
            End::Tail => End::Head,
            End::Telomere => End::Telomere,
        }
    }

    fn slot(self) -> usize {
        match self {
            End::Head | End::Telomere => 0,
            End::Tail => 1,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Forward,
    #[serde(rename = "-")]
    Reverse,
}

impl Orientation {
    pub fn sign(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Reverse => '-',
        }
    }

    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }

    /// Extremities in reading direction: `+` is tail then head.
    pub fn ends(self) -> (End, End) {
        match self {
            Orientation::Forward => (End::Tail, End::Head),
            Orientation::Reverse => (End::Head, End::Tail),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Linear,
    Circular,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedGene {
    pub name: String,
    pub orientation: Orientation,
}

impl SignedGene {
    pub fn new(name: impl Into<String>, orientation: Orientation) -> Self {
        Self { name: name.into(), orientation }
    }

    pub fn forward(name: impl Into<String>) -> Self {
        Self::new(name, Orientation::Forward)
    }

    pub fn reverse(name: impl Into<String>) -> Self {
        Self::new(name, Orientation::Reverse)
    }
}

/// A chromosome as written in a genome file. Telomeres are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    pub id: String,
    pub shape: Shape,
    pub genes: Vec<SignedGene>,
}

impl Chromosome {
    pub fn linear(id: impl Into<String>, genes: Vec<SignedGene>) -> Self {
        Self { id: id.into(), shape: Shape::Linear, genes }
    }

    pub fn circular(id: impl Into<String>, genes: Vec<SignedGene>) -> Self {
        Self { id: id.into(), shape: Shape::Circular, genes }
    }
}

/// An extremity addressed by gene index within one genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtremityRef {
    pub gene: usize,
    pub end: End,
}

impl ExtremityRef {
    pub fn new(gene: usize, end: End) -> Self {
        Self { gene, end }
    }
}

/// An extremity addressed by qualified gene id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Extremity {
    pub gene: GeneId,
    pub end: End,
}

impl Extremity {
    pub fn new(gene: GeneId, end: End) -> Self {
        Self { gene, end }
    }
}

impl fmt::Display for Extremity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.gene, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    telomeres: Option<(usize, usize)>,
    members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gene {
    pub name: String,
    pub telomere: bool,
    pub chromosome: usize,
    /// Position among the chromosome's genes; telomeres use `usize::MAX`
    /// for the right cap and 0 for the left cap.
    pub position: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genome {
    label: String,
    chromosomes: Vec<Chromosome>,
    layouts: Vec<Layout>,
    genes: Vec<Gene>,
    index: HashMap<String, usize>,
    partner: Vec<Option<ExtremityRef>>,
}

pub fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.contains([':', '\t', ' ', '\n']) && !label.starts_with('#')
}

fn valid_gene_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with(TELOMERE_PREFIX)
        && !name.starts_with(['+', '-'])
        && !name.contains(|c: char| c.is_whitespace())
}

impl Genome {
    /// Builds a genome and materializes its adjacency set.
    pub fn build(label: impl Into<String>, chromosomes: Vec<Chromosome>) -> Result<Self, GenomeError> {
        let label = label.into();
        if !valid_label(&label) {
            return Err(GenomeError::InvalidLabel(label));
        }
        let mut genome = Genome {
            label,
            chromosomes: Vec::with_capacity(chromosomes.len()),
            layouts: Vec::with_capacity(chromosomes.len()),
            genes: Vec::new(),
            index: HashMap::new(),
            partner: Vec::new(),
        };
        let mut chromosome_ids = HashMap::new();
        for chromosome in chromosomes {
            if chromosome_ids.insert(chromosome.id.clone(), ()).is_some() || chromosome.id.is_empty() {
                return Err(GenomeError::DuplicateChromosome { genome: genome.label.clone(), id: chromosome.id });
            }
            genome.add_chromosome(chromosome)?;
        }
        genome.link();
        Ok(genome)
    }

    fn push_gene(&mut self, gene: Gene) -> Result<usize, GenomeError> {
        let idx = self.genes.len();
        if self.index.insert(gene.name.clone(), idx).is_some() {
            return Err(GenomeError::DuplicateGene { genome: self.label.clone(), name: gene.name });
        }
        self.genes.push(gene);
        Ok(idx)
    }

    fn add_chromosome(&mut self, chromosome: Chromosome) -> Result<(), GenomeError> {
        let c = self.chromosomes.len();
        let mut members = Vec::with_capacity(chromosome.genes.len());
        for signed in &chromosome.genes {
            if signed.name.starts_with(TELOMERE_PREFIX) && chromosome.shape == Shape::Circular {
                return Err(GenomeError::TelomereInCircular {
                    genome: self.label.clone(),
                    chromosome: chromosome.id.clone(),
                    name: signed.name.clone(),
                });
            }
            if !valid_gene_name(&signed.name) {
                return Err(GenomeError::InvalidGeneName { genome: self.label.clone(), name: signed.name.clone() });
            }
        }
        let telomeres = match chromosome.shape {
            Shape::Linear => {
                let left = self.push_gene(Gene {
                    name: format!("{TELOMERE_PREFIX}{}.L", chromosome.id),
                    telomere: true,
                    chromosome: c,
                    position: 0,
                    orientation: Orientation::Forward,
                })?;
                let right = self.push_gene(Gene {
                    name: format!("{TELOMERE_PREFIX}{}.R", chromosome.id),
                    telomere: true,
                    chromosome: c,
                    position: usize::MAX,
                    orientation: Orientation::Forward,
                })?;
                Some((left, right))
            }
            Shape::Circular => None,
        };
        for (position, signed) in chromosome.genes.iter().enumerate() {
            members.push(self.push_gene(Gene {
                name: signed.name.clone(),
                telomere: false,
                chromosome: c,
                position,
                orientation: signed.orientation,
            })?);
        }
        self.chromosomes.push(chromosome);
        self.layouts.push(Layout { telomeres, members });
        Ok(())
    }

    fn link(&mut self) {
        self.partner = vec![None; 2 * self.genes.len()];
        for c in 0..self.layouts.len() {
            // Extremities in reading order, paired off consecutively.
            let layout = &self.layouts[c];
            let mut walk = Vec::with_capacity(2 * layout.members.len() + 2);
            if let Some((left, _)) = layout.telomeres {
                walk.push(ExtremityRef::new(left, End::Telomere));
            }
            for &g in &layout.members {
                let (first, second) = self.genes[g].orientation.ends();
                walk.push(ExtremityRef::new(g, first));
                walk.push(ExtremityRef::new(g, second));
            }
            if let Some((_, right)) = layout.telomeres {
                walk.push(ExtremityRef::new(right, End::Telomere));
            }
            let pairs: Vec<(ExtremityRef, ExtremityRef)> = match layout.telomeres {
                Some(_) => walk.chunks(2).map(|p| (p[0], p[1])).collect(),
                None if walk.is_empty() => Vec::new(),
                None => {
                    // Circular: pair extremity 2k+1 with 2k+2, wrapping around.
                    let n = walk.len();
                    (0..n / 2).map(|k| (walk[2 * k + 1], walk[(2 * k + 2) % n])).collect()
                }
            };
            for (a, b) in pairs {
                self.partner[Self::slot(a)] = Some(b);
                self.partner[Self::slot(b)] = Some(a);
            }
        }
    }

    fn slot(e: ExtremityRef) -> usize {
        2 * e.gene + e.end.slot()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chromosomes(&self) -> &[Chromosome] {
        &self.chromosomes
    }

    /// Genes including telomeres, indexed by position in this slice.
    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn gene(&self, idx: usize) -> &Gene {
        &self.genes[idx]
    }

    /// Number of non-telomere genes.
    pub fn gene_count(&self) -> usize {
        self.genes.iter().filter(|g| !g.telomere).count()
    }

    pub fn telomere_count(&self) -> usize {
        self.genes.len() - self.gene_count()
    }

    pub fn gene_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn gene_id(&self, idx: usize) -> GeneId {
        GeneId::new(self.label.clone(), self.genes[idx].name.clone())
    }

    pub fn is_telomere(&self, idx: usize) -> bool {
        self.genes[idx].telomere
    }

    /// Genes of chromosome `c` in reading order, telomeres excluded.
    pub fn chromosome_members(&self, c: usize) -> &[usize] {
        &self.layouts[c].members
    }

    pub fn chromosome_telomeres(&self, c: usize) -> Option<(usize, usize)> {
        self.layouts[c].telomeres
    }

    pub fn partner(&self, e: ExtremityRef) -> Option<ExtremityRef> {
        self.partner.get(Self::slot(e)).copied().flatten()
    }

    /// True iff `{a, b}` is in the adjacency set.
    pub fn adjacent(&self, a: ExtremityRef, b: ExtremityRef) -> bool {
        if self.genes[a.gene].telomere != (a.end == End::Telomere)
            || self.genes[b.gene].telomere != (b.end == End::Telomere)
        {
            return false;
        }
        self.partner(a) == Some(b)
    }

    /// The adjacency set as canonical `(smaller, larger)` pairs, sorted.
    pub fn adjacencies(&self) -> Vec<(ExtremityRef, ExtremityRef)> {
        let mut out = Vec::new();
        for (g, gene) in self.genes.iter().enumerate() {
            let ends: &[End] = if gene.telomere { &[End::Telomere] } else { &[End::Head, End::Tail] };
            for &end in ends {
                let e = ExtremityRef::new(g, end);
                if let Some(p) = self.partner(e) {
                    if e <= p {
                        out.push((e, p));
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn resolve(&self, e: &Extremity) -> Result<ExtremityRef, GenomeError> {
        if e.gene.genome != self.label {
            return Err(GenomeError::UnknownGene { genome: self.label.clone(), name: e.gene.to_string() });
        }
        let idx = self
            .gene_index(&e.gene.name)
            .ok_or_else(|| GenomeError::UnknownGene { genome: self.label.clone(), name: e.gene.name.clone() })?;
        if self.genes[idx].telomere != (e.end == End::Telomere) {
            return Err(GenomeError::BadExtremity { extremity: e.to_string() });
        }
        Ok(ExtremityRef::new(idx, e.end))
    }

    /// Adjacency indicator: 1 if `{e1, e2}` is an adjacency of this genome.
    pub fn indicator(&self, e1: &Extremity, e2: &Extremity) -> Result<u8, GenomeError> {
        let a = self.resolve(e1)?;
        let b = self.resolve(e2)?;
        Ok(u8::from(self.adjacent(a, b)))
    }

    pub fn extremity(&self, e: ExtremityRef) -> Extremity {
        Extremity::new(self.gene_id(e.gene), e.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(genome: &Genome, name: &str, end: End) -> Extremity {
        Extremity::new(GeneId::new(genome.label(), name), end)
    }

    fn named(genome: &Genome, adj: &[(ExtremityRef, ExtremityRef)]) -> Vec<(String, String)> {
        adj.iter()
            .map(|(a, b)| {
                let fmt = |e: &ExtremityRef| format!("{}{}", genome.gene(e.gene).name, e.end);
                (fmt(a), fmt(b))
            })
            .collect()
    }

    #[test]
    fn linear_two_genes() {
        let g =
            Genome::build("G", vec![Chromosome::linear("1", vec![SignedGene::forward("a"), SignedGene::forward("b")])])
                .unwrap();
        let mut got: Vec<(String, String)> =
            named(&g, &g.adjacencies()).into_iter().map(|(x, y)| if x <= y { (x, y) } else { (y, x) }).collect();
        got.sort();
        let want = [("@1.Lo", "at"), ("@1.Ro", "bh"), ("ah", "bt")].map(|(x, y)| (x.to_string(), y.to_string()));
        assert_eq!(got, want.to_vec());
    }

    #[test]
    fn circular_single_gene_self_loop() {
        let g = Genome::build("G", vec![Chromosome::circular("c", vec![SignedGene::forward("a")])]).unwrap();
        let a = g.gene_index("a").unwrap();
        assert_eq!(g.adjacencies(), vec![(ExtremityRef::new(a, End::Head), ExtremityRef::new(a, End::Tail))]);
    }

    #[test]
    fn circular_mixed_orientation() {
        let g = Genome::build(
            "G",
            vec![Chromosome::circular("c", vec![SignedGene::forward("a"), SignedGene::reverse("b")])],
        )
        .unwrap();
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "b", End::Head)), Ok(1));
        assert_eq!(g.indicator(&ext(&g, "b", End::Tail), &ext(&g, "a", End::Tail)), Ok(1));
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "b", End::Tail)), Ok(0));
        assert_eq!(g.adjacencies().len(), 2);
    }

    #[test]
    fn circular_two_cycle_indicator() {
        let g = Genome::build(
            "G",
            vec![Chromosome::circular("c", vec![SignedGene::forward("a"), SignedGene::forward("b")])],
        )
        .unwrap();
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "b", End::Tail)), Ok(1));
        assert_eq!(g.indicator(&ext(&g, "b", End::Head), &ext(&g, "a", End::Tail)), Ok(1));
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "a", End::Tail)), Ok(0));
    }

    #[test]
    fn gene_not_adjacent_to_itself() {
        let g =
            Genome::build("G", vec![Chromosome::linear("1", vec![SignedGene::forward("a"), SignedGene::forward("b")])])
                .unwrap();
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "a", End::Tail)), Ok(0));
        assert_eq!(g.indicator(&ext(&g, "a", End::Head), &ext(&g, "b", End::Tail)), Ok(1));
    }

    #[test]
    fn indicator_unknown_gene_is_error() {
        let g = Genome::build("G", vec![Chromosome::linear("1", vec![SignedGene::forward("a")])]).unwrap();
        assert!(matches!(
            g.indicator(&ext(&g, "a", End::Head), &ext(&g, "zz", End::Tail)),
            Err(GenomeError::UnknownGene { .. })
        ));
        let other = Extremity::new(GeneId::new("H", "a"), End::Head);
        assert!(g.indicator(&other, &ext(&g, "a", End::Tail)).is_err());
    }

    #[test]
    fn build_errors() {
        let dup =
            Genome::build("G", vec![Chromosome::linear("1", vec![SignedGene::forward("a"), SignedGene::reverse("a")])]);
        assert!(matches!(dup, Err(GenomeError::DuplicateGene { .. })));
        let tel = Genome::build("G", vec![Chromosome::circular("1", vec![SignedGene::forward("@x")])]);
        assert!(matches!(tel, Err(GenomeError::TelomereInCircular { .. })));
        let across = Genome::build(
            "G",
            vec![
                Chromosome::linear("1", vec![SignedGene::forward("a")]),
                Chromosome::circular("2", vec![SignedGene::forward("a")]),
            ],
        );
        assert!(matches!(across, Err(GenomeError::DuplicateGene { .. })));
    }

    #[test]
    fn empty_linear_chromosome_has_telomere_adjacency() {
        let g = Genome::build("G", vec![Chromosome::linear("1", vec![])]).unwrap();
        assert_eq!(g.adjacencies().len(), 1);
        assert_eq!(g.gene_count(), 0);
        assert_eq!(g.telomere_count(), 2);
    }

    #[test]
    fn telomeres_are_fresh_per_chromosome() {
        let g = Genome::build(
            "G",
            vec![
                Chromosome::linear("1", vec![SignedGene::forward("a")]),
                Chromosome::linear("2", vec![SignedGene::forward("b")]),
            ],
        )
        .unwrap();
        assert_eq!(g.telomere_count(), 4);
        assert!(g.gene_id(g.chromosome_telomeres(0).unwrap().0).is_telomere());
        assert!(!g.gene_id(g.gene_index("a").unwrap()).is_telomere());
    }
}

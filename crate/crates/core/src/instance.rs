//! An FF-Median instance: three extant genomes and their similarity graph.

use std::path::Path;

use thiserror::Error;

use crate::genome::{parse_genome, GeneId, Genome, GenomeError};
use crate::similarity::{SimilarityError, SimilarityGraph};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Genome { path: String, source: GenomeError },
    #[error("{path}: {source}")]
    Similarity { path: String, source: SimilarityError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("genome labels must be distinct, got {0:?}")]
    DuplicateLabels([String; 3]),
    #[error("similarity edge {0} - {1} references a gene outside the three genomes")]
    ForeignGene(String, String),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub genomes: [Genome; 3],
    pub sigma: SimilarityGraph,
}

impl Instance {
    pub fn new(genomes: [Genome; 3], sigma: SimilarityGraph) -> Result<Self, InstanceError> {
        let labels = genomes.clone().map(|g| g.label().to_string());
        if labels[0] == labels[1] || labels[0] == labels[2] || labels[1] == labels[2] {
            return Err(InstanceError::DuplicateLabels(labels));
        }
        let instance = Self { genomes, sigma };
        for (a, b, _) in instance.sigma.edges() {
            if !instance.contains(a) || !instance.contains(b) {
                return Err(InstanceError::ForeignGene(a.to_string(), b.to_string()));
            }
        }
        Ok(instance)
    }

    /// Like [`Instance::new`] but silently drops edges to unknown genes.
    pub fn new_lenient(genomes: [Genome; 3], mut sigma: SimilarityGraph) -> Result<Self, InstanceError> {
        let probe = Self { genomes: genomes.clone(), sigma: SimilarityGraph::new() };
        sigma.retain(|g| probe.contains(g));
        Self::new(genomes, sigma)
    }

    pub fn load(genome_paths: [&Path; 3], sim_path: &Path) -> Result<Self, InstanceError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| InstanceError::Io { path: p.display().to_string(), source })
        };
        let mut genomes = Vec::with_capacity(3);
        for p in genome_paths {
            let genome = parse_genome(&read(p)?)
                .map_err(|source| InstanceError::Genome { path: p.display().to_string(), source })?;
            genomes.push(genome);
        }
        let sigma = SimilarityGraph::parse(&read(sim_path)?)
            .map_err(|source| InstanceError::Similarity { path: sim_path.display().to_string(), source })?;
        let genomes: [Genome; 3] = genomes.try_into().expect("three genomes");
        Self::new(genomes, sigma)
    }

    pub fn labels(&self) -> [&str; 3] {
        [self.genomes[0].label(), self.genomes[1].label(), self.genomes[2].label()]
    }

    pub fn genome_position(&self, label: &str) -> Option<usize> {
        self.genomes.iter().position(|g| g.label() == label)
    }

    pub fn contains(&self, id: &GeneId) -> bool {
        self.genome_position(&id.genome).map(|x| self.genomes[x].gene_index(&id.name).is_some()).unwrap_or(false)
    }

    /// Similarity between gene `a` of genome `x` and gene `b` of genome `y`.
    pub fn sigma_at(&self, x: usize, a: usize, y: usize, b: usize) -> f64 {
        self.sigma.get(&self.genomes[x].gene_id(a), &self.genomes[y].gene_id(b))
    }

    /// Max genome size in non-telomere genes.
    pub fn max_genome_size(&self) -> usize {
        self.genomes.iter().map(Genome::gene_count).max().unwrap_or(0)
    }
}

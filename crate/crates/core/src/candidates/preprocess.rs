//! Removal of extant genes that take part in no similarity triangle.

use std::collections::HashSet;

use serde::Serialize;

use crate::genome::{Chromosome, GeneId, Genome, Shape};
use crate::instance::{Instance, InstanceError};

use super::enumerate_candidates;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RemovalReport {
    pub removed: Vec<GeneId>,
    /// Circular chromosomes left without genes and therefore dropped.
    pub dropped_chromosomes: Vec<String>,
}

/// Splices every non-telomere gene that belongs to no candidate triple out
/// of its chromosome; neighbours of a removed gene become adjacent.
pub fn discard_nonclique(instance: &Instance) -> Result<(Instance, RemovalReport), InstanceError> {
    let candidates = enumerate_candidates(instance);
    let mut used: [HashSet<usize>; 3] = Default::default();
    for c in candidates.iter().filter(|c| !c.telomere) {
        for (x, used) in used.iter_mut().enumerate() {
            used.insert(c.members[x]);
        }
    }
    let mut report = RemovalReport::default();
    let mut genomes = Vec::with_capacity(3);
    for (x, genome) in instance.genomes.iter().enumerate() {
        let mut chromosomes = Vec::new();
        for chromosome in genome.chromosomes() {
            let genes: Vec<_> = chromosome
                .genes
                .iter()
                .filter(|sg| {
                    let idx = genome.gene_index(&sg.name).expect("gene of its own genome");
                    let keep = used[x].contains(&idx);
                    if !keep {
                        report.removed.push(genome.gene_id(idx));
                    }
                    keep
                })
                .cloned()
                .collect();
            if genes.is_empty() && chromosome.shape == Shape::Circular {
                report.dropped_chromosomes.push(format!("{}:{}", genome.label(), chromosome.id));
                continue;
            }
            chromosomes.push(Chromosome { genes, ..chromosome.clone() });
        }
        genomes.push(
            Genome::build(genome.label(), chromosomes)
                .map_err(|source| InstanceError::Genome { path: genome.label().to_string(), source })?,
        );
    }
    report.removed.sort();
    let genomes: [Genome; 3] = genomes.try_into().expect("three genomes");
    let reduced = Instance::new_lenient(genomes, instance.sigma.clone())?;
    Ok((reduced, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::CandidateSet;
    use crate::genome::{End, SignedGene};
    use crate::similarity::SimilarityGraph;

    fn genome(label: &str, names: &[&str]) -> Genome {
        Genome::build(label, vec![Chromosome::linear("1", names.iter().map(|n| SignedGene::forward(*n)).collect())])
            .unwrap()
    }

    fn unit_triangles(triples: &[(&str, &str, &str)]) -> SimilarityGraph {
        let mut edges = Vec::new();
        for (g, h, i) in triples {
            let (g, h, i) = (GeneId::new("G", *g), GeneId::new("H", *h), GeneId::new("I", *i));
            edges.push((g.clone(), h.clone(), 1.0));
            edges.push((g, i.clone(), 1.0));
            edges.push((h, i, 1.0));
        }
        SimilarityGraph::from_edges(edges).unwrap()
    }

    #[test]
    fn no_triangles_collapses_everything() {
        let genomes = [
            genome("G", &["a", "b"]),
            Genome::build("H", vec![Chromosome::circular("c", vec![SignedGene::forward("x")])]).unwrap(),
            genome("I", &["p"]),
        ];
        let instance = Instance::new(genomes, SimilarityGraph::new()).unwrap();
        let (reduced, report) = discard_nonclique(&instance).unwrap();
        assert_eq!(report.removed.len(), 4);
        assert_eq!(report.dropped_chromosomes, vec!["H:c".to_string()]);
        assert_eq!(reduced.genomes[0].gene_count(), 0);
        assert_eq!(reduced.genomes[0].adjacencies().len(), 1);
        assert!(reduced.genomes[1].chromosomes().is_empty());
    }

    #[test]
    fn splice_joins_neighbours() {
        let instance = Instance::new(
            [genome("G", &["a", "x", "b"]), genome("H", &["a", "b"]), genome("I", &["a", "b"])],
            unit_triangles(&[("a", "a", "a"), ("b", "b", "b")]),
        )
        .unwrap();
        let (reduced, report) = discard_nonclique(&instance).unwrap();
        assert_eq!(report.removed, vec![GeneId::new("G", "x")]);
        let g = &reduced.genomes[0];
        let (a, b) = (g.gene_index("a").unwrap(), g.gene_index("b").unwrap());
        assert!(
            g.adjacent(crate::genome::ExtremityRef::new(a, End::Head), crate::genome::ExtremityRef::new(b, End::Tail))
        );
    }

    #[test]
    fn insertion_splitting_adjacency_is_recovered() {
        // G carries an insertion `t` between c and d.
        let instance = Instance::new(
            [
                genome("G", &["a", "b", "c", "t", "d"]),
                genome("H", &["a", "b", "c", "d"]),
                genome("I", &["a", "b", "c", "d"]),
            ],
            unit_triangles(&[("a", "a", "a"), ("b", "b", "b"), ("c", "c", "c"), ("d", "d", "d")]),
        )
        .unwrap();
        let before = CandidateSet::build(&instance);
        let (reduced, _) = discard_nonclique(&instance).unwrap();
        let after = CandidateSet::build(&reduced);
        assert!(after.adjacencies.len() >= before.adjacencies.len());
        let total = |s: &CandidateSet| s.adjacencies.iter().map(|a| a.conserved.count()).sum::<u32>();
        assert_eq!(total(&after), total(&before) + 1);
    }
}

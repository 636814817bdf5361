//! Small hand-built instances used by tests and examples.

use crate::genome::{Chromosome, GeneId, Genome, SignedGene};
use crate::instance::Instance;
use crate::similarity::SimilarityGraph;

fn linear(label: &str, names: &[&str]) -> Genome {
    let genes = names.iter().map(|n| SignedGene::forward(*n)).collect();
    Genome::build(label, vec![Chromosome::linear("1", genes)]).expect("fixture genome")
}

/// Three linear genomes `g1..g4`, `h1..h3`, `i1..i3` (all genes forward)
/// whose unit-weight similarity triangles are
/// `(g1,h1,i2)`, `(g2,h2,i1)`, `(g3,h3,i2)` and `(g4,h3,i3)`.
pub fn toy_instance() -> Instance {
    let genomes =
        [linear("G", &["g1", "g2", "g3", "g4"]), linear("H", &["h1", "h2", "h3"]), linear("I", &["i1", "i2", "i3"])];
    let triangles = [("g1", "h1", "i2"), ("g2", "h2", "i1"), ("g3", "h3", "i2"), ("g4", "h3", "i3")];
    let mut edges = Vec::new();
    for (g, h, i) in triangles {
        let (g, h, i) = (GeneId::new("G", g), GeneId::new("H", h), GeneId::new("I", i));
        edges.push((g.clone(), h.clone(), 1.0));
        edges.push((g, i.clone(), 1.0));
        edges.push((h, i, 1.0));
    }
    let sigma = SimilarityGraph::from_edges(edges).expect("fixture similarity");
    Instance::new(genomes, sigma).expect("fixture instance")
}

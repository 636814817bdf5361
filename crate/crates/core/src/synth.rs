//! Seeded generators of synthetic instances for tests, examples and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::genome::{Chromosome, GeneId, Genome, Orientation, Shape, SignedGene};
use crate::instance::Instance;
use crate::similarity::SimilarityGraph;

pub const LABELS: [&str; 3] = ["G", "H", "I"];

fn random_orientation(rng: &mut impl Rng) -> Orientation {
    if rng.gen_bool(0.5) {
        Orientation::Forward
    } else {
        Orientation::Reverse
    }
}

/// Splits `names` into `pieces` chromosomes of the given shape, shuffling
/// order and orientations.
fn scatter(rng: &mut impl Rng, names: &[String], pieces: usize, shape: Shape) -> Vec<Chromosome> {
    let mut order: Vec<&String> = names.iter().collect();
    order.shuffle(rng);
    let pieces = pieces.clamp(1, order.len().max(1));
    let mut cuts: Vec<usize> = (1..order.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(pieces - 1).collect();
    cuts.sort_unstable();
    cuts.push(order.len());
    let mut out = Vec::new();
    let mut start = 0;
    for (c, end) in cuts.into_iter().enumerate() {
        let genes = order[start..end].iter().map(|n| SignedGene::new(n.as_str(), random_orientation(rng))).collect();
        out.push(Chromosome { id: format!("c{}", c + 1), shape, genes });
        start = end;
    }
    out
}

fn build(genomes: Vec<Genome>, edges: Vec<(GeneId, GeneId, f64)>) -> Instance {
    let sigma = SimilarityGraph::from_edges(edges).expect("generated similarities are valid");
    Instance::new(genomes.try_into().expect("three genomes"), sigma).expect("generated instance is valid")
}

fn names(label: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{}{k}", label.to_lowercase())).collect()
}

/// A small random instance. Most draws use circular chromosomes only; about
/// one in five gives every genome a single linear chromosome instead.
/// Similarities are dense among few genes so that candidate triples share
/// extant genes.
pub fn random_small_instance(rng: &mut impl Rng) -> Instance {
    let linear = rng.gen_bool(0.2);
    let sizes: Vec<usize> = (0..3).map(|_| if linear { rng.gen_range(1..=2) } else { rng.gen_range(2..=4) }).collect();
    let genomes: Vec<Genome> = (0..3)
        .map(|x| {
            let ns = names(LABELS[x], sizes[x]);
            let chromosomes = if linear {
                scatter(rng, &ns, 1, Shape::Linear)
            } else {
                let pieces = rng.gen_range(1..=2);
                scatter(rng, &ns, pieces, Shape::Circular)
            };
            Genome::build(LABELS[x], chromosomes).expect("valid genome")
        })
        .collect();
    let mut edges = Vec::new();
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        for a in names(LABELS[x], sizes[x]) {
            for b in names(LABELS[y], sizes[y]) {
                if rng.gen_bool(0.55) {
                    let w = if rng.gen_bool(0.5) {
                        f64::from(rng.gen_range(1..=4)) / 4.0
                    } else {
                        rng.gen_range(0.05..=1.0)
                    };
                    edges.push((GeneId::new(LABELS[x], a.clone()), GeneId::new(LABELS[y], b), w));
                }
            }
        }
    }
    build(genomes, edges)
}

/// Draws random small instances until one has between 1 and `max_candidates`
/// candidate genes.
pub fn random_oracle_instance(seed: u64, max_candidates: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let instance = random_small_instance(&mut rng);
        let count = crate::candidates::enumerate_candidates(&instance).len();
        if (1..=max_candidates).contains(&count) {
            return instance;
        }
    }
}

/// `n` genes per genome on circular chromosomes, similarities forming `n`
/// disjoint unit-weight triangles; gene orders are independently shuffled
/// except that a fraction of the ancestral order is kept so that
/// adjacencies are shared.
pub fn disjoint_clique_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family: Vec<String> = (1..=n).map(|k| format!("f{k}")).collect();
    let genomes: Vec<Genome> = (0..3)
        .map(|x| {
            let mut order = family.clone();
            // A few random inversions of the shared ancestral order.
            for _ in 0..rng.gen_range(0..=n / 2) {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(a..n);
                order[a..=b].reverse();
            }
            let pieces = rng.gen_range(1..=3.min(n));
            let mut chromosomes = Vec::new();
            let mut start = 0;
            for c in 0..pieces {
                let end = if c + 1 == pieces { n } else { (start + n / pieces).min(n) };
                if start < end {
                    let genes = order[start..end]
                        .iter()
                        .map(|f| {
                            SignedGene::new(format!("{}_{f}", LABELS[x].to_lowercase()), random_orientation(&mut rng))
                        })
                        .collect();
                    chromosomes.push(Chromosome::circular(format!("c{}", c + 1), genes));
                }
                start = end;
            }
            Genome::build(LABELS[x], chromosomes).expect("valid genome")
        })
        .collect();
    let mut edges = Vec::new();
    for f in &family {
        let ids: Vec<GeneId> =
            (0..3).map(|x| GeneId::new(LABELS[x], format!("{}_{f}", LABELS[x].to_lowercase()))).collect();
        edges.push((ids[0].clone(), ids[1].clone(), 1.0));
        edges.push((ids[0].clone(), ids[2].clone(), 1.0));
        edges.push((ids[1].clone(), ids[2].clone(), 1.0));
    }
    build(genomes, edges)
}

/// One circular chromosome of `n` genes per genome with every cross-genome
/// pair similar, weights drawn from `(0, 1]`.
pub fn complete_similarity_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genomes: Vec<Genome> = (0..3)
        .map(|x| Genome::build(LABELS[x], scatter(&mut rng, &names(LABELS[x], n), 1, Shape::Circular)).unwrap())
        .collect();
    let mut edges = Vec::new();
    for (x, y) in [(0, 1), (0, 2), (1, 2)] {
        for a in names(LABELS[x], n) {
            for b in names(LABELS[y], n) {
                let w = rng.gen_range(0.01..=1.0);
                edges.push((GeneId::new(LABELS[x], a.clone()), GeneId::new(LABELS[y], b), w));
            }
        }
    }
    build(genomes, edges)
}

/// Small instance built around a shared ancestral order, so that runs are
/// common: each genome applies at most one inversion to the order, orthologs
/// get random similarities and a few extra edges create conflicts. Draws
/// are repeated until the instance has between 1 and `max_candidates`
/// candidate genes and at least one run.
pub fn random_segment_instance(seed: u64, max_candidates: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let linear = rng.gen_bool(0.15);
        let n = if linear { 2 } else { rng.gen_range(3..=6) };
        let shape = if linear { Shape::Linear } else { Shape::Circular };
        let base: Vec<(usize, Orientation)> = (0..n).map(|f| (f, random_orientation(&mut rng))).collect();
        let genomes: Vec<Genome> = (0..3)
            .map(|x| {
                let mut order = base.clone();
                if rng.gen_bool(0.5) {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(a..n);
                    order[a..=b].reverse();
                    for g in &mut order[a..=b] {
                        g.1 = g.1.flip();
                    }
                }
                let genes = order
                    .iter()
                    .map(|&(f, o)| SignedGene::new(format!("{}{}", LABELS[x].to_lowercase(), f + 1), o))
                    .collect();
                Genome::build(LABELS[x], vec![Chromosome { id: "c1".into(), shape, genes }]).expect("valid genome")
            })
            .collect();
        let id = |x: usize, f: usize| GeneId::new(LABELS[x], format!("{}{}", LABELS[x].to_lowercase(), f + 1));
        let mut edges = Vec::new();
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            for a in 0..n {
                for b in 0..n {
                    let w = if a == b {
                        f64::from(rng.gen_range(2..=4)) / 4.0
                    } else if rng.gen_bool(0.12) {
                        rng.gen_range(0.05..=1.0)
                    } else {
                        continue;
                    };
                    edges.push((id(x, a), id(y, b), w));
                }
            }
        }
        let instance = build(genomes, edges);
        let set = crate::candidates::CandidateSet::build(&instance);
        if (1..=max_candidates).contains(&set.genes.len()) && !crate::segments::detect_runs(&set, &instance).is_empty()
        {
            return instance;
        }
    }
}

/// A synthetic triple with known orthology.
#[derive(Debug, Clone)]
pub struct ScrambledTriple {
    pub instance: Instance,
    /// True ortholog pairs: every pair of genes of one family in two
    /// different genomes.
    pub truth: Vec<(GeneId, GeneId)>,
}

/// Evolution of three genomes from one ancestor. Event counts and
/// probabilities scale with the evolutionary distance `rate`.
#[derive(Debug, Clone)]
pub struct ScrambleParams {
    pub families: usize,
    pub chromosomes: usize,
    /// Evolutionary distance from the ancestor to each genome.
    pub rate: f64,
    /// Inversions per family per unit of distance.
    pub inversions: f64,
    /// Tandem duplication probability per gene per unit of distance.
    pub duplications: f64,
    /// Loss probability per gene per unit of distance.
    pub losses: f64,
    /// Per unit of distance: probability that an ortholog similarity falls
    /// below detection, and exponential decay of detected similarities.
    pub divergence: f64,
    /// Expected spurious similarity edges per family.
    pub noise: f64,
}

impl Default for ScrambleParams {
    fn default() -> Self {
        Self {
            families: 60,
            chromosomes: 2,
            rate: 0.1,
            inversions: 1.0,
            duplications: 0.1,
            losses: 0.2,
            divergence: 0.5,
            noise: 0.5,
        }
    }
}

/// Evolves three genomes from one linear ancestor by inversions, tandem
/// duplications and losses. Ortholog similarities decay with distance and
/// may drop out; a few random low similarities are added as noise.
pub fn scrambled_triple(seed: u64, params: &ScrambleParams) -> ScrambledTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.families;
    let d = params.rate.max(0.0);
    let per = n.div_ceil(params.chromosomes.max(1));
    let ancestor: Vec<Vec<(usize, Orientation)>> = (0..n)
        .collect::<Vec<_>>()
        .chunks(per)
        .map(|c| c.iter().map(|&f| (f, Orientation::Forward)).collect())
        .collect();
    let inversions = (params.inversions * d * n as f64).round() as usize;
    let p_dup = (params.duplications * d).min(0.9);
    let p_loss = (params.losses * d).min(0.9);
    // Gene names per genome and family.
    let mut members: Vec<Vec<Vec<String>>> = vec![vec![Vec::new(); n]; 3];
    let mut genomes = Vec::new();
    for (x, label) in LABELS.iter().enumerate() {
        let prefix = label.to_lowercase();
        let mut chromosomes: Vec<Vec<(usize, Orientation)>> = Vec::new();
        for chrom in &ancestor {
            let mut out = Vec::new();
            for &(f, o) in chrom {
                out.push((f, o));
                if rng.gen_bool(p_dup) {
                    out.push((f, o));
                }
            }
            chromosomes.push(out);
        }
        for _ in 0..inversions {
            let c = rng.gen_range(0..chromosomes.len());
            let len = chromosomes[c].len();
            let a = rng.gen_range(0..len);
            let b = rng.gen_range(a..len);
            chromosomes[c][a..=b].reverse();
            for entry in &mut chromosomes[c][a..=b] {
                entry.1 = entry.1.flip();
            }
        }
        let mut built = Vec::new();
        for (c, chrom) in chromosomes.iter().enumerate() {
            let mut genes = Vec::new();
            for &(f, o) in chrom {
                if rng.gen_bool(p_loss) {
                    continue;
                }
                let copies = &mut members[x][f];
                let name = match copies.len() {
                    0 => format!("{prefix}{}", f + 1),
                    k => format!("{prefix}{}_{k}", f + 1),
                };
                copies.push(name.clone());
                genes.push(SignedGene::new(name, o));
            }
            built.push(Chromosome::linear(format!("c{}", c + 1), genes));
        }
        genomes.push(Genome::build(*label, built).expect("valid genome"));
    }
    let id = |x: usize, name: &str| GeneId::new(LABELS[x], name);
    let p_detect = (-params.divergence * d).exp();
    let mut edges = Vec::new();
    let mut truth = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for f in 0..n {
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let (xs, ys) = (&members[x][f], &members[y][f]);
            for a in xs {
                for b in ys {
                    truth.push((id(x, a), id(y, b)));
                    if rng.gen_bool(p_detect) {
                        edges.push((id(x, a), id(y, b), p_detect * rng.gen_range(0.6..=1.0)));
                    }
                }
            }
        }
    }
    let spurious = (params.noise * n as f64).round() as usize;
    for _ in 0..spurious {
        let (x, y) = [(0, 1), (0, 2), (1, 2)][rng.gen_range(0..3)];
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            if let (Some(ga), Some(gb)) = (members[x][a].first(), members[y][b].first()) {
                edges.push((id(x, ga), id(y, gb), rng.gen_range(0.05..=0.3) * p_detect));
            }
        }
    }
    ScrambledTriple { instance: build(genomes, edges), truth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::CandidateSet;

    #[test]
    fn generators_are_seeded() {
        let a = random_oracle_instance(5, 10);
        let b = random_oracle_instance(5, 10);
        assert_eq!(a.sigma, b.sigma);
        assert!(CandidateSet::build(&a).genes.len() <= 10);
    }

    #[test]
    fn disjoint_cliques_are_disjoint() {
        let instance = disjoint_clique_instance(3, 9);
        let set = CandidateSet::build(&instance);
        assert_eq!(set.genes.len(), 9);
        assert_eq!(set.conflict_index().contested().count(), 0);
    }

    #[test]
    fn complete_similarity_has_cubic_candidates() {
        let set = CandidateSet::build(&complete_similarity_instance(1, 4));
        assert_eq!(set.genes.len(), 64);
    }

    #[test]
    fn scrambled_truth_is_consistent() {
        let triple = scrambled_triple(2, &ScrambleParams::default());
        assert!(!triple.truth.is_empty());
        for (a, b) in &triple.truth {
            assert!(triple.instance.contains(a) && triple.instance.contains(b));
        }
    }
}

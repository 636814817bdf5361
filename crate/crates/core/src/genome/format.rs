//! Tab-separated genome files.
//!
//! One line per chromosome:
//! `label<TAB>chromosome_id<TAB>linear|circular<TAB>+geneA -geneB ...`.
//! Lines starting with `#` are comments. Serialization is canonical:
//! no comments, single spaces between gene tokens, trailing newline.

use std::fmt::Write as _;

use super::{Chromosome, Genome, GenomeError, Orientation, Shape, SignedGene};

fn parse_error(line: usize, message: impl Into<String>) -> GenomeError {
    GenomeError::Parse { line, message: message.into() }
}

fn parse_token(token: &str, line: usize) -> Result<SignedGene, GenomeError> {
    let mut chars = token.chars();
    let orientation = match chars.next() {
        Some('+') => Orientation::Forward,
        Some('-') => Orientation::Reverse,
        _ => return Err(parse_error(line, format!("gene token `{token}` must start with + or -"))),
    };
    let name = chars.as_str();
    if name.is_empty() {
        return Err(parse_error(line, format!("gene token `{token}` has no name")));
    }
    Ok(SignedGene::new(name, orientation))
}

/// Parses all genomes in a file, in order of first appearance.
pub fn parse_genomes(text: &str) -> Result<Vec<Genome>, GenomeError> {
    let mut order: Vec<(String, Vec<Chromosome>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(parse_error(line, format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let shape = match fields[2].trim() {
            "linear" => Shape::Linear,
            "circular" => Shape::Circular,
            other => return Err(parse_error(line, format!("unknown chromosome shape `{other}`"))),
        };
        let genes = fields
            .get(3)
            .map(|f| f.split_whitespace().map(|t| parse_token(t, line)).collect::<Result<Vec<_>, _>>())
            .transpose()?
            .unwrap_or_default();
        let label = fields[0].trim();
        if label.is_empty() {
            return Err(parse_error(line, "empty genome label"));
        }
        let chromosome = Chromosome { id: fields[1].trim().to_string(), shape, genes };
        match order.iter_mut().find(|(l, _)| l == label) {
            Some((_, chromosomes)) => chromosomes.push(chromosome),
            None => order.push((label.to_string(), vec![chromosome])),
        }
    }
    order.into_iter().map(|(label, chromosomes)| Genome::build(label, chromosomes)).collect()
}

/// Parses a file that must contain exactly one genome.
pub fn parse_genome(text: &str) -> Result<Genome, GenomeError> {
    let mut genomes = parse_genomes(text)?;
    if genomes.len() != 1 {
        return Err(GenomeError::GenomeCount(genomes.len()));
    }
    Ok(genomes.remove(0))
}

pub fn write_genome(genome: &Genome) -> String {
    let mut out = String::new();
    for chromosome in genome.chromosomes() {
        let shape = match chromosome.shape {
            Shape::Linear => "linear",
            Shape::Circular => "circular",
        };
        let _ = write!(out, "{}\t{}\t{}\t", genome.label(), chromosome.id, shape);
        for (k, gene) in chromosome.genes.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push(gene.orientation.sign());
            out.push_str(&gene.name);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_skips_comments() {
        let text = "# two chromosomes\nG\tc1\tlinear\t+a -b\n\nG\tc2\tcircular\t+c\n";
        let g = parse_genome(text).unwrap();
        assert_eq!(g.chromosomes().len(), 2);
        assert_eq!(g.gene_count(), 3);
        assert_eq!(write_genome(&g), "G\tc1\tlinear\t+a -b\nG\tc2\tcircular\t+c\n");
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_genome("G\tc1\tlinear\t+a\nG\tc2\tcurly\t+b\n").unwrap_err();
        assert_eq!(err, GenomeError::Parse { line: 2, message: "unknown chromosome shape `curly`".into() });
        let err = parse_genome("G\tc1\tlinear\ta\n").unwrap_err();
        assert!(matches!(err, GenomeError::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_linear_round_trips() {
        let text = "G\tc1\tlinear\t\n";
        assert_eq!(write_genome(&parse_genome(text).unwrap()), text);
    }

    #[test]
    fn whitespace_is_canonicalized() {
        let g = parse_genome("G\tc1\tlinear\t+a    -b \n").unwrap();
        assert_eq!(write_genome(&g), "G\tc1\tlinear\t+a -b\n");
    }

    fn arb_chromosomes() -> impl Strategy<Value = Vec<(bool, Vec<bool>)>> {
        prop::collection::vec((any::<bool>(), prop::collection::vec(any::<bool>(), 0..6)), 1..4)
    }

    proptest! {
        #[test]
        fn serialization_round_trip(spec in arb_chromosomes()) {
            let mut counter = 0;
            let chromosomes: Vec<Chromosome> = spec
                .iter()
                .enumerate()
                .filter(|(_, (linear, genes))| *linear || !genes.is_empty())
                .map(|(c, (linear, genes))| {
                    let genes = genes
                        .iter()
                        .map(|&fwd| {
                            counter += 1;
                            let o = if fwd { Orientation::Forward } else { Orientation::Reverse };
                            SignedGene::new(format!("g{counter}"), o)
                        })
                        .collect();
                    Chromosome {
                        id: format!("chr{c}"),
                        shape: if *linear { Shape::Linear } else { Shape::Circular },
                        genes,
                    }
                })
                .collect();
            prop_assume!(!chromosomes.is_empty());
            let genome = Genome::build("X", chromosomes).unwrap();
            let text = write_genome(&genome);
            let back = parse_genome(&text).unwrap();
            prop_assert_eq!(&back, &genome);
            prop_assert_eq!(write_genome(&back), text);
        }

        #[test]
        fn degree_and_sum_properties(spec in arb_chromosomes()) {
            let mut counter = 0;
            let chromosomes: Vec<Chromosome> = spec
                .iter()
                .enumerate()
                .filter(|(_, (linear, genes))| *linear || !genes.is_empty())
                .map(|(c, (linear, genes))| Chromosome {
                    id: format!("c{c}"),
                    shape: if *linear { Shape::Linear } else { Shape::Circular },
                    genes: genes.iter().map(|&f| {
                        counter += 1;
                        SignedGene::new(format!("x{counter}"), if f { Orientation::Forward } else { Orientation::Reverse })
                    }).collect(),
                })
                .collect();
            let expected: usize = chromosomes
                .iter()
                .map(|c| match c.shape { Shape::Linear => c.genes.len() + 1, Shape::Circular => c.genes.len() })
                .sum();
            let genome = Genome::build("X", chromosomes).unwrap();
            let adj = genome.adjacencies();
            prop_assert_eq!(adj.len(), expected);
            let mut degree = std::collections::HashMap::new();
            for (a, b) in &adj {
                *degree.entry(*a).or_insert(0) += 1;
                *degree.entry(*b).or_insert(0) += 1;
            }
            for (g, gene) in genome.genes().iter().enumerate() {
                let ends: &[crate::genome::End] = if gene.telomere {
                    &[crate::genome::End::Telomere]
                } else {
                    &[crate::genome::End::Head, crate::genome::End::Tail]
                };
                for &end in ends {
                    let d = degree.get(&crate::genome::ExtremityRef::new(g, end)).copied().unwrap_or(0);
                    prop_assert_eq!(d, 1);
                }
            }
        }
    }
}

//! Tripartite gene similarity graph and its `.sim` file format.
//!
//! Scores live in `[0, 1]` and are only defined between genes of different
//! genomes. Telomeres carry an implicit similarity of 1 to every telomere of
//! another genome and 0 to every gene.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::genome::GeneId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("similarity between {0} and {1} is within one genome")]
    SameGenome(String, String),
    #[error("similarity {score} between {a} and {b} is outside [0, 1]")]
    OutOfRange { a: String, b: String, score: f64 },
    #[error("similarities involving telomere {0} are fixed")]
    Telomere(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityGraph {
    edges: BTreeMap<(GeneId, GeneId), f64>,
    neighbors: HashMap<GeneId, Vec<(GeneId, f64)>>,
}

fn key(a: GeneId, b: GeneId) -> (GeneId, GeneId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimilarityGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `sigma(a, b)`. A zero score removes the edge.
    pub fn insert(&mut self, a: GeneId, b: GeneId, score: f64) -> Result<(), SimilarityError> {
        if a.genome == b.genome {
            return Err(SimilarityError::SameGenome(a.to_string(), b.to_string()));
        }
        for g in [&a, &b] {
            if g.is_telomere() {
                return Err(SimilarityError::Telomere(g.to_string()));
            }
        }
        if !(0.0..=1.0).contains(&score) || score.is_nan() {
            return Err(SimilarityError::OutOfRange { a: a.to_string(), b: b.to_string(), score });
        }
        let k = key(a, b);
        if score == 0.0 {
            self.edges.remove(&k);
        } else {
            self.edges.insert(k, score);
        }
        self.reindex();
        Ok(())
    }

    /// Builds a graph from many edges at once; later duplicates win.
    pub fn from_edges(edges: impl IntoIterator<Item = (GeneId, GeneId, f64)>) -> Result<Self, SimilarityError> {
        let mut graph = Self::new();
        for (a, b, score) in edges {
            if a.genome == b.genome {
                return Err(SimilarityError::SameGenome(a.to_string(), b.to_string()));
            }
            for g in [&a, &b] {
                if g.is_telomere() {
                    return Err(SimilarityError::Telomere(g.to_string()));
                }
            }
            if !(0.0..=1.0).contains(&score) || score.is_nan() {
                return Err(SimilarityError::OutOfRange { a: a.to_string(), b: b.to_string(), score });
            }
            let k = key(a, b);
            if score == 0.0 {
                graph.edges.remove(&k);
            } else {
                graph.edges.insert(k, score);
            }
        }
        graph.reindex();
        Ok(graph)
    }

    fn reindex(&mut self) {
        self.neighbors.clear();
        for ((a, b), &s) in &self.edges {
            self.neighbors.entry(a.clone()).or_default().push((b.clone(), s));
            self.neighbors.entry(b.clone()).or_default().push((a.clone(), s));
        }
    }

    pub fn get(&self, a: &GeneId, b: &GeneId) -> f64 {
        if a.genome == b.genome {
            return 0.0;
        }
        match (a.is_telomere(), b.is_telomere()) {
            (true, true) => 1.0,
            (false, false) => {
                let k = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                self.edges.get(&k).copied().unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }

    /// Explicit (gene-gene) neighbours of `gene`, in id order.
    pub fn neighbors(&self, gene: &GeneId) -> &[(GeneId, f64)] {
        self.neighbors.get(gene).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Explicit edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&GeneId, &GeneId, f64)> {
        self.edges.iter().map(|((a, b), &s)| (a, b, s))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Keeps only edges whose endpoints both satisfy `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&GeneId) -> bool) {
        self.edges.retain(|(a, b), _| keep(a) && keep(b));
        self.reindex();
    }

    pub fn parse(text: &str) -> Result<Self, SimilarityError> {
        let mut edges = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(SimilarityError::Parse {
                    line,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let gene = |s: &str| {
                GeneId::parse_qualified(s.trim()).ok_or_else(|| SimilarityError::Parse {
                    line,
                    message: format!("`{s}` is not a genome:gene token"),
                })
            };
            let a = gene(fields[0])?;
            let b = gene(fields[1])?;
            let score: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| SimilarityError::Parse { line, message: format!("bad score `{}`", fields[2]) })?;
            if !(0.0..=1.0).contains(&score) {
                return Err(SimilarityError::Parse { line, message: format!("score {score} outside [0, 1]") });
            }
            if a.genome == b.genome {
                return Err(SimilarityError::Parse { line, message: format!("{a} and {b} share a genome") });
            }
            edges.push((a, b, score));
        }
        Self::from_edges(edges)
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for (a, b, s) in self.edges() {
            let _ = writeln!(out, "{a}\t{b}\t{s}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> GeneId {
        GeneId::parse_qualified(s).unwrap()
    }

    #[test]
    fn symmetric_and_defaults() {
        let mut sigma = SimilarityGraph::new();
        sigma.insert(id("G:a"), id("H:b"), 0.5).unwrap();
        assert_eq!(sigma.get(&id("H:b"), &id("G:a")), 0.5);
        assert_eq!(sigma.get(&id("G:a"), &id("I:c")), 0.0);
        assert_eq!(sigma.get(&id("G:@1.L"), &id("H:@7.R")), 1.0);
        assert_eq!(sigma.get(&id("G:@1.L"), &id("H:b")), 0.0);
        assert_eq!(sigma.get(&id("G:@1.L"), &id("G:@1.R")), 0.0);
    }

    #[test]
    fn rejects_bad_edges() {
        let mut sigma = SimilarityGraph::new();
        assert!(sigma.insert(id("G:a"), id("G:b"), 0.5).is_err());
        assert!(sigma.insert(id("G:a"), id("H:b"), 1.5).is_err());
        assert!(sigma.insert(id("G:@1.L"), id("H:b"), 0.5).is_err());
    }

    #[test]
    fn file_round_trip() {
        let text = "G:a\tH:b\t0.5\nG:a\tI:c\t1\nH:b\tI:c\t0.25\n";
        let sigma = SimilarityGraph::parse(text).unwrap();
        assert_eq!(sigma.edge_count(), 3);
        assert_eq!(sigma.write(), text);
        let err = SimilarityGraph::parse("G:a\tH:b\n").unwrap_err();
        assert!(matches!(err, SimilarityError::Parse { line: 1, .. }));
    }
}

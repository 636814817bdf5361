//! Turns tabular local-alignment hits into a similarity graph.
//!
//! Hits are read from the 12-column tabular format (query, subject, ...,
//! e-value in column 11, bitscore in column 12). Cross-genome hits pass a
//! stringency filter and are then weighted by the relative reciprocal
//! bitscore:
//!
//! `sigma(g, h) = (bs(g->h) + bs(h->g)) / (bs(g->g) + bs(h->h))`
//!
//! A pair with only one direction present counts that direction twice unless
//! reciprocity is required.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use log::debug;
use thiserror::Error;

use crate::genome::{GeneId, Genome};
use crate::similarity::{SimilarityError, SimilarityGraph};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown gene id `{id}`")]
    UnknownGene { line: usize, id: String },
    #[error("missing self-hit bitscore for: {}", .0.join(", "))]
    MissingSelfHit(Vec<String>),
    #[error("stringency factor {0} outside [0, 1]")]
    BadFactor(f64),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentHit {
    pub query: GeneId,
    pub subject: GeneId,
    pub bitscore: f64,
    pub evalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub evalue_max: f64,
    pub f: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { evalue_max: 1e-5, f: 0.5 }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(0.0..=1.0).contains(&self.f) {
            return Err(IngestError::BadFactor(self.f));
        }
        Ok(())
    }
}

/// Resolves gene tokens of hit files to qualified ids.
///
/// Tokens may be qualified (`genome:gene`) or bare names that are unique
/// across the declared genomes. Without declared genomes only qualified
/// tokens are accepted.
#[derive(Debug, Default, Clone)]
pub struct GeneUniverse {
    qualified: BTreeSet<GeneId>,
    bare: HashMap<String, Option<GeneId>>,
}

impl GeneUniverse {
    pub fn open() -> Self {
        Self::default()
    }

    pub fn from_genomes<'a>(genomes: impl IntoIterator<Item = &'a Genome>) -> Self {
        let mut universe = Self::default();
        for genome in genomes {
            for (idx, gene) in genome.genes().iter().enumerate() {
                if gene.telomere {
                    continue;
                }
                let id = genome.gene_id(idx);
                universe
                    .bare
                    .entry(gene.name.clone())
                    .and_modify(|slot| *slot = None)
                    .or_insert_with(|| Some(id.clone()));
                universe.qualified.insert(id);
            }
        }
        universe
    }

    pub fn is_open(&self) -> bool {
        self.qualified.is_empty()
    }

    pub fn resolve(&self, token: &str) -> Option<GeneId> {
        if let Some(id) = GeneId::parse_qualified(token) {
            if self.is_open() || self.qualified.contains(&id) {
                return Some(id);
            }
        }
        self.bare.get(token).cloned().flatten()
    }
}

/// Reads tabular hits. With `params`, hits above the e-value cut-off are
/// dropped while parsing.
pub fn parse_hits<R: BufRead>(
    reader: R,
    universe: &GeneUniverse,
    params: Option<&FilterParams>,
) -> Result<Vec<AlignmentHit>, IngestError> {
    let mut hits = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 12 {
            return Err(IngestError::Malformed {
                line: line_no,
                message: format!("expected 12 tab-separated columns, found {}", fields.len()),
            });
        }
        let resolve = |token: &str| {
            universe
                .resolve(token.trim())
                .ok_or_else(|| IngestError::UnknownGene { line: line_no, id: token.trim().to_string() })
        };
        let number = |idx: usize, what: &str| -> Result<f64, IngestError> {
            fields[idx]
                .trim()
                .parse::<f64>()
                .map_err(|_| IngestError::Malformed { line: line_no, message: format!("bad {what} `{}`", fields[idx]) })
        };
        let query = resolve(fields[0])?;
        let subject = resolve(fields[1])?;
        let evalue = number(10, "e-value")?;
        let bitscore = number(11, "bitscore")?;
        if evalue < 0.0 || bitscore <= 0.0 {
            return Err(IngestError::Malformed {
                line: line_no,
                message: "e-value must be non-negative and bitscore positive".into(),
            });
        }
        if let Some(p) = params {
            if evalue > p.evalue_max {
                continue;
            }
        }
        hits.push(AlignmentHit { query, subject, bitscore, evalue });
    }
    Ok(hits)
}

fn is_cross(hit: &AlignmentHit) -> bool {
    hit.query.genome != hit.subject.genome
}

/// Keeps a cross-genome hit `g -> h` iff its bitscore is at least `f` times
/// the best bitscore of any hit from `h` into the genome of `g`. Self and
/// intra-genome hits pass through untouched.
pub fn stringency_filter(hits: &[AlignmentHit], f: f64) -> Vec<AlignmentHit> {
    let mut best: HashMap<(&GeneId, &str), f64> = HashMap::new();
    for hit in hits.iter().filter(|h| is_cross(h)) {
        let slot = best.entry((&hit.query, hit.subject.genome.as_str())).or_insert(0.0);
        *slot = slot.max(hit.bitscore);
    }
    hits.iter()
        .filter(|hit| {
            if !is_cross(hit) {
                return true;
            }
            let reference = best.get(&(&hit.subject, hit.query.genome.as_str())).copied().unwrap_or(0.0);
            hit.bitscore >= f * reference
        })
        .cloned()
        .collect()
}

/// Relative reciprocal bitscore weights over already filtered hits.
pub fn rrbs_weights(hits: &[AlignmentHit], require_reciprocal: bool) -> Result<SimilarityGraph, IngestError> {
    let mut self_score: HashMap<&GeneId, f64> = HashMap::new();
    let mut directed: BTreeMap<(&GeneId, &GeneId), f64> = BTreeMap::new();
    for hit in hits {
        if hit.query == hit.subject {
            let slot = self_score.entry(&hit.query).or_insert(0.0);
            *slot = slot.max(hit.bitscore);
        } else if is_cross(hit) {
            let slot = directed.entry((&hit.query, &hit.subject)).or_insert(0.0);
            *slot = slot.max(hit.bitscore);
        }
    }
    type Directions = (Option<f64>, Option<f64>);
    let mut pairs: BTreeMap<(&GeneId, &GeneId), Directions> = BTreeMap::new();
    for (&(q, s), &bs) in &directed {
        if q < s {
            pairs.entry((q, s)).or_default().0 = Some(bs);
        } else {
            pairs.entry((s, q)).or_default().1 = Some(bs);
        }
    }
    let mut missing = BTreeSet::new();
    let mut edges = Vec::new();
    for (&(a, b), &(fwd, rev)) in &pairs {
        let numerator = match (fwd, rev) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) | (None, Some(x)) if !require_reciprocal => 2.0 * x,
            _ => {
                debug!("dropping one-directional pair {a} {b}");
                continue;
            }
        };
        let (sa, sb) = (self_score.get(a), self_score.get(b));
        if sa.is_none() {
            missing.insert(a.to_string());
        }
        if sb.is_none() {
            missing.insert(b.to_string());
        }
        if let (Some(sa), Some(sb)) = (sa, sb) {
            let score = (numerator / (sa + sb)).clamp(0.0, 1.0);
            edges.push((a.clone(), b.clone(), score));
        }
    }
    if !missing.is_empty() {
        return Err(IngestError::MissingSelfHit(missing.into_iter().collect()));
    }
    Ok(SimilarityGraph::from_edges(edges)?)
}

/// Full ingestion: e-value cut, stringency filter, RRBS weighting.
pub fn build_similarity_graph(
    hits: Vec<AlignmentHit>,
    params: &FilterParams,
    require_reciprocal: bool,
) -> Result<SimilarityGraph, IngestError> {
    params.validate()?;
    let hits: Vec<AlignmentHit> = hits.into_iter().filter(|h| h.evalue <= params.evalue_max).collect();
    let retained = stringency_filter(&hits, params.f);
    rrbs_weights(&retained, require_reciprocal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> GeneId {
        GeneId::parse_qualified(s).unwrap()
    }

    fn hit(q: &str, s: &str, bitscore: f64) -> AlignmentHit {
        AlignmentHit { query: id(q), subject: id(s), bitscore, evalue: 0.0 }
    }

    fn row(q: &str, s: &str, evalue: &str, bitscore: &str) -> String {
        format!("{q}\t{s}\t90.0\t100\t10\t0\t1\t100\t1\t100\t{evalue}\t{bitscore}\n")
    }

    #[test]
    fn evalue_threshold_at_parse_time() {
        let text = row("G:a", "H:b", "1e-3", "50") + &row("G:a", "H:c", "0", "40");
        let params = FilterParams::default();
        let hits = parse_hits(text.as_bytes(), &GeneUniverse::open(), Some(&params)).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].subject, id("H:c"));
    }

    #[test]
    fn reciprocal_rows_are_not_merged() {
        let text = row("G:a", "H:b", "0", "50") + &row("H:b", "G:a", "0", "52");
        let hits = parse_hits(text.as_bytes(), &GeneUniverse::open(), None).unwrap();
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn parse_errors_carry_context() {
        let err = parse_hits("G:a\tH:b\t1\n".as_bytes(), &GeneUniverse::open(), None).unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 1, .. }));
        let genome = crate::genome::parse_genome("G\t1\tcircular\t+a\n").unwrap();
        let universe = GeneUniverse::from_genomes([&genome]);
        let err = parse_hits(row("a", "zz", "0", "1").as_bytes(), &universe, None).unwrap_err();
        match err {
            IngestError::UnknownGene { line, id } => {
                assert_eq!(line, 1);
                assert_eq!(id, "zz");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bare_names_resolve_against_genomes() {
        let g = crate::genome::parse_genome("G\t1\tcircular\t+a +shared\n").unwrap();
        let h = crate::genome::parse_genome("H\t1\tcircular\t+b +shared\n").unwrap();
        let universe = GeneUniverse::from_genomes([&g, &h]);
        assert_eq!(universe.resolve("a"), Some(id("G:a")));
        assert_eq!(universe.resolve("H:shared"), Some(id("H:shared")));
        assert_eq!(universe.resolve("shared"), None);
        assert_eq!(universe.resolve("I:x"), None);
    }

    #[test]
    fn stringency_examples() {
        // 40 < 0.5 * 100: dropped.
        let hits = vec![hit("G:g", "H:h", 40.0), hit("H:h", "G:g2", 100.0), hit("H:h", "G:g", 60.0)];
        let kept = stringency_filter(&hits, 0.5);
        assert!(!kept.contains(&hits[0]));
        assert!(kept.contains(&hits[1]));
        assert_eq!(stringency_filter(&hits, 0.0).len(), 3);
        // f = 1 with g the unique best partner of h: equality keeps it.
        let hits = vec![hit("G:g", "H:h", 80.0), hit("H:h", "G:g", 80.0), hit("H:h", "G:x", 10.0)];
        let kept = stringency_filter(&hits, 1.0);
        assert!(kept.contains(&hits[0]));
        assert!(stringency_filter(&[], 0.5).is_empty());
    }

    #[test]
    fn rrbs_examples() {
        let selfs = |a: f64, b: f64| vec![hit("G:g", "G:g", a), hit("H:h", "H:h", b)];
        let mut hits = selfs(100.0, 100.0);
        hits.extend([hit("G:g", "H:h", 100.0), hit("H:h", "G:g", 100.0)]);
        assert_eq!(rrbs_weights(&hits, false).unwrap().get(&id("G:g"), &id("H:h")), 1.0);

        let mut hits = selfs(100.0, 100.0);
        hits.extend([hit("G:g", "H:h", 50.0), hit("H:h", "G:g", 50.0)]);
        assert_eq!(rrbs_weights(&hits, false).unwrap().get(&id("G:g"), &id("H:h")), 0.5);

        let mut hits = selfs(100.0, 140.0);
        hits.push(hit("G:g", "H:h", 60.0));
        assert_eq!(rrbs_weights(&hits, false).unwrap().get(&id("G:g"), &id("H:h")), 0.5);
        assert_eq!(rrbs_weights(&hits, true).unwrap().edge_count(), 0);
    }

    #[test]
    fn rrbs_missing_self_hit() {
        let hits = vec![hit("G:g", "H:h", 10.0), hit("G:g", "G:g", 10.0)];
        match rrbs_weights(&hits, false) {
            Err(IngestError::MissingSelfHit(genes)) => assert_eq!(genes, vec!["H:h".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }
}

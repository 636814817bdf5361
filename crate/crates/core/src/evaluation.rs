//! Scoring predicted ortholog triples against true ortholog pairs or
//! reference ortholog groups, and robustness across runs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::genome::GeneId;

pub type Triple = [GeneId; 3];
/// Unordered gene pair stored with the smaller id first.
pub type Pair = (GeneId, GeneId);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("predicted gene {0} is not in the truth universe")]
    UnknownGene(String),
    #[error("robustness needs at least 2 runs, got {0}")]
    TooFewRuns(usize),
}

pub fn pair(a: GeneId, b: GeneId) -> Pair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The three pairs induced by a triple.
pub fn triple_pairs(t: &Triple) -> [Pair; 3] {
    [pair(t[0].clone(), t[1].clone()), pair(t[0].clone(), t[2].clone()), pair(t[1].clone(), t[2].clone())]
}

fn parse_gene(field: &str, line: usize) -> Result<GeneId, EvalError> {
    GeneId::parse_qualified(field.trim())
        .ok_or_else(|| EvalError::Parse { line, message: format!("`{field}` is not a genome:gene token") })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r').split('\t').collect()))
}

/// True ortholog pairs and the set of genes they mention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TruthPairs {
    pub pairs: BTreeSet<Pair>,
    pub universe: BTreeSet<GeneId>,
}

impl TruthPairs {
    pub fn new(pairs: impl IntoIterator<Item = (GeneId, GeneId)>) -> Self {
        let mut out = Self::default();
        for (a, b) in pairs {
            out.universe.insert(a.clone());
            out.universe.insert(b.clone());
            out.pairs.insert(pair(a, b));
        }
        out
    }

    /// Parses `geneA<TAB>geneB` lines of qualified gene ids.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut pairs = Vec::new();
        for (line, fields) in data_lines(text) {
            if fields.len() != 2 {
                return Err(EvalError::Parse { line, message: format!("expected 2 fields, found {}", fields.len()) });
            }
            pairs.push((parse_gene(fields[0], line)?, parse_gene(fields[1], line)?));
        }
        Ok(Self::new(pairs))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub agree: usize,
    pub compatible: usize,
    pub disagree: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.agree + self.compatible + self.disagree
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    /// Set when a ratio was 0/0 and reported as 1.0.
    pub precision_vacuous: bool,
    pub recall_vacuous: bool,
    /// Predicted pairs skipped because a gene is outside the truth universe.
    pub ignored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_counts: Option<ClassCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robustness: Option<f64>,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (1.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Precision and recall of predicted pairs against the truth. Pairs with a
/// gene outside the truth universe are an error when `strict`, otherwise
/// skipped and counted in `ignored`.
pub fn precision_recall_pairs(
    predicted: impl IntoIterator<Item = Pair>,
    truth: &TruthPairs,
    strict: bool,
) -> Result<EvalReport, EvalError> {
    let mut seen = BTreeSet::new();
    let mut ignored = 0;
    for (a, b) in predicted {
        if let Some(unknown) = [&a, &b].into_iter().find(|g| !truth.universe.contains(*g)) {
            if strict {
                return Err(EvalError::UnknownGene(unknown.to_string()));
            }
            log::debug!("ignoring pair with unknown gene {unknown}");
            ignored += 1;
            continue;
        }
        seen.insert(pair(a, b));
    }
    let tp = seen.iter().filter(|p| truth.pairs.contains(*p)).count();
    let fp = seen.len() - tp;
    let fn_ = truth.pairs.len() - tp;
    let (precision, precision_vacuous) = ratio(tp, tp + fp);
    let (recall, recall_vacuous) = ratio(tp, tp + fn_);
    Ok(EvalReport { tp, fp, fn_, precision, recall, precision_vacuous, recall_vacuous, ignored, ..Default::default() })
}

/// Precision and recall of the pairs induced by predicted triples.
pub fn precision_recall(predicted: &[Triple], truth: &TruthPairs, strict: bool) -> Result<EvalReport, EvalError> {
    precision_recall_pairs(predicted.iter().flat_map(triple_pairs), truth, strict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Agree,
    Compatible,
    Disagree,
}

/// Reference ortholog groups: a group label per gene.
#[derive(Debug, Clone, Default)]
pub struct TruthMap {
    group: HashMap<GeneId, String>,
    members: HashMap<String, Vec<GeneId>>,
}

impl TruthMap {
    pub fn new(entries: impl IntoIterator<Item = (GeneId, String)>) -> Self {
        let mut out = Self::default();
        for (gene, label) in entries {
            out.members.entry(label.clone()).or_default().push(gene.clone());
            out.group.insert(gene, label);
        }
        out
    }

    /// Parses `gene<TAB>group_id` lines.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut entries = Vec::new();
        for (line, fields) in data_lines(text) {
            if fields.len() != 2 {
                return Err(EvalError::Parse { line, message: format!("expected 2 fields, found {}", fields.len()) });
            }
            entries.push((parse_gene(fields[0], line)?, fields[1].trim().to_string()));
        }
        Ok(Self::new(entries))
    }

    pub fn group(&self, gene: &GeneId) -> Option<&str> {
        self.group.get(gene).map(String::as_str)
    }

    /// Whether `x`'s group holds a gene of `y`'s genome other than `y`.
    fn contradicts(&self, x: &GeneId, y: &GeneId) -> bool {
        let Some(label) = self.group(x) else { return false };
        if self.group(y) == Some(label) {
            return false;
        }
        self.members[label].iter().any(|g| g.genome == y.genome && g != y)
    }

    /// Agree if all three genes share a group; disagree if, for some
    /// ordered pair `(x, y)` in different groups, the group of `x` contains
    /// another gene of `y`'s genome; compatible otherwise.
    pub fn classify(&self, triple: &Triple) -> Class {
        let groups: Vec<Option<&str>> = triple.iter().map(|g| self.group(g)).collect();
        if groups[0].is_some() && groups.iter().all(|g| *g == groups[0]) {
            return Class::Agree;
        }
        for x in 0..3 {
            for y in 0..3 {
                if x != y && self.contradicts(&triple[x], &triple[y]) {
                    return Class::Disagree;
                }
            }
        }
        Class::Compatible
    }
}

/// Classifies every triple and tallies the classes.
pub fn classify_vs_reference(predicted: &[Triple], map: &TruthMap) -> (Vec<Class>, ClassCounts) {
    let classes: Vec<Class> = predicted.iter().map(|t| map.classify(t)).collect();
    let mut counts = ClassCounts::default();
    for c in &classes {
        match c {
            Class::Agree => counts.agree += 1,
            Class::Compatible => counts.compatible += 1,
            Class::Disagree => counts.disagree += 1,
        }
    }
    (classes, counts)
}

/// Pairs predicted by one run between two fixed genomes, with the genes
/// the run could have paired (`None`: every gene).
#[derive(Debug, Clone, Default)]
pub struct PairRun {
    pub pairs: BTreeSet<Pair>,
    pub universe: Option<BTreeSet<GeneId>>,
}

impl PairRun {
    /// Pairs of `triples` between genomes `x` and `y`.
    pub fn from_triples(triples: &[Triple], x: &str, y: &str) -> Self {
        let pairs = triples
            .iter()
            .flat_map(triple_pairs)
            .filter(|(a, b)| (a.genome == x && b.genome == y) || (a.genome == y && b.genome == x))
            .collect();
        Self { pairs, universe: None }
    }

    fn covers(&self, p: &Pair) -> bool {
        self.universe.as_ref().is_none_or(|u| u.contains(&p.0) && u.contains(&p.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Robustness {
    pub pairs: usize,
    pub robust: usize,
    pub percentage: f64,
}

/// Share of pairs predicted in at least one run that are predicted in
/// every run covering both genes, as a percentage (100 when no pairs).
pub fn robustness(runs: &[PairRun]) -> Result<Robustness, EvalError> {
    if runs.len() < 2 {
        return Err(EvalError::TooFewRuns(runs.len()));
    }
    let all: BTreeSet<&Pair> = runs.iter().flat_map(|r| r.pairs.iter()).collect();
    let robust = all.iter().filter(|p| runs.iter().filter(|r| r.covers(p)).all(|r| r.pairs.contains(**p))).count();
    let percentage = if all.is_empty() { 100.0 } else { 100.0 * robust as f64 / all.len() as f64 };
    Ok(Robustness { pairs: all.len(), robust, percentage })
}

/// Mean and population variance; `None` for an empty slice.
pub fn mean_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, variance))
}

/// Groups genes of the given triples into labelled sets, one per triple;
/// used to evaluate a truth against itself.
pub fn groups_from_triples(triples: &[Triple]) -> TruthMap {
    let mut entries = BTreeMap::new();
    for (k, t) in triples.iter().enumerate() {
        for g in t {
            entries.insert(g.clone(), format!("grp{k}"));
        }
    }
    TruthMap::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> GeneId {
        GeneId::parse_qualified(s).unwrap()
    }

    fn triple(a: &str, b: &str, c: &str) -> Triple {
        [id(a), id(b), id(c)]
    }

    #[test]
    fn identical_predictions_are_perfect() {
        let t = vec![triple("G:a", "H:a", "I:a"), triple("G:b", "H:b", "I:b")];
        let truth = TruthPairs::new(t.iter().flat_map(triple_pairs));
        let report = precision_recall(&t, &truth, true).unwrap();
        assert_eq!((report.precision, report.recall), (1.0, 1.0));
        assert_eq!((report.tp, report.fp, report.fn_), (6, 0, 0));
    }

    #[test]
    fn empty_predictions_are_vacuous() {
        let truth = TruthPairs::new([(id("G:a"), id("H:a"))]);
        let report = precision_recall(&[], &truth, false).unwrap();
        assert_eq!(report.precision, 1.0);
        assert!(report.precision_vacuous);
        assert_eq!(report.recall, 0.0);
        assert!(!report.recall_vacuous);
    }

    #[test]
    fn hand_counted_pairs() {
        let truth = TruthPairs::new([
            (id("G:a"), id("H:a")),
            (id("G:b"), id("H:b")),
            (id("G:c"), id("H:c")),
            (id("G:d"), id("H:d")),
        ]);
        let report = precision_recall_pairs([(id("H:a"), id("G:a")), (id("G:a"), id("H:b"))], &truth, true).unwrap();
        assert_eq!(report.precision, 0.5);
        assert_eq!(report.recall, 0.25);
    }

    #[test]
    fn unknown_genes_follow_strictness() {
        let truth = TruthPairs::new([(id("G:a"), id("H:a"))]);
        let predicted = [(id("G:a"), id("H:zz"))];
        assert_eq!(precision_recall_pairs(predicted.clone(), &truth, true), Err(EvalError::UnknownGene("H:zz".into())));
        assert_eq!(precision_recall_pairs(predicted, &truth, false).unwrap().ignored, 1);
    }

    #[test]
    fn classification_rules() {
        let map = TruthMap::parse("G:a\t1\nH:a\t1\nI:a\t1\nG:b\t2\nH:b\t2\nI:c\t3\n").unwrap();
        assert_eq!(map.classify(&triple("G:a", "H:a", "I:a")), Class::Agree);
        // G:a's group holds H:a, another gene of H than H:b.
        assert_eq!(map.classify(&triple("G:a", "H:b", "I:x")), Class::Disagree);
        assert_eq!(map.classify(&triple("G:x", "H:y", "I:z")), Class::Compatible);
        // Group 3 has no cross-genome members, group 2 has no I gene.
        assert_eq!(map.classify(&triple("G:b", "H:b", "I:c")), Class::Compatible);
        // Only the reverse direction triggers: I:a's group holds G:a.
        assert_eq!(map.classify(&triple("G:q", "H:q", "I:a")), Class::Disagree);
    }

    #[test]
    fn robustness_examples() {
        let run = |pairs: &[(&str, &str)]| PairRun {
            pairs: pairs.iter().map(|(a, b)| pair(id(a), id(b))).collect(),
            universe: None,
        };
        let same = run(&[("G:a", "H:a"), ("G:b", "H:b")]);
        assert_eq!(robustness(&[same.clone(), same.clone()]).unwrap().percentage, 100.0);
        let half = robustness(&[same.clone(), run(&[("G:a", "H:a")])]).unwrap();
        assert_eq!((half.pairs, half.robust), (2, 1));
        let three = [
            run(&[("G:a", "H:a"), ("G:b", "H:b"), ("G:c", "H:c"), ("G:d", "H:d")]),
            run(&[("G:a", "H:a"), ("G:b", "H:b"), ("G:c", "H:c")]),
            run(&[("G:a", "H:a"), ("G:b", "H:b"), ("G:c", "H:c")]),
        ];
        assert_eq!(robustness(&three).unwrap().percentage, 75.0);
        assert_eq!(robustness(&three[..1]), Err(EvalError::TooFewRuns(1)));

        let mut narrow = run(&[("G:a", "H:a")]);
        narrow.universe = Some([id("G:a"), id("H:a")].into());
        let wide = run(&[("G:a", "H:a"), ("G:b", "H:b")]);
        assert_eq!(robustness(&[narrow, wide]).unwrap().percentage, 100.0);
    }

    #[test]
    fn mean_and_population_variance() {
        assert_eq!(mean_variance(&[1.0, 3.0]), Some((2.0, 1.0)));
        assert_eq!(mean_variance(&[]), None);
    }

    #[test]
    fn truth_against_itself() {
        let t = vec![triple("G:a", "H:a", "I:a"), triple("G:b", "H:b", "I:b")];
        let (classes, counts) = classify_vs_reference(&t, &groups_from_triples(&t));
        assert!(classes.iter().all(|c| *c == Class::Agree));
        assert_eq!(counts.total(), 2);
    }
}

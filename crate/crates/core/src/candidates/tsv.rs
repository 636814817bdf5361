//! Tabular dump of candidate genes and conserved candidate adjacencies.
//!
//! Two record kinds share one file, distinguished by the first column:
//!
//! ```text
//! gene       <id> <G gene> <H gene> <I gene> <triple_score> <gene_score>
//! adjacency  <id> <gene id> <end> <gene id> <end> <conserved_in> <factor> <weight>
//! ```
//!
//! `conserved_in` is a comma-separated list of genome labels.

use std::fmt::Write as _;

use crate::instance::Instance;

use super::CandidateSet;

pub fn write_candidates_tsv(set: &CandidateSet, instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("#gene\tid\tG\tH\tI\ttriple_score\tgene_score\n");
    for (m, gene) in set.genes.iter().enumerate() {
        let [g, h, i] = set.member_names(instance, m);
        let _ = writeln!(out, "gene\t{m}\t{g}\t{h}\t{i}\t{}\t{}", gene.triple_score, gene.gene_score);
    }
    out.push_str("#adjacency\tid\tfirst\tfirst_end\tsecond\tsecond_end\tconserved_in\tfactor\tweight\n");
    for (k, adj) in set.adjacencies.iter().enumerate() {
        let _ = writeln!(
            out,
            "adjacency\t{k}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            adj.first.gene,
            adj.first.end,
            adj.second.gene,
            adj.second.end,
            adj.conserved.labels(instance.labels()).join(","),
            adj.factor,
            adj.weight()
        );
    }
    out
}

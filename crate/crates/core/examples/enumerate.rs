//! Enumerates candidate median genes and conserved adjacencies of a small
//! hand-built instance and prints them as a table.

use ffmedian::candidates::{write_candidates_tsv, CandidateSet};
use ffmedian::fixtures::toy_instance;

fn main() {
    let instance = toy_instance();
    let set = CandidateSet::build(&instance);
    println!("{} candidate genes, {} conserved adjacencies", set.genes.len(), set.adjacencies.len());
    print!("{}", write_candidates_tsv(&set, &instance));
}

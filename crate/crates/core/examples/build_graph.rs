//! Builds a similarity graph from tabular alignment hits: e-value cut,
//! stringency filter and relative reciprocal bitscores.

use std::io::Cursor;

use ffmedian::ingestion::{build_similarity_graph, parse_hits, FilterParams, GeneUniverse};

fn main() {
    let row = |q: &str, s: &str, evalue: &str, bits: f64| {
        format!("{q}\t{s}\t90\t100\t1\t0\t1\t100\t1\t100\t{evalue}\t{bits}\n")
    };
    let table = [
        row("G:a", "G:a", "0", 200.0),
        row("H:a", "H:a", "0", 190.0),
        row("H:b", "H:b", "0", 150.0),
        row("G:a", "H:a", "1e-40", 160.0),
        row("H:a", "G:a", "1e-40", 150.0),
        row("G:a", "H:b", "1e-6", 40.0),
        row("H:b", "G:a", "1e-2", 35.0),
    ]
    .concat();
    let params = FilterParams { evalue_max: 1e-5, f: 0.5 };
    let hits = parse_hits(Cursor::new(table), &GeneUniverse::open(), Some(&params)).expect("hits");
    let sigma = build_similarity_graph(hits, &params, false).expect("graph");
    print!("{}", sigma.write());
}

//! Reduces a maximum independent set instance on a degree-3 graph to a
//! median instance, solves it and maps the optimum back to a vertex set.

use ffmedian::hardness::{example_graph, mis_bruteforce, random_bounded_graph, reduce_mis};
use ffmedian::pipeline::{verify_reduction, SolveConfig};

fn main() {
    for graph in [example_graph(), random_bounded_graph(3, 8, 0.4)] {
        let reduction = reduce_mis(&graph).expect("degree-3 graph");
        let check = verify_reduction(&reduction, &SolveConfig::default()).expect("solve");
        let mis = mis_bruteforce(&graph).expect("small graph");
        println!(
            "|V| = {}, |E| = {}: objective {:.3}, objective/2 - 3 = {:.3}, MIS = {}, backmapped {:?}, holds {}",
            check.vertices,
            check.edges,
            check.objective,
            check.value,
            mis.len(),
            check.backmapped,
            check.holds
        );
    }
}

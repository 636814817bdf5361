//! Scores medians of simulated genomes against the known orthology, for
//! increasing evolutionary distance.

use ffmedian::evaluation::{classify_vs_reference, precision_recall, TruthMap, TruthPairs};
use ffmedian::pipeline::{solution_triples, solve_instance, SolveConfig};
use ffmedian::synth::{scrambled_triple, ScrambleParams};

fn main() {
    println!("rate\tprecision\trecall\tagree\tcompatible\tdisagree");
    for rate in [0.0, 0.25, 0.5, 1.0] {
        let triple = scrambled_triple(7, &ScrambleParams { families: 40, rate, ..ScrambleParams::default() });
        let outcome = solve_instance(&triple.instance, &SolveConfig::default()).expect("solve");
        let predicted = solution_triples(&outcome);
        let report = precision_recall(&predicted, &TruthPairs::new(triple.truth.clone()), false).expect("eval");
        // Reference groups: the family is the gene name without genome prefix and copy suffix.
        let groups = TruthMap::new(triple.truth.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).map(|g| {
            let family = g.name[1..].split('_').next().unwrap_or_default().to_string();
            (g, family)
        }));
        let (_, counts) = classify_vs_reference(&predicted, &groups);
        println!(
            "{rate}\t{:.3}\t{:.3}\t{}\t{}\t{}",
            report.precision, report.recall, counts.agree, counts.compatible, counts.disagree
        );
    }
}

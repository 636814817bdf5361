//! Solves a small instance and lists its contiguous ancestral regions.

use ffmedian::pipeline::{solve_instance, SolveConfig};
use ffmedian::synth::{scrambled_triple, ScrambleParams};

fn main() {
    let params = ScrambleParams { families: 24, chromosomes: 3, rate: 0.3, ..ScrambleParams::default() };
    let triple = scrambled_triple(5, &params);
    let outcome = solve_instance(&triple.instance, &SolveConfig::default()).expect("solve");
    println!("objective {:.4}, {} CARs", outcome.solution.objective, outcome.cars.len());
    for (k, car) in outcome.cars.iter().enumerate() {
        let genes: Vec<String> = car
            .genes
            .iter()
            .map(|e| {
                let sign = if e.orientation == ffmedian::genome::Orientation::Forward { '+' } else { '-' };
                format!("{sign}{}", outcome.set.member_names(&outcome.instance, e.gene).join("/"))
            })
            .collect();
        println!("CAR {k} ({}): {}", if car.circular { "circular" } else { "linear" }, genes.join(" "));
    }
}

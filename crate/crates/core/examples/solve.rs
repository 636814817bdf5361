//! Solves a synthetic instance end to end and prints the median report.

use ffmedian::pipeline::{median_report, solve_instance, SolveConfig};
use ffmedian::synth::{scrambled_triple, ScrambleParams};

fn main() {
    let triple = scrambled_triple(1, &ScrambleParams { families: 20, ..ScrambleParams::default() });
    let outcome = solve_instance(&triple.instance, &SolveConfig::default()).expect("solve");
    let report = median_report(&outcome, serde_json::json!({ "example": "solve" }), true);
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
}

//! Writes the 0-1 program of a small instance in LP format.

use ffmedian::candidates::CandidateSet;
use ffmedian::fixtures::toy_instance;
use ffmedian::solver::build_ilp;

fn main() {
    let instance = toy_instance();
    let model = build_ilp(&CandidateSet::build(&instance), &instance);
    eprintln!("{} variables, {} constraints", model.variable_count(), model.constraint_count());
    print!("{}", model.to_lp().write());
}

//! Accepts conflict-free segments and checks that solving the reduced
//! instance recovers the optimum of the full one.

use ffmedian::candidates::CandidateSet;
use ffmedian::segments::{icf_seg, IcfSegOptions};
use ffmedian::solver::{build_ilp, solve_branch_and_bound, BnbOptions};
use ffmedian::synth::random_segment_instance;

fn main() {
    let instance = random_segment_instance(4, 12);
    let set = CandidateSet::build(&instance);
    let result = icf_seg(&set, &instance, &IcfSegOptions::default());
    for seg in &result.accepted {
        let names: Vec<String> = seg.genes.iter().map(|&m| set.member_names(&instance, m).join("/")).collect();
        println!("accepted {} (weight {:.4})", names.join(" "), seg.weight);
    }
    let reduced =
        solve_branch_and_bound(&build_ilp(&result.reduced.set, &instance), &BnbOptions::default()).expect("solve");
    let merged = result.merge(&set, &reduced);
    let full = solve_branch_and_bound(&build_ilp(&set, &instance), &BnbOptions::default()).expect("solve");
    println!(
        "candidates {} -> {}, objective {:.6} (direct {:.6})",
        set.genes.len(),
        result.reduced.set.genes.len(),
        merged.objective,
        full.objective
    );
}

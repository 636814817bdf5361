use ffmedian::candidates::CandidateSet;
use ffmedian::matching::build_gamma;
use ffmedian::segments::{icf_seg, IcfSegOptions};
use ffmedian::solver::{
    brute_force_median, build_ilp, check_solution, close_relative, solve_branch_and_bound, BnbOptions, OracleOptions,
};
use ffmedian::synth::{disjoint_clique_instance, random_segment_instance};

#[test]
fn accepted_adjacencies_lie_in_an_optimal_median() {
    let mut accepted_total = 0;
    let mut rejected_total = 0;
    for seed in 0..100 {
        let instance = random_segment_instance(seed, 12);
        let set = CandidateSet::build(&instance);
        let optimum = brute_force_median(&set, &OracleOptions::default()).unwrap().objective;
        let result = icf_seg(&set, &instance, &IcfSegOptions::default());
        let accepted = result.accepted_adjacencies();
        accepted_total += accepted.len();
        rejected_total += result.rejected;
        for &k in &accepted {
            let forced = brute_force_median(&set, &OracleOptions { forced: vec![k], ..Default::default() }).unwrap();
            assert!(close_relative(forced.objective, optimum, 1e-6), "seed {seed}: adjacency {k} is not safe");
        }
        let joint =
            brute_force_median(&set, &OracleOptions { forced: accepted.clone(), ..Default::default() }).unwrap();
        assert!(close_relative(joint.objective, optimum, 1e-6), "seed {seed}");

        let reduced = brute_force_median(&result.reduced.set, &OracleOptions::default()).unwrap();
        assert!(
            close_relative(result.accepted_weight() + reduced.objective, optimum, 1e-6),
            "seed {seed}: {} + {} vs {optimum}",
            result.accepted_weight(),
            reduced.objective
        );
    }
    assert!(accepted_total >= 50, "only {accepted_total} adjacencies accepted");
    assert!(rejected_total > 0, "rejection branch never exercised");
}

#[test]
fn merged_solution_is_feasible_and_optimal() {
    for seed in 500..560 {
        let instance = random_segment_instance(seed, 12);
        let set = CandidateSet::build(&instance);
        let optimum = brute_force_median(&set, &OracleOptions::default()).unwrap().objective;
        let result = icf_seg(&set, &instance, &IcfSegOptions::default());
        let model = build_ilp(&result.reduced.set, &instance);
        let reduced = solve_branch_and_bound(&model, &BnbOptions::default()).unwrap();
        let merged = result.merge(&set, &reduced);
        check_solution(&set, &merged).unwrap();
        assert!(close_relative(merged.objective, optimum, 1e-6), "seed {seed}");
    }
}

#[test]
fn disjoint_cliques_are_solved_by_one_matching() {
    for seed in 0..20 {
        let instance = disjoint_clique_instance(seed, 12);
        let set = CandidateSet::build(&instance);
        let matching = build_gamma(&set, None).mwm();
        let model = build_ilp(&set, &instance);
        let exact = solve_branch_and_bound(&model, &BnbOptions::default()).unwrap();
        assert!(close_relative(matching.weight, exact.objective, 1e-9), "seed {seed}");
    }
}

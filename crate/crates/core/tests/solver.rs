use ffmedian::candidates::CandidateSet;
use ffmedian::solver::{
    brute_force_median, build_ilp, check_solution, recompute_objective, solve_branch_and_bound, BnbOptions,
    OracleOptions, SolveStatus,
};
use ffmedian::synth::random_oracle_instance;

#[test]
fn branch_and_bound_matches_oracle() {
    for seed in 0..120 {
        let instance = random_oracle_instance(seed, 10);
        let set = CandidateSet::build(&instance);
        let model = build_ilp(&set, &instance);
        let exact = brute_force_median(&set, &OracleOptions::default()).unwrap();
        let bnb = solve_branch_and_bound(&model, &BnbOptions::default()).unwrap();
        assert!(
            (exact.objective - bnb.objective).abs() <= 1e-9,
            "seed {seed}: {} vs {}",
            exact.objective,
            bnb.objective
        );
        assert_eq!(bnb.status, SolveStatus::Optimal);
        check_solution(&set, &bnb).unwrap();
        check_solution(&set, &exact).unwrap();
        let recomputed = recompute_objective(&instance, &set, &bnb.adjacencies);
        assert!((recomputed - bnb.objective).abs() <= 1e-6 * bnb.objective.max(1.0));
    }
}

#[test]
fn dropping_extremity_constraint_never_lowers_optimum() {
    for seed in 200..260 {
        let instance = random_oracle_instance(seed, 10);
        let set = CandidateSet::build(&instance);
        let exact = brute_force_median(&set, &OracleOptions::default()).unwrap();
        let relaxed = brute_force_median(&set, &OracleOptions { relaxed: true, ..Default::default() }).unwrap();
        assert!(relaxed.objective + 1e-9 >= exact.objective);
    }
}

#[test]
fn thread_count_does_not_change_result() {
    for seed in 300..330 {
        let instance = random_oracle_instance(seed, 10);
        let set = CandidateSet::build(&instance);
        let model = build_ilp(&set, &instance);
        let one = solve_branch_and_bound(&model, &BnbOptions::default()).unwrap();
        let four = solve_branch_and_bound(&model, &BnbOptions { threads: 4, ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }
}

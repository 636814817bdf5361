//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line; the
//! process fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffmedian::candidates::{median_adjacency_weight, triple_score, CandidateSet};
use ffmedian::evaluation::{classify_vs_reference, precision_recall, Triple, TruthMap, TruthPairs};
use ffmedian::genome::GeneId;
use ffmedian::hardness::{example_graph, random_bounded_graph, reduce_mis};
use ffmedian::matching::{brute_force_matching, build_gamma, max_weight_matching};
use ffmedian::pipeline::{solution_triples, solve_instance, verify_reduction, SolveConfig};
use ffmedian::segments::{icf_seg, IcfSegOptions};
use ffmedian::solver::{
    brute_force_median, build_ilp, close_relative, recompute_objective, solve_branch_and_bound, BnbOptions,
    OracleOptions, SolveStatus,
};
use ffmedian::synth::{
    complete_similarity_instance, disjoint_clique_instance, random_oracle_instance, random_segment_instance,
    scrambled_triple, ScrambleParams,
};

/// Reduction law: `objective / 2 - 3` equals the MIS size up to float noise.
const REDUCTION_TOL: f64 = 1e-6;
const REDUCTION_BUDGET: Duration = Duration::from_secs(300);
/// Objectives compared on a 1e-9 grid.
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(600);
const SEGMENT_REL_TOL: f64 = 1e-6;
const CLIQUE_TOL: f64 = 1e-9;
const MWM_TOL: f64 = 1e-9;
/// Calibrated on n = 4..12, where (variables + constraints) / n^5 peaks at 4.85.
const MODEL_SIZE_C: f64 = 5.0;
const SCORE_REL_TOL: f64 = 1e-12;
const OBJECTIVE_REL_TOL: f64 = 1e-6;
const SIM_MIN_PRECISION: f64 = 0.99;
/// Allowed non-monotonic wobble of mean recall between consecutive rates.
const SIM_RECALL_SLACK: f64 = 0.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reduction_law() -> Outcome {
    let start = Instant::now();
    let mut graphs = vec![example_graph()];
    graphs.extend((0..50u64).map(|seed| random_bounded_graph(seed, 4 + (seed as usize % 7), 0.4)));
    for (k, graph) in graphs.iter().enumerate() {
        let reduction = reduce_mis(graph).map_err(|e| e.to_string())?;
        let check = verify_reduction(&reduction, &SolveConfig::default()).map_err(|e| e.to_string())?;
        ensure(check.status == SolveStatus::Optimal, || format!("graph {k}: status {:?}", check.status))?;
        ensure((check.value - check.mis as f64).abs() <= REDUCTION_TOL, || {
            format!("graph {k}: F/2 - 3 = {} but MIS = {}", check.value, check.mis)
        })?;
        ensure(check.independent && check.backmapped.len() == check.mis, || {
            format!("graph {k}: backmapped {:?} not an independent set of size {}", check.backmapped, check.mis)
        })?;
        ensure(check.structure_error.is_none(), || format!("graph {k}: {:?}", check.structure_error))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < REDUCTION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{} graphs in {:.1}s", graphs.len(), elapsed.as_secs_f64()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    for seed in 0..200 {
        let instance = random_oracle_instance(seed, 10);
        let set = CandidateSet::build(&instance);
        ensure(set.genes.len() <= 10, || format!("seed {seed}: {} candidates", set.genes.len()))?;
        let exact = brute_force_median(&set, &OracleOptions::default()).map_err(|e| e.to_string())?;
        let bnb =
            solve_branch_and_bound(&build_ilp(&set, &instance), &BnbOptions::default()).map_err(|e| e.to_string())?;
        ensure((exact.objective - bnb.objective).abs() <= ORACLE_TOL, || {
            format!("seed {seed}: oracle {} vs branch-and-bound {}", exact.objective, bnb.objective)
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("200 instances in {:.1}s", elapsed.as_secs_f64()))
}

fn segment_safety() -> Outcome {
    let mut accepted_total = 0;
    for seed in 0..100 {
        let instance = random_segment_instance(seed, 12);
        let set = CandidateSet::build(&instance);
        let optimum = brute_force_median(&set, &OracleOptions::default()).map_err(|e| e.to_string())?.objective;
        let result = icf_seg(&set, &instance, &IcfSegOptions::default());
        for k in result.accepted_adjacencies() {
            accepted_total += 1;
            let forced = brute_force_median(&set, &OracleOptions { forced: vec![k], ..Default::default() })
                .map_err(|e| e.to_string())?;
            ensure(close_relative(forced.objective, optimum, SEGMENT_REL_TOL), || {
                format!("seed {seed}: accepted adjacency {k} is in no optimal median")
            })?;
        }
        let reduced = brute_force_median(&result.reduced.set, &OracleOptions::default()).map_err(|e| e.to_string())?;
        let total = result.accepted_weight() + reduced.objective;
        ensure(close_relative(total, optimum, SEGMENT_REL_TOL), || {
            format!("seed {seed}: accepted + reduced = {total} vs optimum {optimum}")
        })?;
    }
    Ok(format!("100 instances, {accepted_total} accepted adjacencies"))
}

fn disjoint_clique_law() -> Outcome {
    for seed in 0..20 {
        let instance = disjoint_clique_instance(seed, 12);
        let set = CandidateSet::build(&instance);
        let matching = build_gamma(&set, None).mwm().weight;
        let exact = solve_branch_and_bound(&build_ilp(&set, &instance), &BnbOptions::default())
            .map_err(|e| e.to_string())?
            .objective;
        ensure((matching - exact).abs() <= CLIQUE_TOL, || {
            format!("seed {seed}: matching {matching} vs optimum {exact}")
        })?;
    }
    Ok("20 instances".into())
}

fn matching_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..50 {
        let n = rng.gen_range(2..=12);
        let p = rng.gen_range(0.2..=0.8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v, rng.gen_range(0.01..=5.0)));
                }
            }
        }
        let fast = max_weight_matching(n, &edges).weight;
        let slow = brute_force_matching(n, &edges);
        ensure((fast - slow).abs() <= MWM_TOL, || format!("graph {k}: blossom {fast} vs exhaustive {slow}"))?;
    }
    Ok("50 graphs".into())
}

fn model_size() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 4..=12usize {
        let instance = complete_similarity_instance(n as u64, n);
        let set = CandidateSet::build(&instance);
        let size = build_ilp(&set, &instance).size() as f64;
        let ratio = size / (n as f64).powi(5);
        worst = worst.max(ratio);
        ensure(ratio <= MODEL_SIZE_C, || format!("n = {n}: size {size} exceeds {MODEL_SIZE_C} n^5"))?;
    }
    Ok(format!("max size / n^5 = {worst:.3} <= {MODEL_SIZE_C}"))
}

fn score_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..10_000 {
        let s: [f64; 6] = std::array::from_fn(|_| rng.gen_range(1e-3..=1.0));
        let weight = median_adjacency_weight(triple_score(s[0], s[1], s[2]), triple_score(s[3], s[4], s[5]));
        let expanded: f64 = s.iter().map(|x| x.powf(1.0 / 6.0)).product();
        ensure(close_relative(weight, expanded, SCORE_REL_TOL), || format!("draw {k}: {weight} vs {expanded}"))?;
    }
    let mut solutions = 0;
    for seed in 0..100 {
        let instance = random_oracle_instance(seed, 10);
        let set = CandidateSet::build(&instance);
        let solution =
            solve_branch_and_bound(&build_ilp(&set, &instance), &BnbOptions::default()).map_err(|e| e.to_string())?;
        let recomputed = recompute_objective(&instance, &set, &solution.adjacencies);
        ensure(close_relative(recomputed, solution.objective, OBJECTIVE_REL_TOL), || {
            format!("seed {seed}: recomputed {recomputed} vs solver {}", solution.objective)
        })?;
        solutions += 1;
    }
    Ok(format!("10000 weight draws, {solutions} objectives recomputed"))
}

fn gene(genome: &str, name: String) -> GeneId {
    GeneId::new(genome, name)
}

fn evaluation_fixed_points() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for round in 0..200 {
        let families = rng.gen_range(1..=30);
        let triples: Vec<Triple> =
            (0..families).map(|f| ["G", "H", "I"].map(|x| gene(x, format!("{}{f}", x.to_lowercase())))).collect();
        let pairs = triples
            .iter()
            .flat_map(|t| [(t[0].clone(), t[1].clone()), (t[0].clone(), t[2].clone()), (t[1].clone(), t[2].clone())]);
        let truth = TruthPairs::new(pairs);
        let report = precision_recall(&triples, &truth, true).map_err(|e| e.to_string())?;
        ensure(report.precision == 1.0 && report.recall == 1.0, || {
            format!("round {round}: truth vs truth gave {} / {}", report.precision, report.recall)
        })?;

        let groups = rng.gen_range(1..=8);
        let universe = 12;
        let mut entries = Vec::new();
        for x in ["G", "H", "I"] {
            for k in 0..universe {
                if rng.gen_bool(0.8) {
                    entries.push((
                        gene(x, format!("{}{k}", x.to_lowercase())),
                        format!("grp{}", rng.gen_range(0..groups)),
                    ));
                }
            }
        }
        let map = TruthMap::new(entries);
        let fuzzed: Vec<Triple> = (0..rng.gen_range(0..40))
            .map(|_| {
                ["G", "H", "I"].map(|x| gene(x, format!("{}{}", x.to_lowercase(), rng.gen_range(0..universe + 3))))
            })
            .collect();
        let (classes, counts) = classify_vs_reference(&fuzzed, &map);
        ensure(classes.len() == fuzzed.len() && counts.total() == fuzzed.len(), || {
            format!("round {round}: {} triples but counts {counts:?}", fuzzed.len())
        })?;
    }
    Ok("200 rounds".into())
}

fn simulation_sanity() -> Outcome {
    let rates = [0.0, 0.25, 0.5, 1.0, 2.0];
    let seeds = 0..6u64;
    let mut means = Vec::new();
    let mut worst_precision: f64 = 1.0;
    let config = SolveConfig { time_limit: Some(30.0), ..SolveConfig::default() };
    for &rate in &rates {
        let mut recall_sum = 0.0;
        for seed in seeds.clone() {
            let params = ScrambleParams { families: 30, rate, ..ScrambleParams::default() };
            let triple = scrambled_triple(seed, &params);
            let outcome = solve_instance(&triple.instance, &config).map_err(|e| e.to_string())?;
            let predicted = solution_triples(&outcome);
            let report = precision_recall(&predicted, &TruthPairs::new(triple.truth.clone()), false)
                .map_err(|e| e.to_string())?;
            worst_precision = worst_precision.min(report.precision);
            recall_sum += report.recall;
        }
        means.push(recall_sum / seeds.clone().count() as f64);
    }
    let trend: Vec<String> = rates.iter().zip(&means).map(|(r, m)| format!("{r}:{m:.3}")).collect();
    ensure(worst_precision >= SIM_MIN_PRECISION, || format!("precision {worst_precision:.4}; recall {trend:?}"))?;
    ensure(means.windows(2).all(|w| w[1] <= w[0] + SIM_RECALL_SLACK) && means[0] > means[means.len() - 1], || {
        format!("recall not decreasing: {trend:?}")
    })?;
    Ok(format!("min precision {worst_precision:.4}, mean recall by rate {}", trend.join(" ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("reduction law", reduction_law),
        ("oracle equivalence", oracle_equivalence),
        ("segment acceptance safety", segment_safety),
        ("disjoint clique matching law", disjoint_clique_law),
        ("matching exactness", matching_exactness),
        ("model size growth", model_size),
        ("score algebra", score_algebra),
        ("evaluation fixed points", evaluation_fixed_points),
        ("simulation sanity", simulation_sanity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! End-to-end stages shared by the command line and the examples:
//! preprocessing, candidate enumeration, segment acceptance, exact solving
//! and the versioned JSON median report.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{discard_nonclique, CandidateSet, RemovalReport};
use crate::evaluation::Triple;
use crate::genome::{GeneId, Orientation};
use crate::hardness::{mis_bruteforce, HardnessError, ReductionInstance};
use crate::instance::{Instance, InstanceError};
use crate::segments::{icf_seg, IcfSegOptions, IcfSegResult};
use crate::solver::{
    assemble_cars, brute_force_median, build_ilp, solve_branch_and_bound, BnbOptions, Car, MedianSolution,
    OracleOptions, SolveStatus, SolverError,
};

/// Identifier of the median report layout.
pub const MEDIAN_SCHEMA: &str = "ffmedian.median/1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("median report: {0}")]
    Report(#[from] serde_json::Error),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error("median report schema `{found}` is not {MEDIAN_SCHEMA}")]
    Schema { found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Branch-and-bound.
    #[default]
    Bb,
    /// Exhaustive search over conflict-free gene sets (tiny inputs only).
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    pub engine: Engine,
    /// Seconds; `None` for no limit.
    pub time_limit: Option<f64>,
    pub threads: usize,
    pub icf_seg: bool,
    pub discard_nonclique: bool,
    pub conflict_cap: usize,
    pub node_limit: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Bb,
            time_limit: None,
            threads: 1,
            icf_seg: true,
            discard_nonclique: true,
            conflict_cap: IcfSegOptions::default().conflict_cap,
            node_limit: BnbOptions::default().node_limit,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimes {
    pub preprocess: f64,
    pub enumerate: f64,
    pub icf_seg: f64,
    pub solve: f64,
}

/// Everything the solve stage produced.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// The instance actually solved (after preprocessing).
    pub instance: Instance,
    pub removal: RemovalReport,
    pub set: CandidateSet,
    pub segments: Option<IcfSegResult>,
    pub solution: MedianSolution,
    pub cars: Vec<Car>,
    pub times: StageTimes,
}

fn solve_set(
    set: &CandidateSet,
    instance: &Instance,
    config: &SolveConfig,
    deadline: Option<Instant>,
) -> Result<MedianSolution, SolverError> {
    match config.engine {
        Engine::Oracle => brute_force_median(set, &OracleOptions::default()),
        Engine::Bb => {
            let options = BnbOptions {
                time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
                threads: config.threads.max(1),
                node_limit: config.node_limit,
                ..BnbOptions::default()
            };
            solve_branch_and_bound(&build_ilp(set, instance), &options)
        }
    }
}

/// Runs preprocessing, enumeration, optional segment acceptance and the
/// exact solver.
pub fn solve_instance(instance: &Instance, config: &SolveConfig) -> Result<SolveOutcome, PipelineError> {
    let started = Instant::now();
    let deadline = config.time_limit.map(|s| started + Duration::from_secs_f64(s.max(0.0)));
    let mut times = StageTimes::default();

    let clock = Instant::now();
    let (instance, removal) = if config.discard_nonclique {
        discard_nonclique(instance)?
    } else {
        (instance.clone(), RemovalReport::default())
    };
    times.preprocess = clock.elapsed().as_secs_f64();
    log::info!("preprocess: removed {} genes", removal.removed.len());

    let clock = Instant::now();
    let set = CandidateSet::build(&instance);
    times.enumerate = clock.elapsed().as_secs_f64();
    log::info!("enumerate: {} candidate genes, {} conserved adjacencies", set.genes.len(), set.adjacencies.len());

    let clock = Instant::now();
    let segments =
        config.icf_seg.then(|| icf_seg(&set, &instance, &IcfSegOptions { conflict_cap: config.conflict_cap }));
    times.icf_seg = clock.elapsed().as_secs_f64();
    if let Some(s) = &segments {
        log::info!("icf-seg: {} segments accepted, {} rejected, {} skipped", s.accepted.len(), s.rejected, s.skipped);
    }

    let clock = Instant::now();
    let solution = match &segments {
        Some(s) => {
            let reduced = solve_set(&s.reduced.set, &instance, config, deadline)?;
            s.merge(&set, &reduced)
        }
        None => solve_set(&set, &instance, config, deadline)?,
    };
    times.solve = clock.elapsed().as_secs_f64();
    log::info!("solve: status {:?}, objective {}", solution.status, solution.objective);

    let cars = assemble_cars(&set, &solution);
    Ok(SolveOutcome { instance, removal, set, segments, solution, cars, times })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportGene {
    pub id: String,
    /// Qualified extant genes in G, H, I order.
    pub members: [String; 3],
    pub telomere: bool,
    pub gene_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnd {
    pub gene: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportAdjacency {
    pub first: ReportEnd,
    pub second: ReportEnd,
    pub conserved_in: Vec<String>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCarEntry {
    pub gene: String,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCar {
    pub circular: bool,
    pub genes: Vec<ReportCarEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSegments {
    pub accepted_segments: usize,
    pub accepted_adjacencies: usize,
    pub accepted_weight: f64,
    pub rejected: usize,
    pub skipped: usize,
    pub deleted_candidates: usize,
}

/// The `median.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianReport {
    pub schema: String,
    pub config: serde_json::Value,
    pub status: SolveStatus,
    pub objective: f64,
    pub bound: f64,
    pub nodes: u64,
    pub candidate_genes: usize,
    pub conserved_adjacencies: usize,
    pub removed_genes: Vec<String>,
    pub genes: Vec<ReportGene>,
    pub adjacencies: Vec<ReportAdjacency>,
    pub cars: Vec<ReportCar>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub icf_seg: Option<ReportSegments>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<serde_json::Value>,
}

fn gene_label(m: usize) -> String {
    format!("m{m}")
}

/// Builds the report; `canonical` omits timings so that equal inputs give
/// byte-identical output.
pub fn median_report(outcome: &SolveOutcome, config: serde_json::Value, canonical: bool) -> MedianReport {
    let set = &outcome.set;
    let labels = outcome.instance.labels();
    let sol = &outcome.solution;
    let genes = sol
        .genes
        .iter()
        .map(|&m| ReportGene {
            id: gene_label(m),
            members: set.member_names(&outcome.instance, m),
            telomere: set.genes[m].telomere,
            gene_score: set.genes[m].gene_score,
        })
        .collect();
    let end = |e: crate::candidates::CandidateEnd| ReportEnd { gene: gene_label(e.gene), end: e.end.to_string() };
    let adjacencies = sol
        .adjacencies
        .iter()
        .map(|&k| {
            let a = &set.adjacencies[k];
            ReportAdjacency {
                first: end(a.first),
                second: end(a.second),
                conserved_in: a.conserved.labels(labels),
                weight: a.weight(),
            }
        })
        .collect();
    let cars = outcome
        .cars
        .iter()
        .map(|c| ReportCar {
            circular: c.circular,
            genes: c
                .genes
                .iter()
                .map(|e| ReportCarEntry { gene: gene_label(e.gene), orientation: e.orientation })
                .collect(),
        })
        .collect();
    let icf_seg = outcome.segments.as_ref().map(|s| ReportSegments {
        accepted_segments: s.accepted.len(),
        accepted_adjacencies: s.accepted_adjacencies().len(),
        accepted_weight: s.accepted_weight(),
        rejected: s.rejected,
        skipped: s.skipped,
        deleted_candidates: s.deleted.len(),
    });
    let timings = (!canonical).then(|| serde_json::to_value(&outcome.times).expect("timings serialize"));
    MedianReport {
        schema: MEDIAN_SCHEMA.to_string(),
        config,
        status: sol.status,
        objective: sol.objective,
        bound: sol.bound,
        nodes: if canonical { 0 } else { sol.nodes },
        candidate_genes: set.genes.len(),
        conserved_adjacencies: set.adjacencies.len(),
        removed_genes: outcome.removal.removed.iter().map(GeneId::to_string).collect(),
        genes,
        adjacencies,
        cars,
        icf_seg,
        timings,
    }
}

/// Parses a median report, checking its schema.
pub fn read_median_report(text: &str) -> Result<MedianReport, PipelineError> {
    let report: MedianReport = serde_json::from_str(text)?;
    if report.schema != MEDIAN_SCHEMA {
        return Err(PipelineError::Schema { found: report.schema });
    }
    Ok(report)
}

/// Non-telomere median genes of a report as extant-gene triples.
pub fn predicted_triples(report: &MedianReport) -> Vec<Triple> {
    report
        .genes
        .iter()
        .filter(|g| !g.telomere)
        .filter_map(|g| {
            let ids: Vec<GeneId> = g.members.iter().filter_map(|s| GeneId::parse_qualified(s)).collect();
            ids.try_into().ok()
        })
        .collect()
}

/// Non-telomere median genes of a solution as extant-gene triples.
pub fn solution_triples(outcome: &SolveOutcome) -> Vec<Triple> {
    outcome
        .solution
        .genes
        .iter()
        .filter(|&&m| !outcome.set.genes[m].telomere)
        .map(|&m| {
            let members = outcome.set.genes[m].members;
            [0, 1, 2].map(|x| outcome.instance.genomes[x].gene_id(members[x]))
        })
        .collect()
}

/// Exit code for a finished solve: 0 when optimal (or nothing to solve),
/// 2 when only a feasible solution was found.
pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal | SolveStatus::InfeasibleEmpty => 0,
        SolveStatus::Feasible => 2,
    }
}

/// Outcome of checking the reduction law on one graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCheck {
    pub vertices: usize,
    pub edges: usize,
    pub mis: usize,
    pub status: SolveStatus,
    pub objective: f64,
    /// Half the objective minus 3.
    pub value: f64,
    pub backmapped: Vec<String>,
    pub independent: bool,
    /// First structural violation, if any.
    pub structure_error: Option<String>,
    pub holds: bool,
}

/// Solves a reduced instance and compares it with the exact maximum
/// independent set of its graph.
pub fn verify_reduction(reduction: &ReductionInstance, config: &SolveConfig) -> Result<ReductionCheck, PipelineError> {
    let config = SolveConfig { discard_nonclique: false, ..config.clone() };
    let outcome = solve_instance(&reduction.instance, &config)?;
    let mis = mis_bruteforce(&reduction.graph)?.len();
    let back = reduction.backmap_solution(&outcome.set, &outcome.solution);
    let independent = reduction.graph.is_independent(&back);
    let structure = reduction.check_structure(&outcome.set, &outcome.solution);
    let value = outcome.solution.objective / 2.0 - 3.0;
    let holds = outcome.solution.status == SolveStatus::Optimal
        && (value - mis as f64).abs() <= 1e-6
        && independent
        && back.len() == mis
        && structure.is_ok();
    let structure_error = structure.err();
    Ok(ReductionCheck {
        vertices: reduction.graph.vertex_count(),
        edges: reduction.graph.edges().len(),
        mis,
        status: outcome.solution.status,
        objective: outcome.solution.objective,
        value,
        backmapped: back.iter().map(|&v| reduction.graph.names()[v].clone()).collect(),
        independent,
        structure_error,
        holds,
    })
}

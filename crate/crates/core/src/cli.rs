//! Command-line front end. Every subcommand validates its inputs first,
//! writes its artifacts, and prints a JSON report on standard output.
//!
//! Exit codes: 0 success (optimal), 2 feasible-only solution after a time
//! limit, 1 any input or processing error.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::candidates::{discard_nonclique, write_candidates_tsv, CandidateSet};
use crate::evaluation::{
    classify_vs_reference, precision_recall, robustness, EvalError, EvalReport, PairRun, TruthMap, TruthPairs,
};
use crate::hardness::{random_bounded_graph, reduce_mis, BoundedGraph, HardnessError, ReductionInstance};
use crate::ingestion::{build_similarity_graph, parse_hits, FilterParams, GeneUniverse, IngestError};
use crate::instance::{Instance, InstanceError};
use crate::pipeline::{
    exit_code, median_report, predicted_triples, read_median_report, solve_instance, verify_reduction, Engine,
    PipelineError, SolveConfig,
};
use crate::segments::{icf_seg, IcfSegOptions, DEFAULT_CONFLICT_CAP};
use crate::solver::build_ilp;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "FFMEDIAN_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io_error(path))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    std::fs::write(path, text).map_err(io_error(path))
}

#[derive(Debug, Parser)]
#[command(name = "ffmedian", version, about = "Gene family-free median of three genomes")]
pub struct Cli {
    /// Worker threads; the FFMEDIAN_THREADS environment variable overrides it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Log verbosity: repeat for more detail (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArgs {
    /// Genome files in G, H, I order (repeat three times).
    #[arg(short = 'g', long = "genome", required = true, num_args = 1)]
    pub genomes: Vec<PathBuf>,
    /// Similarity graph file.
    #[arg(short = 's', long = "sim")]
    pub sim: PathBuf,
    /// Keep genes that belong to no candidate triple instead of splicing them out.
    #[arg(long)]
    pub keep_nonclique: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, CliError> {
        let [g, h, i] = self.genomes.as_slice() else {
            return Err(CliError::Usage(format!("expected exactly 3 --genome files, got {}", self.genomes.len())));
        };
        Ok(Instance::load([g, h, i], &self.sim)?)
    }

    /// Loaded instance, preprocessed unless `--keep-nonclique`.
    fn prepared(&self) -> Result<Instance, CliError> {
        let instance = self.load()?;
        if self.keep_nonclique {
            return Ok(instance);
        }
        Ok(discard_nonclique(&instance)?.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Bb,
    Oracle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the similarity graph from tabular alignment hits.
    BuildGraph {
        /// Cross-genome hit tables (repeatable).
        #[arg(long = "hits", required = true)]
        hits: Vec<PathBuf>,
        /// Self-hit tables supplying self bitscores (repeatable).
        #[arg(long = "self")]
        self_hits: Vec<PathBuf>,
        /// Genome files used to resolve bare gene names (optional, repeatable).
        #[arg(short = 'g', long = "genome")]
        genomes: Vec<PathBuf>,
        /// Maximum e-value of a retained hit.
        #[arg(long = "evalue", default_value_t = 1e-5)]
        evalue: f64,
        /// Stringency factor in [0, 1].
        #[arg(short = 'f', default_value_t = 0.5)]
        f: f64,
        /// Drop pairs without hits in both directions.
        #[arg(long)]
        require_reciprocal: bool,
        /// Output similarity file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Enumerate candidate genes and conserved adjacencies.
    Enumerate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output table of candidates.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Accept safe conserved segments and emit the reduced instance.
    IcfSeg {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Skip segments whose genes have more external conflicts than this.
        #[arg(long, default_value_t = DEFAULT_CONFLICT_CAP)]
        conflict_cap: usize,
        /// Output table of accepted segments.
        #[arg(short, long)]
        output: PathBuf,
        /// Directory for the reduced candidate table and model.
        #[arg(long)]
        emit_reduced: Option<PathBuf>,
    },
    /// Compute a median and write it as JSON.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Solver: exact branch-and-bound, or exhaustive search for tiny inputs.
        #[arg(long, value_enum, default_value_t = EngineArg::Bb)]
        engine: EngineArg,
        /// Also write the 0-1 program in LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Wall-clock limit in seconds; on expiry the best solution and a bound are reported.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Disable segment acceptance before solving.
        #[arg(long)]
        no_icf_seg: bool,
        /// Skip segments whose genes have more external conflicts than this.
        #[arg(long, default_value_t = DEFAULT_CONFLICT_CAP)]
        conflict_cap: usize,
        /// Per-component cap on search nodes.
        #[arg(long, default_value_t = 50_000_000)]
        node_limit: u64,
        /// Recorded in the report for provenance.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Omit timings and node counts so that equal inputs give identical bytes.
        #[arg(long)]
        canonical: bool,
        /// Output median report.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the 0-1 program in LP format.
    ExportLp {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output LP file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn a degree-3 graph into a median instance directory.
    ReduceMis {
        /// Edge list, one `u<TAB>v` per line.
        #[arg(long, conflicts_with = "random")]
        graph: Option<PathBuf>,
        /// Generate a random degree-3 graph with this many vertices instead.
        #[arg(long)]
        random: Option<usize>,
        /// Seed of the random graph generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge proposal probability of the random generator.
        #[arg(long, default_value_t = 0.4)]
        edge_prob: f64,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve a reduction instance directory and check it against the exact independent set.
    VerifyReduction {
        /// Directory written by `reduce-mis`.
        dir: PathBuf,
        /// Wall-clock limit in seconds for the solve.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Score median reports against true pairs or reference groups.
    Eval {
        /// Median reports (repeat for robustness).
        #[arg(long = "pred", required = true)]
        pred: Vec<PathBuf>,
        /// True ortholog pairs, `geneA<TAB>geneB`.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Reference groups, `gene<TAB>group`.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Fail on predicted genes missing from the truth.
        #[arg(long)]
        strict: bool,
        /// Genome pair `X,Y` for robustness across several reports.
        #[arg(long)]
        robust_pair: Option<String>,
        /// Also write the report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Thread count after applying the environment override.
pub fn effective_threads(flag: usize) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(flag)
        .max(1)
}

fn print_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(value).map_err(PipelineError::from)? + "\n";
    print!("{text}");
    Ok(text)
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let threads = effective_threads(cli.threads);
    // A second initialization (e.g. in tests) keeps the existing pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    match cli.command {
        Command::BuildGraph { hits, self_hits, genomes, evalue, f, require_reciprocal, output } => {
            let params = FilterParams { evalue_max: evalue, f };
            params.validate()?;
            let parsed: Vec<_> = genomes
                .iter()
                .map(|p| {
                    crate::genome::parse_genome(&read(p)?).map_err(|source| {
                        CliError::Instance(InstanceError::Genome { path: p.display().to_string(), source })
                    })
                })
                .collect::<Result<_, _>>()?;
            let universe = if parsed.is_empty() { GeneUniverse::open() } else { GeneUniverse::from_genomes(&parsed) };
            let mut all = Vec::new();
            for path in hits.iter().chain(&self_hits) {
                let file = File::open(path).map_err(io_error(path))?;
                let parsed = parse_hits(BufReader::new(file), &universe, Some(&params)).map_err(|e| match e {
                    IngestError::Io(source) => CliError::Io { path: path.display().to_string(), source },
                    other => CliError::Usage(format!("{}: {other}", path.display())),
                })?;
                all.extend(parsed);
            }
            let sigma = build_similarity_graph(all, &params, require_reciprocal)?;
            write(&output, &sigma.write())?;
            print_json(&json!({
                "command": "build-graph",
                "config": { "hits": hits, "self": self_hits, "genomes": genomes, "evalue_max": evalue, "f": f,
                            "require_reciprocal": require_reciprocal, "threads": threads, "output": output },
                "edges": sigma.edge_count(),
            }))?;
            Ok(0)
        }
        Command::Enumerate { instance, output } => {
            let inst = instance.prepared()?;
            let set = CandidateSet::build(&inst);
            write(&output, &write_candidates_tsv(&set, &inst))?;
            print_json(&json!({
                "command": "enumerate",
                "config": { "instance": instance, "threads": threads, "output": output },
                "candidate_genes": set.genes.len(),
                "conserved_adjacencies": set.adjacencies.len(),
            }))?;
            Ok(0)
        }
        Command::IcfSeg { instance, conflict_cap, output, emit_reduced } => {
            let inst = instance.prepared()?;
            let set = CandidateSet::build(&inst);
            let result = icf_seg(&set, &inst, &IcfSegOptions { conflict_cap });
            let mut table = String::from("#segment\tgenes\tadjacencies\tweight\n");
            for (k, seg) in result.accepted.iter().enumerate() {
                let genes: Vec<String> = seg.genes.iter().map(|&m| set.member_names(&inst, m).join("/")).collect();
                let adjs: Vec<String> = seg
                    .adjacencies
                    .iter()
                    .map(|&a| format!("{}-{}", set.adjacencies[a].first, set.adjacencies[a].second))
                    .collect();
                table.push_str(&format!("{k}\t{}\t{}\t{}\n", genes.join(","), adjs.join(","), seg.weight));
            }
            write(&output, &table)?;
            if let Some(dir) = &emit_reduced {
                let reduced = &result.reduced.set;
                write(&dir.join("candidates.tsv"), &write_candidates_tsv(reduced, &inst))?;
                write(&dir.join("model.lp"), &build_ilp(reduced, &inst).to_lp().write())?;
            }
            print_json(&json!({
                "command": "icf-seg",
                "config": { "instance": instance, "conflict_cap": conflict_cap, "threads": threads,
                            "output": output, "emit_reduced": emit_reduced },
                "accepted_segments": result.accepted.len(),
                "accepted_adjacencies": result.accepted_adjacencies().len(),
                "accepted_weight": result.accepted_weight(),
                "rejected": result.rejected,
                "skipped": result.skipped,
                "deleted_candidates": result.deleted.len(),
                "reduced_candidates": result.reduced.set.genes.len(),
            }))?;
            Ok(0)
        }
        Command::Solve {
            instance,
            engine,
            export_lp,
            time_limit,
            no_icf_seg,
            conflict_cap,
            node_limit,
            seed,
            canonical,
            output,
        } => {
            if time_limit.is_some_and(|t| !t.is_finite() || t < 0.0) {
                return Err(CliError::Usage("--time-limit must be a non-negative number".into()));
            }
            let inst = instance.load()?;
            let config = SolveConfig {
                engine: match engine {
                    EngineArg::Bb => Engine::Bb,
                    EngineArg::Oracle => Engine::Oracle,
                },
                time_limit,
                threads,
                icf_seg: !no_icf_seg,
                discard_nonclique: !instance.keep_nonclique,
                conflict_cap,
                node_limit,
            };
            let run_config = json!({
                "command": "solve", "instance": instance, "engine": engine, "time_limit": time_limit,
                "threads": if canonical { Value::Null } else { json!(threads) }, "seed": seed,
                "icf_seg": !no_icf_seg, "conflict_cap": conflict_cap, "node_limit": node_limit,
                "export_lp": export_lp, "output": output,
            });
            let outcome = solve_instance(&inst, &config)?;
            if let Some(path) = &export_lp {
                write(path, &build_ilp(&outcome.set, &outcome.instance).to_lp().write())?;
            }
            let report = median_report(&outcome, run_config, canonical);
            let text = serde_json::to_string_pretty(&report).map_err(PipelineError::from)? + "\n";
            write(&output, &text)?;
            print_json(&json!({
                "command": "solve",
                "status": report.status,
                "objective": report.objective,
                "bound": report.bound,
                "genes": report.genes.len(),
                "adjacencies": report.adjacencies.len(),
                "cars": report.cars.len(),
                "output": output,
            }))?;
            Ok(exit_code(outcome.solution.status))
        }
        Command::ExportLp { instance, output } => {
            let inst = instance.prepared()?;
            let set = CandidateSet::build(&inst);
            let model = build_ilp(&set, &inst);
            write(&output, &model.to_lp().write())?;
            print_json(&json!({
                "command": "export-lp",
                "config": { "instance": instance, "output": output },
                "variables": model.variable_count(),
                "constraints": model.constraint_count(),
            }))?;
            Ok(0)
        }
        Command::ReduceMis { graph, random, seed, edge_prob, output } => {
            let bounded = match (&graph, random) {
                (Some(path), None) => BoundedGraph::parse(&read(path)?)?,
                (None, Some(n)) => {
                    if !(0.0..=1.0).contains(&edge_prob) {
                        return Err(CliError::Usage("--edge-prob must lie in [0, 1]".into()));
                    }
                    random_bounded_graph(seed, n, edge_prob)
                }
                _ => return Err(CliError::Usage("give exactly one of --graph or --random".into())),
            };
            let reduction = reduce_mis(&bounded)?;
            reduction.write_dir(&output)?;
            print_json(&json!({
                "command": "reduce-mis",
                "config": { "graph": graph, "random": random, "seed": seed, "edge_prob": edge_prob, "output": output },
                "vertices": bounded.vertex_count(),
                "edges": bounded.edges().len(),
            }))?;
            Ok(0)
        }
        Command::VerifyReduction { dir, time_limit } => {
            let reduction = ReductionInstance::read_dir(&dir)?;
            let config = SolveConfig { threads, time_limit, ..SolveConfig::default() };
            let check = verify_reduction(&reduction, &config)?;
            print_json(&json!({ "command": "verify-reduction", "dir": dir, "check": check }))?;
            Ok(if check.holds {
                0
            } else if check.status == crate::solver::SolveStatus::Feasible {
                2
            } else {
                1
            })
        }
        Command::Eval { pred, truth, groups, strict, robust_pair, output } => {
            if truth.is_none() && groups.is_none() && robust_pair.is_none() {
                return Err(CliError::Usage("give --truth, --groups or --robust-pair".into()));
            }
            let reports = pred
                .iter()
                .map(|p| read_median_report(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))))
                .collect::<Result<Vec<_>, _>>()?;
            let triples: Vec<_> = reports.iter().map(predicted_triples).collect();
            let all: Vec<_> = triples.iter().flatten().cloned().collect();
            let mut report = match &truth {
                Some(path) => precision_recall(&all, &TruthPairs::parse(&read(path)?)?, strict)?,
                None => EvalReport::default(),
            };
            if let Some(path) = &groups {
                report.class_counts = Some(classify_vs_reference(&all, &TruthMap::parse(&read(path)?)?).1);
            }
            if let Some(spec) = &robust_pair {
                let Some((x, y)) = spec.split_once(',') else {
                    return Err(CliError::Usage("--robust-pair expects X,Y".into()));
                };
                let runs: Vec<PairRun> = triples.iter().map(|t| PairRun::from_triples(t, x.trim(), y.trim())).collect();
                report.robustness = Some(robustness(&runs)?.percentage);
            }
            let text = print_json(&json!({
                "command": "eval",
                "config": { "pred": pred, "truth": truth, "groups": groups, "strict": strict, "robust_pair": robust_pair },
                "report": report,
            }))?;
            if let Some(path) = &output {
                write(path, &text)?;
            }
            Ok(0)
        }
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit code 1.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

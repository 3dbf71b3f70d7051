//! `delta` — δ clusterability test for directed graphs.
//!
//!   delta density graph.edges
//!   delta test graph.edges --sample-frac 0.01 --reps 500 --out runs/g
//!   delta compare builtin:caveman builtin:cm --reps 500
//!   delta generate sbm --seed 3 --out sbm.edges
//!
//! A graph argument is an edge-list file, a generator spec (`*.json`, as
//! written next to the output of `generate`), or `builtin:<family>` for the
//! ~7000-vertex benchmark graphs.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use delta_core::experiment::Histogram;
use delta_core::io::{emit_edge_list, load_edge_list_path, LoadOptions};
use delta_core::{
    run_experiment, DegeneratePolicy, ExperimentConfig, ExperimentReport, Family, FamilyKind, GeneratorSpec,
    GraphSource, NeighborhoodMode,
};

#[derive(Parser)]
#[command(name = "delta", version, about = "Sampling-based clusterability test for directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one graph for the necessary condition for clusterability.
    Test {
        graph: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Test whether graph A is more clusterable than graph B.
    Compare {
        graph_a: String,
        graph_b: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate a synthetic graph as an edge list.
    Generate(GenerateArgs),
    /// Print vertex count, edge count and global density.
    Density { graph: String },
}

#[derive(Args)]
struct RunArgs {
    /// Fraction of vertices sampled per repetition.
    #[arg(long, default_value_t = 0.01)]
    sample_frac: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Master seed; also seeds `builtin:` graphs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report.json and the CSV exports.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = NeighborhoodMode::All)]
    neighborhood: NeighborhoodMode,
    #[arg(long, default_value_t = DegeneratePolicy::SkipRedraw)]
    degenerate: DegeneratePolicy,
    /// Worker threads (overrides DELTA_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Regenerate synthetic graphs for every repetition.
    #[arg(long)]
    regen_per_rep: bool,
}

#[derive(Args)]
struct GenerateArgs {
    family: FamilyKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex count (er, cm) or target vertex count (sbm).
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Power-law exponent (cm).
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    min_degree: Option<usize>,
    /// Number of cliques (caveman).
    #[arg(long)]
    cliques: Option<usize>,
    #[arg(long)]
    clique_size: Option<usize>,
    #[arg(long)]
    block_min: Option<usize>,
    #[arg(long)]
    block_max: Option<usize>,
    #[arg(long)]
    p_intra: Option<f64>,
    #[arg(long)]
    p_inter: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Test { graph, run } => {
            let source = parse_source(&graph, run.seed)?;
            let report = experiment(ExperimentConfig::single(source), &run)?;
            print_summary(&report, Verdicts::SINGLE);
        }
        Command::Compare { graph_a, graph_b, run } => {
            let g = parse_source(&graph_a, run.seed)?;
            let h = parse_source(&graph_b, run.seed)?;
            let report = experiment(ExperimentConfig::two_graph(g, h), &run)?;
            print_summary(&report, Verdicts::COMPARE);
        }
        Command::Generate(args) => generate(args)?,
        Command::Density { graph } => density(&graph)?,
    }
    Ok(())
}

fn parse_source(arg: &str, seed: u64) -> Result<GraphSource> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let kind: FamilyKind = name.parse()?;
        return Ok(GraphSource::Generated(GeneratorSpec::standard(kind, seed)));
    }
    let path = PathBuf::from(arg);
    if !path.exists() {
        bail!("no such file: {}", path.display());
    }
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let spec: GeneratorSpec = serde_json::from_reader(BufReader::new(file))
            .with_context(|| format!("reading generator spec {}", path.display()))?;
        return Ok(GraphSource::Generated(spec));
    }
    Ok(GraphSource::File { path })
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("DELTA_THREADS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().with_context(|| format!("DELTA_THREADS={v:?} is not a thread count"))?)
            }
            _ => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    Ok(())
}

fn experiment(mut cfg: ExperimentConfig, run: &RunArgs) -> Result<ExperimentReport> {
    configure_threads(run.threads)?;
    cfg.sample_fraction = run.sample_frac;
    cfg.alpha = run.alpha;
    cfg.repetitions = run.reps;
    cfg.master_seed = run.seed;
    cfg.neighborhood = run.neighborhood;
    cfg.degenerate = run.degenerate;
    cfg.regen_per_rep = run.regen_per_rep;
    cfg.output_dir = run.out.clone();
    let report = run_experiment(&cfg)?;
    if let Some(dir) = &run.out {
        println!("wrote report to {}", dir.display());
    }
    Ok(report)
}

struct Verdicts {
    reject: &'static str,
    retain: &'static str,
}

impl Verdicts {
    const SINGLE: Verdicts = Verdicts {
        reject: "graph meets the necessary condition for clusterability",
        retain: "graph does not meet the necessary condition",
    };
    const COMPARE: Verdicts = Verdicts {
        reject: "graph A is significantly more clusterable than graph B",
        retain: "no evidence that graph A is more clusterable than graph B",
    };
}

fn print_summary(report: &ExperimentReport, verdicts: Verdicts) {
    for (name, g) in ["A", "B"].iter().zip(&report.graphs) {
        let k = g.global_density.map_or("undefined".to_string(), |k| format!("{k:.6}"));
        if report.graphs.len() == 1 {
            println!("graph: {} vertices, {} edges, K = {k}", g.vertices, g.edges);
        } else {
            println!("graph {name}: {} vertices, {} edges, K = {k}", g.vertices, g.edges);
        }
    }

    let reps = &report.repetitions;
    if let [only] = reps.as_slice() {
        println!("delta = {:.6} over {} neighborhoods", only.delta, only.sample_size);
        match &only.ttest {
            Some(t) => {
                println!("t = {:.4}, df = {:.2}", t.t_statistic, t.degrees_of_freedom);
                let verdict = if t.reject { "REJECT null" } else { "FAIL TO REJECT" };
                let reason = if t.reject { verdicts.reject } else { verdicts.retain };
                println!("{verdict} (p={}): {reason}", format_p(t.p_value));
            }
            None => println!("FAIL TO REJECT (p=undefined, zero-variance sample): {}", verdicts.retain),
        }
        return;
    }

    println!(
        "rejected in {} of {} repetitions (proportion {:.3}); {} degenerate",
        report.num_rejects,
        reps.len(),
        report.prop_reject,
        report.num_degenerate
    );
    // Majority verdict, quoted with the median p-value.
    let mut ps: Vec<f64> = reps.iter().filter_map(|r| r.ttest.map(|t| t.p_value)).collect();
    ps.sort_by(f64::total_cmp);
    let p = ps.get(ps.len() / 2).map_or("undefined".to_string(), |&p| format!("{}, median", format_p(p)));
    if report.prop_reject > 0.5 {
        println!("REJECT null (p={p}): {}", verdicts.reject);
    } else {
        println!("FAIL TO REJECT (p={p}): {}", verdicts.retain);
    }
    if let Some(h) = &report.delta_histogram {
        print_histogram(h);
    }
}

fn format_p(p: f64) -> String {
    if p != 0.0 && p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

fn print_histogram(h: &Histogram) {
    let peak = h.bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
    println!("delta distribution:");
    for b in &h.bins {
        let bar = "#".repeat((b.count * 40).div_ceil(peak));
        println!("  [{:>10.3e}, {:>10.3e}) {:>5} {bar}", b.bin_left, b.bin_right, b.count);
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let family = match (args.family, Family::standard(args.family)) {
        (FamilyKind::Er, Family::Er { n, p }) => Family::Er {
            n: args.n.unwrap_or(n),
            p: args.p.unwrap_or(p),
        },
        (FamilyKind::Cm, Family::Cm { n, exponent, min_degree }) => Family::Cm {
            n: args.n.unwrap_or(n),
            exponent: args.exponent.unwrap_or(exponent),
            min_degree: args.min_degree.unwrap_or(min_degree),
        },
        (FamilyKind::Cc, Family::Caveman { num_cliques, clique_size }) => Family::Caveman {
            num_cliques: args.cliques.unwrap_or(num_cliques),
            clique_size: args.clique_size.unwrap_or(clique_size),
        },
        (
            FamilyKind::Sbm,
            Family::Sbm {
                target_n,
                block_min,
                block_max,
                p_intra,
                p_inter,
            },
        ) => Family::Sbm {
            target_n: args.n.unwrap_or(target_n),
            block_min: args.block_min.unwrap_or(block_min),
            block_max: args.block_max.unwrap_or(block_max),
            p_intra: args.p_intra.unwrap_or(p_intra),
            p_inter: args.p_inter.unwrap_or(p_inter),
        },
        _ => unreachable!("standard family matches its kind"),
    };
    let spec = GeneratorSpec::new(family, args.seed);
    let g = spec.generate()?;

    let out = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    emit_edge_list(&g, BufWriter::new(out))?;
    let sidecar = sidecar_path(&args.out);
    let file = File::create(&sidecar).with_context(|| format!("creating {}", sidecar.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &spec)?;
    println!(
        "wrote {} vertices, {} edges to {} (spec in {})",
        g.vertex_count(),
        g.edge_count(),
        args.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn density(arg: &str) -> Result<()> {
    let g = match parse_source(arg, 0)? {
        GraphSource::File { path } => {
            let loaded = load_edge_list_path(&path, &LoadOptions::default())
                .with_context(|| format!("loading {}", path.display()))?;
            let s = loaded.stats;
            if s.self_loops_dropped + s.duplicates_dropped > 0 {
                eprintln!(
                    "dropped {} self-loops and {} duplicate edges",
                    s.self_loops_dropped, s.duplicates_dropped
                );
            }
            loaded.graph
        }
        GraphSource::Generated(spec) => spec.generate()?,
    };
    println!("vertices: {}", g.vertex_count());
    println!("edges: {}", g.edge_count());
    match g.global_density() {
        Ok(k) => println!("density: {k:.6}"),
        Err(e) => println!("density: undefined ({e})"),
    }
    Ok(())
}

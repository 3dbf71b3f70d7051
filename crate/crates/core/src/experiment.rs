//! Repeated-trial harness: run the δ test many times with derived seeds and
//! aggregate the verdicts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta::{compare_samples, draw_pair, DeltaSample};
use crate::error::{Error, Result};
use crate::generators::GeneratorSpec;
use crate::graph::{DirectedGraph, NeighborhoodMode};
use crate::io::{load_edge_list_path, LoadOptions};
use crate::rng::mix_seed;
use crate::sampler::{write_local_densities_csv, DegeneratePolicy, NeighborhoodSample, SamplePlan};
use crate::stats::TTestResult;

pub const HISTOGRAM_BINS: usize = 30;

/// Where an experiment's graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum GraphSource {
    File { path: PathBuf },
    Generated(GeneratorSpec),
}

impl GraphSource {
    /// Loads or generates the graph. `regen` reseeds a generated graph
    /// for one repetition; files ignore it.
    pub fn build(&self, regen: Option<usize>) -> Result<(DirectedGraph, GraphInfo)> {
        match self {
            GraphSource::File { path } => {
                let loaded = load_edge_list_path(path, &LoadOptions::default())?;
                let info = GraphInfo::new(&loaded.graph, loaded.stats.self_loops_dropped, loaded.stats.duplicates_dropped);
                Ok((loaded.graph, info))
            }
            GraphSource::Generated(spec) => {
                let spec = match regen {
                    Some(i) => GeneratorSpec::new(spec.family.clone(), mix_seed(spec.seed, i as u64)),
                    None => spec.clone(),
                };
                let g = spec.generate()?;
                let info = GraphInfo::new(&g, 0, 0);
                Ok((g, info))
            }
        }
    }

    pub fn is_generated(&self) -> bool {
        matches!(self, GraphSource::Generated(_))
    }
}

/// Size summary of a loaded or generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub vertices: usize,
    pub edges: u64,
    pub global_density: Option<f64>,
    pub self_loops_dropped: u64,
    pub duplicates_dropped: u64,
}

impl GraphInfo {
    fn new(g: &DirectedGraph, self_loops_dropped: u64, duplicates_dropped: u64) -> Self {
        GraphInfo {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            global_density: g.global_density().ok(),
            self_loops_dropped,
            duplicates_dropped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Mode {
    Single { graph: GraphSource },
    TwoGraph { g: GraphSource, h: GraphSource },
}

impl Mode {
    fn sources(&self) -> Vec<&GraphSource> {
        match self {
            Mode::Single { graph } => vec![graph],
            Mode::TwoGraph { g, h } => vec![g, h],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub mode: Mode,
    pub sample_fraction: f64,
    pub repetitions: usize,
    pub alpha: f64,
    pub master_seed: u64,
    pub neighborhood: NeighborhoodMode,
    pub degenerate: DegeneratePolicy,
    /// Regenerate synthetic graphs for every repetition instead of reusing
    /// one instance.
    pub regen_per_rep: bool,
    /// Where to write the report and CSV exports; nothing is written if unset.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        ExperimentConfig {
            mode,
            sample_fraction: 0.01,
            repetitions: 1,
            alpha: 0.05,
            master_seed: 0,
            neighborhood: NeighborhoodMode::All,
            degenerate: DegeneratePolicy::SkipRedraw,
            regen_per_rep: false,
            output_dir: None,
        }
    }

    pub fn single(graph: GraphSource) -> Self {
        Self::new(Mode::Single { graph })
    }

    pub fn two_graph(g: GraphSource, h: GraphSource) -> Self {
        Self::new(Mode::TwoGraph { g, h })
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::param("at least one repetition is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::param(format!(
                "sample fraction must lie in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        Ok(())
    }

    /// Seed of repetition `index`.
    pub fn repetition_seed(&self, index: usize) -> u64 {
        mix_seed(self.master_seed, index as u64)
    }

    fn plan(&self, seed: u64) -> SamplePlan {
        SamplePlan::fraction(self.sample_fraction, seed)
            .with_policy(self.degenerate)
            .with_neighborhood(self.neighborhood)
    }
}

/// Verdict of one repetition. `delta` is the mean δ of the graph, or
/// `δ_G - δ_H` for a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionOutcome {
    pub index: usize,
    pub seed: u64,
    pub delta: f64,
    pub sample_size: usize,
    pub ttest: Option<TTestResult>,
    pub reject: bool,
    /// The δ sample had zero variance, so no t statistic exists; counted as
    /// a non-rejection.
    pub degenerate: bool,
}

/// One repetition together with the neighborhoods it measured.
#[derive(Debug, Clone)]
pub struct RepetitionRun {
    pub outcome: RepetitionOutcome,
    /// One entry per graph, in source order.
    pub samples: Vec<Vec<NeighborhoodSample>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

/// Equal-width histogram over the observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    /// `None` if `values` has no finite entries. A constant sample gets a
    /// unit-wide range centred on the value.
    pub fn from_values(values: &[f64], bins: usize) -> Option<Histogram> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() || bins == 0 {
            return None;
        }
        let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for v in finite {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                bin_left: lo + width * i as f64,
                bin_right: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
                count,
            })
            .collect();
        Some(Histogram { bins })
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["bin_left", "bin_right", "count"])?;
        for b in &self.bins {
            w.write_record([b.bin_left.to_string(), b.bin_right.to_string(), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aborted {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub graphs: Vec<GraphInfo>,
    pub repetitions: Vec<RepetitionOutcome>,
    pub num_rejects: usize,
    pub num_degenerate: usize,
    pub prop_reject: f64,
    pub delta_histogram: Option<Histogram>,
    /// Local densities of the final repetition, one histogram per graph.
    pub local_density_histograms: Vec<Option<Histogram>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<Aborted>,
    pub wall_time_secs: f64,
    /// Neighborhoods measured in the final repetition, one list per graph.
    #[serde(skip)]
    pub last_samples: Vec<Vec<NeighborhoodSample>>,
}

impl ExperimentReport {
    fn assemble(
        config: &ExperimentConfig,
        graphs: Vec<GraphInfo>,
        runs: Vec<RepetitionRun>,
        aborted: Option<Aborted>,
        started: Instant,
    ) -> Self {
        let last_samples = runs.last().map(|r| r.samples.clone()).unwrap_or_default();
        let repetitions: Vec<RepetitionOutcome> = runs.into_iter().map(|r| r.outcome).collect();
        let num_rejects = repetitions.iter().filter(|r| r.reject).count();
        let num_degenerate = repetitions.iter().filter(|r| r.degenerate).count();
        let prop_reject = if repetitions.is_empty() {
            0.0
        } else {
            num_rejects as f64 / repetitions.len() as f64
        };
        let deltas: Vec<f64> = repetitions.iter().map(|r| r.delta).collect();
        let local_density_histograms = last_samples
            .iter()
            .map(|s| {
                let ks: Vec<f64> = s.iter().filter_map(|x| x.kappa).collect();
                Histogram::from_values(&ks, HISTOGRAM_BINS)
            })
            .collect();
        ExperimentReport {
            config: config.clone(),
            graphs,
            num_rejects,
            num_degenerate,
            prop_reject,
            delta_histogram: Histogram::from_values(&deltas, HISTOGRAM_BINS),
            local_density_histograms,
            repetitions,
            aborted,
            wall_time_secs: started.elapsed().as_secs_f64(),
            last_samples,
        }
    }

    /// Writes `report.json`, `deltas.csv`, `local_densities.csv` (plus
    /// `local_densities_h.csv` for comparisons) and the `hist_*.csv` files.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut report = BufWriter::new(File::create(dir.join("report.json"))?);
        serde_json::to_writer_pretty(&mut report, self)?;
        writeln!(report)?;
        report.flush()?;

        self.write_deltas_csv(BufWriter::new(File::create(dir.join("deltas.csv"))?))?;

        let suffixes = ["", "_h"];
        for (i, samples) in self.last_samples.iter().enumerate().take(2) {
            let name = format!("local_densities{}.csv", suffixes[i]);
            write_local_densities_csv(samples, BufWriter::new(File::create(dir.join(name))?))?;
        }
        if let Some(h) = &self.delta_histogram {
            h.write_csv(BufWriter::new(File::create(dir.join("hist_delta.csv"))?))?;
        }
        for (i, h) in self.local_density_histograms.iter().enumerate().take(2) {
            if let Some(h) = h {
                let name = format!("hist_local_density{}.csv", suffixes[i]);
                h.write_csv(BufWriter::new(File::create(dir.join(name))?))?;
            }
        }
        Ok(())
    }

    /// CSV with columns `repetition_index,delta,t,p,reject`; `t` and `p`
    /// are empty for degenerate repetitions.
    pub fn write_deltas_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["repetition_index", "delta", "t", "p", "reject"])?;
        for r in &self.repetitions {
            let (t, p) = match &r.ttest {
                Some(tt) => (tt.t_statistic.to_string(), tt.p_value.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([r.index.to_string(), r.delta.to_string(), t, p, r.reject.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs repetition `index` on already-built graphs (one per source).
pub fn run_repetition(cfg: &ExperimentConfig, graphs: &[&DirectedGraph], index: usize) -> Result<RepetitionRun> {
    let seed = cfg.repetition_seed(index);
    match graphs {
        [g] => {
            let sample = DeltaSample::draw(g, &cfg.plan(seed))?;
            let test = sample.test(cfg.alpha);
            finish(index, seed, sample.delta_mean, sample.kappas.len(), test, vec![sample.samples])
        }
        [g, h] => {
            let (sg, sh) = draw_pair(g, h, &cfg.plan(mix_seed(seed, 0)), &cfg.plan(mix_seed(seed, 1)))?;
            let d = sg.delta_mean - sh.delta_mean;
            let n = sg.kappas.len() + sh.kappas.len();
            let samples = vec![sg.samples.clone(), sh.samples.clone()];
            let test = compare_samples(sg, sh, cfg.alpha).map(|r| r.ttest);
            finish(index, seed, d, n, test, samples)
        }
        _ => Err(Error::param("expected one or two graphs")),
    }
}

fn finish(
    index: usize,
    seed: u64,
    delta: f64,
    sample_size: usize,
    test: Result<TTestResult>,
    samples: Vec<Vec<NeighborhoodSample>>,
) -> Result<RepetitionRun> {
    let (ttest, degenerate) = match test {
        Ok(t) => (Some(t), false),
        Err(e) if e.is_zero_variance() => (None, true),
        Err(e) => return Err(e),
    };
    Ok(RepetitionRun {
        outcome: RepetitionOutcome {
            index,
            seed,
            delta,
            sample_size,
            reject: ttest.is_some_and(|t| t.reject),
            ttest,
            degenerate,
        },
        samples,
    })
}

fn build_all(sources: &[&GraphSource], regen: Option<usize>) -> Result<(Vec<DirectedGraph>, Vec<GraphInfo>)> {
    let mut graphs = Vec::with_capacity(sources.len());
    let mut infos = Vec::with_capacity(sources.len());
    for s in sources {
        let (g, info) = s.build(regen)?;
        graphs.push(g);
        infos.push(info);
    }
    Ok((graphs, infos))
}

/// Runs all repetitions in parallel on the current rayon pool.
///
/// Only the final repetition keeps its per-neighborhood samples. On the
/// first failing repetition the completed ones before it are reported (and
/// written, if an output directory is set) and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let sources = cfg.mode.sources();
    let regen = cfg.regen_per_rep && sources.iter().any(|s| s.is_generated());
    let (shared, infos) = build_all(&sources, None)?;
    let last = cfg.repetitions - 1;

    let results: Vec<Result<RepetitionRun>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|i| {
            let mut run = if regen && i > 0 {
                let (own, _) = build_all(&sources, Some(i))?;
                let refs: Vec<&DirectedGraph> = own.iter().collect();
                run_repetition(cfg, &refs, i)?
            } else {
                let refs: Vec<&DirectedGraph> = shared.iter().collect();
                run_repetition(cfg, &refs, i)?
            };
            if i != last {
                run.samples = Vec::new();
            }
            Ok(run)
        })
        .collect();

    let mut runs = Vec::with_capacity(results.len());
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                failure = Some((i, e));
                break;
            }
        }
    }

    let aborted = failure.as_ref().map(|(i, e)| Aborted {
        index: *i,
        message: e.to_string(),
    });
    let report = ExperimentReport::assemble(cfg, infos, runs, aborted, started);
    if let Some(dir) = &cfg.output_dir {
        report.write_outputs(dir)?;
    }
    match failure {
        Some((index, e)) => Err(Error::Repetition {
            index,
            source: Box::new(e),
        }),
        None => Ok(report),
    }
}

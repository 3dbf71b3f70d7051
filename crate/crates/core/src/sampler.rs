//! Random vertex sampling and neighborhood local densities.
//!
//! The local density of a vertex is the density of the subgraph induced by
//! its neighborhood (the focal vertex itself excluded): induced directed
//! edges over the `n(n-1)` ordered pairs of the `n` neighbors.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, InducedCounter, NeighborhoodMode, VertexId};
use crate::rng;

/// What to do with sampled vertices whose neighborhood has fewer than two
/// vertices (local density undefined).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneratePolicy {
    /// Discard and draw a replacement vertex, up to `10·ℓ` draws in total.
    #[default]
    SkipRedraw,
    /// Discard without replacement; the usable sample may shrink.
    Skip,
    /// Keep with local density 0.
    Zero,
}

impl FromStr for DegeneratePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip-redraw" => Ok(DegeneratePolicy::SkipRedraw),
            "skip" => Ok(DegeneratePolicy::Skip),
            "zero" => Ok(DegeneratePolicy::Zero),
            other => Err(Error::param(format!(
                "unknown degenerate policy {other:?} (expected skip-redraw, skip or zero)"
            ))),
        }
    }
}

impl fmt::Display for DegeneratePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegeneratePolicy::SkipRedraw => "skip-redraw",
            DegeneratePolicy::Skip => "skip",
            DegeneratePolicy::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSize {
    /// A fraction `s` of the vertices, `ℓ = ⌊s·|V|⌋`.
    Fraction(f64),
    /// An explicit vertex count.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub size: SampleSize,
    pub seed: u64,
    pub degenerate: DegeneratePolicy,
    pub neighborhood: NeighborhoodMode,
}

impl SamplePlan {
    pub fn fraction(s: f64, seed: u64) -> Self {
        SamplePlan {
            size: SampleSize::Fraction(s),
            seed,
            degenerate: DegeneratePolicy::default(),
            neighborhood: NeighborhoodMode::default(),
        }
    }

    pub fn count(count: usize, seed: u64) -> Self {
        SamplePlan {
            size: SampleSize::Count(count),
            ..SamplePlan::fraction(1.0, seed)
        }
    }

    pub fn with_policy(mut self, policy: DegeneratePolicy) -> Self {
        self.degenerate = policy;
        self
    }

    pub fn with_neighborhood(mut self, mode: NeighborhoodMode) -> Self {
        self.neighborhood = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The number of vertices `ℓ` to draw from a graph with
    /// `vertex_count` vertices.
    pub fn resolve(&self, vertex_count: usize) -> Result<usize> {
        match self.size {
            SampleSize::Fraction(s) => resolve_sample_size(s, vertex_count),
            SampleSize::Count(l) if l < 2 => Err(Error::SampleTooSmall(l)),
            SampleSize::Count(l) if l > vertex_count => Err(Error::param(format!(
                "cannot sample {l} distinct vertices from {vertex_count}"
            ))),
            SampleSize::Count(l) => Ok(l),
        }
    }
}

/// `⌊s·|V|⌋`, requiring at least two vertices.
pub fn resolve_sample_size(s: f64, vertex_count: usize) -> Result<usize> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::param(format!("sample fraction must lie in (0, 1], got {s}")));
    }
    if vertex_count < 2 {
        return Err(Error::UndefinedDensity(vertex_count));
    }
    let exact = s * vertex_count as f64;
    // Absorb representation error such as 0.29 * 100 = 28.999999999999996.
    let nearest = exact.round();
    let l = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        exact.floor()
    } as usize;
    if l < 2 {
        return Err(Error::SampleTooSmall(l));
    }
    Ok(l.min(vertex_count))
}

/// One sampled vertex and the density of its neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSample {
    pub focal: VertexId,
    pub focal_label: i64,
    pub neighborhood_size: usize,
    pub induced_edges: u64,
    /// `None` when the neighborhood has fewer than two vertices.
    pub kappa: Option<f64>,
}

impl NeighborhoodSample {
    pub fn is_degenerate(&self) -> bool {
        self.kappa.is_none()
    }

    /// The value this sample contributes under `policy`, if any.
    pub fn kappa_under(&self, policy: DegeneratePolicy) -> Option<f64> {
        match (self.kappa, policy) {
            (Some(k), _) => Some(k),
            (None, DegeneratePolicy::Zero) => Some(0.0),
            (None, _) => None,
        }
    }
}

/// Computes one vertex's neighborhood density with reusable buffers.
struct DensityProbe<'g> {
    graph: &'g DirectedGraph,
    mode: NeighborhoodMode,
    counter: InducedCounter<'g>,
    buf: Vec<VertexId>,
}

impl<'g> DensityProbe<'g> {
    fn new(graph: &'g DirectedGraph, mode: NeighborhoodMode) -> Self {
        DensityProbe {
            graph,
            mode,
            counter: InducedCounter::new(graph),
            buf: Vec::new(),
        }
    }

    fn measure(&mut self, v: VertexId) -> NeighborhoodSample {
        self.graph.neighborhood_into(v, self.mode, &mut self.buf);
        let n = self.buf.len();
        let induced = self.counter.count(&self.buf);
        let kappa = (n >= 2).then(|| induced as f64 / (n as f64 * (n as f64 - 1.0)));
        NeighborhoodSample {
            focal: v,
            focal_label: self.graph.label(v),
            neighborhood_size: n,
            induced_edges: induced,
            kappa,
        }
    }
}

pub fn local_density(g: &DirectedGraph, v: VertexId, mode: NeighborhoodMode) -> Result<NeighborhoodSample> {
    if v as usize >= g.vertex_count() {
        return Err(Error::VertexOutOfRange {
            vertex: v as usize,
            vertex_count: g.vertex_count(),
        });
    }
    Ok(DensityProbe::new(g, mode).measure(v))
}

/// Local densities of every vertex, in id order.
pub fn all_local_densities(g: &DirectedGraph, mode: NeighborhoodMode) -> Vec<NeighborhoodSample> {
    let mut probe = DensityProbe::new(g, mode);
    (0..g.vertex_count() as VertexId).map(|v| probe.measure(v)).collect()
}

/// Uniform draws without replacement from `0..n`, via a lazily
/// materialised Fisher–Yates shuffle.
struct DistinctDraws {
    n: usize,
    taken: usize,
    swapped: HashMap<usize, usize>,
}

impl DistinctDraws {
    fn new(n: usize) -> Self {
        DistinctDraws {
            n,
            taken: 0,
            swapped: HashMap::new(),
        }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> Option<usize> {
        if self.taken == self.n {
            return None;
        }
        let i = self.taken;
        let j = rng.random_range(i..self.n);
        let at_j = *self.swapped.get(&j).unwrap_or(&j);
        let at_i = *self.swapped.get(&i).unwrap_or(&i);
        self.swapped.insert(j, at_i);
        self.swapped.remove(&i);
        self.taken += 1;
        Some(at_j)
    }
}

/// Draws `ℓ` distinct vertices uniformly at random and measures their
/// neighborhood densities, in draw order.
///
/// Under [`DegeneratePolicy::SkipRedraw`] only non-degenerate samples are
/// returned (possibly fewer than `ℓ` if the draw budget or the graph runs
/// out); under the other policies all `ℓ` draws are returned and degenerate
/// ones carry `kappa: None`.
pub fn sample_local_densities(g: &DirectedGraph, plan: &SamplePlan) -> Result<Vec<NeighborhoodSample>> {
    let n = g.vertex_count();
    let l = plan.resolve(n)?;
    if l > n {
        return Err(Error::param(format!("cannot sample {l} distinct vertices from {n}")));
    }
    let mut rng = rng::stream(plan.seed);
    let mut draws = DistinctDraws::new(n);
    let mut probe = DensityProbe::new(g, plan.neighborhood);
    let mut out = Vec::with_capacity(l);
    match plan.degenerate {
        DegeneratePolicy::SkipRedraw => {
            let budget = 10 * l;
            let mut used = 0;
            while out.len() < l && used < budget {
                let Some(v) = draws.next(&mut rng) else { break };
                used += 1;
                let s = probe.measure(v as VertexId);
                if !s.is_degenerate() {
                    out.push(s);
                }
            }
        }
        DegeneratePolicy::Skip | DegeneratePolicy::Zero => {
            for _ in 0..l {
                let v = draws.next(&mut rng).expect("l <= n");
                out.push(probe.measure(v as VertexId));
            }
        }
    }
    Ok(out)
}

/// The local densities that enter the mean under `policy`.
pub fn usable_kappas(samples: &[NeighborhoodSample], policy: DegeneratePolicy) -> Vec<f64> {
    samples.iter().filter_map(|s| s.kappa_under(policy)).collect()
}

/// Arithmetic mean of the usable local densities.
pub fn mean_local_density(samples: &[NeighborhoodSample], policy: DegeneratePolicy) -> Result<f64> {
    let ks = usable_kappas(samples, policy);
    if ks.is_empty() {
        return Err(Error::SampleTooSmall(0));
    }
    Ok(crate::stats::mean(&ks))
}

/// CSV with columns `focal_label,n_i,e_i,kappa`; `kappa` is empty for
/// degenerate neighborhoods.
pub fn write_local_densities_csv<W: Write>(samples: &[NeighborhoodSample], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["focal_label", "n_i", "e_i", "kappa"])?;
    for s in samples {
        w.write_record([
            s.focal_label.to_string(),
            s.neighborhood_size.to_string(),
            s.induced_edges.to_string(),
            s.kappa.map(|k| k.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_caveman, generate_er};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn figure_graph() -> DirectedGraph {
        crate::graph::tests::figure_graph()
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(resolve_sample_size(0.01, 7000).unwrap(), 70);
        assert_eq!(resolve_sample_size(0.005, 7000).unwrap(), 35);
        assert_eq!(resolve_sample_size(0.1, 6910).unwrap(), 691);
        assert_eq!(resolve_sample_size(0.29, 100).unwrap(), 29);
        assert_eq!(resolve_sample_size(1.0, 9).unwrap(), 9);
        assert!(matches!(
            resolve_sample_size(0.0001, 7000),
            Err(Error::SampleTooSmall(0))
        ));
        assert!(resolve_sample_size(0.0, 7000).is_err());
        assert!(resolve_sample_size(1.5, 7000).is_err());
    }

    #[test]
    fn figure_graph_densities() {
        let g = figure_graph();
        let one = local_density(&g, g.vertex_of(1).unwrap(), NeighborhoodMode::All).unwrap();
        assert_eq!((one.neighborhood_size, one.induced_edges), (3, 2));
        assert_eq!(one.kappa, Some(2.0 / 6.0));
        let seven = local_density(&g, g.vertex_of(7).unwrap(), NeighborhoodMode::All).unwrap();
        assert_eq!((seven.neighborhood_size, seven.induced_edges), (2, 1));
        assert_eq!(seven.kappa, Some(0.5));
    }

    #[test]
    fn means() {
        let mk = |k: f64| NeighborhoodSample {
            focal: 0,
            focal_label: 0,
            neighborhood_size: 3,
            induced_edges: 0,
            kappa: Some(k),
        };
        let p = DegeneratePolicy::default();
        assert!((mean_local_density(&[mk(1.0), mk(1.0 / 3.0)], p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(mean_local_density(&[mk(0.5), mk(0.5)], p).unwrap(), 0.5);
        assert_eq!(mean_local_density(&[mk(0.25)], p).unwrap(), 0.25);
        assert!(mean_local_density(&[], p).is_err());
    }

    #[test]
    fn complete_graph_kappas_are_one() {
        let g = generate_er(30, 1.0, 0).unwrap();
        let s = sample_local_densities(&g, &SamplePlan::fraction(0.5, 4)).unwrap();
        assert_eq!(s.len(), 15);
        assert!(s.iter().all(|x| x.kappa == Some(1.0)));
    }

    #[test]
    fn edgeless_graph_policies() {
        let g = generate_er(40, 0.0, 0).unwrap();
        let plan = SamplePlan::fraction(0.25, 1);
        let redraw = sample_local_densities(&g, &plan).unwrap();
        assert!(redraw.is_empty());
        let skip = sample_local_densities(&g, &plan.clone().with_policy(DegeneratePolicy::Skip)).unwrap();
        assert_eq!(skip.len(), 10);
        assert!(usable_kappas(&skip, DegeneratePolicy::Skip).is_empty());
        assert!(matches!(
            mean_local_density(&skip, DegeneratePolicy::Skip),
            Err(Error::SampleTooSmall(0))
        ));
        let zero = sample_local_densities(&g, &plan.with_policy(DegeneratePolicy::Zero)).unwrap();
        assert_eq!(usable_kappas(&zero, DegeneratePolicy::Zero), vec![0.0; 10]);
    }

    #[test]
    fn redraw_replaces_degenerate_vertices() {
        // Caveman plus isolated vertices: isolated draws get replaced.
        let cc = generate_caveman(4, 5, 0).unwrap();
        let mut edges: Vec<_> = cc.edges().collect();
        edges.push((0, 1));
        let (g, _) = DirectedGraph::from_edges(40, edges).unwrap();
        let plan = SamplePlan::count(15, 3);
        let s = sample_local_densities(&g, &plan).unwrap();
        assert_eq!(s.len(), 15);
        assert!(s.iter().all(|x| (x.focal as usize) < 20));
    }

    #[test]
    fn too_many_requested() {
        let g = figure_graph();
        assert!(sample_local_densities(&g, &SamplePlan::count(8, 0)).is_err());
        assert!(sample_local_densities(&g, &SamplePlan::count(1, 0)).is_err());
    }

    #[test]
    fn csv_export() {
        let g = figure_graph();
        let samples = all_local_densities(&g, NeighborhoodMode::All);
        let mut buf = Vec::new();
        write_local_densities_csv(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("focal_label,n_i,e_i,kappa"));
        assert_eq!(lines.next().unwrap(), format!("1,3,2,{}", 2.0f64 / 6.0));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn distinct_draws_cover_everything() {
        let mut rng = rng::stream(5);
        let mut d = DistinctDraws::new(50);
        let got: HashSet<usize> = std::iter::from_fn(|| d.next(&mut rng)).collect();
        assert_eq!(got.len(), 50);
        assert!(got.iter().all(|&v| v < 50));
    }

    #[test]
    fn draws_are_uniform() {
        let mut hits = [0u32; 10];
        for seed in 0..20_000u64 {
            let mut rng = rng::stream(seed);
            let mut d = DistinctDraws::new(10);
            for _ in 0..3 {
                hits[d.next(&mut rng).unwrap()] += 1;
            }
        }
        // Each vertex is in a 3-of-10 sample with probability 0.3.
        let sd = (20_000f64 * 0.3 * 0.7).sqrt();
        for h in hits {
            assert!((h as f64 - 6000.0).abs() < 4.5 * sd, "{hits:?}");
        }
    }

    proptest! {
        #[test]
        fn samples_are_distinct_bounded_and_seeded(seed in any::<u64>(), frac in 0.05f64..1.0) {
            let g = generate_er(60, 0.2, 9).unwrap();
            let plan = SamplePlan::fraction(frac, seed).with_policy(DegeneratePolicy::Skip);
            let a = sample_local_densities(&g, &plan).unwrap();
            let b = sample_local_densities(&g, &plan).unwrap();
            prop_assert_eq!(&a, &b);
            let focal: HashSet<_> = a.iter().map(|s| s.focal).collect();
            prop_assert_eq!(focal.len(), a.len());
            for s in &a {
                prop_assert!(s.induced_edges <= (s.neighborhood_size * s.neighborhood_size.saturating_sub(1)) as u64);
                if let Some(k) = s.kappa {
                    prop_assert!((0.0..=1.0).contains(&k));
                }
            }
        }

        #[test]
        fn mean_is_order_invariant(seed in any::<u64>(), rot in 0usize..30) {
            let g = generate_er(80, 0.1, 1).unwrap();
            let mut s = sample_local_densities(&g, &SamplePlan::count(30, seed)).unwrap();
            let p = DegeneratePolicy::SkipRedraw;
            let before = mean_local_density(&s, p).unwrap();
            s.reverse();
            let len = s.len();
            s.rotate_left(rot % len);
            let after = mean_local_density(&s, p).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
        }
    }
}

use rand::seq::SliceRandom;
use rand::Rng;

use super::check_vertex_count;
use crate::error::{Error, Result};
use crate::graph::{Cleanup, DirectedGraph, VertexId};
use crate::rng;

/// Discrete power law `P(k) ∝ k^-exponent` on `min_degree..=max_degree`,
/// sampled by inverse CDF.
#[derive(Debug, Clone)]
pub struct PowerLawDegrees {
    min_degree: usize,
    cdf: Vec<f64>,
}

impl PowerLawDegrees {
    pub fn new(exponent: f64, min_degree: usize, max_degree: usize) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::param(format!("power-law exponent {exponent} must be positive")));
        }
        if min_degree == 0 || min_degree > max_degree {
            return Err(Error::param(format!(
                "degree support {min_degree}..={max_degree} is empty or includes 0"
            )));
        }
        let mut cdf: Vec<f64> = (min_degree..=max_degree)
            .map(|k| (k as f64).powf(-exponent))
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let total = *cdf.last().expect("non-empty support");
        for c in &mut cdf {
            *c /= total;
        }
        Ok(PowerLawDegrees { min_degree, cdf })
    }

    pub fn max_degree(&self) -> usize {
        self.min_degree + self.cdf.len() - 1
    }

    pub fn probability(&self, k: usize) -> f64 {
        if k < self.min_degree || k > self.max_degree() {
            return 0.0;
        }
        let i = k - self.min_degree;
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    pub fn mean(&self) -> f64 {
        (self.min_degree..=self.max_degree())
            .map(|k| k as f64 * self.probability(k))
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.min_degree + i
    }
}

/// Everything produced along the way by [`generate_cm_detailed`].
#[derive(Debug, Clone)]
pub struct CmOutcome {
    pub graph: DirectedGraph,
    /// Out-degrees as drawn, before the sum repair.
    pub drawn_out: Vec<usize>,
    pub drawn_in: Vec<usize>,
    /// Degree sequences after the sum repair (the stub counts matched).
    pub out_degrees: Vec<usize>,
    pub in_degrees: Vec<usize>,
    /// Number of unit increments applied by the repair.
    pub repairs: usize,
    pub cleanup: Cleanup,
}

/// Directed configuration model with independent power-law in- and
/// out-degree sequences.
pub fn generate_cm(n: usize, exponent: f64, min_degree: usize, seed: u64) -> Result<DirectedGraph> {
    Ok(generate_cm_detailed(n, exponent, min_degree, seed)?.graph)
}

pub fn generate_cm_detailed(
    n: usize,
    exponent: f64,
    min_degree: usize,
    seed: u64,
) -> Result<CmOutcome> {
    if n < 2 {
        return Err(Error::param(format!("CM needs n >= 2, got {n}")));
    }
    check_vertex_count(n)?;
    if exponent.is_nan() || exponent <= 2.0 {
        return Err(Error::param(format!("CM needs exponent > 2, got {exponent}")));
    }
    if min_degree == 0 || min_degree >= n {
        return Err(Error::param(format!(
            "min_degree must lie in 1..{n}, got {min_degree}"
        )));
    }
    let law = PowerLawDegrees::new(exponent, min_degree, n - 1)?;

    let mut out_rng = rng::substream(seed, 0);
    let mut in_rng = rng::substream(seed, 1);
    let drawn_out: Vec<usize> = (0..n).map(|_| law.sample(&mut out_rng)).collect();
    let drawn_in: Vec<usize> = (0..n).map(|_| law.sample(&mut in_rng)).collect();

    let mut out_degrees = drawn_out.clone();
    let mut in_degrees = drawn_in.clone();
    let repairs = repair_sums(&mut out_degrees, &mut in_degrees, &mut rng::substream(seed, 2));

    let mut out_stubs: Vec<VertexId> = Vec::new();
    let mut in_stubs: Vec<VertexId> = Vec::new();
    for v in 0..n {
        out_stubs.extend(std::iter::repeat_n(v as VertexId, out_degrees[v]));
        in_stubs.extend(std::iter::repeat_n(v as VertexId, in_degrees[v]));
    }
    in_stubs.shuffle(&mut rng::substream(seed, 3));
    let (graph, cleanup) = DirectedGraph::from_edges(n, out_stubs.into_iter().zip(in_stubs))?;

    Ok(CmOutcome {
        graph,
        drawn_out,
        drawn_in,
        out_degrees,
        in_degrees,
        repairs,
        cleanup,
    })
}

/// Increments uniformly chosen entries of the side with the smaller total
/// until both totals agree. Entries already at `len - 1` are not raised.
fn repair_sums<R: Rng>(out: &mut [usize], inn: &mut [usize], rng: &mut R) -> usize {
    let cap = out.len() - 1;
    let (mut so, mut si): (usize, usize) = (out.iter().sum(), inn.iter().sum());
    let mut repairs = 0;
    while so != si {
        let (side, total) = if so < si {
            (&mut *out, &mut so)
        } else {
            (&mut *inn, &mut si)
        };
        let v = rng.random_range(0..side.len());
        if side[v] < cap {
            side[v] += 1;
            *total += 1;
            repairs += 1;
        }
    }
    repairs
}

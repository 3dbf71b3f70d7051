use rayon::prelude::*;

use super::{bernoulli_run, check_probability, check_vertex_count};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng;

/// Directed G(n, p): every ordered pair `(u, v)`, `u != v`, is an edge
/// independently with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::param(format!("ER needs n >= 2, got {n}")));
    }
    check_vertex_count(n)?;
    check_probability("p", p)?;
    let rows = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut rng = rng::substream(seed, u as u64);
            let mut row = Vec::with_capacity((p * n as f64 * 1.05) as usize + 4);
            bernoulli_run(&mut rng, 0, n, p, u, &mut row);
            row
        })
        .collect();
    Ok(DirectedGraph::from_sorted_rows(rows))
}

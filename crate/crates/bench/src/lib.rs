//! Shared fixtures for the benchmarks.

use delta_core::generators::{generate_caveman, generate_er, generate_sbm};
use delta_core::{DirectedGraph, NeighborhoodMode, VertexId};

/// Dense random graph at the benchmark density, scaled down.
pub fn dense_er(n: usize) -> DirectedGraph {
    generate_er(n, 0.333, 11).expect("valid parameters")
}

pub fn sparse_er(n: usize) -> DirectedGraph {
    generate_er(n, 8.0 / n as f64, 11).expect("valid parameters")
}

pub fn sbm(target_n: usize) -> DirectedGraph {
    generate_sbm(target_n, 80, 120, 0.75, 0.3, 11).expect("valid parameters")
}

pub fn caveman() -> DirectedGraph {
    generate_caveman(140, 50, 0).expect("valid parameters")
}

/// A handful of in∪out neighborhoods to count induced edges on.
pub fn neighborhoods(g: &DirectedGraph, count: usize) -> Vec<Vec<VertexId>> {
    let step = (g.vertex_count() / count.max(1)).max(1);
    (0..g.vertex_count())
        .step_by(step)
        .take(count)
        .map(|v| g.neighborhood(v as VertexId, NeighborhoodMode::All).expect("vertex in range"))
        .collect()
}

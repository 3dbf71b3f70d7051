use super::check_vertex_count;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, VertexId};

/// Connected caveman digraph: `num_cliques` cliques of `clique_size`
/// vertices in which, for each clique starting at vertex `s`, the edge
/// `{s, s+1}` is replaced by `{s, s-1 mod n}` (the last vertex of the
/// previous clique), closing a ring. Every undirected edge becomes a
/// reciprocal pair. The construction is deterministic; `seed` is accepted
/// for interface uniformity only.
pub fn generate_caveman(num_cliques: usize, clique_size: usize, _seed: u64) -> Result<DirectedGraph> {
    if num_cliques < 2 || clique_size < 2 {
        return Err(Error::param(format!(
            "caveman needs at least 2 cliques of at least 2 vertices, got {num_cliques} x {clique_size}"
        )));
    }
    let n = num_cliques
        .checked_mul(clique_size)
        .ok_or_else(|| Error::param("caveman graph too large"))?;
    check_vertex_count(n)?;

    let mut edges = Vec::with_capacity(num_cliques * clique_size * clique_size);
    for c in 0..num_cliques {
        let start = c * clique_size;
        let members = start..start + clique_size;
        for u in members.clone() {
            for v in members.clone() {
                let rewired = (u == start && v == start + 1) || (u == start + 1 && v == start);
                if u != v && !rewired {
                    edges.push((u as VertexId, v as VertexId));
                }
            }
        }
        let prev = (start + n - 1) % n;
        edges.push((start as VertexId, prev as VertexId));
        edges.push((prev as VertexId, start as VertexId));
    }
    let (g, cleanup) = DirectedGraph::from_edges(n, edges)?;
    debug_assert_eq!(cleanup.self_loops_dropped + cleanup.duplicates_dropped, 0);
    Ok(g)
}

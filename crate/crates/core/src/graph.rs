//! Immutable simple directed graph with dual (out/in) CSR adjacency.
//!
//! Vertices carry contiguous internal ids `0..vertex_count` and an external
//! 64-bit label. Labels are kept in strictly ascending order, so the
//! label-to-id direction of the map is a binary search.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Graphs up to this many vertices may get a bit-matrix index.
const DENSE_MAX_VERTICES: usize = 16_384;
/// Minimum global density at which the bit-matrix index is built.
const DENSE_MIN_DENSITY: f64 = 1.0 / 512.0;

/// Which incident edges define a vertex's neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborhoodMode {
    /// Union of in- and out-neighbors.
    #[default]
    All,
    /// Successors only.
    Out,
    /// Predecessors only.
    In,
}

impl FromStr for NeighborhoodMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(NeighborhoodMode::All),
            "out" => Ok(NeighborhoodMode::Out),
            "in" => Ok(NeighborhoodMode::In),
            other => Err(Error::param(format!(
                "unknown neighborhood mode {other:?} (expected all, out or in)"
            ))),
        }
    }
}

impl fmt::Display for NeighborhoodMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborhoodMode::All => "all",
            NeighborhoodMode::Out => "out",
            NeighborhoodMode::In => "in",
        })
    }
}

/// Entries discarded while turning raw edges into a simple digraph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cleanup {
    pub self_loops_dropped: u64,
    pub duplicates_dropped: u64,
}

/// Row-major adjacency bit matrix; row `u` has bit `v` set iff `u -> v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitMatrix {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub(crate) fn from_graph(g: &DirectedGraph) -> Self {
        let n = g.vertex_count();
        let words_per_row = n.div_ceil(64);
        let mut bits = vec![0u64; words_per_row * n];
        for u in 0..n {
            let row = &mut bits[u * words_per_row..(u + 1) * words_per_row];
            for &v in g.out_neighbors(u as VertexId) {
                row[v as usize / 64] |= 1u64 << (v % 64);
            }
        }
        BitMatrix {
            words_per_row,
            bits,
        }
    }

    #[inline]
    fn row(&self, u: VertexId) -> &[u64] {
        let start = u as usize * self.words_per_row;
        &self.bits[start..start + self.words_per_row]
    }
}

/// Simple directed graph without self-loops.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    out_offsets: Vec<usize>,
    out_targets: Vec<VertexId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<VertexId>,
    labels: Vec<i64>,
    dense: Option<BitMatrix>,
}

impl PartialEq for DirectedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.out_offsets == other.out_offsets
            && self.out_targets == other.out_targets
            && self.labels == other.labels
    }
}

impl Eq for DirectedGraph {}

impl DirectedGraph {
    /// Builds a graph on `vertex_count` vertices labelled `0..vertex_count`.
    ///
    /// Self-loops are dropped and parallel edges collapsed; both are counted
    /// in the returned [`Cleanup`].
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<(Self, Cleanup)>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if vertex_count > VertexId::MAX as usize {
            return Err(Error::param(format!(
                "{vertex_count} vertices exceed the supported maximum"
            )));
        }
        let edges: Vec<(VertexId, VertexId)> = edges.into_iter().collect();
        let mut cleanup = Cleanup::default();
        let mut counts = vec![0usize; vertex_count + 1];
        for &(u, v) in &edges {
            for w in [u, v] {
                if w as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: w as usize,
                        vertex_count,
                    });
                }
            }
            if u == v {
                cleanup.self_loops_dropped += 1;
            } else {
                counts[u as usize + 1] += 1;
            }
        }
        for i in 0..vertex_count {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut targets = vec![0 as VertexId; counts[vertex_count]];
        for &(u, v) in &edges {
            if u != v {
                targets[cursor[u as usize]] = v;
                cursor[u as usize] += 1;
            }
        }
        drop(edges);

        // Sort and dedup each row in place, then compact.
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0usize);
        let mut write = 0usize;
        for u in 0..vertex_count {
            let (start, end) = (counts[u], counts[u + 1]);
            targets[start..end].sort_unstable();
            let mut last = None;
            for read in start..end {
                let v = targets[read];
                if last == Some(v) {
                    cleanup.duplicates_dropped += 1;
                    continue;
                }
                last = Some(v);
                targets[write] = v;
                write += 1;
            }
            offsets.push(write);
        }
        targets.truncate(write);
        targets.shrink_to_fit();

        let labels = (0..vertex_count as i64).collect();
        Ok((Self::assemble(offsets, targets, labels), cleanup))
    }

    /// Builds from per-vertex successor lists that are already sorted,
    /// duplicate-free and loop-free.
    pub(crate) fn from_sorted_rows(rows: Vec<Vec<VertexId>>) -> Self {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        for (u, row) in rows.into_iter().enumerate() {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            debug_assert!(row.iter().all(|&v| v as usize != u && (v as usize) < n));
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        Self::assemble(offsets, targets, (0..n as i64).collect())
    }

    fn assemble(out_offsets: Vec<usize>, out_targets: Vec<VertexId>, labels: Vec<i64>) -> Self {
        let n = out_offsets.len() - 1;
        let mut in_offsets = vec![0usize; n + 1];
        for &v in &out_targets {
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0 as VertexId; out_targets.len()];
        // Visiting sources in ascending order leaves every in-row sorted.
        for u in 0..n {
            for &v in &out_targets[out_offsets[u]..out_offsets[u + 1]] {
                in_sources[cursor[v as usize]] = u as VertexId;
                cursor[v as usize] += 1;
            }
        }
        let mut g = DirectedGraph {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            labels,
            dense: None,
        };
        if (2..=DENSE_MAX_VERTICES).contains(&n)
            && g.edge_count() as f64 >= DENSE_MIN_DENSITY * (n * (n - 1)) as f64
        {
            g.dense = Some(BitMatrix::from_graph(&g));
        }
        g
    }

    /// Replaces the external labels. They must be strictly ascending and
    /// one per vertex.
    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::param(format!(
                "{} labels supplied for {} vertices",
                labels.len(),
                self.vertex_count()
            )));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("labels must be strictly ascending"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    pub fn edge_count(&self) -> u64 {
        self.out_targets.len() as u64
    }

    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_neighbors(v).len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.vertex_count() && self.out_neighbors(u).binary_search(&v).is_ok()
    }

    pub fn label(&self, v: VertexId) -> i64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn vertex_of(&self, label: i64) -> Option<VertexId> {
        self.labels
            .binary_search(&label)
            .ok()
            .map(|i| i as VertexId)
    }

    /// All edges in ascending `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId)
            .flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// `(|E|, |V|·(|V|-1))`, the exact numerator and denominator of the
    /// global density.
    pub fn density_ratio(&self) -> Result<(u64, u64)> {
        let n = self.vertex_count();
        if n < 2 {
            return Err(Error::UndefinedDensity(n));
        }
        Ok((self.edge_count(), n as u64 * (n as u64 - 1)))
    }

    /// Fraction of ordered vertex pairs that carry an edge.
    pub fn global_density(&self) -> Result<f64> {
        let (edges, pairs) = self.density_ratio()?;
        Ok(edges as f64 / pairs as f64)
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v as usize,
                vertex_count: self.vertex_count(),
            })
        }
    }

    /// Sorted neighborhood of `v`, never containing `v` itself.
    pub fn neighborhood(&self, v: VertexId, mode: NeighborhoodMode) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        let mut out = Vec::new();
        self.neighborhood_into(v, mode, &mut out);
        Ok(out)
    }

    pub(crate) fn neighborhood_into(
        &self,
        v: VertexId,
        mode: NeighborhoodMode,
        buf: &mut Vec<VertexId>,
    ) {
        buf.clear();
        match mode {
            NeighborhoodMode::Out => buf.extend_from_slice(self.out_neighbors(v)),
            NeighborhoodMode::In => buf.extend_from_slice(self.in_neighbors(v)),
            NeighborhoodMode::All => {
                let (a, b) = (self.out_neighbors(v), self.in_neighbors(v));
                buf.reserve(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => {
                            buf.push(a[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            buf.push(b[j]);
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            buf.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                buf.extend_from_slice(&a[i..]);
                buf.extend_from_slice(&b[j..]);
            }
        }
    }

    /// Number of directed edges with both endpoints in `vs`. Repeated ids
    /// in `vs` are counted once.
    pub fn induced_edge_count(&self, vs: &[VertexId]) -> Result<u64> {
        for &v in vs {
            self.check_vertex(v)?;
        }
        Ok(InducedCounter::new(self).count(vs))
    }
}

/// Reusable scratch space for induced-edge counting on one graph.
pub(crate) struct InducedCounter<'g> {
    graph: &'g DirectedGraph,
    mask: Vec<u64>,
    members: Vec<VertexId>,
}

impl<'g> InducedCounter<'g> {
    pub(crate) fn new(graph: &'g DirectedGraph) -> Self {
        InducedCounter {
            graph,
            mask: vec![0u64; graph.vertex_count().div_ceil(64)],
            members: Vec::new(),
        }
    }

    fn load(&mut self, vs: &[VertexId]) {
        self.members.clear();
        for &v in vs {
            let (w, bit) = (v as usize / 64, 1u64 << (v % 64));
            if self.mask[w] & bit == 0 {
                self.mask[w] |= bit;
                self.members.push(v);
            }
        }
    }

    fn unload(&mut self) {
        for &v in &self.members {
            self.mask[v as usize / 64] = 0;
        }
    }

    pub(crate) fn count(&mut self, vs: &[VertexId]) -> u64 {
        if vs.len() < 2 {
            return 0;
        }
        self.load(vs);
        let total = match &self.graph.dense {
            Some(matrix) => self.count_dense_loaded(matrix),
            None => self.count_sparse_loaded(),
        };
        self.unload();
        total
    }

    #[cfg(test)]
    pub(crate) fn count_sparse(&mut self, vs: &[VertexId]) -> u64 {
        self.load(vs);
        let total = self.count_sparse_loaded();
        self.unload();
        total
    }

    #[cfg(test)]
    pub(crate) fn count_dense(&mut self, vs: &[VertexId], matrix: &BitMatrix) -> u64 {
        self.load(vs);
        let total = self.count_dense_loaded(matrix);
        self.unload();
        total
    }

    fn count_sparse_loaded(&self) -> u64 {
        let mask = &self.mask;
        let in_mask = |v: VertexId| mask[v as usize / 64] & (1u64 << (v % 64)) != 0;
        let mut total = 0u64;
        for &u in &self.members {
            let out = self.graph.out_neighbors(u);
            // Iterate whichever of the two sets is smaller.
            total += if out.len() <= self.members.len() {
                out.iter().filter(|&&v| in_mask(v)).count()
            } else {
                self.members
                    .iter()
                    .filter(|v| out.binary_search(v).is_ok())
                    .count()
            } as u64;
        }
        total
    }

    fn count_dense_loaded(&self, matrix: &BitMatrix) -> u64 {
        let lo = self.members.iter().min().map_or(0, |&v| v as usize / 64);
        let hi = self.members.iter().max().map_or(0, |&v| v as usize / 64 + 1);
        let mask = &self.mask[lo..hi];
        let mut total = 0u64;
        for &u in &self.members {
            let row = &matrix.row(u)[lo..hi];
            total += row
                .iter()
                .zip(mask)
                .map(|(r, m)| (r & m).count_ones() as u64)
                .sum::<u64>();
        }
        total
    }
}

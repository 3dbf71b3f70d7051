//! Plain-text edge lists.
//!
//! One directed edge `u v` per line, labels being whitespace-separated
//! 64-bit integers. Lines starting with the comment prefix are skipped.
//! Two comment forms are also understood so that emitted files round-trip:
//! `# Nodes: N Edges: M` (informational) and `# Isolated: <label>`, which
//! declares a vertex with no incident edges.
//!
//! Internal ids follow ascending label order, so the id assignment does not
//! depend on the order of lines in the file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Cleanup, DirectedGraph, VertexId};

const ISOLATED_DIRECTIVE: &str = "Isolated:";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Lines starting with this character are comments.
    pub comment_prefix: char,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            comment_prefix: '#',
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub lines: u64,
    pub edge_lines: u64,
    pub self_loops_dropped: u64,
    pub duplicates_dropped: u64,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: DirectedGraph,
    pub stats: LoadStats,
}

fn parse_label(token: &str, line: usize) -> Result<i64> {
    token.parse::<i64>().map_err(|_| Error::Parse {
        line,
        message: format!("{token:?} is not an integer vertex label"),
    })
}

/// Reads an edge list. An input with no edges yields an empty graph.
pub fn load_edge_list<R: BufRead>(mut reader: R, options: &LoadOptions) -> Result<LoadedGraph> {
    let mut stats = LoadStats::default();
    let mut raw: Vec<(i64, i64)> = Vec::new();
    let mut ids: HashMap<i64, VertexId> = HashMap::new();
    let mut first_seen: Vec<i64> = Vec::new();
    let mut intern = |label: i64, first_seen: &mut Vec<i64>| -> Result<VertexId> {
        let next = first_seen.len();
        let id = *ids.entry(label).or_insert_with(|| {
            first_seen.push(label);
            next as VertexId
        });
        if first_seen.len() > VertexId::MAX as usize {
            return Err(Error::param("too many distinct vertex labels"));
        }
        Ok(id)
    };

    let mut line = String::new();
    let mut line_no = 0usize;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        line_no += 1;
        stats.lines += 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix(options.comment_prefix) {
            if let Some(rest) = comment.trim_start().strip_prefix(ISOLATED_DIRECTIVE) {
                for token in rest.split_ascii_whitespace() {
                    intern(parse_label(token, line_no)?, &mut first_seen)?;
                }
            }
            continue;
        }
        let mut tokens = text.split_ascii_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected two vertex labels, found {}",
                    text.split_ascii_whitespace().count()
                ),
            });
        };
        let (u, v) = (parse_label(a, line_no)?, parse_label(b, line_no)?);
        intern(u, &mut first_seen)?;
        intern(v, &mut first_seen)?;
        raw.push((u, v));
        stats.edge_lines += 1;
    }
    drop(ids);

    // Renumber by ascending label.
    let mut labels = first_seen;
    labels.sort_unstable();
    let rank = |label: i64| labels.binary_search(&label).expect("interned label") as VertexId;
    let edges: Vec<(VertexId, VertexId)> = raw.iter().map(|&(u, v)| (rank(u), rank(v))).collect();
    drop(raw);

    let (graph, Cleanup {
        self_loops_dropped,
        duplicates_dropped,
    }) = DirectedGraph::from_edges(labels.len(), edges)?;
    stats.self_loops_dropped = self_loops_dropped;
    stats.duplicates_dropped = duplicates_dropped;
    let graph = graph.with_labels(labels)?;
    Ok(LoadedGraph { graph, stats })
}

pub fn load_edge_list_path(path: impl AsRef<Path>, options: &LoadOptions) -> Result<LoadedGraph> {
    let file = File::open(path.as_ref())?;
    load_edge_list(BufReader::with_capacity(1 << 20, file), options)
}

/// Writes `g` as an edge list, one `source<TAB>target` line per edge in
/// ascending id order, using external labels.
pub fn emit_edge_list<W: Write>(g: &DirectedGraph, sink: W) -> Result<()> {
    let mut out = BufWriter::new(sink);
    writeln!(
        out,
        "# Nodes: {} Edges: {}",
        g.vertex_count(),
        g.edge_count()
    )?;
    for v in 0..g.vertex_count() as VertexId {
        if g.out_degree(v) == 0 && g.in_degree(v) == 0 {
            writeln!(out, "# {ISOLATED_DIRECTIVE} {}", g.label(v))?;
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "{}\t{}", g.label(u), g.label(v))?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_edge_list_path(g: &DirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    emit_edge_list(g, File::create(path.as_ref())?)
}

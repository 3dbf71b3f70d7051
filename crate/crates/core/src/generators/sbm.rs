use rand::Rng;
use rayon::prelude::*;

use super::{bernoulli_run, check_probability, check_vertex_count};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng;

#[derive(Debug, Clone)]
pub struct SbmOutcome {
    pub graph: DirectedGraph,
    /// Block sizes in vertex order; block `b` owns a contiguous id range.
    pub block_sizes: Vec<usize>,
    /// Non-fatal parameter concerns, e.g. `p_inter >= p_intra`.
    pub warnings: Vec<String>,
}

/// Draws block sizes uniformly from `block_min..=block_max` while they fit
/// in `target_n`. When the next draw would overflow, the remainder becomes
/// a final block if it is at least `block_min`.
pub fn draw_block_sizes<R: Rng>(
    target_n: usize,
    block_min: usize,
    block_max: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if block_min == 0 || block_min > block_max {
        return Err(Error::param(format!(
            "block size range {block_min}..={block_max} is empty or includes 0"
        )));
    }
    if target_n < block_min {
        return Err(Error::param(format!(
            "target_n = {target_n} is smaller than block_min = {block_min}"
        )));
    }
    let mut sizes = Vec::new();
    let mut total = 0usize;
    loop {
        let size = rng.random_range(block_min..=block_max);
        if total + size > target_n {
            let rest = target_n - total;
            if rest >= block_min {
                sizes.push(rest);
            }
            return Ok(sizes);
        }
        total += size;
        sizes.push(size);
    }
}

pub fn generate_sbm(
    target_n: usize,
    block_min: usize,
    block_max: usize,
    p_intra: f64,
    p_inter: f64,
    seed: u64,
) -> Result<DirectedGraph> {
    Ok(generate_sbm_detailed(target_n, block_min, block_max, p_intra, p_inter, seed)?.graph)
}

/// Directed stochastic block model with constant intra- and inter-block
/// edge probabilities over ordered pairs.
pub fn generate_sbm_detailed(
    target_n: usize,
    block_min: usize,
    block_max: usize,
    p_intra: f64,
    p_inter: f64,
    seed: u64,
) -> Result<SbmOutcome> {
    check_probability("p_intra", p_intra)?;
    check_probability("p_inter", p_inter)?;
    check_vertex_count(target_n)?;
    let mut warnings = Vec::new();
    if p_inter >= p_intra {
        warnings.push(format!(
            "p_inter = {p_inter} is not below p_intra = {p_intra}; blocks are not denser than the background"
        ));
    }
    let block_sizes = draw_block_sizes(target_n, block_min, block_max, &mut rng::substream(seed, 0))?;
    let mut bounds = Vec::with_capacity(block_sizes.len() + 1);
    bounds.push(0usize);
    for s in &block_sizes {
        bounds.push(bounds.last().unwrap() + s);
    }
    let n = *bounds.last().unwrap();
    if n < 2 {
        return Err(Error::param("SBM needs at least 2 vertices"));
    }
    let mut block_of = Vec::with_capacity(n);
    for (b, &s) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, s));
    }

    let row_seed = rng::mix_seed(seed, 1);
    let rows = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut rng = rng::substream(row_seed, u as u64);
            let own = block_of[u];
            let mut row = Vec::new();
            for b in 0..block_sizes.len() {
                let p = if b == own { p_intra } else { p_inter };
                bernoulli_run(&mut rng, bounds[b], bounds[b + 1], p, u, &mut row);
            }
            row
        })
        .collect();

    Ok(SbmOutcome {
        graph: DirectedGraph::from_sorted_rows(rows),
        block_sizes,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_rule() {
        for seed in 0..50 {
            let sizes = draw_block_sizes(6910, 80, 120, &mut rng::stream(seed)).unwrap();
            let total: usize = sizes.iter().sum();
            assert!(total <= 6910);
            assert!(6910 - total < 80 || total == 6910);
            assert!(sizes.iter().all(|s| (80..=120).contains(s)));
        }
    }

    #[test]
    fn invalid_ranges() {
        let mut r = rng::stream(0);
        assert!(draw_block_sizes(50, 80, 120, &mut r).is_err());
        assert!(draw_block_sizes(500, 120, 80, &mut r).is_err());
        assert!(generate_sbm(500, 80, 120, 1.2, 0.1, 0).is_err());
    }

    #[test]
    fn warns_on_inverted_probabilities() {
        let o = generate_sbm_detailed(300, 80, 120, 0.1, 0.3, 1).unwrap();
        assert_eq!(o.warnings.len(), 1);
        let o = generate_sbm_detailed(300, 80, 120, 0.3, 0.1, 1).unwrap();
        assert!(o.warnings.is_empty());
    }

    #[test]
    fn blocks_are_denser() {
        let o = generate_sbm_detailed(1000, 80, 120, 0.6, 0.05, 3).unwrap();
        let g = &o.graph;
        let mut start = 0;
        let mut intra = 0u64;
        let mut intra_pairs = 0u64;
        for &s in &o.block_sizes {
            let members: Vec<u32> = (start as u32..(start + s) as u32).collect();
            intra += g.induced_edge_count(&members).unwrap();
            intra_pairs += (s * (s - 1)) as u64;
            start += s;
        }
        let n = g.vertex_count() as u64;
        let inter_pairs = n * (n - 1) - intra_pairs;
        let p_in = intra as f64 / intra_pairs as f64;
        let p_out = (g.edge_count() - intra) as f64 / inter_pairs as f64;
        assert!((p_in - 0.6).abs() < 0.02, "{p_in}");
        assert!((p_out - 0.05).abs() < 0.005, "{p_out}");
    }

    #[test]
    fn degenerate_sbm_matches_er_density() {
        let g = generate_sbm(2000, 80, 120, 0.2, 0.2, 5).unwrap();
        let pairs = (g.vertex_count() * (g.vertex_count() - 1)) as f64;
        let sd = (0.2 * 0.8 / pairs).sqrt();
        assert!((g.global_density().unwrap() - 0.2).abs() < 4.0 * sd);
    }

    #[test]
    fn equal_blocks_expected_density() {
        // 69 blocks of exactly 100 vertices.
        let o = generate_sbm_detailed(6900, 100, 100, 0.75, 0.3, 8).unwrap();
        assert_eq!(o.block_sizes, vec![100; 69]);
        let n = 6900f64;
        let pairs = n * (n - 1.0);
        let intra_pairs = 69.0 * 100.0 * 99.0;
        let expected = 0.3 + 0.45 * intra_pairs / pairs;
        assert!((expected - 0.30645).abs() < 1e-4);
        let var = intra_pairs * 0.75 * 0.25 + (pairs - intra_pairs) * 0.3 * 0.7;
        let sd = var.sqrt() / pairs;
        let k = o.graph.global_density().unwrap();
        assert!((k - expected).abs() < 4.0 * sd, "{k} vs {expected}");
    }

    #[test]
    fn standard_configuration_size() {
        let o = generate_sbm_detailed(6910, 80, 120, 0.75, 0.3, 42).unwrap();
        let n = o.graph.vertex_count();
        assert!(n > 6910 - 80 && n <= 6910, "{n}");
    }
}

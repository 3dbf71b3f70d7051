//! Seeded generators for the four synthetic directed graph families used to
//! validate the test: Erdős–Rényi–Gilbert (ER), configuration model with
//! power-law degrees (CM), connected caveman (CC) and stochastic block
//! model (SBM).
//!
//! All generators are deterministic in their seed. Random rows are drawn
//! from per-source substreams so row generation order does not matter.

mod caveman;
mod cm;
mod er;
mod sbm;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, VertexId};

pub use caveman::generate_caveman;
pub use cm::{generate_cm, generate_cm_detailed, CmOutcome, PowerLawDegrees};
pub use er::generate_er;
pub use sbm::{draw_block_sizes, generate_sbm, generate_sbm_detailed, SbmOutcome};

/// Parameters of one graph family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Er {
        n: usize,
        p: f64,
    },
    Cm {
        n: usize,
        exponent: f64,
        min_degree: usize,
    },
    #[serde(rename = "cc", alias = "caveman")]
    Caveman {
        num_cliques: usize,
        clique_size: usize,
    },
    Sbm {
        target_n: usize,
        block_min: usize,
        block_max: usize,
        p_intra: f64,
        p_inter: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Er,
    Cm,
    Cc,
    Sbm,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(FamilyKind::Er),
            "cm" => Ok(FamilyKind::Cm),
            "cc" | "caveman" => Ok(FamilyKind::Cc),
            "sbm" => Ok(FamilyKind::Sbm),
            other => Err(Error::param(format!(
                "unknown graph family {other:?} (expected er, cm, caveman or sbm)"
            ))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Er => "er",
            FamilyKind::Cm => "cm",
            FamilyKind::Cc => "cc",
            FamilyKind::Sbm => "sbm",
        })
    }
}

impl Family {
    /// The ~7000-vertex benchmark configuration of each family.
    pub fn standard(kind: FamilyKind) -> Family {
        match kind {
            FamilyKind::Er => Family::Er { n: 7000, p: 0.333 },
            FamilyKind::Cm => Family::Cm {
                n: 7000,
                exponent: 3.5,
                min_degree: 1,
            },
            FamilyKind::Cc => Family::Caveman {
                num_cliques: 140,
                clique_size: 50,
            },
            FamilyKind::Sbm => Family::Sbm {
                target_n: 6910,
                block_min: 80,
                block_max: 120,
                p_intra: 0.75,
                p_inter: 0.3,
            },
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Er { .. } => FamilyKind::Er,
            Family::Cm { .. } => FamilyKind::Cm,
            Family::Caveman { .. } => FamilyKind::Cc,
            Family::Sbm { .. } => FamilyKind::Sbm,
        }
    }
}

/// A family together with the seed that realises it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    #[serde(flatten)]
    pub family: Family,
}

impl GeneratorSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        GeneratorSpec { seed, family }
    }

    pub fn standard(kind: FamilyKind, seed: u64) -> Self {
        GeneratorSpec::new(Family::standard(kind), seed)
    }

    pub fn generate(&self) -> Result<DirectedGraph> {
        match self.family {
            Family::Er { n, p } => generate_er(n, p, self.seed),
            Family::Cm {
                n,
                exponent,
                min_degree,
            } => generate_cm(n, exponent, min_degree, self.seed),
            Family::Caveman {
                num_cliques,
                clique_size,
            } => generate_caveman(num_cliques, clique_size, self.seed),
            Family::Sbm {
                target_n,
                block_min,
                block_max,
                p_intra,
                p_inter,
            } => generate_sbm(target_n, block_min, block_max, p_intra, p_inter, self.seed),
        }
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {p} is not a probability")))
    }
}

pub(crate) fn check_vertex_count(n: usize) -> Result<()> {
    if n > VertexId::MAX as usize {
        Err(Error::param(format!("{n} vertices exceed the supported maximum")))
    } else {
        Ok(())
    }
}

/// Appends to `out` every `v` in `lo..hi` (except `skip`) that wins an
/// independent Bernoulli(`p`) trial, in ascending order. Uses geometric
/// gap sampling so the cost is proportional to the number of successes.
pub(crate) fn bernoulli_run<R: Rng>(
    rng: &mut R,
    lo: usize,
    hi: usize,
    p: f64,
    skip: usize,
    out: &mut Vec<VertexId>,
) {
    if lo >= hi || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend((lo..hi).filter(|&v| v != skip).map(|v| v as VertexId));
        return;
    }
    let log_q = (-p).ln_1p();
    let mut pos = lo;
    loop {
        let r: f64 = rng.random();
        let gap = ((-r).ln_1p() / log_q).floor();
        if gap >= (hi - pos) as f64 {
            return;
        }
        pos += gap as usize;
        if pos != skip {
            out.push(pos as VertexId);
        }
        pos += 1;
        if pos >= hi {
            return;
        }
    }
}

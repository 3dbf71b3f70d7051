//! Sampling-based test of clusterability for simple directed graphs.
//!
//! A clusterable graph has pockets of high density, so the mean density of
//! vertex neighborhoods should exceed the graph's global density. The δ
//! test samples a small fraction of neighborhoods and checks this with a
//! one-sided t test; two graphs can be compared with Welch's test.
//!
//! ```
//! use delta_core::{generators::generate_caveman, single_graph_test, SamplePlan};
//!
//! let g = generate_caveman(20, 10, 0).unwrap();
//! let run = single_graph_test(&g, &SamplePlan::fraction(0.2, 7), 0.05).unwrap();
//! assert!(run.meets_necessary_condition());
//! ```

pub mod delta;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod io;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use delta::{single_graph_test, two_graph_test, DeltaRunResult, DeltaSample, TwoGraphResult};
pub use error::{Error, GraphRole, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, GraphSource, Mode};
pub use generators::{Family, FamilyKind, GeneratorSpec};
pub use graph::{DirectedGraph, NeighborhoodMode, VertexId};
pub use io::{emit_edge_list, load_edge_list, LoadOptions};
pub use sampler::{DegeneratePolicy, NeighborhoodSample, SamplePlan, SampleSize};
pub use stats::TTestResult;

//! The δ test.
//!
//! Each sampled neighborhood density `κ_i` is normalised by the global
//! density `K` into `δ_i = κ_i / K - 1`. A single graph is tested with a
//! one-sided one-sample t test of `E[δ] = 0` against `E[δ] > 0`; rejecting
//! means the graph meets the necessary condition for clusterability. Two
//! graphs G and H are compared with a one-sided Welch test on their `δ_i`
//! samples, the alternative being `E[δ_G] > E[δ_H]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, GraphRole, Result};
use crate::graph::DirectedGraph;
use crate::sampler::{sample_local_densities, usable_kappas, NeighborhoodSample, SamplePlan};
use crate::stats::{self, TTestResult};

/// Sampled densities of one graph and their normalisation against `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSample {
    pub global_density: f64,
    /// Usable local densities in draw order.
    pub kappas: Vec<f64>,
    /// `κ_i / K - 1`, aligned with `kappas`.
    pub delta_values: Vec<f64>,
    /// `mean(κ) / K - 1`.
    pub delta_mean: f64,
    /// Every drawn neighborhood, including degenerate ones kept by the plan.
    pub samples: Vec<NeighborhoodSample>,
}

impl DeltaSample {
    pub fn draw(g: &DirectedGraph, plan: &SamplePlan) -> Result<Self> {
        let k = g.global_density()?;
        if k == 0.0 {
            return Err(Error::ZeroDensity);
        }
        let samples = sample_local_densities(g, plan)?;
        let kappas = usable_kappas(&samples, plan.degenerate);
        Self::from_kappas(k, kappas, samples)
    }

    /// Builds the normalised sample from precomputed local densities.
    pub fn from_kappas(
        global_density: f64,
        kappas: Vec<f64>,
        samples: Vec<NeighborhoodSample>,
    ) -> Result<Self> {
        if global_density.is_nan() || global_density <= 0.0 {
            return Err(Error::ZeroDensity);
        }
        if kappas.len() < 2 {
            return Err(Error::SampleTooSmall(kappas.len()));
        }
        let delta_values = kappas.iter().map(|k| k / global_density - 1.0).collect();
        let delta_mean = stats::mean(&kappas) / global_density - 1.0;
        Ok(DeltaSample {
            global_density,
            kappas,
            delta_values,
            delta_mean,
            samples,
        })
    }

    pub fn mean_local_density(&self) -> f64 {
        stats::mean(&self.kappas)
    }

    /// One-sided one-sample t test of the `δ_i` against 0.
    pub fn test(&self, alpha: f64) -> Result<TTestResult> {
        stats::one_sample_greater(&self.delta_values, 0.0, alpha)
    }
}

/// One iteration of the single-graph test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRunResult {
    #[serde(flatten)]
    pub sample: DeltaSample,
    pub ttest: TTestResult,
}

impl DeltaRunResult {
    /// True when the graph meets the necessary condition for clusterability.
    pub fn meets_necessary_condition(&self) -> bool {
        self.ttest.reject
    }
}

pub fn single_graph_test(g: &DirectedGraph, plan: &SamplePlan, alpha: f64) -> Result<DeltaRunResult> {
    let sample = DeltaSample::draw(g, plan)?;
    let ttest = sample.test(alpha)?;
    Ok(DeltaRunResult { sample, ttest })
}

/// One iteration of the two-graph comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoGraphResult {
    pub run_g: DeltaSample,
    pub run_h: DeltaSample,
    /// `δ_G - δ_H`.
    pub d_gh: f64,
    pub ttest: TTestResult,
}

/// Draws both samples, attributing failures to the offending graph.
pub fn draw_pair(
    g: &DirectedGraph,
    h: &DirectedGraph,
    plan_g: &SamplePlan,
    plan_h: &SamplePlan,
) -> Result<(DeltaSample, DeltaSample)> {
    let run_g = DeltaSample::draw(g, plan_g).map_err(|e| e.in_graph(GraphRole::G))?;
    let run_h = DeltaSample::draw(h, plan_h).map_err(|e| e.in_graph(GraphRole::H))?;
    Ok((run_g, run_h))
}

pub fn compare_samples(run_g: DeltaSample, run_h: DeltaSample, alpha: f64) -> Result<TwoGraphResult> {
    let ttest = stats::welch_greater(&run_g.delta_values, &run_h.delta_values, alpha)?;
    Ok(TwoGraphResult {
        d_gh: run_g.delta_mean - run_h.delta_mean,
        run_g,
        run_h,
        ttest,
    })
}

/// Tests whether G has significantly higher normalised local density
/// than H.
pub fn two_graph_test(
    g: &DirectedGraph,
    h: &DirectedGraph,
    plan_g: &SamplePlan,
    plan_h: &SamplePlan,
    alpha: f64,
) -> Result<TwoGraphResult> {
    let (run_g, run_h) = draw_pair(g, h, plan_g, plan_h)?;
    compare_samples(run_g, run_h, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_caveman, generate_er, generate_sbm};
    use proptest::prelude::*;

    #[test]
    fn complete_graph_is_zero_variance() {
        let g = generate_er(50, 1.0, 0).unwrap();
        let err = single_graph_test(&g, &SamplePlan::fraction(0.2, 1), 0.05).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance));
    }

    #[test]
    fn edgeless_graph_is_undefined() {
        let g = generate_er(50, 0.0, 0).unwrap();
        assert!(matches!(
            single_graph_test(&g, &SamplePlan::fraction(0.2, 1), 0.05),
            Err(Error::ZeroDensity)
        ));
    }

    #[test]
    fn caveman_meets_condition() {
        let g = generate_caveman(20, 10, 0).unwrap();
        let r = single_graph_test(&g, &SamplePlan::fraction(0.2, 3), 0.05).unwrap();
        assert!(r.meets_necessary_condition());
        assert!(r.sample.delta_mean > 0.0);
    }

    #[test]
    fn run_invariants() {
        let g = generate_sbm(600, 80, 120, 0.6, 0.1, 4).unwrap();
        let r = single_graph_test(&g, &SamplePlan::fraction(0.1, 9), 0.05).unwrap();
        let s = &r.sample;
        let expect = stats::mean(&s.kappas) / s.global_density - 1.0;
        assert!((s.delta_mean - expect).abs() < 1e-12);
        assert!(s.delta_values.iter().all(|&d| d >= -1.0));
        let direct = stats::one_sample_greater(&s.delta_values, 0.0, 0.05).unwrap();
        assert_eq!(direct, r.ttest);
        // Testing κ against K directly gives the same verdict.
        let raw = stats::one_sample_greater(&s.kappas, s.global_density, 0.05).unwrap();
        assert!((raw.t_statistic - r.ttest.t_statistic).abs() < 1e-9 * r.ttest.t_statistic.abs().max(1.0));
        assert!((raw.p_value - r.ttest.p_value).abs() < 1e-9);
        assert_eq!(raw.reject, r.ttest.reject);
    }

    #[test]
    fn result_serde_round_trip() {
        let g = generate_er(200, 0.1, 2).unwrap();
        let r = single_graph_test(&g, &SamplePlan::fraction(0.1, 5), 0.05).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: DeltaRunResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn identical_graphs_and_seeds_do_not_reject() {
        let g = generate_er(300, 0.1, 7).unwrap();
        let plan = SamplePlan::fraction(0.1, 11);
        let r = two_graph_test(&g, &g, &plan, &plan, 0.05).unwrap();
        assert_eq!(r.ttest.t_statistic, 0.0);
        assert!(!r.ttest.reject);
        assert_eq!(r.d_gh, 0.0);
    }

    #[test]
    fn errors_name_the_graph() {
        let g = generate_caveman(10, 6, 0).unwrap();
        let empty = generate_er(60, 0.0, 0).unwrap();
        let plan = SamplePlan::fraction(0.2, 1);
        match two_graph_test(&g, &empty, &plan, &plan, 0.05) {
            Err(Error::InGraph { role: GraphRole::H, source }) => {
                assert!(matches!(*source, Error::ZeroDensity))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clustered_beats_random() {
        let g = generate_caveman(30, 10, 0).unwrap();
        let h = generate_er(300, 0.03, 1).unwrap();
        let plan = SamplePlan::fraction(0.1, 2);
        let r = two_graph_test(&g, &h, &plan, &plan, 0.05).unwrap();
        assert!(r.ttest.reject);
        assert!((r.d_gh - (r.run_g.delta_mean - r.run_h.delta_mean)).abs() < 1e-15);
        let back = two_graph_test(&h, &g, &plan, &plan, 0.05).unwrap();
        assert!(!back.ttest.reject);
    }

    proptest! {
        #[test]
        fn rescaling_kappas_and_density_keeps_verdict(
            kappas in proptest::collection::vec(0.0f64..1.0, 3..50),
            k in 0.01f64..1.0,
            c in 0.01f64..2.0,
        ) {
            prop_assume!(kappas.iter().any(|&x| x != kappas[0]));
            let a = DeltaSample::from_kappas(k, kappas.clone(), vec![]).unwrap();
            let scaled: Vec<f64> = kappas.iter().map(|x| x * c).collect();
            let b = DeltaSample::from_kappas(k * c, scaled, vec![]).unwrap();
            for (x, y) in a.delta_values.iter().zip(&b.delta_values) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
            let (ta, tb) = (a.test(0.05).unwrap(), b.test(0.05).unwrap());
            prop_assert!((ta.t_statistic - tb.t_statistic).abs() < 1e-8 * (1.0 + ta.t_statistic.abs()));
            prop_assert_eq!(ta.degrees_of_freedom, tb.degrees_of_freedom);
            prop_assert!((ta.p_value - tb.p_value).abs() < 1e-8);
        }
    }
}

//! Greedy run, support extraction and exact refinement chained together.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{BoundarySet, DistanceMatrix};
use crate::greedy::{run, ConvergenceReport, GreedyState, RunConfig, TieBreak};
use crate::measure::{
    default_support_threshold, extract_support, is_balanced, refine_on_support, repair_support, BalanceReport,
    RefineFailure, VertexMeasure, DEFAULT_BALANCE_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub initial: Vec<usize>,
    pub tie_break: TieBreak,
    pub run: RunConfig,
    /// Support threshold on the empirical measure; defaults to
    /// `max(1e-3, 0.5 / n)`.
    pub support_eps: Option<f64>,
    pub balance_tol: f64,
    /// Exchange steps allowed when the first support candidate fails.
    pub repair_iter: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            initial: vec![0],
            tie_break: TieBreak::SmallestIndex,
            run: RunConfig::default(),
            support_eps: None,
            balance_tol: DEFAULT_BALANCE_TOL,
            repair_iter: 64,
        }
    }
}

/// Where the reported measure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSource {
    /// Solved exactly on the support read off the empirical measure.
    Refined,
    /// Solved exactly after exchanging vertices in and out of that support.
    Repaired,
    /// Refinement failed; the empirical measure itself.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub convergence: ConvergenceReport,
    pub empirical: VertexMeasure,
    pub support_eps: f64,
    pub candidate_support: Vec<usize>,
    /// Why the first candidate support did not refine, if it did not.
    pub refine_failure: Option<RefineFailure>,
    pub source: MeasureSource,
    pub measure: VertexMeasure,
    pub balance: BalanceReport,
}

/// Greedy run from `config.initial`, then support extraction, exact
/// refinement (with repair) and a balance check of the result.
pub fn greedy_balanced(
    dist: &DistanceMatrix,
    boundary: Option<&BoundarySet>,
    config: &PipelineConfig,
) -> Result<PipelineOutcome> {
    let mut state = GreedyState::new(dist, &config.initial)?.with_tie_break(config.tie_break, boundary)?;
    let convergence = run(&mut state, &config.run)?;
    let empirical = state.empirical_measure();
    let support_eps = config.support_eps.unwrap_or_else(|| default_support_threshold(dist.n()));
    let candidate_support = extract_support(&empirical, support_eps)?;

    let (source, measure, refine_failure) = match refine_on_support(dist, &candidate_support) {
        Ok(r) => (MeasureSource::Refined, r.measure, None),
        Err(first) => match repair_support(dist, &candidate_support, empirical.weights(), config.repair_iter) {
            Ok(r) => (MeasureSource::Repaired, r.measure, Some(first)),
            Err(_) => (MeasureSource::Empirical, empirical.clone(), Some(first)),
        },
    };
    let balance = is_balanced(&measure, dist, config.balance_tol)?;
    Ok(PipelineOutcome {
        convergence,
        empirical,
        support_eps,
        candidate_support,
        refine_failure,
        source,
        measure,
        balance,
    })
}

//! Distractor selection: minimize `F = S + lambda * variance` over the
//! `(m-1)`-subsets of a candidate pool, either with the genetic algorithm
//! or by exhaustive enumeration.

mod audit;
mod exhaustive;
mod ga;
mod sweep;

pub use audit::{audit_ambiguity, AmbiguityLabels, AuditPlan, AuditRow, AuditTable};
pub use exhaustive::EXHAUSTIVE_LIMIT;
pub use ga::{GaConfig, Genome};
pub use sweep::{format_delta, lambda_sweep, lambda_sweep_with, SweepMethod, SweepRow, SweepTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, OptionSet, Scratch, SimilarityGraph, SubgraphStats, VarianceEdges};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub option_set: OptionSet,
    pub stats: SubgraphStats,
    pub generations_run: usize,
    /// Generation of the last strict improvement of the best objective.
    pub converged_at: usize,
}

/// One selection instance: which answer, which candidates, how many options.
#[derive(Debug, Clone)]
pub struct SelectionProblem<'g> {
    graph: &'g SimilarityGraph,
    answer: usize,
    candidates: Vec<usize>,
    option_count: usize,
    lambda: f64,
    variance_edges: VarianceEdges,
}

impl<'g> SelectionProblem<'g> {
    /// Candidates default to every class except the answer.
    pub fn new(graph: &'g SimilarityGraph, answer: usize, m: usize, lambda: f64) -> Result<Self> {
        let candidates = (0..graph.len()).filter(|&i| i != answer).collect();
        Self::with_candidates(graph, answer, candidates, m, lambda)
    }

    pub fn with_candidates(
        graph: &'g SimilarityGraph,
        answer: usize,
        candidates: Vec<usize>,
        m: usize,
        lambda: f64,
    ) -> Result<Self> {
        let n = graph.len();
        if answer >= n {
            return Err(Error::InvalidOptionSet(format!(
                "answer index {answer} out of range for {n} classes"
            )));
        }
        if m < 2 || m > n {
            return Err(Error::InvalidOptionSet(format!(
                "option count {m} must be in [2, {n}]"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let mut candidates: Vec<usize> = candidates.into_iter().filter(|&c| c != answer).collect();
        candidates.sort_unstable();
        candidates.dedup();
        if let Some(&c) = candidates.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidOptionSet(format!("candidate index {c} out of range")));
        }
        if candidates.len() < m - 1 {
            return Err(Error::InvalidOptionSet(format!(
                "{} candidates cannot supply {} distractors",
                candidates.len(),
                m - 1
            )));
        }
        Ok(SelectionProblem {
            graph,
            answer,
            candidates,
            option_count: m,
            lambda,
            variance_edges: VarianceEdges::All,
        })
    }

    pub fn with_variance_edges(mut self, edges: VarianceEdges) -> Self {
        self.variance_edges = edges;
        self
    }

    pub fn graph(&self) -> &SimilarityGraph {
        self.graph
    }

    pub fn answer(&self) -> usize {
        self.answer
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn option_count(&self) -> usize {
        self.option_count
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub(crate) fn distractor_count(&self) -> usize {
        self.option_count - 1
    }

    /// Objective for a sorted distractor list.
    pub(crate) fn objective(&self, distractors: &[usize], scratch: &mut Scratch) -> f64 {
        let (s, var) =
            graph::subgraph_terms(self.graph, self.answer, distractors, self.variance_edges, scratch);
        s + self.lambda * var
    }

    /// Fast, unsorted objective; within a few ulps of [`Self::objective`].
    pub(crate) fn objective_fast(&self, distractors: &[usize]) -> f64 {
        let (s, var) =
            graph::subgraph_terms_fast(self.graph, self.answer, distractors, self.variance_edges);
        s + self.lambda * var
    }

    pub(crate) fn finish(
        &self,
        distractors: Vec<usize>,
        generations_run: usize,
        converged_at: usize,
    ) -> Result<SelectionResult> {
        let option_set = OptionSet::new(self.answer, distractors, self.graph.len())?;
        let stats = graph::stats_with(self.graph, &option_set, self.lambda, self.variance_edges);
        Ok(SelectionResult {
            option_set,
            stats,
            generations_run,
            converged_at,
        })
    }

    pub fn genetic(&self, config: &GaConfig) -> Result<SelectionResult> {
        ga::run(self, config)
    }

    pub fn exhaustive(&self) -> Result<SelectionResult> {
        exhaustive::run(self)
    }
}

/// Genetic-algorithm selection over all non-answer classes.
pub fn ga_select(
    graph: &SimilarityGraph,
    answer: usize,
    m: usize,
    lambda: f64,
    config: &GaConfig,
) -> Result<SelectionResult> {
    SelectionProblem::new(graph, answer, m, lambda)?.genetic(config)
}

/// Exact argmin by enumeration; ties go to the lexicographically smallest
/// sorted distractor list.
pub fn exhaustive_select(
    graph: &SimilarityGraph,
    answer: usize,
    m: usize,
    lambda: f64,
) -> Result<SelectionResult> {
    SelectionProblem::new(graph, answer, m, lambda)?.exhaustive()
}

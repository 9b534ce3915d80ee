use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{GaConfig, SelectionProblem};
use crate::error::{Error, Result};
use crate::graph::{csv_field, SimilarityGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub answer: String,
    pub lambda: f64,
    pub s_value: f64,
    pub variance: f64,
    /// `(S - S_0) / S_0` where `S_0` is the exact optimum at lambda = 0.
    /// `None` when the baseline is zero.
    pub delta_s: Option<f64>,
    pub delta_variance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn extend(&mut self, other: SweepTable) {
        self.rows.extend(other.rows);
    }

    /// `V0,lambda,S,variance,delta_S,delta_variance`; S and variance to four
    /// decimals, deltas as percentages with an arrow for their sign.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("V0,lambda,S,variance,delta_S,delta_variance\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{},{}",
                csv_field(&r.answer),
                r.lambda,
                r.s_value,
                r.variance,
                format_delta(r.delta_s),
                format_delta(r.delta_variance)
            );
        }
        out
    }
}

/// Percent with two decimals, `↑`/`↓` according to sign, `0.00%` unmarked.
pub fn format_delta(delta: Option<f64>) -> String {
    let Some(d) = delta else {
        return "n/a".to_string();
    };
    let text = format!("{:.2}", d * 100.0);
    match text.as_str() {
        "0.00" | "-0.00" => "0.00%".to_string(),
        t if t.starts_with('-') => format!("{t}%↓"),
        t => format!("{t}%↑"),
    }
}

fn relative(value: f64, base: f64) -> Option<f64> {
    (base != 0.0).then(|| (value - base) / base)
}

/// How each point of a sweep is optimized.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepMethod {
    Exhaustive,
    Genetic(GaConfig),
}

/// Exact optimum statistics for each lambda, with deltas against lambda = 0.
pub fn lambda_sweep(
    graph: &SimilarityGraph,
    answer: usize,
    m: usize,
    lambdas: &[f64],
) -> Result<SweepTable> {
    lambda_sweep_with(graph, answer, m, lambdas, &SweepMethod::Exhaustive)
}

pub fn lambda_sweep_with(
    graph: &SimilarityGraph,
    answer: usize,
    m: usize,
    lambdas: &[f64],
    method: &SweepMethod,
) -> Result<SweepTable> {
    if lambdas.is_empty() {
        return Err(Error::Config("lambda list is empty".into()));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Config("lambdas must be finite and >= 0".into()));
    }
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("lambdas must be sorted ascending".into()));
    }
    let solve = |lambda: f64| {
        let problem = SelectionProblem::new(graph, answer, m, lambda)?;
        match method {
            SweepMethod::Exhaustive => problem.exhaustive(),
            SweepMethod::Genetic(config) => problem.genetic(config),
        }
    };
    let base = solve(0.0)?;
    let (s0, v0) = (base.stats.s_value, base.stats.variance);
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let stats = if lambda == 0.0 {
                base.stats
            } else {
                solve(lambda)?.stats
            };
            Ok(SweepRow {
                answer: graph.class_id(answer).to_string(),
                lambda,
                s_value: stats.s_value,
                variance: stats.variance,
                delta_s: relative(stats.s_value, s0),
                delta_variance: relative(stats.variance, v0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

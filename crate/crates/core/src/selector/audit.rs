use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GaConfig, SelectionProblem};
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::numeric::derive_seed;

/// Labelled `(answer, distractor)` pairs judged ambiguous.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AmbiguityLabels {
    pairs: HashSet<(usize, usize)>,
}

impl AmbiguityLabels {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        AmbiguityLabels {
            pairs: pairs.into_iter().collect(),
        }
    }

    /// Parses `answer,distractor` class-id rows; an optional header starting
    /// with `answer` is skipped.
    pub fn from_csv(text: &str, graph: &SimilarityGraph) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut pairs = HashSet::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Config(format!(
                    "ambiguity labels row {} must have 2 fields",
                    i + 1
                )));
            }
            if i == 0 && record[0].eq_ignore_ascii_case("answer") {
                continue;
            }
            pairs.insert((graph.index_of(&record[0])?, graph.index_of(&record[1])?));
        }
        Ok(AmbiguityLabels { pairs })
    }

    pub fn is_ambiguous(&self, answer: usize, distractor: usize) -> bool {
        self.pairs.contains(&(answer, distractor))
    }

    /// Distinct answers that have at least one label, ascending.
    pub fn answers(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs.iter().map(|&(a, _)| a).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn contaminated(&self, answer: usize, distractors: &[usize]) -> bool {
        distractors.iter().any(|&d| self.is_ambiguous(answer, d))
    }
}

#[derive(Debug, Clone)]
pub struct AuditPlan {
    /// Classes used as the correct answer.
    pub answers: Vec<usize>,
    /// Distractor candidates; an answer found here is excluded for its own sets.
    pub pool: Vec<usize>,
    pub ambiguous: AmbiguityLabels,
    pub option_counts: Vec<usize>,
    pub repetitions: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    /// Option count, `None` for the pooled row.
    pub quantity: Option<usize>,
    pub total: usize,
    pub random_hits: usize,
    pub algorithm_hits: usize,
}

impl AuditRow {
    pub fn random_proportion(&self) -> f64 {
        self.random_hits as f64 / self.total as f64
    }

    pub fn algorithm_proportion(&self) -> f64 {
        self.algorithm_hits as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTable {
    pub rows: Vec<AuditRow>,
}

impl AuditTable {
    pub fn overall(&self) -> &AuditRow {
        self.rows.last().expect("audit table always has an overall row")
    }

    pub fn row(&self, quantity: usize) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.quantity == Some(quantity))
    }

    /// `Quantity,Random,Algorithm` with two-decimal percentages.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Quantity,Random,Algorithm\n");
        for r in &self.rows {
            let label = r
                .quantity
                .map_or_else(|| "overall".to_string(), |q| q.to_string());
            let _ = writeln!(
                out,
                "{label},{:.2}%,{:.2}%",
                100.0 * r.random_proportion(),
                100.0 * r.algorithm_proportion()
            );
        }
        out
    }
}

/// For every answer and option count, draws `repetitions` uniformly random
/// distractor sets from the pool and `repetitions` GA-selected sets (fresh
/// derived seed each), and counts the sets holding a labelled ambiguous
/// distractor.
pub fn audit_ambiguity(
    graph: &SimilarityGraph,
    plan: &AuditPlan,
    config: &GaConfig,
    seed: u64,
) -> Result<AuditTable> {
    if plan.repetitions < 1 {
        return Err(Error::Config("repetitions must be >= 1".into()));
    }
    if plan.answers.is_empty() || plan.option_counts.is_empty() {
        return Err(Error::Config("audit needs answers and option counts".into()));
    }
    let max_m = *plan.option_counts.iter().max().expect("non-empty");
    if plan.pool.len() < max_m {
        return Err(Error::Config(format!(
            "pool of {} candidates is smaller than {max_m} options",
            plan.pool.len()
        )));
    }
    if let Some(&(a, d)) = plan
        .ambiguous
        .pairs
        .iter()
        .find(|(a, d)| *a >= graph.len() || *d >= graph.len())
    {
        return Err(Error::Config(format!("label ({a}, {d}) out of range")));
    }

    let mut rows = Vec::new();
    for &m in &plan.option_counts {
        let mut row = AuditRow {
            quantity: Some(m),
            total: 0,
            random_hits: 0,
            algorithm_hits: 0,
        };
        for &answer in &plan.answers {
            let problem =
                SelectionProblem::with_candidates(graph, answer, plan.pool.clone(), m, plan.lambda)?;
            for rep in 0..plan.repetitions {
                let tags = [answer as u64, m as u64, rep as u64];
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[&[1], &tags[..]].concat()));
                let random: Vec<usize> = problem
                    .candidates()
                    .choose_multiple(&mut rng, m - 1)
                    .copied()
                    .collect();
                let ga_cfg = config
                    .clone()
                    .with_seed(derive_seed(seed, &[&[2], &tags[..]].concat()));
                let chosen = problem.genetic(&ga_cfg)?;
                row.total += 1;
                row.random_hits += usize::from(plan.ambiguous.contaminated(answer, &random));
                row.algorithm_hits += usize::from(
                    plan.ambiguous
                        .contaminated(answer, chosen.option_set.distractors()),
                );
            }
        }
        rows.push(row);
    }
    let overall = rows.iter().fold(
        AuditRow {
            quantity: None,
            total: 0,
            random_hits: 0,
            algorithm_hits: 0,
        },
        |mut acc, r| {
            acc.total += r.total;
            acc.random_hits += r.random_hits;
            acc.algorithm_hits += r.algorithm_hits;
            acc
        },
    );
    rows.push(overall);
    Ok(AuditTable { rows })
}

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::harness::EvalRecord;
use crate::benchkit::BenchmarkManifest;
use crate::error::{Error, Result};
use crate::graph::csv_field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskScore {
    pub option_count: usize,
    pub total: usize,
    pub correct: usize,
    /// Percentage in `[0, 100]`.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorecard {
    pub model: String,
    /// Ordered by option count.
    pub subtasks: Vec<SubtaskScore>,
    pub weighted_avg: f64,
    pub parse_failures: usize,
    pub transport_failures: usize,
    pub excluded: usize,
}

/// `sum(m * acc) / sum(m)`.
pub fn weighted_average(accuracies: &[(usize, f64)]) -> f64 {
    let num: f64 = accuracies.iter().map(|&(m, a)| m as f64 * a).sum();
    let den: usize = accuracies.iter().map(|&(m, _)| m).sum();
    num / den as f64
}

pub fn subtask_label(m: usize) -> String {
    format!("{m}T1")
}

impl Scorecard {
    /// Scorecard from already computed percentages, with no per-sample counts.
    pub fn from_accuracies(model: impl Into<String>, accuracies: &[(usize, f64)]) -> Result<Self> {
        let mut accs = accuracies.to_vec();
        accs.sort_by_key(|&(m, _)| m);
        if accs.is_empty() {
            return Err(Error::Scoring("no subtasks".into()));
        }
        if accs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Scoring("duplicate subtask".into()));
        }
        if let Some(&(m, a)) = accs.iter().find(|(_, a)| !(0.0..=100.0).contains(a)) {
            return Err(Error::Scoring(format!("accuracy {a} for subtask {m} outside [0, 100]")));
        }
        Ok(Scorecard {
            model: model.into(),
            subtasks: accs
                .iter()
                .map(|&(m, a)| SubtaskScore {
                    option_count: m,
                    total: 0,
                    correct: 0,
                    accuracy: a,
                })
                .collect(),
            weighted_avg: weighted_average(&accs),
            parse_failures: 0,
            transport_failures: 0,
            excluded: 0,
        })
    }

    fn from_counts(model: String, counts: &BTreeMap<usize, (usize, usize)>) -> Result<Self> {
        let mut subtasks = Vec::new();
        for (&m, &(total, correct)) in counts {
            if total == 0 {
                return Err(Error::Scoring(format!("subtask {m} has no scored samples")));
            }
            subtasks.push(SubtaskScore {
                option_count: m,
                total,
                correct,
                accuracy: 100.0 * correct as f64 / total as f64,
            });
        }
        let accs: Vec<(usize, f64)> = subtasks.iter().map(|s| (s.option_count, s.accuracy)).collect();
        Ok(Scorecard {
            model,
            weighted_avg: weighted_average(&accs),
            subtasks,
            parse_failures: 0,
            transport_failures: 0,
            excluded: 0,
        })
    }

    pub fn accuracy(&self, m: usize) -> Option<f64> {
        self.subtasks
            .iter()
            .find(|s| s.option_count == m)
            .map(|s| s.accuracy)
    }

    pub fn accuracies(&self) -> Vec<(usize, f64)> {
        self.subtasks.iter().map(|s| (s.option_count, s.accuracy)).collect()
    }
}

/// Table with one row per card: `model,4T1,7T1,10T1,Avg.` (two decimals).
pub fn scorecards_csv(cards: &[Scorecard]) -> Result<String> {
    let Some(first) = cards.first() else {
        return Err(Error::Scoring("no scorecards".into()));
    };
    let counts: Vec<usize> = first.subtasks.iter().map(|s| s.option_count).collect();
    let mut out = String::from("model");
    for &m in &counts {
        write!(out, ",{}", subtask_label(m)).expect("write to string");
    }
    out.push_str(",Avg.\n");
    for card in cards {
        out.push_str(&csv_field(&card.model));
        for &m in &counts {
            let acc = card.accuracy(m).ok_or_else(|| {
                Error::Scoring(format!("{} lacks subtask {m}", card.model))
            })?;
            write!(out, ",{acc:.2}").expect("write to string");
        }
        writeln!(out, ",{:.2}", card.weighted_avg).expect("write to string");
    }
    Ok(out)
}

/// Top-1 accuracy per subtask. Parse failures and transport failures that
/// were not excluded count as incorrect.
pub fn score(records: &[EvalRecord], manifest: &BenchmarkManifest) -> Result<Scorecard> {
    let samples: HashMap<&str, _> = manifest.samples.iter().map(|s| (s.id.as_str(), s)).collect();
    let model = match records.first() {
        Some(r) => r.model.clone(),
        None => return Err(Error::Scoring("no records".into())),
    };
    let mut seen = HashMap::new();
    let mut counts: BTreeMap<usize, (usize, usize)> =
        manifest.option_counts().into_iter().map(|m| (m, (0, 0))).collect();
    let mut card_extra = (0, 0, 0);
    for r in records {
        if r.model != model {
            return Err(Error::Scoring(format!(
                "records mix models {model} and {}",
                r.model
            )));
        }
        let Some(sample) = samples.get(r.sample_id.as_str()) else {
            return Err(Error::Scoring(format!("unknown sample id {}", r.sample_id)));
        };
        if seen.insert(r.sample_id.as_str(), ()).is_some() {
            return Err(Error::Scoring(format!("duplicated sample id {}", r.sample_id)));
        }
        let correct = r.transport_error.is_none() && r.parsed == Some(sample.answer_letter);
        if correct != r.correct {
            return Err(Error::Scoring(format!(
                "record {} is marked correct={} but its parsed letter says otherwise",
                r.sample_id, r.correct
            )));
        }
        card_extra.0 += usize::from(r.parse_failure);
        card_extra.1 += usize::from(r.transport_error.is_some());
        if r.excluded {
            card_extra.2 += 1;
            continue;
        }
        let entry = counts.entry(sample.subtask).or_default();
        entry.0 += 1;
        entry.1 += usize::from(correct);
    }
    if seen.len() != samples.len() {
        let missing = manifest
            .samples
            .iter()
            .find(|s| !seen.contains_key(s.id.as_str()))
            .map(|s| s.id.clone())
            .unwrap_or_default();
        return Err(Error::Scoring(format!(
            "{} samples have no record (first: {missing})",
            samples.len() - seen.len()
        )));
    }
    let mut card = Scorecard::from_counts(model, &counts)?;
    (card.parse_failures, card.transport_failures, card.excluded) = card_extra;
    Ok(card)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Expected accuracy `100 / m`.
    Analytic,
    /// Uniform letters drawn per sample per trial, averaged over trials.
    Sampled,
}

/// Model name carried by baseline scorecards.
pub const BASELINE_MODEL: &str = "chance";

pub fn random_baseline(
    manifest: &BenchmarkManifest,
    mode: BaselineMode,
    trials: usize,
    seed: u64,
) -> Result<Scorecard> {
    let counts = manifest.option_counts();
    if counts.is_empty() {
        return Err(Error::Scoring("manifest has no samples".into()));
    }
    match mode {
        BaselineMode::Analytic => {
            let accs: Vec<(usize, f64)> = counts.iter().map(|&m| (m, 100.0 / m as f64)).collect();
            let mut card = Scorecard::from_accuracies(BASELINE_MODEL, &accs)?;
            for s in &mut card.subtasks {
                s.total = manifest.samples_for(s.option_count).count();
            }
            Ok(card)
        }
        BaselineMode::Sampled => {
            if trials < 1 {
                return Err(Error::Config("sampled baseline needs trials >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
            for _ in 0..trials {
                for s in &manifest.samples {
                    let pick = crate::benchkit::letter(rng.gen_range(0..s.subtask));
                    let e = tally.entry(s.subtask).or_default();
                    e.0 += 1;
                    e.1 += usize::from(pick == s.answer_letter);
                }
            }
            Scorecard::from_counts(BASELINE_MODEL.into(), &tally)
        }
    }
}

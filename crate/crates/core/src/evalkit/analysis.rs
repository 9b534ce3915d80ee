use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scoring::{subtask_label, Scorecard};
use crate::error::{Error, Result};
use crate::graph::{csv_field, SimilarityGraph};
use crate::numeric;

/// Half-width, in accuracy points, of the near-random band.
pub const DEFAULT_BAND: f64 = 5.0;

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Statistics(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Statistics("need at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Statistics("non-finite value".into()));
    }
    let (mx, my) = (numeric::mean(x), numeric::mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Statistics("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub set: String,
    /// `4T1`, `7T1`, ... or `Avg.`.
    pub subtask: String,
    pub score: f64,
    pub reference: f64,
    pub delta: f64,
    pub near_random: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub band: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,subtask,score,reference,delta,near_random\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.2},{:.2},{:+.2},{}",
                csv_field(&r.set),
                r.subtask,
                r.score,
                r.reference,
                r.delta,
                r.near_random
            )
            .expect("write to string");
        }
        out
    }

    pub fn row(&self, set: &str, subtask: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.set == set && r.subtask == subtask)
    }
}

/// Scores of each named set against a reference card; a score within `band`
/// points of the reference is flagged near-random.
pub fn compare_sets(
    cards: &BTreeMap<String, Scorecard>,
    reference: &Scorecard,
    band: f64,
) -> Result<ComparisonReport> {
    if cards.len() < 2 {
        return Err(Error::Scoring("comparison needs at least two sets".into()));
    }
    if !(band.is_finite() && band >= 0.0) {
        return Err(Error::Config("band must be finite and >= 0".into()));
    }
    let near = |delta: f64| delta.abs() <= band + 1e-9;
    let mut rows = Vec::new();
    for (name, card) in cards {
        for s in &card.subtasks {
            let r = reference.accuracy(s.option_count).ok_or_else(|| {
                Error::Scoring(format!("reference lacks subtask {}", s.option_count))
            })?;
            let delta = s.accuracy - r;
            rows.push(ComparisonRow {
                set: name.clone(),
                subtask: subtask_label(s.option_count),
                score: s.accuracy,
                reference: r,
                delta,
                near_random: near(delta),
            });
        }
        let delta = card.weighted_avg - reference.weighted_avg;
        rows.push(ComparisonRow {
            set: name.clone(),
            subtask: "Avg.".into(),
            score: card.weighted_avg,
            reference: reference.weighted_avg,
            delta,
            near_random: near(delta),
        });
    }
    Ok(ComparisonReport { band, rows })
}

/// Induced similarity sub-matrix, values to four decimals.
pub fn heatmap_csv(graph: &SimilarityGraph, subset: &[usize]) -> Result<String> {
    if subset.is_empty() {
        return Err(Error::Config("heatmap subset is empty".into()));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= graph.len()) {
        return Err(Error::Config(format!(
            "class index {i} out of range for {} classes",
            graph.len()
        )));
    }
    let mut out = String::from("class");
    for &j in subset {
        write!(out, ",{}", csv_field(graph.class_id(j))).expect("write to string");
    }
    out.push('\n');
    for &i in subset {
        out.push_str(&csv_field(graph.class_id(i)));
        for &j in subset {
            write!(out, ",{:.4}", graph.weight(i, j)).expect("write to string");
        }
        out.push('\n');
    }
    Ok(out)
}

/// `model,score` rows; a leading header row is skipped when its score is not numeric.
pub fn parse_cognition_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Statistics(format!(
                "cognition row {} has {} fields, expected 2",
                i + 1,
                rec.len()
            )));
        }
        match rec[1].parse::<f64>() {
            Ok(v) => out.push((rec[0].to_string(), v)),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(Error::Statistics(format!(
                    "cognition row {}: bad score {:?}",
                    i + 1,
                    &rec[1]
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub models: Vec<String>,
    pub association: Vec<f64>,
    pub cognition: Vec<f64>,
    pub pearson: f64,
}

/// Correlates each card's weighted average with the cognition score of the
/// same model name; models absent from either side are skipped.
pub fn correlate_with_cognition(cards: &[Scorecard], cognition: &[(String, f64)]) -> Result<Correlation> {
    let lookup: HashMap<&str, f64> = cognition.iter().map(|(m, v)| (m.as_str(), *v)).collect();
    let mut c = Correlation {
        models: Vec::new(),
        association: Vec::new(),
        cognition: Vec::new(),
        pearson: 0.0,
    };
    for card in cards {
        if let Some(&v) = lookup.get(card.model.as_str()) {
            c.models.push(card.model.clone());
            c.association.push(card.weighted_avg);
            c.cognition.push(v);
        }
    }
    c.pearson = pearson(&c.association, &c.cognition)?;
    Ok(c)
}

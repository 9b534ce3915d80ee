//! Representativeness filtering of candidate masks from per-regeneration
//! classification probabilities, and selection of the class-relevant mask
//! among overlay rankings. The probabilities and ranking scores come from
//! external model runs.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegenScoreRecord {
    pub mask_id: String,
    pub class_id: String,
    /// Probability of the true class for each regenerated image.
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurationConfig {
    pub regen_count: usize,
    pub retain_threshold: f64,
    pub samples_per_class: usize,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            regen_count: 8,
            retain_threshold: 0.97,
            samples_per_class: 25,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.retain_threshold > 0.0 && self.retain_threshold < 1.0) {
            return Err(Error::Curation(format!(
                "retain_threshold {} must lie in (0, 1)",
                self.retain_threshold
            )));
        }
        if self.regen_count < 1 || self.samples_per_class < 1 {
            return Err(Error::Curation("counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mean true-class probability over the regenerations.
pub fn representativeness(record: &RegenScoreRecord) -> f64 {
    numeric::mean(&record.probs)
}

fn check_record(record: &RegenScoreRecord, config: &CurationConfig) -> Result<()> {
    if record.probs.len() != config.regen_count {
        return Err(Error::Curation(format!(
            "mask {} has {} probabilities, expected {}",
            record.mask_id,
            record.probs.len(),
            config.regen_count
        )));
    }
    if let Some(p) = record.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Curation(format!(
            "mask {} has probability {p} outside [0, 1]",
            record.mask_id
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub mask_id: String,
    pub class_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub retained: Vec<String>,
    pub rejected: Vec<Rejection>,
}

impl FilterReport {
    pub fn rejections_csv(&self) -> String {
        let mut out = String::from("mask_id,class_id,score\n");
        for r in &self.rejected {
            out.push_str(&format!(
                "{},{},{:.6}\n",
                crate::graph::csv_field(&r.mask_id),
                crate::graph::csv_field(&r.class_id),
                r.score
            ));
        }
        out
    }
}

/// Keeps masks whose representativeness is strictly above the threshold.
/// Input order is preserved in both lists.
pub fn filter_masks(records: &[RegenScoreRecord], config: &CurationConfig) -> Result<FilterReport> {
    config.validate()?;
    let scored: Vec<(f64, &RegenScoreRecord)> = records
        .par_iter()
        .map(|r| check_record(r, config).map(|_| (representativeness(r), r)))
        .collect::<Result<_>>()?;
    let mut report = FilterReport::default();
    for (score, r) in scored {
        if score > config.retain_threshold {
            report.retained.push(r.mask_id.clone());
        } else {
            report.rejected.push(Rejection {
                mask_id: r.mask_id.clone(),
                class_id: r.class_id.clone(),
                score,
            });
        }
    }
    Ok(report)
}

/// Number of sampled masks per class.
pub fn class_sample_counts(records: &[RegenScoreRecord]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.class_id.clone()).or_insert(0) += 1;
    }
    counts
}

/// Classes whose sample count differs from `samples_per_class`.
pub fn sample_count_mismatches(
    records: &[RegenScoreRecord],
    config: &CurationConfig,
) -> Vec<(String, usize)> {
    class_sample_counts(records)
        .into_iter()
        .filter(|(_, n)| *n != config.samples_per_class)
        .collect()
}

pub fn parse_records_jsonl(text: &str) -> Result<Vec<RegenScoreRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> Result<Vec<RegenScoreRecord>> {
    let path = path.as_ref();
    parse_records_jsonl(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// One mask id per line; blank lines and `#` comments are ignored.
pub fn parse_allowlist(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Appends manually approved ids not already retained.
pub fn merge_allowlist(retained: &[String], allowlist: &[String]) -> Vec<String> {
    let mut seen: HashSet<&str> = HashSet::new();
    retained
        .iter()
        .chain(allowlist)
        .filter(|id| seen.insert(id.as_str()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRanking {
    pub image_id: String,
    pub candidate_mask_ids: Vec<String>,
    pub scores: Vec<f64>,
}

/// Highest-scoring candidate; the earliest wins ties.
pub fn pick_relevant_mask(ranking: &OverlayRanking) -> Result<&str> {
    if ranking.candidate_mask_ids.len() != ranking.scores.len() {
        return Err(Error::Curation(format!(
            "image {}: {} candidates but {} scores",
            ranking.image_id,
            ranking.candidate_mask_ids.len(),
            ranking.scores.len()
        )));
    }
    if ranking.scores.is_empty() {
        return Err(Error::Curation(format!(
            "image {}: empty ranking",
            ranking.image_id
        )));
    }
    let best = (1..ranking.scores.len()).fold(0, |best, i| {
        if ranking.scores[i] > ranking.scores[best] {
            i
        } else {
            best
        }
    });
    Ok(&ranking.candidate_mask_ids[best])
}

/// Reads rankings from a directory of per-image JSON files, or from one
/// file holding a single ranking, an array, or JSON lines.
pub fn read_rankings(path: impl AsRef<Path>) -> Result<Vec<OverlayRanking>> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        files.sort();
        return files
            .iter()
            .map(|f| {
                let text = fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
                serde_json::from_str(&text).map_err(Error::from)
            })
            .collect();
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rankings(&text)
}

pub fn parse_rankings(text: &str) -> Result<Vec<OverlayRanking>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    if let Ok(single) = serde_json::from_str::<OverlayRanking>(trimmed) {
        return Ok(vec![single]);
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

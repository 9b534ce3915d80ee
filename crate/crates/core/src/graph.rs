//! The complete similarity graph over candidate classes and the induced
//! option-subgraph statistics: mean answer similarity, edge variance, and
//! the regularized objective `F = S + lambda * variance`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mask::{self, Mask};
use crate::numeric;

/// Largest asymmetry tolerated when ingesting without rescaling.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;
/// Accepted raw entry range before any transform.
pub const RAW_MIN: f64 = -1.0;
pub const RAW_MAX: f64 = 1.0001;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// `[min, max]` of the raw entries when an affine rescale to `[0, 1]` was applied.
    pub rescaled_from: Option<[f64; 2]>,
    /// Largest `|e_ij - e_ji|` seen before symmetrizing.
    pub max_asymmetry: f64,
    /// Entries in `(1, 1.0001]` clamped to 1.
    pub clamped: usize,
    /// `#` metadata lines carried by the source file.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    class_ids: Vec<String>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl SimilarityGraph {
    /// Validates a row-major `n x n` weight matrix.
    pub fn new(class_ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        Self::with_provenance(class_ids, weights, Provenance::default())
    }

    pub fn with_provenance(
        class_ids: Vec<String>,
        weights: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = class_ids.len();
        if n < 2 {
            return Err(Error::Matrix(format!("need at least 2 classes, got {n}")));
        }
        if weights.len() != n * n {
            return Err(Error::NonSquare {
                rows: weights.len() / n,
                cols: n,
            });
        }
        let mut seen = HashSet::new();
        for id in &class_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateClass(id.clone()));
            }
        }
        for i in 0..n {
            if weights[i * n + i] != 1.0 {
                return Err(Error::Matrix(format!(
                    "diagonal entry for {} is {}, expected 1",
                    class_ids[i],
                    weights[i * n + i]
                )));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Matrix(format!(
                        "entry ({}, {}) = {w} outside [0, 1]",
                        class_ids[i], class_ids[j]
                    )));
                }
                if w != weights[j * n + i] {
                    return Err(Error::Asymmetric {
                        row: class_ids[i].clone(),
                        col: class_ids[j].clone(),
                        a: w,
                        b: weights[j * n + i],
                        tol: 0.0,
                    });
                }
            }
        }
        Ok(SimilarityGraph {
            class_ids,
            weights,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.class_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_ids.is_empty()
    }

    pub fn class_ids(&self) -> &[String] {
        &self.class_ids
    }

    pub fn class_id(&self, index: usize) -> &str {
        &self.class_ids[index]
    }

    pub fn index_of(&self, class_id: &str) -> Result<usize> {
        self.class_ids
            .iter()
            .position(|c| c == class_id)
            .ok_or_else(|| Error::UnknownClass(class_id.to_string()))
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.class_ids.len() + j]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Sub-graph over `indices`, in the given order.
    pub fn induced(&self, indices: &[usize]) -> Result<SimilarityGraph> {
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Matrix(format!("index {i} out of range")));
            }
        }
        let ids = indices.iter().map(|&i| self.class_ids[i].clone()).collect();
        let weights = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.weight(i, j))
            .collect();
        SimilarityGraph::with_provenance(ids, weights, self.provenance.clone())
    }

    /// Multiplies every off-diagonal weight by `factor`, keeping the diagonal at 1.
    pub fn scaled_off_diagonal(&self, factor: f64) -> Result<SimilarityGraph> {
        let n = self.len();
        let weights = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    1.0
                } else {
                    self.weights[k] * factor
                }
            })
            .collect();
        SimilarityGraph::with_provenance(self.class_ids.clone(), weights, self.provenance.clone())
    }

    /// Ingestion-format CSV with lossless 17-significant-digit values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class");
        for id in &self.class_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (i, id) in self.class_ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for j in 0..self.len() {
                let _ = write!(out, ",{:.16e}", self.weight(i, j));
            }
            out.push('\n');
        }
        out
    }

    /// SHA-256 of [`Self::to_csv`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a similarity CSV (`class,<id1>,...` header, one labelled row per class).
pub fn ingest_matrix(path: impl AsRef<Path>, rescale: bool) -> Result<SimilarityGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, rescale, &path.display().to_string())
}

/// True when a `#` metadata line starts with the word `rescale`
/// (for example `# rescale: minmax`).
pub fn metadata_requests_rescale(text: &str) -> bool {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .any(|l| {
            let l = l.trim_start().to_ascii_lowercase();
            l.strip_prefix("rescale")
                .is_some_and(|rest| rest.is_empty() || rest.starts_with([':', '=', ' ']))
        })
}

pub fn parse_matrix(text: &str, rescale: bool, source: &str) -> Result<SimilarityGraph> {
    let notes: Vec<String> = text
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Matrix("empty file".into()))??;
    if header.get(0).map(str::to_ascii_lowercase).as_deref() != Some("class") {
        return Err(Error::Matrix("header must start with \"class\"".into()));
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = ids.len();

    let mut raw = Vec::with_capacity(n * n);
    let mut rows = 0;
    for record in records {
        let record = record?;
        if record.len() != n + 1 {
            return Err(Error::NonSquare {
                rows: rows + 1,
                cols: record.len().saturating_sub(1),
            });
        }
        if rows < n && &record[0] != ids[rows].as_str() {
            return Err(Error::Matrix(format!(
                "row {} is labelled {:?}, expected {:?}",
                rows + 1,
                &record[0],
                ids[rows]
            )));
        }
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Matrix(format!("bad number {field:?}")))?;
            if !v.is_finite() || !(RAW_MIN..=RAW_MAX).contains(&v) {
                return Err(Error::Matrix(format!(
                    "entry {v} outside [{RAW_MIN}, {RAW_MAX}]"
                )));
            }
            raw.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::NonSquare { rows, cols: n });
    }

    let mut provenance = Provenance {
        source: source.to_string(),
        notes,
        ..Provenance::default()
    };
    let mut w = raw;
    for i in 0..n {
        for j in (i + 1)..n {
            let asym = (w[i * n + j] - w[j * n + i]).abs();
            provenance.max_asymmetry = provenance.max_asymmetry.max(asym);
            if !rescale && asym > SYMMETRY_TOLERANCE {
                return Err(Error::Asymmetric {
                    row: ids[i].clone(),
                    col: ids[j].clone(),
                    a: w[i * n + j],
                    b: w[j * n + i],
                    tol: SYMMETRY_TOLERANCE,
                });
            }
        }
    }

    if rescale {
        let (lo, hi) = w
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if hi <= lo {
            return Err(Error::Matrix("cannot rescale a constant matrix".into()));
        }
        for v in w.iter_mut() {
            *v = (*v - lo) / (hi - lo);
        }
        provenance.rescaled_from = Some([lo, hi]);
    } else {
        for i in 0..n {
            let d = w[i * n + i];
            if (d - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Matrix(format!(
                    "diagonal entry for {} is {d}, expected 1",
                    ids[i]
                )));
            }
        }
        if let Some(v) = w.iter().find(|v| **v < 0.0) {
            return Err(Error::Matrix(format!(
                "negative similarity {v}; ingest with rescaling enabled"
            )));
        }
        for v in w.iter_mut() {
            if *v > 1.0 {
                *v = 1.0;
                provenance.clamped += 1;
            }
        }
    }

    for i in 0..n {
        w[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let avg = (w[i * n + j] + w[j * n + i]) / 2.0;
            w[i * n + j] = avg;
            w[j * n + i] = avg;
        }
    }
    SimilarityGraph::with_provenance(ids, w, provenance)
}

/// Complete graph over `masks` weighted by the built-in shape similarity.
pub fn build_graph(masks: &[Mask]) -> Result<SimilarityGraph> {
    if masks.len() < 2 {
        return Err(Error::Matrix(format!(
            "need at least 2 masks, got {}",
            masks.len()
        )));
    }
    let descriptors: Vec<_> = masks.iter().map(mask::descriptor).collect();
    let n = masks.len();
    let mut w = vec![1.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = mask::descriptor_similarity(&descriptors[i], &descriptors[j]);
            w[i * n + j] = s;
            w[j * n + i] = s;
        }
    }
    let ids = masks.iter().map(|m| m.class_id().to_string()).collect();
    let provenance = Provenance {
        source: "builtin-moment-similarity".into(),
        ..Provenance::default()
    };
    SimilarityGraph::with_provenance(ids, w, provenance)
}

/// One answer class plus its distractors. Distractors are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OptionSet {
    answer: usize,
    distractors: Vec<usize>,
}

impl OptionSet {
    pub fn new(answer: usize, mut distractors: Vec<usize>, class_count: usize) -> Result<Self> {
        if answer >= class_count {
            return Err(Error::InvalidOptionSet(format!(
                "answer index {answer} out of range for {class_count} classes"
            )));
        }
        if distractors.is_empty() {
            return Err(Error::InvalidOptionSet("no distractors".into()));
        }
        distractors.sort_unstable();
        for pair in distractors.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidOptionSet(format!(
                    "duplicate distractor {}",
                    pair[0]
                )));
            }
        }
        if let Some(&d) = distractors.iter().find(|&&d| d >= class_count) {
            return Err(Error::InvalidOptionSet(format!(
                "distractor index {d} out of range"
            )));
        }
        if distractors.contains(&answer) {
            return Err(Error::InvalidOptionSet(
                "answer listed among distractors".into(),
            ));
        }
        Ok(OptionSet {
            answer,
            distractors,
        })
    }

    pub fn answer(&self) -> usize {
        self.answer
    }

    pub fn distractors(&self) -> &[usize] {
        &self.distractors
    }

    /// Number of options `m`.
    pub fn option_count(&self) -> usize {
        self.distractors.len() + 1
    }
}

/// Which induced edges enter the variance term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEdges {
    /// Every edge of the option subgraph, answer-incident ones included.
    #[default]
    All,
    /// Only distractor-distractor edges.
    DistractorsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgraphStats {
    pub s_value: f64,
    pub variance: f64,
    pub objective: f64,
    pub lambda: f64,
}

/// Mean answer-to-distractor similarity.
pub fn s_of(graph: &SimilarityGraph, opts: &OptionSet) -> f64 {
    let edges: Vec<f64> = opts
        .distractors
        .iter()
        .map(|&d| graph.weight(opts.answer, d))
        .collect();
    numeric::mean(&edges)
}

pub fn stats_of(graph: &SimilarityGraph, opts: &OptionSet, lambda: f64) -> SubgraphStats {
    stats_with(graph, opts, lambda, VarianceEdges::All)
}

pub fn stats_with(
    graph: &SimilarityGraph,
    opts: &OptionSet,
    lambda: f64,
    edges: VarianceEdges,
) -> SubgraphStats {
    let mut scratch = Scratch::default();
    let (s_value, variance) =
        subgraph_terms(graph, opts.answer, &opts.distractors, edges, &mut scratch);
    SubgraphStats {
        s_value,
        variance,
        objective: s_value + lambda * variance,
        lambda,
    }
}

#[derive(Default)]
pub(crate) struct Scratch {
    answer_edges: Vec<f64>,
    all_edges: Vec<f64>,
}

/// `(S, variance)` for an answer and distractor list. Values are sorted
/// before accumulation, so the result depends only on the edge multisets.
pub(crate) fn subgraph_terms(
    graph: &SimilarityGraph,
    answer: usize,
    distractors: &[usize],
    edges: VarianceEdges,
    scratch: &mut Scratch,
) -> (f64, f64) {
    scratch.answer_edges.clear();
    scratch.all_edges.clear();
    for &d in distractors {
        let w = graph.weight(answer, d);
        scratch.answer_edges.push(w);
        if edges == VarianceEdges::All {
            scratch.all_edges.push(w);
        }
    }
    for (k, &a) in distractors.iter().enumerate() {
        for &b in &distractors[k + 1..] {
            scratch.all_edges.push(graph.weight(a, b));
        }
    }
    scratch.answer_edges.sort_unstable_by(f64::total_cmp);
    scratch.all_edges.sort_unstable_by(f64::total_cmp);
    let s = numeric::shifted_mean(&scratch.answer_edges);
    let var = if scratch.all_edges.is_empty() {
        0.0
    } else {
        numeric::shifted_variance(&scratch.all_edges)
    };
    (s, var)
}

/// Same quantity as [`subgraph_terms`] accumulated in index order without
/// sorting. Agrees with it to a few ulps; used where only ranking matters.
pub(crate) fn subgraph_terms_fast(
    graph: &SimilarityGraph,
    answer: usize,
    distractors: &[usize],
    edges: VarianceEdges,
) -> (f64, f64) {
    let k = distractors.len();
    let answer_sum: f64 = distractors.iter().map(|&d| graph.weight(answer, d)).sum();
    let mut pair_sum = 0.0;
    for (i, &a) in distractors.iter().enumerate() {
        for &b in &distractors[i + 1..] {
            pair_sum += graph.weight(a, b);
        }
    }
    let pairs = k * (k.saturating_sub(1)) / 2;
    let (count, total) = match edges {
        VarianceEdges::All => (k + pairs, answer_sum + pair_sum),
        VarianceEdges::DistractorsOnly => (pairs, pair_sum),
    };
    if count == 0 {
        return (answer_sum / k as f64, 0.0);
    }
    let mean = total / count as f64;
    let mut sq = 0.0;
    if edges == VarianceEdges::All {
        for &d in distractors {
            let e = graph.weight(answer, d) - mean;
            sq += e * e;
        }
    }
    for (i, &a) in distractors.iter().enumerate() {
        for &b in &distractors[i + 1..] {
            let e = graph.weight(a, b) - mean;
            sq += e * e;
        }
    }
    (answer_sum / k as f64, sq / count as f64)
}

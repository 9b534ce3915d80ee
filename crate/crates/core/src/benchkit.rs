//! Benchmark assembly: images x question paraphrases x selected option sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SimilarityGraph, VarianceEdges};
use crate::io;
use crate::numeric::derive_seed;
use crate::selector::{GaConfig, SelectionProblem};

pub const PLACEHOLDER: &str = "{object}";
pub const QUESTIONS_PER_IMAGE: usize = 3;
pub const MANIFEST_VERSION: u32 = 1;
pub const DEFAULT_OPTION_COUNTS: [usize; 3] = [4, 7, 10];

const TAG_TEMPLATES: u64 = 1;
const TAG_SELECT: u64 = 2;
const TAG_SHUFFLE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub template_id: String,
    /// Question text holding [`PLACEHOLDER`] exactly once.
    pub text: String,
}

impl QuestionTemplate {
    pub fn new(template_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let t = QuestionTemplate {
            template_id: template_id.into(),
            text: text.into(),
        };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        let count = self.text.matches(PLACEHOLDER).count();
        if count != 1 {
            return Err(Error::Config(format!(
                "template {} must contain {PLACEHOLDER} exactly once, found {count}",
                self.template_id
            )));
        }
        Ok(())
    }

    pub fn render(&self, object: &str) -> String {
        self.text.replacen(PLACEHOLDER, object, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image_ref: String,
    pub answer_class: String,
    /// Natural object shown in the image, substituted into the question.
    pub object: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionSharing {
    /// Fresh selection for every question.
    #[default]
    Independent,
    /// One selection per (image, option count), reshuffled per question.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub option_counts: Vec<usize>,
    pub lambda: f64,
    pub ga: GaConfig,
    pub sharing: OptionSharing,
    pub variance_edges: VarianceEdges,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            option_counts: DEFAULT_OPTION_COUNTS.to_vec(),
            lambda: 1.0,
            ga: GaConfig::default(),
            sharing: OptionSharing::Independent,
            variance_edges: VarianceEdges::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionEntry {
    pub letter: char,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSample {
    pub id: String,
    pub image_ref: String,
    /// Option count `m`.
    pub subtask: usize,
    pub template_id: String,
    pub question_text: String,
    pub options: Vec<OptionEntry>,
    pub answer_letter: char,
}

impl TestSample {
    pub fn answer_label(&self) -> Option<&str> {
        self.options
            .iter()
            .find(|o| o.letter == self.answer_letter)
            .map(|o| o.label.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProvenance {
    pub graph_digest: String,
    pub graph_source: String,
    pub config: AssemblyConfig,
    /// Digest of the sorted-key JSON of `config`.
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub version: u32,
    pub seed: u64,
    pub provenance: ManifestProvenance,
    pub classes: Vec<String>,
    pub images: Vec<ImageEntry>,
    pub templates: Vec<QuestionTemplate>,
    pub samples: Vec<TestSample>,
}

impl BenchmarkManifest {
    pub fn to_json(&self) -> Result<String> {
        io::to_sorted_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&io::read_text(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        io::write_atomic(path, self.to_json()?)
    }

    pub fn digest(&self) -> Result<String> {
        Ok(io::sha256_hex(self.to_json()?))
    }

    pub fn option_counts(&self) -> BTreeSet<usize> {
        self.samples.iter().map(|s| s.subtask).collect()
    }

    pub fn samples_for(&self, m: usize) -> impl Iterator<Item = &TestSample> {
        self.samples.iter().filter(move |s| s.subtask == m)
    }
}

pub fn letter(index: usize) -> char {
    char::from(b'A' + u8::try_from(index).expect("fewer than 26 options"))
}

pub fn parse_templates(text: &str) -> Result<Vec<QuestionTemplate>> {
    let templates: Vec<QuestionTemplate> = serde_json::from_str(text)?;
    for t in &templates {
        t.check()?;
    }
    Ok(templates)
}

pub fn parse_images(text: &str) -> Result<Vec<ImageEntry>> {
    Ok(serde_json::from_str(text)?)
}

/// Builds the manifest on the current rayon pool.
pub fn assemble(
    graph: &SimilarityGraph,
    images: &[ImageEntry],
    templates: &[QuestionTemplate],
    config: &AssemblyConfig,
    seed: u64,
) -> Result<BenchmarkManifest> {
    check_inputs(graph, images, templates, config)?;

    let picks: Vec<Vec<usize>> = images
        .iter()
        .enumerate()
        .map(|(i, _)| pick_templates(templates.len(), seed, i))
        .collect();

    // One job per (image, subtask, slot); shared mode reuses slot 0's selection seed.
    let jobs: Vec<(usize, usize, usize)> = (0..images.len())
        .flat_map(|i| {
            config
                .option_counts
                .iter()
                .flat_map(move |&m| (0..QUESTIONS_PER_IMAGE).map(move |slot| (i, m, slot)))
        })
        .collect();

    let samples = jobs
        .par_iter()
        .map(|&(i, m, slot)| {
            let image = &images[i];
            let answer = graph.index_of(&image.answer_class)?;
            let select_slot = match config.sharing {
                OptionSharing::Independent => slot,
                OptionSharing::Shared => 0,
            };
            let tags = [i as u64, m as u64, select_slot as u64];
            let ga = config
                .ga
                .clone()
                .with_seed(derive_seed(seed, &[&[TAG_SELECT], &tags[..]].concat()));
            let chosen = SelectionProblem::new(graph, answer, m, config.lambda)?
                .with_variance_edges(config.variance_edges)
                .genetic(&ga)?;

            let mut order: Vec<usize> = std::iter::once(answer)
                .chain(chosen.option_set.distractors().iter().copied())
                .collect();
            let shuffle_seed = derive_seed(seed, &[TAG_SHUFFLE, i as u64, m as u64, slot as u64]);
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));

            let template = &templates[picks[i][slot]];
            let options: Vec<OptionEntry> = order
                .iter()
                .enumerate()
                .map(|(k, &c)| OptionEntry {
                    letter: letter(k),
                    label: graph.class_id(c).to_string(),
                })
                .collect();
            let position = order.iter().position(|&c| c == answer).expect("answer present");
            Ok(TestSample {
                id: format!("{:04}-{m}T1-{}", i, slot + 1),
                image_ref: image.image_ref.clone(),
                subtask: m,
                template_id: template.template_id.clone(),
                question_text: template.render(&image.object),
                options,
                answer_letter: letter(position),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let config_digest = io::sha256_hex(io::to_sorted_json(config)?);
    Ok(BenchmarkManifest {
        version: MANIFEST_VERSION,
        seed,
        provenance: ManifestProvenance {
            graph_digest: graph.digest(),
            graph_source: graph.provenance().source.clone(),
            config: config.clone(),
            config_digest,
        },
        classes: graph.class_ids().to_vec(),
        images: images.to_vec(),
        templates: templates.to_vec(),
        samples,
    })
}

/// Same as [`assemble`] on a dedicated pool of `jobs` workers.
pub fn assemble_with_jobs(
    graph: &SimilarityGraph,
    images: &[ImageEntry],
    templates: &[QuestionTemplate],
    config: &AssemblyConfig,
    seed: u64,
    jobs: usize,
) -> Result<BenchmarkManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| assemble(graph, images, templates, config, seed))
}

fn check_inputs(
    graph: &SimilarityGraph,
    images: &[ImageEntry],
    templates: &[QuestionTemplate],
    config: &AssemblyConfig,
) -> Result<()> {
    if templates.len() < QUESTIONS_PER_IMAGE {
        return Err(Error::Config(format!(
            "need at least {QUESTIONS_PER_IMAGE} templates, got {}",
            templates.len()
        )));
    }
    let mut ids = HashSet::new();
    for t in templates {
        t.check()?;
        if !ids.insert(&t.template_id) {
            return Err(Error::Config(format!("duplicate template id {}", t.template_id)));
        }
    }
    if images.is_empty() {
        return Err(Error::Config("no images".into()));
    }
    let mut refs = HashSet::new();
    for image in images {
        graph.index_of(&image.answer_class)?;
        if !refs.insert(&image.image_ref) {
            return Err(Error::Config(format!("duplicate image_ref {}", image.image_ref)));
        }
    }
    if config.option_counts.is_empty() {
        return Err(Error::Config("no option counts".into()));
    }
    let mut seen = HashSet::new();
    for &m in &config.option_counts {
        if m < 2 || m > graph.len() || m > 26 {
            return Err(Error::Config(format!(
                "option count {m} must lie in 2..={}",
                graph.len().min(26)
            )));
        }
        if !seen.insert(m) {
            return Err(Error::Config(format!("duplicate option count {m}")));
        }
    }
    config.ga.validate()
}

fn pick_templates(available: usize, seed: u64, image: usize) -> Vec<usize> {
    if available == QUESTIONS_PER_IMAGE {
        return (0..available).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_TEMPLATES, image as u64]));
    let mut picked = rand::seq::index::sample(&mut rng, available, QUESTIONS_PER_IMAGE).into_vec();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub sample_id: Option<String>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.sample_id {
            Some(id) => write!(f, "{id}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn global(&mut self, message: String) {
        self.violations.push(Violation {
            sample_id: None,
            message,
        });
    }

    fn sample(&mut self, id: &str, message: String) {
        self.violations.push(Violation {
            sample_id: Some(id.to_string()),
            message,
        });
    }
}

/// Checks every sample and manifest-level invariant, collecting all violations.
pub fn validate(manifest: &BenchmarkManifest) -> ValidationReport {
    let mut report = ValidationReport::default();
    if manifest.version != MANIFEST_VERSION {
        report.global(format!("unsupported version {}", manifest.version));
    }

    let classes: HashSet<&str> = manifest.classes.iter().map(String::as_str).collect();
    if classes.len() != manifest.classes.len() {
        report.global("duplicate class labels".into());
    }
    let mut images: HashMap<&str, &ImageEntry> = HashMap::new();
    for image in &manifest.images {
        if images.insert(&image.image_ref, image).is_some() {
            report.global(format!("duplicate image_ref {}", image.image_ref));
        }
        if !classes.contains(image.answer_class.as_str()) {
            report.global(format!(
                "image {} has unknown answer class {}",
                image.image_ref, image.answer_class
            ));
        }
    }
    let templates: HashMap<&str, &QuestionTemplate> = manifest
        .templates
        .iter()
        .map(|t| (t.template_id.as_str(), t))
        .collect();

    let mut ids = HashSet::new();
    let mut per_image: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    for s in &manifest.samples {
        let id = s.id.as_str();
        if !ids.insert(id) {
            report.sample(id, "duplicate sample id".into());
        }
        if s.options.len() != s.subtask {
            report.sample(
                id,
                format!("{} options for subtask {}", s.options.len(), s.subtask),
            );
        }
        for (k, o) in s.options.iter().enumerate() {
            if k < 26 && o.letter != letter(k) {
                report.sample(
                    id,
                    format!("option {} has letter {}, expected {}", k + 1, o.letter, letter(k)),
                );
            }
            if !classes.contains(o.label.as_str()) {
                report.sample(id, format!("unknown option label {}", o.label));
            }
        }
        let mut labels = HashSet::new();
        for o in &s.options {
            if !labels.insert(o.label.as_str()) {
                report.sample(id, format!("duplicate option label {}", o.label));
            }
        }
        match s.answer_label() {
            None => report.sample(
                id,
                format!("answer letter {} not among options", s.answer_letter),
            ),
            Some(label) => {
                if let Some(image) = images.get(s.image_ref.as_str()) {
                    if image.answer_class != label {
                        report.sample(
                            id,
                            format!(
                                "answer {label} differs from image class {}",
                                image.answer_class
                            ),
                        );
                    }
                }
            }
        }
        match images.get(s.image_ref.as_str()) {
            None => report.sample(id, format!("unknown image_ref {}", s.image_ref)),
            Some(image) => match templates.get(s.template_id.as_str()) {
                None => report.sample(id, format!("unknown template {}", s.template_id)),
                Some(t) if t.render(&image.object) != s.question_text => {
                    report.sample(id, "question text does not match its template".into())
                }
                Some(_) => {}
            },
        }
        *per_image.entry((s.image_ref.as_str(), s.subtask)).or_default() += 1;
    }

    let expected = manifest.images.len() * QUESTIONS_PER_IMAGE;
    for &m in &manifest.provenance.config.option_counts {
        let count = manifest.samples_for(m).count();
        if count != expected {
            report.global(format!(
                "subtask {m}: {count} samples, expected {expected} ({} images x {QUESTIONS_PER_IMAGE})",
                manifest.images.len()
            ));
        }
        for image in &manifest.images {
            let c = per_image
                .get(&(image.image_ref.as_str(), m))
                .copied()
                .unwrap_or(0);
            if c != QUESTIONS_PER_IMAGE {
                report.global(format!(
                    "image {} has {c} questions in subtask {m}",
                    image.image_ref
                ));
            }
        }
    }
    let declared: BTreeSet<usize> = manifest.provenance.config.option_counts.iter().copied().collect();
    for m in manifest.option_counts().difference(&declared) {
        report.global(format!("samples with undeclared subtask {m}"));
    }
    report
}

//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library, writes artifacts atomically and returns the process exit code.

use std::collections::{BTreeMap, HashSet};
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::benchkit::{self, AssemblyConfig, BenchmarkManifest, OptionSharing};
use crate::curation::{self, CurationConfig};
use crate::evalkit::{self, BaselineMode, EvalOptions, ModelAdapter, Scorecard, TransportPolicy};
use crate::graph::{self, SimilarityGraph, VarianceEdges};
use crate::io;
use crate::mask;
use crate::numeric::binomial;
use crate::selector::{
    self, AmbiguityLabels, AuditPlan, GaConfig, SelectionProblem, SweepMethod, SweepTable,
    EXHAUSTIVE_LIMIT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "assoc-bench", version, about = "Build and evaluate shape-association benchmarks")]
#[command(args_override_self = true)]
struct Cli {
    /// TOML file with flag values (top-level keys, or a table named after the subcommand).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter masks by regeneration scores and merge the manual allowlist.
    Curate(CurateArgs),
    /// Ingest a similarity CSV or compute one from a mask directory.
    Graph(GraphArgs),
    /// Select distractors for one answer class.
    Select(SelectArgs),
    /// Optimum statistics across a list of lambda values.
    Sweep(SweepArgs),
    /// Compare random and selected option sets against ambiguity labels.
    Audit(AuditArgs),
    /// Assemble a benchmark manifest.
    Assemble(AssembleArgs),
    /// Check every manifest invariant.
    Validate(ValidateArgs),
    /// Run a model adapter over a manifest.
    Eval(EvalArgs),
    /// Scorecards, baselines, set comparisons, correlation and heatmaps.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GraphInput {
    /// Similarity CSV.
    #[arg(long, value_name = "CSV")]
    graph: PathBuf,
    /// Affine-rescale entries to [0, 1] (also enabled by a `# rescale` metadata line).
    #[arg(long)]
    rescale: bool,
}

impl GraphInput {
    fn load(&self) -> anyhow::Result<SimilarityGraph> {
        load_graph(&self.graph, self.rescale)
    }
}

fn load_graph(path: &Path, rescale: bool) -> anyhow::Result<SimilarityGraph> {
    let text = io::read_text(path)?;
    let rescale = rescale || graph::metadata_requests_rescale(&text);
    Ok(graph::parse_matrix(&text, rescale, &path.display().to_string())?)
}

#[derive(Debug, Args, Default)]
struct GaOverrides {
    #[arg(long)]
    population_size: Option<usize>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    tournament_size: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
}

impl GaOverrides {
    fn apply(&self, seed: u64) -> GaConfig {
        let d = GaConfig::default();
        GaConfig {
            population_size: self.population_size.unwrap_or(d.population_size),
            crossover_prob: self.crossover_prob.unwrap_or(d.crossover_prob),
            mutation_prob: self.mutation_prob.unwrap_or(d.mutation_prob),
            generations: self.generations.unwrap_or(d.generations),
            tournament_size: self.tournament_size.unwrap_or(d.tournament_size),
            restarts: self.restarts.unwrap_or(d.restarts),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EdgesArg {
    All,
    DistractorsOnly,
}

impl From<EdgesArg> for VarianceEdges {
    fn from(e: EdgesArg) -> Self {
        match e {
            EdgesArg::All => VarianceEdges::All,
            EdgesArg::DistractorsOnly => VarianceEdges::DistractorsOnly,
        }
    }
}

#[derive(Debug, Args)]
struct CurateArgs {
    /// Regeneration score records (JSON lines).
    #[arg(long, value_name = "JSONL")]
    records: PathBuf,
    #[arg(long, default_value_t = 0.97)]
    threshold: f64,
    #[arg(long, default_value_t = 8)]
    regen_count: usize,
    #[arg(long, default_value_t = 25)]
    samples_per_class: usize,
    /// Mask ids added after filtering, one per line.
    #[arg(long, value_name = "PATH")]
    allowlist: Option<PathBuf>,
    /// Overlay rankings (JSON file or directory of JSON files).
    #[arg(long, value_name = "PATH")]
    rankings: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["matrix", "masks"])))]
struct GraphArgs {
    #[arg(long, value_name = "CSV")]
    matrix: Option<PathBuf>,
    /// Directory of `.pgm` / `.txt` masks named by class id.
    #[arg(long, value_name = "DIR")]
    masks: Option<PathBuf>,
    #[arg(long)]
    rescale: bool,
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Also write the provenance record as JSON.
    #[arg(long, value_name = "JSON")]
    provenance: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Answer class id.
    #[arg(long)]
    answer: String,
    /// Option count.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the exhaustive oracle instead of the GA.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, value_enum, default_value_t = EdgesArg::All)]
    variance_edges: EdgesArg,
    #[command(flatten)]
    ga: GaOverrides,
    #[arg(long, value_name = "JSON")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepMethodArg {
    /// Exhaustive when the combination count allows it, GA otherwise.
    Auto,
    Exhaustive,
    Ga,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Answer class ids (default: every class).
    #[arg(long, value_delimiter = ',')]
    answer: Vec<String>,
    #[arg(long)]
    m: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,5")]
    lambdas: Vec<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SweepMethodArg::Auto)]
    method: SweepMethodArg,
    #[command(flatten)]
    ga: GaOverrides,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Ambiguous `answer,distractor` pairs by class id.
    #[arg(long, value_name = "CSV")]
    labels: PathBuf,
    /// Answer class ids (default: every answer named in the labels).
    #[arg(long, value_delimiter = ',')]
    answers: Vec<String>,
    /// Candidate class ids (default: every class).
    #[arg(long, value_delimiter = ',')]
    pool: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "4,7,10")]
    option_counts: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    ga: GaOverrides,
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SharingArg {
    Independent,
    Shared,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    #[command(flatten)]
    input: GraphInput,
    /// JSON array of `{image_ref, answer_class, object}`.
    #[arg(long, value_name = "JSON")]
    images: PathBuf,
    /// JSON array of `{template_id, text}`.
    #[arg(long, value_name = "JSON")]
    templates: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "4,7,10")]
    option_counts: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SharingArg::Independent)]
    sharing: SharingArg,
    #[arg(long, value_enum, default_value_t = EdgesArg::All)]
    variance_edges: EdgesArg,
    #[command(flatten)]
    ga: GaOverrides,
    #[arg(long, value_name = "JSON")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_name = "JSON")]
    manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdapterArg {
    Oracle,
    Random,
    Http,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "JSON")]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    adapter: AdapterArg,
    /// Model name sent to the HTTP endpoint.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    base_url: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    token_env: Option<String>,
    /// Directory that image refs are resolved against.
    #[arg(long)]
    image_root: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    #[arg(long, default_value_t = evalkit::DEFAULT_MAX_INFLIGHT)]
    max_inflight: usize,
    #[arg(long, default_value_t = evalkit::DEFAULT_RETRIES)]
    retries: u32,
    /// Seed of the random adapter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Abort on a sample whose calls all fail instead of scoring it incorrect.
    #[arg(long, conflicts_with = "exclude_transport_failures")]
    strict_transport: bool,
    /// Leave samples whose calls all fail out of accuracy denominators.
    #[arg(long)]
    exclude_transport_failures: bool,
    #[arg(long, value_name = "JSONL")]
    out: PathBuf,
    #[arg(long, value_name = "CSV")]
    scorecard: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Analytic,
    Sampled,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, value_name = "JSON")]
    manifest: Option<PathBuf>,
    /// Evaluation records scored against --manifest, one model per file.
    #[arg(long, value_name = "JSONL")]
    records: Vec<PathBuf>,
    /// Append a random-guessing row to the scorecards.
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Named validation set as `NAME=MANIFEST,RECORDS`.
    #[arg(long = "set", value_name = "NAME=MANIFEST,RECORDS")]
    sets: Vec<String>,
    #[arg(long, default_value_t = evalkit::DEFAULT_BAND)]
    band: f64,
    /// `model,score` CSV to correlate with the scorecard averages.
    #[arg(long, value_name = "CSV")]
    cognition: Option<PathBuf>,
    /// Similarity CSV for a heatmap.
    #[arg(long, value_name = "CSV")]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    rescale: bool,
    /// Class ids in the heatmap (default: all).
    #[arg(long, value_delimiter = ',', requires = "graph")]
    subset: Vec<String>,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

/// Entry point used by the binary. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_DOMAIN
        }
    }
}

/// Splices `--key value` pairs from the `--config` file right after the
/// subcommand, skipping keys also given on the command line.
fn merge_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let mut sub_pos = None;
    let mut i = 1;
    while i < strs.len() {
        match strs[i].as_str() {
            "--config" | "--jobs" => i += 2,
            a if a.starts_with('-') => i += 1,
            _ => {
                sub_pos = Some(i);
                break;
            }
        }
    }
    let Some(sub_pos) = sub_pos else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing config {path}"))?;

    let given: HashSet<String> = strs
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut merged: BTreeMap<String, toml::Value> = BTreeMap::new();
    for (k, v) in &table {
        if !v.is_table() {
            merged.insert(k.replace('_', "-"), v.clone());
        }
    }
    if let Some(toml::Value::Table(sub)) = table.get(&strs[sub_pos]) {
        for (k, v) in sub {
            merged.insert(k.replace('_', "-"), v.clone());
        }
    }
    let mut extra = Vec::new();
    for (key, value) in merged {
        if given.contains(&key) || key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        let scalar = |v: &toml::Value| -> anyhow::Result<String> {
            Ok(match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                other => bail!("config key {key}: unsupported value {other}"),
            })
        };
        match &value {
            toml::Value::Boolean(true) => extra.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                for item in items {
                    extra.push(flag.clone());
                    extra.push(scalar(item)?);
                }
            }
            v => {
                extra.push(flag);
                extra.push(scalar(v)?);
            }
        }
    }
    let mut out = argv;
    out.splice(sub_pos + 1..sub_pos + 1, extra.into_iter().map(OsString::from));
    Ok(out)
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be >= 1");
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder.build()?;
    pool.install(|| match cli.command {
        Command::Curate(a) => curate(a),
        Command::Graph(a) => graph_cmd(a),
        Command::Select(a) => select(a),
        Command::Sweep(a) => sweep(a),
        Command::Audit(a) => audit(a),
        Command::Assemble(a) => assemble(a),
        Command::Validate(a) => validate(a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
    })
}

fn print(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => Ok(io::write_atomic(p, text)?),
        None => print(text),
    }
}

fn curate(a: CurateArgs) -> anyhow::Result<i32> {
    let config = CurationConfig {
        regen_count: a.regen_count,
        retain_threshold: a.threshold,
        samples_per_class: a.samples_per_class,
    };
    config.validate()?;
    let records = curation::read_records_jsonl(&a.records)?;
    let report = curation::filter_masks(&records, &config)?;
    for (class, n) in curation::sample_count_mismatches(&records, &config) {
        eprintln!(
            "warning: class {class} has {n} sampled masks, expected {}",
            config.samples_per_class
        );
    }
    let allow = match &a.allowlist {
        Some(p) => curation::parse_allowlist(&io::read_text(p)?),
        None => Vec::new(),
    };
    let kept = curation::merge_allowlist(&report.retained, &allow);
    let mut listing = kept.join("\n");
    if !listing.is_empty() {
        listing.push('\n');
    }
    io::write_atomic(a.out_dir.join("retained.txt"), listing)?;
    io::write_atomic(a.out_dir.join("rejections.csv"), report.rejections_csv())?;
    let mut picked = 0;
    if let Some(p) = &a.rankings {
        let mut csv = String::from("image_id,mask_id\n");
        for r in curation::read_rankings(p)? {
            let id = curation::pick_relevant_mask(&r)?;
            csv.push_str(&format!("{},{}\n", r.image_id, id));
            picked += 1;
        }
        io::write_atomic(a.out_dir.join("relevant.csv"), csv)?;
    }
    print(&io::to_sorted_json(&json!({
        "records": records.len(),
        "retained": report.retained.len(),
        "rejected": report.rejected.len(),
        "allowlisted": kept.len() - report.retained.len(),
        "relevant_picks": picked,
    }))?)?;
    Ok(EXIT_OK)
}

fn graph_cmd(a: GraphArgs) -> anyhow::Result<i32> {
    let g = match (&a.matrix, &a.masks) {
        (Some(m), _) => load_graph(m, a.rescale)?,
        (None, Some(dir)) => graph::build_graph(&mask::load_mask_dir(dir)?)?,
        (None, None) => unreachable!("clap enforces one input"),
    };
    io::write_atomic(&a.out, g.to_csv())?;
    if let Some(p) = &a.provenance {
        io::write_atomic(p, io::to_sorted_json(g.provenance())?)?;
    }
    print(&io::to_sorted_json(&json!({
        "classes": g.len(),
        "digest": g.digest(),
        "out": a.out.display().to_string(),
    }))?)?;
    Ok(EXIT_OK)
}

fn labels(g: &SimilarityGraph, indices: &[usize]) -> Vec<String> {
    indices.iter().map(|&i| g.class_id(i).to_string()).collect()
}

fn select(a: SelectArgs) -> anyhow::Result<i32> {
    let g = a.input.load()?;
    let answer = g.index_of(&a.answer)?;
    let problem =
        SelectionProblem::new(&g, answer, a.m, a.lambda)?.with_variance_edges(a.variance_edges.into());
    let (method, result) = if a.exhaustive {
        ("exhaustive", problem.exhaustive()?)
    } else {
        ("ga", problem.genetic(&a.ga.apply(a.seed))?)
    };
    let text = io::to_sorted_json(&json!({
        "answer": a.answer,
        "distractors": labels(&g, result.option_set.distractors()),
        "method": method,
        "seed": a.seed,
        "m": a.m,
        "result": result,
    }))?;
    emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn resolve_ids(g: &SimilarityGraph, ids: &[String]) -> anyhow::Result<Vec<usize>> {
    ids.iter().map(|id| Ok(g.index_of(id)?)).collect()
}

fn sweep(a: SweepArgs) -> anyhow::Result<i32> {
    let g = a.input.load()?;
    let answers = if a.answer.is_empty() {
        (0..g.len()).collect()
    } else {
        resolve_ids(&g, &a.answer)?
    };
    let ga = a.ga.apply(a.seed);
    let combos = binomial(g.len() as u64 - 1, a.m.saturating_sub(1) as u64);
    let method = match a.method {
        SweepMethodArg::Exhaustive => SweepMethod::Exhaustive,
        SweepMethodArg::Ga => SweepMethod::Genetic(ga),
        SweepMethodArg::Auto if combos <= EXHAUSTIVE_LIMIT => SweepMethod::Exhaustive,
        SweepMethodArg::Auto => SweepMethod::Genetic(ga),
    };
    let mut table = SweepTable::default();
    for answer in answers {
        table.extend(selector::lambda_sweep_with(&g, answer, a.m, &a.lambdas, &method)?);
    }
    emit(a.out.as_deref(), &table.to_csv())?;
    Ok(EXIT_OK)
}

fn audit(a: AuditArgs) -> anyhow::Result<i32> {
    let g = a.input.load()?;
    let ambiguous = AmbiguityLabels::from_csv(&io::read_text(&a.labels)?, &g)?;
    let answers = if a.answers.is_empty() {
        ambiguous.answers()
    } else {
        resolve_ids(&g, &a.answers)?
    };
    let pool = if a.pool.is_empty() {
        (0..g.len()).collect()
    } else {
        resolve_ids(&g, &a.pool)?
    };
    let plan = AuditPlan {
        answers,
        pool,
        ambiguous,
        option_counts: a.option_counts.clone(),
        repetitions: a.repetitions,
        lambda: a.lambda,
    };
    let table = selector::audit_ambiguity(&g, &plan, &a.ga.apply(a.seed), a.seed)?;
    emit(a.out.as_deref(), &table.to_csv())?;
    Ok(EXIT_OK)
}

fn assemble(a: AssembleArgs) -> anyhow::Result<i32> {
    let g = a.input.load()?;
    let images = benchkit::parse_images(&io::read_text(&a.images)?)?;
    let templates = benchkit::parse_templates(&io::read_text(&a.templates)?)?;
    let config = AssemblyConfig {
        option_counts: a.option_counts.clone(),
        lambda: a.lambda,
        ga: a.ga.apply(0),
        sharing: match a.sharing {
            SharingArg::Independent => OptionSharing::Independent,
            SharingArg::Shared => OptionSharing::Shared,
        },
        variance_edges: a.variance_edges.into(),
    };
    let manifest = benchkit::assemble(&g, &images, &templates, &config, a.seed)?;
    let text = manifest.to_json()?;
    io::write_atomic(&a.out, &text)?;
    let per_subtask: BTreeMap<String, usize> = config
        .option_counts
        .iter()
        .map(|&m| (evalkit::subtask_label(m), manifest.samples_for(m).count()))
        .collect();
    print(&io::to_sorted_json(&json!({
        "samples": manifest.samples.len(),
        "per_subtask": per_subtask,
        "classes": manifest.classes.len(),
        "images": manifest.images.len(),
        "digest": io::sha256_hex(&text),
    }))?)?;
    Ok(EXIT_OK)
}

fn validate(a: ValidateArgs) -> anyhow::Result<i32> {
    let manifest = BenchmarkManifest::load(&a.manifest)?;
    let report = benchkit::validate(&manifest);
    if report.is_valid() {
        print(&format!("valid: {} samples\n", manifest.samples.len()))?;
        return Ok(EXIT_OK);
    }
    let mut text = String::new();
    for v in &report.violations {
        text.push_str(&format!("{v}\n"));
    }
    print(&text)?;
    eprintln!("{} violations", report.violations.len());
    Ok(EXIT_DOMAIN)
}

fn eval(a: EvalArgs) -> anyhow::Result<i32> {
    let manifest = BenchmarkManifest::load(&a.manifest)?;
    let adapter: Box<dyn ModelAdapter> = match a.adapter {
        AdapterArg::Oracle => Box::new(evalkit::OracleAdapter::new(&manifest)),
        AdapterArg::Random => Box::new(evalkit::UniformRandomAdapter::new(a.seed)),
        AdapterArg::Http => {
            let base = a.base_url.as_deref().ok_or_else(|| anyhow!("--base-url is required for the http adapter"))?;
            let model = a.model.as_deref().ok_or_else(|| anyhow!("--model is required for the http adapter"))?;
            Box::new(evalkit::HttpChatAdapter::new(
                base,
                model,
                a.token_env.as_deref(),
                a.image_root.clone(),
                Duration::from_secs(a.timeout_secs),
            )?)
        }
    };
    let options = EvalOptions {
        max_inflight: a.max_inflight,
        retries: a.retries,
        transport: if a.strict_transport {
            TransportPolicy::Abort
        } else if a.exclude_transport_failures {
            TransportPolicy::Exclude
        } else {
            TransportPolicy::CountIncorrect
        },
    };
    let records = evalkit::run_eval(&manifest, adapter.as_ref(), &options)?;
    io::write_atomic(&a.out, evalkit::records_to_jsonl(&records)?)?;
    let card = evalkit::score(&records, &manifest)?;
    let csv = evalkit::scorecards_csv(std::slice::from_ref(&card))?;
    if let Some(p) = &a.scorecard {
        io::write_atomic(p, &csv)?;
    }
    print(&csv)?;
    Ok(EXIT_OK)
}

fn score_file(manifest: &BenchmarkManifest, records: &Path) -> anyhow::Result<Scorecard> {
    let records = evalkit::parse_records_jsonl(&io::read_text(records)?)?;
    evalkit::score(&records, manifest).with_context(|| "scoring records")
}

fn report(a: ReportArgs) -> anyhow::Result<i32> {
    let mut written = Vec::new();
    let mut cards = Vec::new();
    if !a.records.is_empty() || a.baseline.is_some() {
        let path = a.manifest.as_ref().ok_or_else(|| anyhow!("--manifest is required with --records or --baseline"))?;
        let manifest = BenchmarkManifest::load(path)?;
        for r in &a.records {
            cards.push(score_file(&manifest, r).with_context(|| r.display().to_string())?);
        }
        if let Some(b) = a.baseline {
            let mode = match b {
                BaselineArg::Analytic => BaselineMode::Analytic,
                BaselineArg::Sampled => BaselineMode::Sampled,
            };
            cards.push(evalkit::random_baseline(&manifest, mode, a.trials, a.seed)?);
        }
        let p = a.out_dir.join("scorecards.csv");
        io::write_atomic(&p, evalkit::scorecards_csv(&cards)?)?;
        written.push(p);
    }
    if !a.sets.is_empty() {
        let mut named = BTreeMap::new();
        let mut reference = None;
        for entry in &a.sets {
            let (name, files) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects NAME=MANIFEST,RECORDS, got {entry}"))?;
            let (m, r) = files
                .split_once(',')
                .ok_or_else(|| anyhow!("--set expects NAME=MANIFEST,RECORDS, got {entry}"))?;
            let manifest = BenchmarkManifest::load(m)?;
            if reference.is_none() {
                reference = Some(evalkit::random_baseline(&manifest, BaselineMode::Analytic, 1, 0)?);
            }
            named.insert(name.to_string(), score_file(&manifest, Path::new(r))?);
        }
        let cmp = evalkit::compare_sets(&named, reference.as_ref().expect("non-empty"), a.band)?;
        let p = a.out_dir.join("comparison.csv");
        io::write_atomic(&p, cmp.to_csv())?;
        written.push(p);
    }
    if let Some(c) = &a.cognition {
        let cognition = evalkit::parse_cognition_csv(&io::read_text(c)?)?;
        let corr = evalkit::correlate_with_cognition(&cards, &cognition)?;
        let p = a.out_dir.join("correlation.json");
        io::write_atomic(&p, io::to_sorted_json(&corr)?)?;
        written.push(p);
    }
    if let Some(gp) = &a.graph {
        let g = load_graph(gp, a.rescale)?;
        let subset = if a.subset.is_empty() {
            (0..g.len()).collect()
        } else {
            resolve_ids(&g, &a.subset)?
        };
        let p = a.out_dir.join("heatmap.csv");
        io::write_atomic(&p, evalkit::heatmap_csv(&g, &subset)?)?;
        written.push(p);
    }
    if written.is_empty() {
        bail!("nothing to report: pass --records, --baseline, --set, --cognition or --graph");
    }
    let listing: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    print(&format!("{}\n", listing.join("\n")))?;
    Ok(EXIT_OK)
}

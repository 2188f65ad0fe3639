//! Command-line driver.
//!
//! Settings resolve in three layers: built-in defaults, then a TOML file
//! given with `--config`, then command-line flags. The top-level `seed`
//! drives every random component (split, synthetic corpus, embedding
//! training, timing samples, tSNE).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::compose::{compose_corpus, write_doc_vector, ComposeModels, ComposerSpec};
use crate::corpus::{
    filter_year, generate_synthetic, load_corpus, pareto_slope, save_corpus, split_train_test,
    token_stats, tokenize, Document, FieldSelection, PipelineConfig, Stemmer, SynthSpec,
};
use crate::embed::{load_model, save_model, train, EmbeddingModel, TrainParams};
use crate::evalrank::{journal_centroids, write_cdf_csv, Benchmark, BenchmarkRun, MetricsReport};
use crate::profile::{
    apply_baseline, memory_footprint, time_all_pairs, MemoryReport, Representation, TimingReport,
};
use crate::project::{
    default_color_map, project_journals, render_scatter, write_coordinates_csv, ProjectedPoint,
    ProjectionConfig,
};
use crate::tfidf::{tfidf_vector, write_model, write_vector_line, TfidfConfig};
use crate::wordsim::{evaluate_word_pairs, summarize, WordPairSet};
use crate::Field;

type Result<T> = anyhow::Result<T>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub lowercase: bool,
    /// Stopword file replacing the built-in list.
    pub stopwords: Option<PathBuf>,
    pub stemmer: Stemmer,
    pub min_token_len: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            lowercase: true,
            stopwords: None,
            stemmer: Stemmer::Porter,
            min_token_len: 2,
        }
    }
}

impl PipelineSection {
    pub fn build(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default().with_stemmer(self.stemmer);
        if let Some(path) = &self.stopwords {
            cfg = cfg.load_stopwords(path)?;
        }
        cfg.lowercase = self.lowercase;
        cfg.token_pattern.min_len = self.min_token_len;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub test_fraction: f64,
    pub min_pubs: usize,
    pub fields: Vec<Field>,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            test_fraction: 0.2,
            min_pubs: 10,
            fields: vec![Field::Title, Field::Abstract],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub sample_size: usize,
    pub repetitions: usize,
    /// Field whose test vectors are timed.
    pub field: Field,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            sample_size: 1000,
            repetitions: 3,
            field: Field::Abstract,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub pipeline: PipelineSection,
    /// Raw TFIDF configurations, e.g. `"10K/10K"`.
    pub tfidf: Vec<String>,
    /// Embedding composer presets.
    pub composers: Vec<String>,
    pub train: TrainParams,
    pub benchmark: BenchmarkSection,
    pub profile: ProfileSection,
    pub projection: ProjectionConfig,
    /// Generator settings used by `synth` and by `run-all` without a corpus.
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_path: None,
            output_dir: PathBuf::from("emberank-out"),
            seed: 1,
            threads: 1,
            pipeline: PipelineSection::default(),
            tfidf: ["5K/5K", "5K/10K", "10K/10K"].map(String::from).to_vec(),
            composers: ["embedding", "5K_embedding", "10K_embedding", "TFIDF_embedding", "1K_6K_embedding"]
                .map(String::from)
                .to_vec(),
            train: TrainParams::default(),
            benchmark: BenchmarkSection::default(),
            profile: ProfileSection::default(),
            projection: ProjectionConfig::default(),
            synth: SynthSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("{}", path.display()))
    }

    /// Defaults, then the `--config` file, then the global flags.
    pub fn resolve(global: &GlobalArgs) -> Result<Self> {
        let mut cfg = match &global.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(global);
        Ok(cfg)
    }

    pub fn apply(&mut self, global: &GlobalArgs) {
        if let Some(p) = &global.corpus {
            self.corpus_path = Some(p.clone());
        }
        if let Some(p) = &global.output_dir {
            self.output_dir = p.clone();
        }
        if let Some(s) = global.seed {
            self.seed = s;
        }
        if let Some(t) = global.threads {
            self.threads = t;
        }
    }

    /// Copies the top-level seed and thread count into the sections.
    pub fn propagate(&mut self) {
        self.train.seed = self.seed;
        self.projection.seed = self.seed;
        self.synth.seed = self.seed;
        self.train.threads = self.threads.max(1);
    }

    pub fn specs(&self) -> Result<Vec<ComposerSpec>> {
        let mut out = Vec::new();
        for t in &self.tfidf {
            out.push(ComposerSpec::tfidf(t.parse()?));
        }
        for c in &self.composers {
            out.push(ComposerSpec::preset(c)?);
        }
        Ok(out)
    }

    fn corpus(&self) -> Result<Vec<Document>> {
        let path = self
            .corpus_path
            .as_ref()
            .ok_or_else(|| anyhow!("no corpus given (use --corpus or corpus_path)"))?;
        Ok(load_corpus(path)?)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Corpus in JSONL form
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; more than one makes embedding training nondeterministic
    #[arg(long, global = true, env = "EMBERANK_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub static_window: bool,
}

impl TrainArgs {
    fn apply(&self, p: &mut TrainParams) {
        if let Some(v) = self.dim {
            p.dim = v;
        }
        if let Some(v) = self.window {
            p.window = v;
        }
        if let Some(v) = self.min_count {
            p.min_count = v;
        }
        if let Some(v) = self.lr {
            p.learning_rate = v;
        }
        if let Some(v) = self.iters {
            p.iterations = v;
        }
        if self.static_window {
            p.static_window = true;
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "emberank", version, about = "TFIDF and word-embedding content models for articles")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted-topic synthetic corpus
    Synth {
        /// TOML generator settings (defaults to the [synth] section)
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a JSONL corpus, optionally keeping one publication year
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        year: Option<i32>,
    },
    /// Token frequency statistics as CSV
    Stats {
        #[arg(long, default_value = "both")]
        field: FieldSelection,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit an IDF table and write hashed TFIDF vectors
    BuildTfidf {
        #[arg(long, default_value = "10K/10K")]
        tfidf: TfidfConfig,
        #[arg(long, default_value = "abstract")]
        field: Field,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        vectors_out: Option<PathBuf>,
    },
    /// Train skip-gram embeddings on titles and abstracts
    TrainEmbeddings {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spearman correlation of model similarities with word-pair scores
    EvalWordsim {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        pairs: Vec<PathBuf>,
    },
    /// Compose document vectors for one field
    Compose {
        #[arg(long)]
        spec: ComposerSpec,
        #[arg(long, default_value = "abstract")]
        field: Field,
        /// Pretrained embedding (trained on the corpus when absent)
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Journal ranking benchmark
    Benchmark {
        #[arg(long, value_delimiter = ',')]
        specs: Option<Vec<ComposerSpec>>,
        #[arg(long, value_delimiter = ',')]
        fields: Option<Vec<Field>>,
        #[arg(long)]
        min_pubs: Option<usize>,
        #[arg(long)]
        test_fraction: Option<f64>,
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Memory and all-pairs timing of content models
    Profile {
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<ComposerSpec>>,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        field: Option<Field>,
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// tSNE map of journal centroids as SVG plus coordinates CSV
    Project {
        /// Composer preset for the centroids
        #[arg(long, default_value = "embedding")]
        model: ComposerSpec,
        #[arg(long, default_value = "abstract")]
        field: Field,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
        /// Coordinates CSV (defaults to the SVG path with a .csv extension)
        #[arg(long)]
        coords: Option<PathBuf>,
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 10)]
        label_top_n: usize,
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Whole pipeline: benchmark, memory, timing and projection
    RunAll {
        #[command(flatten)]
        train: TrainArgs,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Usage errors exit 2; failures print one line and exit 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            1
        }
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn one_line(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.ends_with(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out.replace('\n', " ")
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::resolve(&cli.global)?;
    if cfg.threads > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let train_args = match &cli.command {
        Command::TrainEmbeddings { train, .. }
        | Command::Compose { train, .. }
        | Command::Benchmark { train, .. }
        | Command::Profile { train, .. }
        | Command::Project { train, .. }
        | Command::RunAll { train } => Some(train.clone()),
        _ => None,
    };
    if let Some(t) = train_args {
        t.apply(&mut cfg.train);
    }
    cfg.propagate();
    match cli.command {
        Command::Synth { spec, out } => cmd_synth(&cfg, spec.as_deref(), &out),
        Command::Ingest { input, out, year } => cmd_ingest(&input, &out, year),
        Command::Stats { field, out } => cmd_stats(&cfg, field, out.as_deref()),
        Command::BuildTfidf {
            tfidf,
            field,
            model_out,
            vectors_out,
        } => cmd_build_tfidf(&cfg, &tfidf, field, &model_out, vectors_out.as_deref()),
        Command::TrainEmbeddings { out, .. } => cmd_train(&cfg, &out),
        Command::EvalWordsim { model, pairs } => cmd_wordsim(&cfg, &model, &pairs),
        Command::Compose {
            spec,
            field,
            embedding,
            out,
            ..
        } => cmd_compose(&cfg, &spec, field, embedding.as_deref(), &out),
        Command::Benchmark {
            specs,
            fields,
            min_pubs,
            test_fraction,
            embedding,
            ..
        } => {
            if let Some(v) = min_pubs {
                cfg.benchmark.min_pubs = v;
            }
            if let Some(v) = test_fraction {
                cfg.benchmark.test_fraction = v;
            }
            if let Some(v) = fields {
                cfg.benchmark.fields = v;
            }
            let specs = match specs {
                Some(s) => s,
                None => cfg.specs()?,
            };
            cmd_benchmark(&cfg, &specs, embedding.as_deref())
        }
        Command::Profile {
            models,
            sample,
            field,
            embedding,
            ..
        } => {
            if let Some(v) = sample {
                cfg.profile.sample_size = v;
            }
            if let Some(v) = field {
                cfg.profile.field = v;
            }
            let specs = match models {
                Some(s) => s,
                None => cfg.specs()?,
            };
            cmd_profile(&cfg, &specs, embedding.as_deref())
        }
        Command::Project {
            model,
            field,
            out,
            coords,
            perplexity,
            iterations,
            label_top_n,
            embedding,
            ..
        } => {
            if let Some(v) = perplexity {
                cfg.projection.perplexity = v;
            }
            if let Some(v) = iterations {
                cfg.projection.iterations = v;
            }
            let coords = coords.unwrap_or_else(|| out.with_extension("csv"));
            cmd_project(&cfg, &model, field, &out, &coords, label_top_n, embedding.as_deref())
        }
        Command::RunAll { .. } => cmd_run_all(&cfg),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("{}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn cmd_synth(cfg: &RunConfig, spec_path: Option<&Path>, out: &Path) -> Result<()> {
    let mut spec = match spec_path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("{}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("{}", p.display()))?
        }
        None => cfg.synth.clone(),
    };
    spec.seed = cfg.seed;
    let docs = generate_synthetic(&spec)?;
    save_corpus(&docs, out)?;
    println!("wrote {} documents to {}", docs.len(), out.display());
    Ok(())
}

fn cmd_ingest(input: &Path, out: &Path, year: Option<i32>) -> Result<()> {
    let mut docs = load_corpus(input)?;
    let read = docs.len();
    if let Some(y) = year {
        docs = filter_year(docs, y);
    }
    save_corpus(&docs, out)?;
    println!("read {read} documents, wrote {} to {}", docs.len(), out.display());
    Ok(())
}

fn cmd_stats(cfg: &RunConfig, field: FieldSelection, out: Option<&Path>) -> Result<()> {
    let docs = cfg.corpus()?;
    let stats = token_stats(&docs, field, &cfg.pipeline.build()?)?;
    if let Some(p) = out {
        let mut w = create(p)?;
        stats.write_csv(&mut w)?;
        w.flush()?;
    }
    println!("documents      {}", docs.len());
    println!("total tokens   {}", stats.total_tokens());
    println!("unique tokens  {}", stats.unique_tokens());
    if let Some(s) = pareto_slope(&stats) {
        println!("log-log slope  {s:.4}");
    }
    Ok(())
}

fn tokenized(docs: &[Document], field: Field, pipeline: &PipelineConfig) -> Vec<Vec<String>> {
    docs.iter().map(|d| tokenize(d.field(field), pipeline)).collect()
}

fn cmd_build_tfidf(
    cfg: &RunConfig,
    tfidf: &TfidfConfig,
    field: Field,
    model_out: &Path,
    vectors_out: Option<&Path>,
) -> Result<()> {
    let docs = cfg.corpus()?;
    let tokens = tokenized(&docs, field, &cfg.pipeline.build()?);
    let spec = ComposerSpec::tfidf(tfidf.clone());
    let models = ComposeModels::fit(&tokens, std::slice::from_ref(&spec), None)?;
    let idf = &models.tfidf[tfidf];
    let mut w = create(model_out)?;
    write_model(tfidf, idf, &mut w)?;
    w.flush()?;
    if let Some(p) = vectors_out {
        let mut w = create(p)?;
        for (d, t) in docs.iter().zip(&tokens) {
            let v = tfidf_vector(t, tfidf, idf, models.ranking.as_ref())?;
            write_vector_line(&d.id, &v, &mut w)?;
        }
        w.flush()?;
    }
    println!("fitted {} over {} documents ({field})", tfidf.label(), docs.len());
    Ok(())
}

fn sentences(docs: &[Document], pipeline: &PipelineConfig) -> Vec<Vec<String>> {
    docs.iter()
        .flat_map(|d| [tokenize(&d.title, pipeline), tokenize(&d.abstract_text, pipeline)])
        .collect()
}

fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let docs = cfg.corpus()?;
    let model = train(&sentences(&docs, &cfg.pipeline.build()?), &cfg.train)?;
    save_model(&model, out)?;
    println!("trained {} words, dim {}, written to {}", model.len(), model.dim(), out.display());
    Ok(())
}

fn cmd_wordsim(cfg: &RunConfig, model: &Path, pairs: &[PathBuf]) -> Result<()> {
    let model = load_model(model)?;
    let pipeline = cfg.pipeline.build()?;
    let mut reports = Vec::new();
    for p in pairs {
        let set = WordPairSet::load(p)?;
        reports.push(evaluate_word_pairs(&model, &set, &pipeline).with_context(|| set.name.clone())?);
    }
    println!("{}", serde_json::to_string_pretty(&summarize(reports))?);
    Ok(())
}

fn embedding_for(cfg: &RunConfig, path: Option<&Path>, docs: &[Document]) -> Result<EmbeddingModel> {
    match path {
        Some(p) => Ok(load_model(p)?),
        None => Ok(train(&sentences(docs, &cfg.pipeline.build()?), &cfg.train)?),
    }
}

fn cmd_compose(
    cfg: &RunConfig,
    spec: &ComposerSpec,
    field: Field,
    embedding: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let docs = cfg.corpus()?;
    let tokens = tokenized(&docs, field, &cfg.pipeline.build()?);
    let model = if spec.needs_embedding() {
        Some(embedding_for(cfg, embedding, &docs)?)
    } else {
        None
    };
    let models = ComposeModels::fit(&tokens, std::slice::from_ref(spec), model)?;
    let pairs: Vec<(&str, &[String])> = docs.iter().zip(&tokens).map(|(d, t)| (d.id.as_str(), t.as_slice())).collect();
    let composed = compose_corpus(&pairs, field, spec, &models)?;
    let mut w = create(out)?;
    for v in &composed.vectors {
        write_doc_vector(v, &mut w)?;
    }
    w.flush()?;
    println!(
        "composed {} vectors ({} null) with {spec}",
        composed.vectors.len(),
        composed.null_count
    );
    Ok(())
}

fn prepare(cfg: &RunConfig, docs: &[Document], specs: &[ComposerSpec], embedding: Option<&Path>) -> Result<Benchmark> {
    let split = split_train_test(docs, cfg.benchmark.test_fraction, cfg.seed)?;
    let bench = Benchmark::new(docs, &split, cfg.benchmark.min_pubs, &cfg.pipeline.build()?)?;
    if !specs.iter().any(ComposerSpec::needs_embedding) {
        return Ok(bench);
    }
    Ok(match embedding {
        Some(p) => bench.with_embedding(load_model(p)?),
        None => bench.train_embedding(&cfg.train)?,
    })
}

/// Every (spec, field) run; a spec that leaves no journal with a usable
/// centroid is skipped with a warning.
fn run_specs(bench: &Benchmark, specs: &[ComposerSpec], fields: &[Field]) -> Result<Vec<BenchmarkRun>> {
    let mut out = Vec::new();
    for &field in fields {
        let models = bench.fit_models(field, specs)?;
        for spec in specs {
            match bench.run_one(spec, field, &models) {
                Ok(run) => out.push(run),
                Err(crate::Error::NoEligibleJournals) => {
                    warn!("{spec} on {field}: no journal has a usable centroid; skipped")
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}

fn print_reports(reports: &[&MetricsReport]) {
    println!(
        "{:<18} {:<9} {:>7} {:>6} {:>8} {:>9} {:>8}",
        "model", "field", "ranked", "null", "median", "average", "hit"
    );
    for r in reports {
        println!(
            "{:<18} {:<9} {:>7} {:>6} {:>8.1} {:>9.2} {:>7.2}%",
            r.model_label,
            r.field,
            r.n_docs_ranked,
            r.n_null_skipped,
            r.median_rank,
            r.average_rank,
            r.absolute_hit * 100.0
        );
    }
}

fn write_cdfs(dir: &Path, runs: &[BenchmarkRun]) -> Result<()> {
    for run in runs {
        let r = &run.report;
        let path = dir.join(format!("{}_{}.csv", file_stem(&r.model_label), r.field));
        let mut w = create(&path)?;
        write_cdf_csv(r, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_benchmark(cfg: &RunConfig, specs: &[ComposerSpec], embedding: Option<&Path>) -> Result<()> {
    let docs = cfg.corpus()?;
    let bench = prepare(cfg, &docs, specs, embedding)?;
    let runs = run_specs(&bench, specs, &cfg.benchmark.fields)?;
    let reports: Vec<&MetricsReport> = runs.iter().map(|r| &r.report).collect();
    write_json(&cfg.output_dir.join("benchmark.json"), &reports)?;
    write_cdfs(&cfg.output_dir.join("cdf"), &runs)?;
    print_reports(&reports);
    Ok(())
}

fn representation_of(spec: &ComposerSpec) -> Representation {
    if spec.needs_embedding() {
        Representation::Dense
    } else {
        Representation::Sparse
    }
}

/// Timing runs for the test vectors of `runs`: every model in its native
/// representation, raw TFIDF additionally dense. The first embedding model
/// is the baseline.
fn timings(cfg: &RunConfig, runs: &[&BenchmarkRun]) -> Result<Vec<TimingReport>> {
    let mut out = Vec::new();
    for run in runs {
        let available = run.test_vectors.iter().filter(|v| !v.is_null()).count();
        let n = cfg.profile.sample_size.min(available);
        if n < cfg.profile.sample_size {
            warn!("{}: only {available} vectors, timing {n}", run.spec.label);
        }
        if n == 0 {
            continue;
        }
        let mut reprs = vec![representation_of(&run.spec)];
        if reprs[0] == Representation::Sparse {
            reprs.push(Representation::Dense);
        }
        for r in reprs {
            let label = format!("{} ({r})", run.spec.label);
            let mut t = time_all_pairs(&label, &run.test_vectors, r, n, cfg.seed, cfg.profile.repetitions)?;
            t.model_label = label;
            out.push(t);
        }
    }
    if let Some(base) = out
        .iter()
        .find(|t| t.representation == Representation::Dense && !t.model_label.starts_with("tfidf"))
        .map(|t| t.model_label.clone())
    {
        apply_baseline(&mut out, &base)?;
    }
    Ok(out)
}

fn print_timings(ts: &[TimingReport]) {
    println!("{:<28} {:>8} {:>12} {:>10}", "model", "sample", "seconds", "ratio");
    for t in ts {
        println!(
            "{:<28} {:>8} {:>12.6} {:>10.2}",
            t.model_label, t.n_docs_sampled, t.wall_seconds, t.ratio_vs_baseline
        );
    }
}

#[derive(Serialize)]
struct ProfileOutput<'a> {
    memory: &'a [MemoryReport],
    timing: &'a [TimingReport],
}

fn cmd_profile(cfg: &RunConfig, specs: &[ComposerSpec], embedding: Option<&Path>) -> Result<()> {
    let docs = cfg.corpus()?;
    let bench = prepare(cfg, &docs, specs, embedding)?;
    let runs = run_specs(&bench, specs, &[cfg.profile.field])?;
    let memory: Vec<MemoryReport> = runs
        .iter()
        .map(|r| memory_footprint(&r.spec.label, &r.test_vectors, representation_of(&r.spec)))
        .collect();
    let timing = timings(cfg, &runs.iter().collect::<Vec<_>>())?;
    write_json(
        &cfg.output_dir.join("profile.json"),
        &ProfileOutput {
            memory: &memory,
            timing: &timing,
        },
    )?;
    println!("{:<18} {:<7} {:>8} {:>14}", "model", "repr", "vectors", "bytes");
    for m in &memory {
        println!(
            "{:<18} {:<7} {:>8} {:>14}",
            m.model_label, m.representation, m.n_vectors, m.total_bytes
        );
    }
    print_timings(&timing);
    Ok(())
}

fn publishers(docs: &[Document]) -> BTreeMap<String, String> {
    let mut sorted: Vec<&Document> = docs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = BTreeMap::new();
    for d in sorted {
        out.entry(d.journal_id.clone()).or_insert_with(|| d.publisher.clone());
    }
    out
}

fn write_projection(
    points: &[ProjectedPoint],
    svg_path: &Path,
    csv_path: &Path,
    label_top_n: usize,
) -> Result<()> {
    let mut w = create(svg_path)?;
    w.write_all(render_scatter(points, &default_color_map(), label_top_n).as_bytes())?;
    w.flush()?;
    let mut w = create(csv_path)?;
    write_coordinates_csv(points, &mut w)?;
    w.flush()?;
    Ok(())
}

fn projection_config(cfg: &RunConfig, n: usize) -> ProjectionConfig {
    let fitted = cfg.projection.fit_to(n);
    if fitted.perplexity != cfg.projection.perplexity {
        warn!(
            "perplexity {} too high for {n} journals, using {}",
            cfg.projection.perplexity, fitted.perplexity
        );
    }
    fitted
}

fn cmd_project(
    cfg: &RunConfig,
    spec: &ComposerSpec,
    field: Field,
    out: &Path,
    coords: &Path,
    label_top_n: usize,
    embedding: Option<&Path>,
) -> Result<()> {
    let docs = cfg.corpus()?;
    let pipeline = cfg.pipeline.build()?;
    let tokens = tokenized(&docs, field, &pipeline);
    let model = if spec.needs_embedding() {
        Some(embedding_for(cfg, embedding, &docs)?)
    } else {
        None
    };
    let models = ComposeModels::fit(&tokens, std::slice::from_ref(spec), model)?;
    let pairs: Vec<(&str, &[String])> = docs.iter().zip(&tokens).map(|(d, t)| (d.id.as_str(), t.as_slice())).collect();
    let composed = compose_corpus(&pairs, field, spec, &models)?;
    let mut per_journal: BTreeMap<&str, usize> = BTreeMap::new();
    for d in &docs {
        *per_journal.entry(&d.journal_id).or_default() += 1;
    }
    let eligible = per_journal
        .into_iter()
        .filter(|(_, n)| *n >= cfg.benchmark.min_pubs)
        .map(|(j, _)| j.to_string())
        .collect();
    let centroids = journal_centroids(
        docs.iter()
            .zip(&composed.vectors)
            .filter_map(|(d, v)| v.vector.as_ref().map(|r| (d.journal_id.as_str(), r))),
        &eligible,
    )?;
    let config = projection_config(cfg, centroids.len());
    let points = project_journals(&centroids, &publishers(&docs), &config)?;
    write_projection(&points, out, coords, label_top_n)?;
    println!("projected {} journals to {} and {}", points.len(), out.display(), coords.display());
    Ok(())
}

/// One row of the run-all summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub field: Field,
    pub representation: Representation,
    pub memory_bytes: u64,
    pub absolute_hit: f64,
    pub median_rank: f64,
    pub average_rank: f64,
    pub n_docs_ranked: usize,
    pub n_null_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub n_documents: usize,
    pub n_journals: usize,
    pub rows: Vec<SummaryRow>,
}

fn cmd_run_all(cfg: &RunConfig) -> Result<()> {
    let docs = match &cfg.corpus_path {
        Some(p) => load_corpus(p)?,
        None => generate_synthetic(&cfg.synth)?,
    };
    let specs = cfg.specs()?;
    if specs.is_empty() {
        bail!("no content models configured");
    }
    let bench = prepare(cfg, &docs, &specs, None)?;
    let runs = run_specs(&bench, &specs, &cfg.benchmark.fields)?;
    let dir = &cfg.output_dir;

    let rows: Vec<SummaryRow> = runs
        .iter()
        .map(|r| {
            let repr = representation_of(&r.spec);
            SummaryRow {
                model: r.spec.label.clone(),
                field: r.report.field,
                representation: repr,
                memory_bytes: memory_footprint(&r.spec.label, &r.test_vectors, repr).total_bytes,
                absolute_hit: r.report.absolute_hit,
                median_rank: r.report.median_rank,
                average_rank: r.report.average_rank,
                n_docs_ranked: r.report.n_docs_ranked,
                n_null_skipped: r.report.n_null_skipped,
            }
        })
        .collect();
    let summary = RunSummary {
        seed: cfg.seed,
        n_documents: docs.len(),
        n_journals: bench.eligible().len(),
        rows,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    let reports: Vec<&MetricsReport> = runs.iter().map(|r| &r.report).collect();
    write_json(&dir.join("reports.json"), &reports)?;
    write_cdfs(&dir.join("cdf"), &runs)?;

    let field = cfg.profile.field;
    let timed: Vec<&BenchmarkRun> = runs.iter().filter(|r| r.report.field == field).collect();
    let timing = timings(cfg, &timed)?;
    write_json(&dir.join("timing.json"), &timing)?;

    if let Some(run) = runs
        .iter()
        .find(|r| r.report.field == Field::Abstract && r.spec.needs_embedding())
        .or_else(|| runs.first())
    {
        let config = projection_config(cfg, run.centroids.len());
        let points = project_journals(&run.centroids, &publishers(&docs), &config)?;
        write_projection(&points, &dir.join("journals.svg"), &dir.join("journals.csv"), 10)?;
    }

    println!("{:<18} {:<9} {:>14} {:>8} {:>8}", "model", "field", "memory_bytes", "hit", "median");
    for r in &summary.rows {
        println!(
            "{:<18} {:<9} {:>14} {:>7.2}% {:>8.1}",
            r.model,
            r.field,
            r.memory_bytes,
            r.absolute_hit * 100.0,
            r.median_rank
        );
    }
    print_timings(&timing);
    println!("outputs in {}", dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_layers() {
        let file = RunConfig::from_toml_str(
            "seed = 7\nthreads = 2\n[train]\ndim = 64\n[benchmark]\nmin_pubs = 3\n",
        )
        .unwrap();
        let mut cfg = file.clone();
        cfg.apply(&GlobalArgs {
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.threads, 2);
        assert_eq!(cfg.train.dim, 64);
        assert_eq!(cfg.benchmark.min_pubs, 3);
        assert_eq!(cfg.benchmark.test_fraction, 0.2);
        assert_eq!(cfg.train.window, 5);
        cfg.propagate();
        assert_eq!((cfg.train.seed, cfg.projection.seed, cfg.synth.seed), (9, 9, 9));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("sed = 1\n").is_err());
    }

    #[test]
    fn default_specs() {
        let specs = RunConfig::default().specs().unwrap();
        assert_eq!(specs.len(), 8);
        assert_eq!(specs[2].label, "tfidf 10K/10K");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["emberank", "frobnicate"]), 2);
        assert_eq!(main_with_args(["emberank", "stats", "--bogus"]), 2);
    }

    #[test]
    fn missing_corpus_fails() {
        assert_eq!(main_with_args(["emberank", "stats", "--corpus", "/nonexistent/c.jsonl"]), 1);
    }

    #[test]
    fn error_line_dedups_sources() {
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        let e = anyhow::Error::new(crate::Error::File {
            path: "a.jsonl".into(),
            source: io,
        });
        assert_eq!(one_line(&e), "a.jsonl: gone");
    }
}

//! `codetopics` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal
//! invariant violation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::corpus::{build_matrix, ingest_path, PatientConditionsCorpus, Vocabulary};
use crate::error::{Error, ErrorClass, Result};
use crate::eval::{distinctiveness_summary, inter_topic_distances, tightness, DistanceMatrix, DistinctivenessSummary, TightnessReport};
use crate::report::{render_table, topic_report, LabelMap};
use crate::sampler::{run, Progress, TopicModel};
use crate::synth::GroundTruth;

#[derive(Debug, Parser)]
#[command(name = "codetopics", version, about = "Topic models for bag-of-codes corpora")]
pub struct Cli {
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the sampler and the synthetic generator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for written artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Table,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Table => OutputFormat::Table,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the corpus from an event log and fit a topic model.
    Fit(FitArgs),
    /// Print the most probable codes of every topic.
    Report(ReportArgs),
    /// Distinctiveness and tightness of a fitted model.
    Eval(EvalArgs),
    /// Generate a synthetic event log with known topics.
    Synth(SynthArgs),
    /// Corpus summary statistics for an event log.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Event log, CSV or JSON Lines (`.jsonl`).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Fraction of all occurrences the kept vocabulary must cover.
    #[arg(long)]
    pub coverage: Option<f64>,
    /// Number of topics K.
    #[arg(long)]
    pub topics: Option<usize>,
    /// Patient-topic concentration; defaults to 50 / K.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Topic-code concentration.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sweeps discarded before the first saved sample.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Number of saved samples averaged into the model.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sweeps between saved samples.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Log-likelihood trace cadence in sweeps; 0 disables the trace.
    #[arg(long)]
    pub trace_every: Option<usize>,
    /// Independent chains run in parallel, one model file each.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Also write the patient-topic matrix.
    #[arg(long)]
    pub include_theta: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Fitted model JSON.
    pub model: Option<PathBuf>,
    /// `code,label` CSV used for display names.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Codes listed per topic.
    #[arg(long)]
    pub top_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fitted model JSON.
    pub model: Option<PathBuf>,
    /// Probability a code must exceed to count toward tightness.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Size of the top-n mass in the tightness report.
    #[arg(long)]
    pub top_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Planted topics.
    #[arg(long)]
    pub topics: Option<usize>,
    /// Vocabulary size.
    #[arg(long)]
    pub codes: Option<usize>,
    /// Patients to generate.
    #[arg(long)]
    pub documents: Option<usize>,
    /// Dirichlet concentration of the planted topics.
    #[arg(long)]
    pub concentration: Option<f64>,
    /// Dirichlet concentration of each patient's topic mixture.
    #[arg(long)]
    pub doc_alpha: Option<f64>,
    /// Mean codes per patient.
    #[arg(long)]
    pub mean_length: Option<f64>,
    /// Negative-binomial dispersion of patient lengths.
    #[arg(long)]
    pub dispersion: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Event log, CSV or JSON Lines (`.jsonl`).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Fraction of all occurrences the kept vocabulary must cover.
    #[arg(long)]
    pub coverage: Option<f64>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Internal => 3,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.paths.out = Some(out.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f.into();
    }
    if let Some(seed) = cli.seed {
        cfg.sampler.seed = seed;
        cfg.synth.seed = seed;
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Fit(args) => cmd_fit(&mut cfg, args, stdout),
        Command::Report(args) => cmd_report(&mut cfg, args, stdout),
        Command::Eval(args) => cmd_eval(&mut cfg, args, stdout),
        Command::Synth(args) => cmd_synth(&mut cfg, args, stdout),
        Command::Stats(args) => cmd_stats(&mut cfg, args, stdout),
    }
}

fn require_input(path: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    let p = path.ok_or_else(|| Error::Config(format!("no {what} given")))?;
    if !p.exists() {
        return Err(Error::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} not found")),
        ));
    }
    Ok(p.clone())
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn load_corpus(events: &Path, coverage: f64) -> Result<PatientConditionsCorpus> {
    let log = ingest_path(events)?;
    let vocab = Vocabulary::build(&log, coverage)?;
    let (corpus, tally) = build_matrix(&log, &vocab)?;
    log::info!(
        "{} patients, {} codes kept of {}, coverage {:.4}; dropped {} patients / {} tokens",
        corpus.n_documents(),
        vocab.len(),
        log.n_codes(),
        vocab.coverage_achieved(),
        tally.dropped_patients,
        tally.dropped_tokens
    );
    Ok(corpus)
}

struct ChainResult {
    model: TopicModel,
    trace: Vec<(usize, f64)>,
}

fn fit_chain(corpus: &PatientConditionsCorpus, cfg: &RunConfig, chain: usize) -> Result<ChainResult> {
    let mut hyper = cfg.sampler.hyperparameters();
    hyper.seed = hyper.seed.wrapping_add(chain as u64);
    let mut trace = Vec::new();
    let mut sink = |sweep: usize, ll: f64| trace.push((sweep, ll));
    let progress = (cfg.sampler.trace_every > 0).then_some(Progress {
        every: cfg.sampler.trace_every,
        sink: &mut sink,
    });
    let model = run(corpus, &hyper, progress)?;
    for (t, row) in model.phi.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant(format!("phi row {t} sums to {s}")));
        }
    }
    Ok(ChainResult { model, trace })
}

fn trace_csv(trace: &[(usize, f64)]) -> String {
    let mut s = String::from("sweep_index,log_likelihood\n");
    for (i, ll) in trace {
        s.push_str(&format!("{i},{ll}\n"));
    }
    s
}

fn cmd_fit(cfg: &mut RunConfig, args: &FitArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(p) = &args.events {
        cfg.paths.events = Some(p.clone());
    }
    if let Some(c) = args.coverage {
        cfg.vocabulary.coverage = c;
    }
    let s = &mut cfg.sampler;
    if let Some(k) = args.topics {
        s.topics = k;
    }
    if args.alpha.is_some() {
        s.alpha = args.alpha;
    }
    if let Some(b) = args.beta {
        s.beta = b;
    }
    if let Some(n) = args.burn_in {
        s.burn_in_sweeps = n;
    }
    if let Some(n) = args.samples {
        s.n_saved_samples = n;
    }
    if let Some(n) = args.thin {
        s.thinning_interval = n;
    }
    if let Some(n) = args.trace_every {
        s.trace_every = n;
    }
    if let Some(n) = args.chains {
        s.chains = n;
    }
    if args.include_theta {
        cfg.output.include_theta = true;
    }
    cfg.validate()?;

    let events = require_input(cfg.paths.events.as_ref(), "events file")?;
    let corpus = load_corpus(&events, cfg.vocabulary.coverage)?;

    let chains = cfg.sampler.chains;
    let results: Vec<Result<ChainResult>> = if chains == 1 {
        vec![fit_chain(&corpus, cfg, 0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..chains)
                .map(|c| {
                    let (corpus, cfg) = (&corpus, &*cfg);
                    scope.spawn(move || fit_chain(corpus, cfg, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Invariant("chain panicked".into()))))
                .collect()
        })
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let dir = out_dir(cfg)?;
    write_atomic(&dir.join("vocabulary.json"), to_json_pretty(&corpus.vocabulary().to_file())?.as_bytes())?;
    write_atomic(&dir.join("corpus.json"), corpus.to_json()?.as_bytes())?;
    for (c, r) in results.iter().enumerate() {
        let suffix = if chains == 1 { String::new() } else { format!("-chain{c}") };
        let model_path = dir.join(format!("model{suffix}.json"));
        write_atomic(&model_path, r.model.to_json(cfg.output.include_theta)?.as_bytes())?;
        if cfg.sampler.trace_every > 0 {
            write_atomic(&dir.join(format!("trace{suffix}.csv")), trace_csv(&r.trace).as_bytes())?;
        }
        emit(stdout, &format!("wrote {}\n", model_path.display()))?;
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<TopicModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    TopicModel::from_json(&bytes)
}

fn model_path(cfg: &RunConfig, arg: Option<&PathBuf>) -> Result<PathBuf> {
    require_input(arg.or(cfg.paths.model.as_ref()), "model file")
}

fn cmd_report(cfg: &mut RunConfig, args: &ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = load_model(&model_path(cfg, args.model.as_ref())?)?;
    let labels_path = args.labels.clone().or_else(|| cfg.paths.labels.clone());
    let labels = match labels_path {
        Some(p) => {
            let p = require_input(Some(&p), "label map")?;
            let f = std::fs::File::open(&p).map_err(|e| Error::io(&p, e))?;
            Some(LabelMap::from_csv(std::io::BufReader::new(f))?)
        }
        None => None,
    };
    let top_n = args.top_n.unwrap_or(cfg.eval.top_n);
    let rows = topic_report(&model, labels.as_ref(), top_n)?;
    let (text, name) = match cfg.output.format {
        OutputFormat::Table => (render_table(&rows), "report.txt"),
        OutputFormat::Json => (to_json_pretty(&rows)?, "report.json"),
    };
    if let Some(dir) = cfg.paths.out.is_some().then(|| out_dir(cfg)).transpose()? {
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    emit(stdout, &text)
}

/// Everything `eval` reports for one model.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub summary: DistinctivenessSummary,
    pub distances: DistanceMatrix,
    pub tightness: TightnessReport,
}

pub fn evaluate(model: &TopicModel, threshold: f64, top_n: usize) -> Result<Evaluation> {
    let distances = inter_topic_distances(&model.phi)?;
    let summary = distinctiveness_summary(&distances)?;
    let tightness = tightness(&model.phi, threshold, top_n.min(model.vocabulary_size()))?;
    Ok(Evaluation {
        summary,
        distances,
        tightness,
    })
}

fn cmd_eval(cfg: &mut RunConfig, args: &EvalArgs, stdout: &mut dyn Write) -> Result<()> {
    let model = load_model(&model_path(cfg, args.model.as_ref())?)?;
    let threshold = args.threshold.unwrap_or(cfg.eval.threshold);
    let top_n = args.top_n.unwrap_or(cfg.eval.top_n);
    let evaluation = evaluate(&model, threshold, top_n)?;
    let json = to_json_pretty(&evaluation)?;
    if cfg.paths.out.is_some() {
        write_atomic(&out_dir(cfg)?.join("eval.json"), json.as_bytes())?;
    }
    let text = match cfg.output.format {
        OutputFormat::Json => json,
        OutputFormat::Table => format!(
            "{}\n\n{}\n{}",
            evaluation.summary,
            evaluation.tightness.to_table(),
            evaluation.distances.to_table()
        ),
    };
    emit(stdout, &text)
}

fn cmd_synth(cfg: &mut RunConfig, args: &SynthArgs, stdout: &mut dyn Write) -> Result<()> {
    let g = &mut cfg.synth;
    if let Some(v) = args.topics {
        g.topics = v;
    }
    if let Some(v) = args.codes {
        g.codes = v;
    }
    if let Some(v) = args.documents {
        g.documents = v;
    }
    if let Some(v) = args.concentration {
        g.topic_concentration = v;
    }
    if let Some(v) = args.doc_alpha {
        g.doc_alpha = v;
    }
    if let Some(v) = args.mean_length {
        g.mean_length = v;
    }
    if let Some(v) = args.dispersion {
        g.length_dispersion = Some(v);
    }
    let (truth, synthetic) = GroundTruth::generate(&cfg.synth)?;
    let dir = out_dir(cfg)?;
    let mut events = Vec::new();
    synthetic.events.write_csv(&mut events)?;
    write_atomic(&dir.join("events.csv"), &events)?;
    write_atomic(&dir.join("ground_truth.json"), to_json_pretty(&truth)?.as_bytes())?;
    emit(
        stdout,
        &format!(
            "wrote {} ({} patients, {} tokens)\n",
            dir.join("events.csv").display(),
            synthetic.corpus.n_documents(),
            synthetic.corpus.total_tokens()
        ),
    )
}

fn cmd_stats(cfg: &mut RunConfig, args: &StatsArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(p) = &args.events {
        cfg.paths.events = Some(p.clone());
    }
    if let Some(c) = args.coverage {
        cfg.vocabulary.coverage = c;
    }
    let events = require_input(cfg.paths.events.as_ref(), "events file")?;
    let corpus = load_corpus(&events, cfg.vocabulary.coverage)?;
    let stats = corpus.stats();
    let text = match cfg.output.format {
        OutputFormat::Json => to_json_pretty(&stats)?,
        OutputFormat::Table => format!(
            "documents={}\nvocabulary={}\ntokens={}\nmean_length={:.3}\nmin_length={}\nmax_length={}\nsparsity={:.6}\ncoverage={:.6}\n",
            stats.documents,
            stats.vocabulary_size,
            stats.total_tokens,
            stats.mean_length,
            stats.min_length,
            stats.max_length,
            stats.sparsity,
            corpus.vocabulary().coverage_achieved()
        ),
    };
    emit(stdout, &text)
}

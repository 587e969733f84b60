//! `habitseq`: learn habitual action sequences from trace files, predict
//! continuations, export task models and run the built-in simulations.

mod trace;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use habitseq::simlab::{self, RunConfig, DEFAULT_SEED};
use habitseq::util::write_atomic;
use habitseq::{taskmodel, HabitModel, MarkovOrder, ModelConfig, PredictOptions, Window};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<habitseq::Error> for CliError {
    fn from(e: habitseq::Error) -> Self {
        match e {
            habitseq::Error::Io { .. } => CliError::Io(e.to_string()),
            habitseq::Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "habitseq", version, about = "Online Bayesian learning of habitual action sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest a trace file into a model snapshot (created if missing).
    Learn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Print the most probable continuations of a prompt.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write the task model for a prompt as a DOT file.
    ExportDot {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in scenario and write report.txt, report.tsv and phase DOT files.
    Simulate {
        #[arg(value_enum)]
        scenario: ScenarioName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Sequences per phase [default: 3900 stationary, 50 sequential]
        #[arg(long)]
        draws: Option<usize>,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long = "p-min")]
        p_min: Option<f64>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Summarise a model snapshot.
    Stats {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct HyperArgs {
    /// Analysis window: a number >= 1 or "inf" [default: 200]
    #[arg(long)]
    window: Option<String>,
    /// Markov order: a positive integer or "auto" [default: auto]
    #[arg(long)]
    order: Option<String>,
    /// Novelty reserve mass [default: 0.5]
    #[arg(long)]
    reserve: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct QueryArgs {
    /// Space-separated prompt tokens (empty for the root)
    #[arg(long, default_value = "")]
    prompt: String,
    #[arg(long, default_value_t = 16)]
    top: usize,
    #[arg(long = "p-min", default_value_t = 0.001)]
    p_min: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Tsv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ScenarioName {
    Stationary,
    Sequential,
}

fn parse_window(s: &str) -> CliResult<Window> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Window::INFINITE);
    }
    let w: f64 = s
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid --window {s:?}")))?;
    Ok(Window::new(w)?)
}

fn parse_order(s: &str) -> CliResult<MarkovOrder> {
    if s.eq_ignore_ascii_case("auto") || s.eq_ignore_ascii_case("inf") {
        return Ok(MarkovOrder::Unbounded);
    }
    let k: usize = s
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid --order {s:?}")))?;
    Ok(MarkovOrder::bounded(k)?)
}

/// Hyperparameters given explicitly on the command line.
struct Hyper {
    window: Option<Window>,
    order: Option<MarkovOrder>,
    reserve: Option<f64>,
}

impl HyperArgs {
    fn resolve(&self) -> CliResult<Hyper> {
        let hyper = Hyper {
            window: self.window.as_deref().map(parse_window).transpose()?,
            order: self.order.as_deref().map(parse_order).transpose()?,
            reserve: self.reserve,
        };
        // validates the reserve
        hyper.apply(ModelConfig::default()).params()?;
        Ok(hyper)
    }
}

impl Hyper {
    fn apply(&self, base: ModelConfig) -> ModelConfig {
        ModelConfig {
            window: self.window.unwrap_or(base.window),
            order: self.order.unwrap_or(base.order),
            reserve: self.reserve.unwrap_or(base.reserve),
        }
    }
}

impl QueryArgs {
    fn prompt_tokens(&self) -> Vec<&str> {
        self.prompt.split_whitespace().collect()
    }

    fn options(&self) -> CliResult<PredictOptions> {
        Ok(PredictOptions::new(self.top, self.p_min)?)
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<HabitModel> {
    let text = read_text(path)?;
    HabitModel::from_snapshot(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_learn(input: &Path, model_path: &Path, hyper: &HyperArgs) -> CliResult<String> {
    let hyper = hyper.resolve()?;
    let text = read_text(input)?;
    let sequences = trace::parse_trace(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;

    let mut model = if model_path.exists() {
        let model = load_model(model_path)?;
        let have = *model.config();
        let want = hyper.apply(have);
        if want != have {
            return Err(CliError::Usage(format!(
                "hyperparameters do not match {}: model has window={} order={} reserve={}",
                model_path.display(),
                have.window,
                have.order,
                have.reserve
            )));
        }
        model
    } else {
        HabitModel::new(hyper.apply(ModelConfig::default()))?
    };

    for (i, seq) in sequences.iter().enumerate() {
        model
            .ingest(seq)
            .map_err(|e| CliError::Data(format!("{}: sequence {}: {e}", input.display(), i + 1)))?;
    }
    model.save(model_path)?;
    Ok(format!(
        "{} sequences ingested\nL_max: {}\nmodel_size: {}\n",
        sequences.len(),
        model.max_len(),
        model.model_size()
    ))
}

fn cmd_predict(model_path: &Path, query: &QueryArgs, format: Format) -> CliResult<String> {
    let model = load_model(model_path)?;
    let opts = query.options()?;
    let prompt = query.prompt_tokens();
    if let Some(unknown) = prompt.iter().find(|t| model.vocabulary().lookup(t).is_none()) {
        eprintln!("note: prompt token {unknown:?} is not in the model vocabulary; no continuation known");
    }
    let predictions = model.predict_names(&prompt, &opts);
    let mut out = String::new();
    if format == Format::Tsv {
        out.push_str("rank\tpath\tjoint_probability\tevidence_db\n");
    }
    for (i, p) in predictions.iter().enumerate() {
        match format {
            Format::Text => {
                let _ = writeln!(out, "{}\t{}", i + 1, p.render());
            }
            Format::Tsv => {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:e}\t{:.2}",
                    i + 1,
                    p.path_string(),
                    p.joint,
                    p.evidence.db()
                );
            }
        }
    }
    Ok(out)
}

fn cmd_export_dot(model_path: &Path, query: &QueryArgs, out: &Path) -> CliResult<String> {
    let model = load_model(model_path)?;
    let opts = query.options()?;
    let graph = taskmodel::extract(&model, &query.prompt_tokens(), &opts, taskmodel::DEFAULT_HIGHLIGHTS);
    write_atomic(out, graph.to_dot().as_bytes())?;
    Ok(format!(
        "wrote {} ({} paths, {} nodes, {} edges)\n",
        out.display(),
        graph.paths.len(),
        graph.nodes.len(),
        graph.edges.len()
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    scenario: ScenarioName,
    out: &Path,
    seed: u64,
    draws: Option<usize>,
    hyper: &HyperArgs,
    p_min: Option<f64>,
    top: Option<usize>,
) -> CliResult<String> {
    let hyper = hyper.resolve()?;
    let base = match scenario {
        ScenarioName::Stationary => RunConfig::stationary(),
        ScenarioName::Sequential => RunConfig::sequential(),
    };
    let model_cfg = hyper.apply(base.model_config());
    let config = RunConfig {
        seed,
        draws_per_phase: draws.unwrap_or(base.draws_per_phase),
        window: model_cfg.window,
        order: model_cfg.order,
        reserve: model_cfg.reserve,
        p_min: p_min.unwrap_or(base.p_min),
        max_results: top.unwrap_or(base.max_results),
    };
    let run = match scenario {
        ScenarioName::Stationary => simlab::run_stationary(&simlab::stationary_scenario(), &config)?,
        ScenarioName::Sequential => simlab::run_sequential(&simlab::sequential_scenario(), &config)?,
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let report = &run.report;
    let mut written = vec![
        ("report.txt".to_string(), report.to_text()),
        ("report.tsv".to_string(), report.to_tsv()),
    ];
    for ph in &report.phases {
        written.push((format!("phase{}.dot", ph.phase), ph.dot.clone()));
    }
    let mut msg = String::new();
    for (name, body) in &written {
        let path = out.join(name);
        write_atomic(&path, body.as_bytes())?;
        let _ = writeln!(msg, "wrote {}", path.display());
    }
    Ok(msg)
}

fn cmd_stats(model_path: &Path) -> CliResult<String> {
    let model = load_model(model_path)?;
    let c = model.config();
    Ok(format!(
        "model_size: {}\nL_max: {}\nclock: {}\nvocabulary: {}\nwindow: {}\norder: {}\nreserve: {}\n",
        model.model_size(),
        model.max_len(),
        model.clock(),
        model.vocabulary().len(),
        c.window,
        c.order,
        c.reserve
    ))
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Learn { input, model, hyper } => cmd_learn(&input, &model, &hyper),
        Command::Predict { model, query, format } => cmd_predict(&model, &query, format),
        Command::ExportDot { model, query, out } => cmd_export_dot(&model, &query, &out),
        Command::Simulate {
            scenario,
            out,
            seed,
            draws,
            hyper,
            p_min,
            top,
        } => cmd_simulate(scenario, &out, seed, draws, &hyper, p_min, top),
        Command::Stats { model } => cmd_stats(&model),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

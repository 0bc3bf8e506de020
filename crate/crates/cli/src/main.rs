use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use paley_core::cayley_graph::build_graph;
use paley_core::clique_solver::{max_clique_exact, SearchBudget};
use paley_core::fourier_probe::{sup_fourier, tail_probability_estimate, window_with_q};
use paley_core::harness::{
    compare_models, persist_run, run_borel_cantelli, run_character_baseline, run_concentration, summarize,
    write_jsonl, write_summary_csv, ExperimentConfig,
};
use paley_core::independence_lab::{independence_summary, montgomery_search, null_model_variances};
use paley_core::number_theory::least_qnr_scan;
use paley_core::second_moment::{enumerate_u, r_statistics};
use paley_core::sign_models::{sample, Model, SignFunction};
use paley_core::stats::mean_sd;

#[derive(Parser)]
#[command(name = "paley", version, about = "Random multiplicative sum graphs and their clique numbers")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one sign function.
    Sample(Instance),
    /// Edge list of one sum graph, "u v" per line.
    Graph(Instance),
    /// Maximum clique of one sum graph.
    Clique(CliqueArgs),
    /// Clique numbers over primes, models and trials.
    Concentration(Experiment),
    /// Frequency of the all-small-primes-positive event and the forced clique.
    BorelCantelli(Experiment),
    /// Least quadratic non-residues of all odd primes up to a limit.
    PaleyScan(ScanArgs),
    /// Clique numbers of the quadratic-character sum graphs.
    CharacterBaseline(Experiment),
    /// Supremum of the windowed Fourier transform, optionally with a tail estimate.
    Fourier(FourierArgs),
    /// Legendre-pattern counts and their variance.
    Independence(IndependenceArgs),
    /// Sidon-type family and the expectation of R.
    SecondMoment(SecondMomentArgs),
}

#[derive(Args)]
struct Instance {
    #[arg(long = "N", required_unless_present = "input")]
    n: Option<u64>,
    #[arg(long = "Q", default_value_t = 0)]
    q: u64,
    #[arg(long, default_value = "multiplicative")]
    model: Model,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read the sign function from a JSON file instead of sampling.
    #[arg(long, conflicts_with = "n")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Instance {
    fn sign_function(&self) -> Result<SignFunction> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(SignFunction::from_json(&text)?);
        }
        let n = self.n.context("--N is required")?;
        Ok(sample(self.model, n, self.q, self.seed)?)
    }
}

#[derive(Args)]
struct CliqueArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

#[derive(Args)]
struct Experiment {
    /// Flat TOML file with ExperimentConfig keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<Model>>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "Q")]
    q: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    exact_limit: Option<u64>,
    /// Record wall-clock time per trial; output is then no longer reproducible byte for byte.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Experiment {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = &self.primes {
            cfg.primes = v.clone();
        }
        if let Some(v) = &self.models {
            cfg.models = v.clone();
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if self.q.is_some() {
            cfg.q_override = self.q;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if self.max_nodes.is_some() {
            cfg.max_nodes = self.max_nodes;
        }
        if self.time_limit_ms.is_some() {
            cfg.time_limit_ms = self.time_limit_ms;
        }
        if let Some(v) = self.exact_limit {
            cfg.exact_limit = v;
        }
        cfg.record_timings |= self.timings;
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 100_000)]
    limit: u64,
    /// Full table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FourierArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long = "Q")]
    q: u64,
    #[arg(long)]
    l: f64,
    #[arg(long, default_value = "multiplicative")]
    model: Model,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate P(sup ≥ l) over this many multiplicative samples.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct IndependenceArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    y: u64,
    /// Simulated iid tables for the null variance.
    #[arg(long, default_value_t = 0)]
    null_draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for counts.csv and spectrum.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SecondMomentArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    k: usize,
    #[arg(long = "Q")]
    q: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the family as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn create(p: &Path) -> io::Result<File> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    File::create(p)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Flat key,value CSV of a JSON object's scalar fields.
fn print_flat_csv<T: Serialize>(value: &T) -> Result<()> {
    let v = serde_json::to_value(value)?;
    let mut out = io::stdout().lock();
    writeln!(out, "key,value")?;
    let mut stack = vec![(String::new(), v)];
    while let Some((prefix, v)) = stack.pop() {
        match v {
            serde_json::Value::Object(m) => {
                for (k, v) in m.into_iter().rev() {
                    let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                    stack.push((key, v));
                }
            }
            serde_json::Value::Array(_) => {}
            other => writeln!(out, "{prefix},{other}")?,
        }
    }
    Ok(())
}

fn emit<T: Serialize>(format: Format, value: &T) -> Result<()> {
    match format {
        Format::Json => print_json(value),
        Format::Csv => print_flat_csv(value),
    }
}

fn cmd_sample(format: Format, a: &Instance) -> Result<()> {
    let f = a.sign_function()?;
    let mut w = sink(a.out.as_deref())?;
    match format {
        Format::Json => writeln!(w, "{}", f.to_json()?)?,
        Format::Csv => {
            writeln!(w, "x,value")?;
            for (x, v) in f.values().iter().enumerate() {
                writeln!(w, "{x},{v}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_graph(a: &Instance) -> Result<()> {
    let g = build_graph(&a.sign_function()?);
    let mut w = sink(a.out.as_deref())?;
    g.write_edge_list(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_clique(format: Format, a: &CliqueArgs) -> Result<()> {
    let g = build_graph(&a.instance.sign_function()?);
    let budget = SearchBudget {
        max_nodes: a.max_nodes,
        time_limit: a.time_limit_ms.map(std::time::Duration::from_millis),
    };
    let r = max_clique_exact(&g, budget);
    if !g.is_clique(&r.witness) {
        bail!("solver returned a non-clique witness");
    }
    emit(format, &r)
}

#[derive(Serialize)]
struct ConcentrationReport {
    summary: Vec<paley_core::harness::SummaryRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    comparisons: Vec<paley_core::harness::ModelComparison>,
}

fn cmd_records(format: Format, kind: &str, a: &Experiment) -> Result<()> {
    let cfg = a.config()?;
    let records = match kind {
        "character-baseline" => run_character_baseline(&cfg)?,
        _ => run_concentration(&cfg)?,
    };
    let summary = match &a.out {
        Some(out) => persist_run(kind, &cfg, &records, out)?,
        None => summarize(&records, cfg.epsilon)?,
    };
    let mut comparisons = Vec::new();
    if kind == "concentration" && cfg.models.contains(&Model::Multiplicative) && cfg.models.contains(&Model::Iid) {
        for &n in &cfg.primes {
            comparisons.push(compare_models(&records, n, Model::Multiplicative, Model::Iid)?);
        }
    }
    match (format, &a.out) {
        (Format::Csv, _) => {
            let mut out = io::stdout().lock();
            write_summary_csv(&mut out, &summary)?;
        }
        (Format::Json, Some(_)) => print_json(&ConcentrationReport { summary, comparisons })?,
        (Format::Json, None) => write_jsonl(io::stdout().lock(), &records)?,
    }
    Ok(())
}

fn cmd_borel_cantelli(format: Format, a: &Experiment) -> Result<()> {
    let cfg = a.config()?;
    let rows = run_borel_cantelli(&cfg)?;
    if let Some(out) = &a.out {
        let mut w = sink(Some(out))?;
        serde_json::to_writer_pretty(&mut w, &rows)?;
        writeln!(w)?;
        w.flush()?;
    }
    match format {
        Format::Json => print_json(&rows),
        Format::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "N,Q,pi_Q,trials,hits,frequency,predicted,ci_low,ci_high,covered,forced_size,forced_is_clique,forced_omega")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.q,
                    r.pi_q,
                    r.estimate.trials,
                    r.estimate.hits,
                    r.estimate.frequency,
                    r.predicted,
                    r.estimate.ci_low,
                    r.estimate.ci_high,
                    r.covered,
                    r.forced.clique_size,
                    r.forced.is_clique,
                    r.forced.omega.map(|w| w.to_string()).unwrap_or_default()
                )?;
            }
            Ok(())
        }
    }
}

fn cmd_paley_scan(format: Format, a: &ScanArgs) -> Result<()> {
    let scan = least_qnr_scan(a.limit)?;
    if let Some(out) = &a.out {
        let mut w = sink(Some(out))?;
        scan.write_csv(&mut w)?;
        w.flush()?;
    }
    let setters: Vec<_> = scan.record_setters().cloned().collect();
    match format {
        Format::Json => print_json(&setters),
        Format::Csv => {
            let mut out = io::stdout().lock();
            writeln!(out, "p,lqnr")?;
            for r in setters {
                writeln!(out, "{},{}", r.p, r.lqnr)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FourierReport {
    scan: paley_core::fourier_probe::FourierScan,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<paley_core::stats::BinomialEstimate>,
}

fn cmd_fourier(format: Format, a: &FourierArgs) -> Result<()> {
    let f = sample(a.model, a.n, a.q, a.seed)?;
    let g = window_with_q(&f, a.q)?;
    let scan = sup_fourier(&g, a.l)?;
    let tail = a.trials.map(|t| tail_probability_estimate(a.n, a.q, a.l, t, a.seed)).transpose()?;
    emit(format, &FourierReport { scan, tail })
}

#[derive(Serialize)]
struct IndependenceReport {
    #[serde(flatten)]
    summary: paley_core::independence_lab::IndependenceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    null_mean_variance: Option<f64>,
    montgomery_primes: usize,
}

fn cmd_independence(format: Format, a: &IndependenceArgs) -> Result<()> {
    let (summary, table, spectrum) = independence_summary(a.x, a.y)?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        let mut w = sink(Some(&dir.join("counts.csv")))?;
        table.write_csv(&mut w)?;
        w.flush()?;
        let mut w = sink(Some(&dir.join("spectrum.csv")))?;
        spectrum.write_csv(&mut w)?;
        w.flush()?;
    }
    let null_mean_variance = (a.null_draws > 0)
        .then(|| mean_sd(&null_model_variances(summary.pattern_bits, summary.total, a.null_draws, a.seed)).0);
    let montgomery_primes = montgomery_search(a.x, a.y)?.len();
    emit(format, &IndependenceReport { summary, null_mean_variance, montgomery_primes })
}

fn cmd_second_moment(format: Format, a: &SecondMomentArgs) -> Result<()> {
    let u = enumerate_u(a.n, a.k)?;
    if let Some(out) = &a.out {
        let mut w = sink(Some(out))?;
        u.write_jsonl(&mut w)?;
        w.flush()?;
    }
    emit(format, &r_statistics(&u, a.q, a.trials, a.seed)?)
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().map(|e| e.kind())
            .or_else(|| c.downcast_ref::<serde_json::Error>().and_then(|e| e.io_error_kind()))
            == Some(std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> std::process::ExitCode {
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let f = cli.format;
    match &cli.command {
        Command::Sample(a) => cmd_sample(f, a),
        Command::Graph(a) => cmd_graph(a),
        Command::Clique(a) => cmd_clique(f, a),
        Command::Concentration(a) => cmd_records(f, "concentration", a),
        Command::BorelCantelli(a) => cmd_borel_cantelli(f, a),
        Command::PaleyScan(a) => cmd_paley_scan(f, a),
        Command::CharacterBaseline(a) => cmd_records(f, "character-baseline", a),
        Command::Fourier(a) => cmd_fourier(f, a),
        Command::Independence(a) => cmd_independence(f, a),
        Command::SecondMoment(a) => cmd_second_moment(f, a),
    }
}

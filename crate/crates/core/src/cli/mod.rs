//! Command-line front end.
//!
//! Data goes to standard output, diagnostics and the resolved configuration
//! to standard error. Exit codes: 0 success, 1 usage, 2 config or infeasible
//! input, 3 numeric or metric failure, 4 I/O.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bfa::run_bfa;
use crate::engines::EngineKind;
use crate::error::{Error, Result};
use crate::experiment::persist::{self, write_atomic};
use crate::experiment::{self, compare, ExperimentConfig, FrontierReport, ReportSummary, SolutionRecord};
use crate::metrics::{self, PointSet};
use crate::problem::{aggregate, evaluate, DecisionVector, WeightVector};

use self::config::ResolvedConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "nbfa",
    version,
    about = "Bacteria foraging optimization of the resin-bonded sand mould model with pluggable stochastic engines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the four objectives at one decision vector.
    Evaluate(EvaluateArgs),
    /// One optimizer run for a single engine and weight vector.
    Run(RunArgs),
    /// Best-of-R runs over a weight set for several engines, with frontier reports.
    Sweep(SweepArgs),
    /// Hypervolume of a frontier CSV.
    Hvi(HviArgs),
    /// Average explorative rate of a trace CSV.
    Aer(AerArgs),
    /// Print a weight lattice as CSV.
    Weights(WeightsArgs),
    /// Rank engines from one or more sweep summaries.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Resin percentage, in [1.5, 2.5] [default: none, required]
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    /// Hardener percentage, in [30, 50] [default: none, required]
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    /// Number of strokes, in [3, 5] [default: none, required]
    #[arg(long, allow_hyphen_values = true)]
    c: f64,
    /// Curing time in minutes, in [60, 100] [default: none, required]
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    /// Also print the aggregate F for weights w1,w2,w3,w4 [default: none]
    #[arg(long, value_name = "W1,W2,W3,W4")]
    weights: Option<String>,
}

/// Optimizer parameters; each overrides the config file.
#[derive(Debug, Args)]
struct BfaFlags {
    /// Config file of `key = value` lines [default: none]
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Total chemotactic generations [default: 200]
    #[arg(long)]
    nt: Option<usize>,
    /// Population size [default: 25]
    #[arg(long)]
    pop: Option<usize>,
    /// Swim moves allowed after each tumble [default: 5]
    #[arg(long)]
    ns: Option<usize>,
    /// Generations between reproductions [default: 10]
    #[arg(long)]
    nc: Option<usize>,
    /// Reproductions between elimination-dispersal events [default: 5]
    #[arg(long)]
    nr: Option<usize>,
    /// Elimination-dispersal events per cycle [default: 5]
    #[arg(long)]
    ned: Option<usize>,
    /// Chemotactic step length in normalized units [default: 0.05]
    #[arg(long)]
    step: Option<f64>,
    /// Elimination-dispersal probability [default: 0.25]
    #[arg(long)]
    ped: Option<f64>,
    /// Disable the cell-to-cell swarming term [default: enabled]
    #[arg(long)]
    no_swarming: bool,
    /// Repellent signal width [default: 10]
    #[arg(long)]
    w_rep: Option<f64>,
    /// Attractant signal width [default: 0.2]
    #[arg(long)]
    w_att: Option<f64>,
    /// Repellent signal height [default: 0.1]
    #[arg(long)]
    h_rep: Option<f64>,
    /// Attractant signal height [default: 0.1]
    #[arg(long)]
    h_att: Option<f64>,
    /// Engine parameter as key=value; keys mu, sigma, lambda, k, alpha, beta, psi0, r0, dr, warmup
    /// [defaults: mu=0 sigma=1 lambda=1 k=1 alpha=2 beta=1 psi0=0.3 r0=3.9 dr=0.01 warmup=10]
    #[arg(long = "engine-param", value_name = "KEY=VALUE")]
    engine_param: Vec<String>,
    /// Explorative-rate threshold L [default: 0.01]
    #[arg(long)]
    threshold: Option<f64>,
    /// Master random seed (required here or in the config file) [default: none]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Stochastic engine: gaussian, weibull, gamma or chaotic [default: the config file's single engine]
    #[arg(long)]
    engine: Option<String>,
    /// Weight vector w1,w2,w3,w4 [default: none, required]
    #[arg(long, value_name = "W1,W2,W3,W4")]
    weights: String,
    /// Directory for record.csv and trace.csv [default: none]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(flatten)]
    bfa: BfaFlags,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated engines [default: gaussian,weibull,gamma,chaotic]
    #[arg(long)]
    engines: Option<String>,
    /// CSV weight list with header w1,w2,w3,w4 [default: the lattice below]
    #[arg(long, value_name = "PATH")]
    weights_file: Option<PathBuf>,
    /// Lattice step for generated weights [default: 0.1]
    #[arg(long)]
    weight_step: Option<f64>,
    /// Smallest weight component for generated weights [default: 0.1]
    #[arg(long)]
    weight_min: Option<f64>,
    /// Independent runs per weight (best of R) [default: 10]
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads [default: number of available processors]
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for frontier, trace and summary files [default: none]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write gnuplot data and script under DIR/plot [default: off]
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    bfa: BfaFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HviMethod {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
struct HviArgs {
    /// Frontier CSV (engine,w1,...,F,aer) [default: none, required]
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Reference point [default: 0,0,0,0]
    #[arg(long = "ref", value_name = "R1,R2,R3,R4", allow_hyphen_values = true)]
    reference: Option<String>,
    /// Exact dimension sweep or Monte Carlo estimate [default: exact]
    #[arg(long, value_enum, default_value_t = HviMethod::Exact, hide_default_value = true)]
    method: HviMethod,
    /// Monte Carlo samples [default: 1000000]
    #[arg(long)]
    samples: Option<usize>,
    /// Monte Carlo seed (required with --method mc) [default: none]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct AerArgs {
    /// Trace CSV (generation,best_F) [default: none, required]
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Threshold L [default: 0.01]
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct WeightsArgs {
    /// Lattice step; 1/step must be an integer [default: 0.1]
    #[arg(long)]
    step: Option<f64>,
    /// Smallest component [default: 0.1]
    #[arg(long)]
    min: Option<f64>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Summary JSON file(s) written by `sweep` [default: none, required]
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Directory for comparison.json (and plot files) [default: none]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write gnuplot data and script under DIR/plot [default: off]
    #[arg(long)]
    plot: bool,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs one command; returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Run(a) => cmd_run(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Hvi(a) => cmd_hvi(a, out),
        Command::Aer(a) => cmd_aer(a, out),
        Command::Weights(a) => cmd_weights(a, out),
        Command::Compare(a) => cmd_compare(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Lib(Error::io("<stdout>", e)))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_evaluate(a: EvaluateArgs, out: &mut dyn Write) -> CliResult<()> {
    let weights = a.weights.as_deref().map(WeightVector::parse).transpose()?;
    let f = evaluate(&DecisionVector::new(a.a, a.b, a.c, a.d))?;
    let v = f.values();
    let mut text = String::from("f1,f2,f3,f4");
    if weights.is_some() {
        text.push_str(",F");
    }
    let _ = write!(text, "\n{},{},{},{}", v[0], v[1], v[2], v[3]);
    if let Some(w) = weights {
        let _ = write!(text, ",{}", aggregate(&f, &w));
    }
    text.push('\n');
    emit(out, &text)
}

/// Loads the config file (if any), applies flag overrides and checks the seed.
fn resolve(flags: &BfaFlags) -> CliResult<ResolvedConfig> {
    let mut c = match &flags.config {
        Some(path) => ResolvedConfig::load(path)?,
        None => ResolvedConfig::default(),
    };
    let b = &mut c.bfa;
    macro_rules! override_with {
        ($($field:ident),*) => { $( if let Some(v) = flags.$field { b.$field = v; } )* };
    }
    override_with!(nt, pop, ns, nc, nr, ned, step, ped, w_rep, w_att, h_rep, h_att);
    if flags.no_swarming {
        b.swarming = false;
    }
    for pair in &flags.engine_param {
        c.engine_params.apply_pair(pair)?;
    }
    if let Some(t) = flags.threshold {
        c.threshold = t;
    }
    if let Some(seed) = flags.seed {
        c.seed = Some(seed);
    }
    if c.seed.is_none() {
        return Err(Failure::Usage(
            "an explicit seed is required (--seed or `seed = ...` in the config file)".into(),
        ));
    }
    Ok(c)
}

fn echo_config(err: &mut dyn Write, c: &ResolvedConfig) {
    let _ = writeln!(err, "# resolved configuration");
    let _ = err.write_all(c.to_text().as_bytes());
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut c = resolve(&a.bfa)?;
    let kind = match &a.engine {
        Some(name) => name.parse::<EngineKind>()?,
        None if c.engines.len() == 1 => c.engines[0],
        None => return Err(Failure::Usage("--engine is required".into())),
    };
    c.engines = vec![kind];
    c.validate()?;
    let weights = WeightVector::parse(&a.weights)?;
    echo_config(err, &c);
    let seed = c.seed.expect("seed checked in resolve");
    let result = run_bfa(weights, &c.bfa, c.engine(kind, seed))?;
    let aer = metrics::aer(&result.trace, c.threshold)?;
    let record = SolutionRecord {
        engine: kind,
        weights,
        run_id: 0,
        seed,
        decision: result.decision,
        objectives: result.objectives,
        fitness: result.fitness,
        aer,
    };
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        persist::write_frontier(&dir.join("record.csv"), &[record])?;
        persist::write_trace(&dir.join("trace.csv"), &result.trace)?;
    }
    let _ = writeln!(err, "evaluations = {}", result.evaluations);
    emit(out, &persist::frontier_csv(&[record]))
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut c = resolve(&a.bfa)?;
    if let Some(list) = &a.engines {
        c.set("engines", list)?;
    }
    if let Some(r) = a.runs {
        c.runs = r;
    }
    if let Some(s) = a.weight_step {
        c.weight_step = s;
    }
    if let Some(m) = a.weight_min {
        c.weight_min = m;
    }
    if let Some(p) = &a.weights_file {
        c.weights_file = Some(p.clone());
    }
    c.validate()?;
    if a.plot && a.out.is_none() {
        return Err(Failure::Usage("--plot needs --out".into()));
    }
    let weights = match &c.weights_file {
        Some(path) => persist::read_weights(path)?,
        None => experiment::generate_weights(c.weight_step, c.weight_min)?,
    };
    let jobs = match a.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    echo_config(err, &c);
    let seed = c.seed.expect("seed checked in resolve");
    let config = ExperimentConfig {
        engines: c.engines.iter().map(|&k| c.engine(k, seed)).collect(),
        weights: weights.clone(),
        runs_per_weight: c.runs,
        master_seed: seed,
        bfa: c.bfa,
        aer_threshold: c.threshold,
    };
    let _ = writeln!(
        err,
        "sweep: {} engines x {} weights x {} runs = {} runs on {} worker(s)",
        config.engines.len(),
        config.weights.len(),
        config.runs_per_weight,
        config.total_runs(),
        jobs
    );
    let reports = experiment::run_sweep(&config, jobs)?;
    let summaries: Vec<ReportSummary> = reports.iter().map(FrontierReport::summary).collect();
    if let Some(dir) = &a.out {
        write_sweep_outputs(dir, &c, &weights, &reports, &summaries, a.plot)?;
    }
    for s in &summaries {
        let _ = writeln!(
            err,
            "{:<8} hvi = {:e}  mean_aer = {:.4}  best F = {}",
            s.engine, s.hvi, s.mean_aer, s.best.fitness
        );
    }
    emit(out, &persist::summary_json(&summaries))
}

fn write_sweep_outputs(
    dir: &Path,
    c: &ResolvedConfig,
    weights: &[WeightVector],
    reports: &[FrontierReport],
    summaries: &[ReportSummary],
    plot: bool,
) -> Result<()> {
    create_dir(dir)?;
    let traces = dir.join("traces");
    create_dir(&traces)?;
    for r in reports {
        persist::write_frontier(&dir.join(format!("frontier_{}.csv", r.engine)), &r.solutions)?;
        for (i, t) in r.traces.iter().enumerate() {
            persist::write_trace(&traces.join(format!("{}_w{:03}.csv", r.engine, i)), t)?;
        }
    }
    persist::write_weights(&dir.join("weights.csv"), weights)?;
    write_atomic(&dir.join("config.txt"), c.to_text().as_bytes())?;
    persist::write_summary(&dir.join("summary.json"), summaries)?;
    if plot {
        let plot_dir = dir.join("plot");
        create_dir(&plot_dir)?;
        write_atomic(&plot_dir.join("frontier.dat"), frontier_plot_data(reports).as_bytes())?;
        write_atomic(&plot_dir.join("frontier.gp"), frontier_plot_script(reports).as_bytes())?;
        write_atomic(&plot_dir.join("metrics.dat"), metrics_plot_data(summaries).as_bytes())?;
        write_atomic(&plot_dir.join("metrics.gp"), METRICS_PLOT_SCRIPT.as_bytes())?;
    }
    Ok(())
}

/// One gnuplot data block per engine: f1 f2 f3 f4 F.
fn frontier_plot_data(reports: &[FrontierReport]) -> String {
    let mut s = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {}\n# f1 f2 f3 f4 F", r.engine);
        for rec in &r.solutions {
            let f = rec.objectives.values();
            let _ = writeln!(s, "{} {} {} {} {}", f[0], f[1], f[2], f[3], rec.fitness);
        }
    }
    s
}

fn frontier_plot_script(reports: &[FrontierReport]) -> String {
    let mut s = String::from(
        "# Frontier scatter per engine; render with `gnuplot frontier.gp`.\n\
         set terminal pngcairo size 1200,900\n\
         set output 'frontier.png'\n\
         set multiplot layout 2,2\n",
    );
    for (x, y) in [(1, 2), (1, 3), (2, 4), (3, 4)] {
        let _ = writeln!(s, "set xlabel 'f{x}'; set ylabel 'f{y}'");
        let series: Vec<String> = reports
            .iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    "'frontier.dat' index {i} using {x}:{y} with points title '{}'",
                    r.engine
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    }
    s.push_str("unset multiplot\n");
    s
}

fn metrics_plot_data(summaries: &[ReportSummary]) -> String {
    let mut s = String::from("# engine hvi mean_aer\n");
    for r in summaries {
        let _ = writeln!(s, "{} {} {}", r.engine, r.hvi, r.mean_aer);
    }
    s
}

const METRICS_PLOT_SCRIPT: &str = "# HVI and AER bars per engine; render with `gnuplot metrics.gp`.\n\
set terminal pngcairo size 1200,500\n\
set output 'metrics.png'\n\
set style data histograms\n\
set style fill solid 0.8\n\
set multiplot layout 1,2\n\
set title 'HVI'\n\
plot 'metrics.dat' using 2:xtic(1) notitle\n\
set title 'mean AER'\n\
plot 'metrics.dat' using 3:xtic(1) notitle\n\
unset multiplot\n";

fn parse_reference(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--ref: `{p}` is not a number")))
        })
        .collect()
}

fn cmd_hvi(a: HviArgs, out: &mut dyn Write) -> CliResult<()> {
    let reference = match &a.reference {
        Some(text) => parse_reference(text)?,
        None => experiment::HVI_REFERENCE.to_vec(),
    };
    if a.method == HviMethod::Mc && a.seed.is_none() {
        return Err(Failure::Usage("--method mc requires an explicit --seed".into()));
    }
    let records = persist::read_frontier(&a.input)?;
    let set = PointSet::new(4, records.iter().map(|r| r.objectives.0.to_vec()).collect())?;
    let front = metrics::pareto_filter(&set).len();
    let mut block = String::new();
    let value = match a.method {
        HviMethod::Exact => {
            if a.samples.is_some() || a.seed.is_some() {
                return Err(Failure::Usage("--samples and --seed only apply to --method mc".into()));
            }
            block.push_str("method=exact\n");
            metrics::hvi_exact(&set, &reference)?
        }
        HviMethod::Mc => {
            let seed = a.seed.expect("checked above");
            let samples = a.samples.unwrap_or(1_000_000);
            if samples == 0 {
                return Err(Failure::Usage("--samples must be at least 1".into()));
            }
            let _ = write!(block, "method=mc\nsamples={samples}\nseed={seed}\n");
            metrics::hvi_monte_carlo(&set, &reference, samples, seed)?
        }
    };
    let reference_text: Vec<String> = reference.iter().map(f64::to_string).collect();
    let text = format!(
        "{value}\nhvi={value}\n{block}reference={}\npoints={}\nnondominated={front}\n",
        reference_text.join(","),
        set.len()
    );
    emit(out, &text)
}

fn cmd_aer(a: AerArgs, out: &mut dyn Write) -> CliResult<()> {
    let threshold = a.threshold.unwrap_or(metrics::DEFAULT_AER_THRESHOLD);
    let trace = persist::read_trace(&a.input)?;
    let value = metrics::aer(&trace, threshold)?;
    let text = format!(
        "{value}\naer={value}\nthreshold={threshold}\ndeviations={}\n",
        trace.len().saturating_sub(1)
    );
    emit(out, &text)
}

fn cmd_weights(a: WeightsArgs, out: &mut dyn Write) -> CliResult<()> {
    let ws = experiment::generate_weights(
        a.step.unwrap_or(config::DEFAULT_WEIGHT_STEP),
        a.min.unwrap_or(config::DEFAULT_WEIGHT_MIN),
    )?;
    emit(out, &persist::weights_csv(&ws))
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    if a.plot && a.out.is_none() {
        return Err(Failure::Usage("--plot needs --out".into()));
    }
    let mut summaries = Vec::new();
    for path in &a.input {
        summaries.extend(persist::read_summary(path)?);
    }
    if let Some(first) = summaries.first() {
        if let Some(odd) = summaries.iter().find(|s| s.n_solutions != first.n_solutions) {
            let _ = writeln!(
                err,
                "warning: {} has {} solutions but {} has {}; weight sets may differ",
                odd.engine, odd.n_solutions, first.engine, first.n_solutions
            );
        }
    }
    let comparison = compare(&summaries);
    for r in &comparison.hvi_ranking {
        let gap = r.gap_vs_leader.map_or_else(|| "-".to_string(), |g| format!("{g:.3}%"));
        let tie = if r.tied_with_previous { " (tie)" } else { "" };
        let _ = writeln!(err, "hvi #{} {:<8} {:e} leader gap {gap}{tie}", r.rank, r.engine, r.hvi);
    }
    for r in &comparison.aer_ranking {
        let tie = if r.tied_with_previous { " (tie)" } else { "" };
        let _ = writeln!(err, "aer #{} {:<8} {:.4}{tie}", r.rank, r.engine, r.mean_aer);
    }
    let mut json = serde_json::to_string_pretty(&comparison).expect("comparison serializes");
    json.push('\n');
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_atomic(&dir.join("comparison.json"), json.as_bytes())?;
        if a.plot {
            let plot_dir = dir.join("plot");
            create_dir(&plot_dir)?;
            write_atomic(&plot_dir.join("metrics.dat"), metrics_plot_data(&summaries).as_bytes())?;
            write_atomic(&plot_dir.join("metrics.gp"), METRICS_PLOT_SCRIPT.as_bytes())?;
        }
    }
    emit(out, &json)
}

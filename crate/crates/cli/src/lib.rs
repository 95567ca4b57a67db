//! Command-line front end: scenario files in, CSV artifacts out.

pub mod scenario;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sigprice::correlator::{estimate_correlators, McSettings};
use sigprice::io;
use sigprice::parallel::with_threads;
use sigprice::pricing::{convergence_report, price_direct_mc, price_via_correlators};
use sigprice::signature::{lift, LiftKind};
use sigprice::stochastic::Seed;

pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<sigprice::Error> for CliError {
    fn from(e: sigprice::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sigprice", version, about = "Signature-correlator Monte Carlo pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write sample paths of the scenario's process as CSV
    Simulate(RunArgs),
    /// Lift a path CSV to its truncated signature
    Sig(SigArgs),
    /// Estimate the scenario's correlator requests
    Correlators(RunArgs),
    /// Price the scenario's payoff by correlator expansion and direct MC
    Price(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    /// Overrides the scenario seed
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Overrides the path count (for `simulate`, the number of files)
    #[arg(long, value_name = "N")]
    pub paths: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for one per core
    #[arg(long, value_name = "N", env = "SIGPRICE_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SigArgs {
    #[arg(long, value_name = "FILE")]
    pub path: PathBuf,
    #[arg(long, default_value = "stratonovich")]
    pub lift: LiftKind,
    #[arg(long)]
    pub depth: usize,
    /// Prepend time as an extra first component
    #[arg(long)]
    pub time_enhance: bool,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => with_scenario(&a, cmd_simulate),
        Command::Sig(a) => cmd_sig(&a),
        Command::Correlators(a) => with_scenario(&a, cmd_correlators),
        Command::Price(a) => with_scenario(&a, cmd_price),
    }
}

struct Job {
    scenario: Scenario,
    settings: McSettings,
    out_dir: PathBuf,
    path_override: Option<usize>,
}

fn with_scenario(args: &RunArgs, f: fn(&Job) -> Result<(), CliError>) -> Result<(), CliError> {
    let scenario = Scenario::load(&args.scenario)?;
    let mut settings = McSettings::new(scenario.grid, scenario.n_paths, Seed(args.seed.unwrap_or(scenario.seed)));
    settings.time_enhance = scenario.time_enhance;
    if let Some(n) = args.paths {
        settings.n_paths = n;
    }
    let out_dir = args.out.clone().unwrap_or_else(|| scenario.outputs.dir.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let job = Job { scenario, settings, out_dir, path_override: args.paths };
    with_threads(args.threads, || f(&job))?
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(job: &Job) -> Result<(), CliError> {
    let s = &job.scenario;
    let count = job.path_override.or(s.sample_paths).unwrap_or(1);
    let sim = s.process.simulator(s.grid)?;
    for k in 0..count {
        let path = sim.sample(job.settings.seed, k as u64);
        let file = job.out_dir.join(format!("{}_{k:05}.csv", s.outputs.path_prefix));
        io::write_path_csv(&path, create(&file)?)?;
    }
    println!("wrote {count} path(s) of {} steps to {}", s.grid.steps, job.out_dir.display());
    Ok(())
}

fn cmd_sig(args: &SigArgs) -> Result<(), CliError> {
    let file = File::open(&args.path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.path.display())))?;
    let mut path =
        io::read_path_csv(file).map_err(|e| CliError::Input(format!("{}: {e}", args.path.display())))?;
    if args.time_enhance {
        path = path.time_enhance();
    }
    let sig = lift(&path, args.depth, args.lift)?;
    match &args.out {
        Some(out) => io::write_signature_csv(&sig, create(out)?)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            io::write_signature_csv(&sig, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_correlators(job: &Job) -> Result<(), CliError> {
    let s = &job.scenario;
    let requests = s.correlator_requests()?;
    if requests.is_empty() {
        return Err(CliError::Input("scenario has no correlator requests".into()));
    }
    let route = s.correlators.as_ref().map(|c| c.route).unwrap_or_default();
    let reqs: Vec<_> = requests.iter().map(|(_, r)| r.clone()).collect();
    let est = estimate_correlators(&s.process, &job.settings, &reqs, route)?;
    let rows: Vec<_> = requests.into_iter().map(|(id, _)| id).zip(est).collect();
    let file = job.out_dir.join(&s.outputs.correlators);
    io::write_correlators_csv(&rows, create(&file)?)?;
    for (id, e) in &rows {
        println!("{id}: {} ± {} ({} paths)", e.value, e.std_error, e.n_paths);
    }
    Ok(())
}

fn cmd_price(job: &Job) -> Result<(), CliError> {
    let s = &job.scenario;
    let Some(payoff) = &s.payoff else {
        return Err(CliError::Input("scenario has no payoff".into()));
    };
    let expansion = price_via_correlators(payoff, &s.process, &job.settings, s.lift)?;
    let direct = price_direct_mc(payoff, &s.process, &job.settings, s.lift)?;
    io::write_price_csv(&[expansion.clone(), direct.clone()], create(&job.out_dir.join(&s.outputs.price))?)?;
    if !s.convergence_orders.is_empty() {
        let rows =
            convergence_report(payoff, &s.process, &job.settings, s.lift, &s.convergence_orders, s.bound.as_ref())?;
        io::write_convergence_csv(&rows, create(&job.out_dir.join(&s.outputs.convergence))?)?;
    }
    for w in &expansion.warnings {
        eprintln!("warning: {w}");
    }
    let tail = expansion.tail_bound.map_or_else(|| "n/a".into(), |t| format!("{t:.6}"));
    println!(
        "price {:.6} ± {:.6} (correlator expansion, {} terms, tail ≤ {tail}); direct MC {:.6} ± {:.6}; {} paths",
        expansion.price, expansion.std_error, expansion.terms, direct.price, direct.std_error, direct.n_paths
    );
    Ok(())
}

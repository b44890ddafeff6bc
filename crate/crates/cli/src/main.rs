use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hammersley::harness::output::write_result;
use hammersley::harness::{run, Experiment, ExperimentConfig, ExperimentResult, Format, VerdictKind};

const CONFIG_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hammersley",
    version,
    about = "Monte Carlo experiments for discrete Hammersley last-passage percolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance of G along the characteristic direction and its exponent.
    VarianceScan(Common),
    /// Variance identity with both A_N estimators.
    Identity(Common),
    /// Exact and Monte Carlo stationarity checks.
    Burke(Common),
    /// Gaussian fluctuations off the characteristic direction.
    Clt(Common),
    /// Concentration of the bulk passage time in a flat direction.
    FlatEdge(Common),
    /// Tails and scale of the exit point.
    ExitTails(Common),
    /// Transversal fluctuations of the down-most maximal path.
    PathFluct(Common),
    /// Per-sample coupling and ordering invariants.
    Coupling(Common),
    /// Law of large numbers for both models.
    ShapeLln(Common),
    /// Fast algorithms against exhaustive enumeration.
    OracleSelftest(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    b_grid: Option<Vec<f64>>,
    /// Slope y/x of the flat-edge direction.
    #[arg(long)]
    flat_slope: Option<f64>,
    /// Use m = n = N instead of the characteristic endpoint.
    #[arg(long)]
    square: bool,
    /// 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Record wall time in the result metadata.
    #[arg(long)]
    timing: bool,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::VarianceScan(c) => (Experiment::VarianceScan, c),
            Command::Identity(c) => (Experiment::Identity, c),
            Command::Burke(c) => (Experiment::Burke, c),
            Command::Clt(c) => (Experiment::Clt, c),
            Command::FlatEdge(c) => (Experiment::FlatEdge, c),
            Command::ExitTails(c) => (Experiment::ExitTails, c),
            Command::PathFluct(c) => (Experiment::PathFluct, c),
            Command::Coupling(c) => (Experiment::Coupling, c),
            Command::ShapeLln(c) => (Experiment::ShapeLln, c),
            Command::OracleSelftest(c) => (Experiment::OracleSelftest, c),
        }
    }
}

fn config(experiment: Experiment, a: Common) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(experiment);
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = a.$field { cfg.$field = v; })* };
    }
    set!(p, u, seed, samples, n_grid, c, alpha, tau, r_grid, delta_grid, b_grid, flat_slope);
    if a.square {
        cfg.characteristic = false;
    }
    cfg.workers = a.workers;
    cfg.out = a.out;
    cfg.format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    cfg.timing = a.timing;
    cfg
}

fn emit(result: &ExperimentResult, cfg: &ExperimentConfig) -> io::Result<()> {
    let write = |w: &mut dyn Write| write_result(result, cfg.format, w).map_err(|e| io::Error::other(e.to_string()));
    match &cfg.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write(&mut f)?;
            f.flush()
        }
        None => write(&mut io::stdout().lock()),
    }
}

fn report(result: &ExperimentResult) {
    for v in &result.verdicts {
        let tag = match (v.kind, v.passed) {
            (VerdictKind::Report, _) => "INFO",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        eprintln!("{tag} {} = {} {}", v.name, v.statistic, v.threshold);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, args) = cli.command.split();
    let cfg = config(experiment, args);
    let result = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Err(e) = emit(&result, &cfg) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    report(&result);
    ExitCode::from(result.exit_code() as u8)
}

//! Command-line front end: `fit`, `simulate` and `evaluate`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::hyper::Hyperparams;
use crate::icl::icl_exact;
use crate::ingest::{self, BinningSpec, Network, NodeSets};
use crate::report::{
    read_assignments, write_assignments, write_time_clusters, RunConfig, RunReport,
};
use crate::search::{multi_restart, SearchConfig};
use crate::simulate::{partition_ari, sample, GenSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Failure of a command, carrying its exit code class.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("input error: {0}")]
    Input(#[source] Error),
    #[error("numerical failure: {0}")]
    Numerical(#[source] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => CliError::Numerical(e),
            other => CliError::Input(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dynlbm",
    version,
    about = "Co-cluster dynamic bipartite networks by greedy exact-ICL search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit labels and cluster counts to a network.
    Fit(FitArgs),
    /// Sample a network from a generator spec.
    Simulate(SimulateArgs),
    /// Score fitted labels against a truth sidecar.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    /// timestamp<TAB>id<TAB>id contact records
    Tsv,
    /// id,id,interval,count quadruples
    Csv,
    /// tensor dump sidecar (.json)
    Dump,
}

impl FileFormat {
    fn name(self) -> &'static str {
        match self {
            FileFormat::Tsv => "tsv",
            FileFormat::Csv => "csv",
            FileFormat::Dump => "dump",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Gamma shape of the block-rate prior
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Gamma rate of the block-rate prior
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Dirichlet concentration for row labels
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Dirichlet concentration for column labels
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Dirichlet concentration for time labels
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Interval width (defaults to the dump's value, else 1)
    #[arg(long)]
    pub interval_width: Option<f64>,
}

impl PriorArgs {
    fn hyper(&self, default_width: f64) -> Hyperparams {
        Hyperparams {
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            delta: self.delta,
            gamma: self.gamma,
            delta_t: self.interval_width.unwrap_or(default_width),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Input file
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    pub format: FileFormat,
    /// Rows and columns are the same population (contact data)
    #[arg(long)]
    pub unipartite: bool,
    /// Bin width in seconds (tsv)
    #[arg(long)]
    pub bin_width: Option<i64>,
    /// Start of the horizon in seconds (tsv)
    #[arg(long)]
    pub t_start: Option<i64>,
    /// End of the horizon in seconds, exclusive (tsv)
    #[arg(long)]
    pub t_end: Option<i64>,
    /// Seconds represented by one raw record (tsv)
    #[arg(long, default_value_t = BinningSpec::DEFAULT_RECORD_DURATION)]
    pub record_duration: i64,
    /// Number of intervals (csv; default: largest index + 1)
    #[arg(long)]
    pub intervals: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Initial number of row clusters [default: min(rows, 10)]
    #[arg(long)]
    pub init_k: Option<usize>,
    /// Initial number of column clusters [default: min(columns, 10)]
    #[arg(long)]
    pub init_g: Option<usize>,
    /// Initial number of time clusters [default: min(intervals, 10)]
    #[arg(long)]
    pub init_d: Option<usize>,
    /// Fix the number of row clusters
    #[arg(long)]
    pub fix_k: Option<usize>,
    /// Fix the number of column clusters
    #[arg(long)]
    pub fix_g: Option<usize>,
    /// Fix the number of time clusters
    #[arg(long)]
    pub fix_d: Option<usize>,
    /// Never open new clusters during sweeps
    #[arg(long)]
    pub no_new_clusters: bool,
    /// Independent random restarts; the best ICL wins
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Upper bound on sweep rounds per restart
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
    /// Seed of restart 0; restart r uses seed + r
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Generator spec (JSON)
    #[arg(long)]
    pub spec: PathBuf,
    /// Output CSV path; the sidecar is written next to it
    #[arg(long)]
    pub out: PathBuf,
    /// Override the spec's seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Dump sidecar holding the true labels
    #[arg(long)]
    pub truth: PathBuf,
    /// Assignments CSV written by `fit`
    #[arg(long)]
    pub assignments: PathBuf,
    #[command(flatten)]
    pub prior: PriorArgs,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| {
        CliError::Input(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn load_network(args: &FitArgs) -> Result<(Network, Option<BinningSpec>), CliError> {
    let nodes = if args.unipartite {
        NodeSets::Unipartite
    } else {
        NodeSets::Bipartite
    };
    let width = args.prior.interval_width.unwrap_or(1.0);
    match args.format {
        FileFormat::Tsv => {
            let (Some(t_start), Some(t_end), Some(bin_width)) =
                (args.t_start, args.t_end, args.bin_width)
            else {
                return Err(CliError::Usage(
                    "--format tsv needs --t-start, --t-end and --bin-width".into(),
                ));
            };
            let spec = BinningSpec {
                t_start,
                t_end,
                bin_width,
                record_duration: args.record_duration,
            };
            spec.validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let log = ingest::parse_tsv(open(&args.input)?, nodes)?;
            let mut net = ingest::aggregate(&log, &spec)?;
            net.delta_t = width;
            Ok((net, Some(spec)))
        }
        FileFormat::Csv => {
            let table = ingest::parse_csv_quad(open(&args.input)?, nodes)?;
            Ok((table.into_network(args.intervals, width)?, None))
        }
        FileFormat::Dump => {
            let (mut net, _) = ingest::read_dump(&args.input)?;
            if let Some(w) = args.prior.interval_width {
                net.delta_t = w;
            }
            Ok((net, None))
        }
    }
}

fn search_config(args: &FitArgs, net: &Network) -> Result<SearchConfig, CliError> {
    let mut cfg = SearchConfig::for_tensor(&net.tensor);
    cfg.hyper = args.prior.hyper(net.delta_t);
    cfg.restarts = args.restarts;
    cfg.max_sweeps = args.max_sweeps;
    cfg.seed = args.seed;
    cfg.allow_new_clusters = !args.no_new_clusters;
    let axes = [
        ("k", args.init_k, args.fix_k, &mut cfg.init_k),
        ("g", args.init_g, args.fix_g, &mut cfg.init_g),
        ("d", args.init_d, args.fix_d, &mut cfg.init_d),
    ];
    for (i, (name, init, fix, slot)) in axes.into_iter().enumerate() {
        match (init, fix) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(format!(
                    "--init-{name} and --fix-{name} are exclusive"
                )))
            }
            (Some(n), None) => *slot = n,
            (None, Some(n)) => {
                *slot = n;
                cfg.fixed[i] = true;
            }
            (None, None) => {}
        }
    }
    cfg.validate(&net.tensor).map_err(|e| match e {
        Error::Config(m) => CliError::Usage(m),
        Error::InvalidHyperparameter { .. } => CliError::Usage(e.to_string()),
        other => CliError::from(other),
    })?;
    Ok(cfg)
}

/// `fit`: runs the restarts and writes `report.json`, `assignments.csv`
/// and `time_clusters.csv` into `--out`.
pub fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<RunReport, CliError> {
    let (net, binning) = load_network(args)?;
    let cfg = search_config(args, &net)?;
    let fit = multi_restart(&net.tensor, &cfg)?;
    if !fit.icl.total.is_finite() {
        return Err(CliError::Numerical(Error::Numerical(format!(
            "final ICL {}",
            fit.icl.total
        ))));
    }
    let config = RunConfig {
        input: args.input.display().to_string(),
        format: args.format.name().into(),
        nodes: if args.unipartite {
            NodeSets::Unipartite
        } else {
            NodeSets::Bipartite
        },
        binning,
        search: cfg,
    };
    let report = RunReport::build(&net, &fit, config)?;

    fs::create_dir_all(&args.out)?;
    let mut f = BufWriter::new(File::create(args.out.join("report.json"))?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    f.write_all(b"\n")?;
    f.flush()?;
    write_assignments(
        &net,
        &report.labels,
        BufWriter::new(File::create(args.out.join("assignments.csv"))?),
    )?;
    write_time_clusters(
        &report,
        BufWriter::new(File::create(args.out.join("time_clusters.csv"))?),
    )?;

    writeln!(
        stdout,
        "final ICL {:.6} (K={}, G={}, D={}, restart {})",
        report.icl.total,
        report.clusters.k,
        report.clusters.g,
        report.clusters.d,
        report.restart_index
    )?;
    Ok(report)
}

/// `simulate`: samples a tensor and writes it as a dump with true labels.
pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<PathBuf, CliError> {
    let mut spec: GenSpec = serde_json::from_reader(open(&args.spec)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (tensor, truth) = sample(&spec)?;
    let net = Network::anonymous(tensor, spec.delta_t);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let sidecar = ingest::write_dump(&net, Some(&truth), &args.out)?;
    let [n, m, u] = net.tensor.shape();
    writeln!(
        stdout,
        "sampled {n}x{m}x{u} tensor, total count {}, sidecar {}",
        net.tensor.total(),
        sidecar.display()
    )?;
    Ok(sidecar)
}

/// Scores of fitted labels against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub ari: [f64; 3],
    pub icl_truth: f64,
    pub icl_fitted: f64,
}

impl Evaluation {
    /// `icl_truth − icl_fitted`: positive when the fitted labels score
    /// below the truth, negative when the search found a better labelling.
    pub fn gap(&self) -> f64 {
        self.icl_truth - self.icl_fitted
    }
}

/// `evaluate`: ARI per axis and the ICL gap to the true labels.
pub fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<Evaluation, CliError> {
    let (net, truth) = ingest::read_dump(&args.truth)?;
    let truth = truth
        .ok_or_else(|| CliError::Input(Error::Config("sidecar carries no true labels".into())))?;
    let fitted = read_assignments(open(&args.assignments)?, net.tensor.shape())?;
    let h = args.prior.hyper(net.delta_t);
    h.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let eval = Evaluation {
        ari: partition_ari(&fitted, &truth)?,
        icl_truth: icl_exact(&net.tensor, &truth, &h)?.total,
        icl_fitted: icl_exact(&net.tensor, &fitted, &h)?.total,
    };
    writeln!(stdout, "ari_row {:.6}", eval.ari[0])?;
    writeln!(stdout, "ari_col {:.6}", eval.ari[1])?;
    writeln!(stdout, "ari_time {:.6}", eval.ari[2])?;
    writeln!(stdout, "icl_truth {:.6}", eval.icl_truth)?;
    writeln!(stdout, "icl_fitted {:.6}", eval.icl_fitted)?;
    writeln!(stdout, "icl_gap {:.6}", eval.gap())?;
    Ok(eval)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            // --help and --version
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a, stdout).map(drop),
        Command::Simulate(a) => cmd_simulate(a, stdout).map(drop),
        Command::Evaluate(a) => cmd_evaluate(a, stdout).map(drop),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "dynlbm: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = writeln!(stderr, "  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

//! Command-line front end.
//!
//! Every option can come from a flag or from a `key=value` config file
//! (`--config`); flags win, then the file, then the subcommand default. The
//! resolved configuration is logged to stderr before any work starts.
//!
//! Exit codes: 0 success, 2 input error, 3 refused budget, 4 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::baselines::{solve_bp_admm, solve_lasso_admm, BaselineConfig};
use crate::bench::{aggregate, run_sweep, write_records, ExperimentSpec, SolverKind, SUMMARY_HEADER};
use crate::certify::{certify_all_supports_with_budget, DEFAULT_SUPPORT_BUDGET};
use crate::error::Error;
use crate::io::{fmt_f64, read_matrix, read_vector, save_matrix, save_vector};
use crate::localize::{run_localization, write_localization_records, Grid, LocalizationSpec, LocalizeConfig};
use crate::model::{Alphabet, Problem};
use crate::solver::{solve_madmm, solve_madmm_r, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mcplasso", version, about = "Sparse finite-alphabet recovery with MCP-Lasso and ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a signal from a sensing matrix and measurements.
    Recover {
        /// Sensing matrix CSV (row-major, no header).
        matrix: PathBuf,
        /// Measurement vector CSV.
        y: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a seeded benchmark sweep and write per-trial records.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write per-point means to this path.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Record wall-clock runtimes (output is then not byte-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Evaluate the eigenvalue certificate on every support of size <= k.
    Certify {
        matrix: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Maximum number of supports to enumerate.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run the RSS multiple-target localization experiment.
    Localize {
        #[command(flatten)]
        common: CommonArgs,
        /// SNR of the training dictionary in dB.
        #[arg(long)]
        train_snr_db: Option<String>,
        /// Dump the sensor layout and dictionary of trial 0 for each m here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Sparsity; a list `a,b,c` or range `start:end:step` for bench.
    #[arg(long)]
    pub k: Option<String>,
    /// Measurements; a list or range for bench and localize.
    #[arg(long)]
    pub m: Option<String>,
    /// SNR in dB (`inf` for noise-free); a list for bench.
    #[arg(long)]
    pub snr_db: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub exact_tol: Option<String>,
    #[arg(long)]
    pub max_iters: Option<String>,
    #[arg(long)]
    pub max_reshuffles: Option<String>,
    /// Solver name, or a comma-separated list for bench and localize.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<String>,
    /// `key=value` file with defaults for any of the options above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, msg: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::Numerical { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses a flat `key=value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", i + 1))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

/// Flag, file and default lookup for one invocation.
struct Resolver {
    flags: BTreeMap<&'static str, Option<String>>,
    file: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    fn new(c: &CommonArgs) -> CliResult<Self> {
        let file = match &c.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
                parse_config_file(&text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        let flags = BTreeMap::from([
            ("lambda", c.lambda.clone()),
            ("alpha", c.alpha.clone()),
            ("d", c.d.clone()),
            ("q", c.q.clone()),
            ("n", c.n.clone()),
            ("k", c.k.clone()),
            ("m", c.m.clone()),
            ("snr_db", c.snr_db.clone()),
            ("trials", c.trials.clone()),
            ("seed", c.seed.clone()),
            ("tol", c.tol.clone()),
            ("exact_tol", c.exact_tol.clone()),
            ("max_iters", c.max_iters.clone()),
            ("max_reshuffles", c.max_reshuffles.clone()),
            ("solver", c.solver.clone()),
            ("out", c.out.as_ref().map(|p| p.display().to_string())),
            ("workers", c.workers.clone()),
        ]);
        Ok(Self { flags, file, resolved: Vec::new() })
    }

    fn raw(&mut self, key: &'static str, default: &str) -> String {
        let v = self
            .flags
            .get(key)
            .cloned()
            .flatten()
            .or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        self.resolved.push((key.to_string(), v.clone()));
        v
    }

    fn get<T: FromStr>(&mut self, key: &'static str, default: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key, default);
        v.parse::<T>().map_err(|e| CliError::input(format!("--{}: cannot parse {v:?}: {e}", key.replace('_', "-"))))
    }

    fn list<T: FromStr>(&mut self, key: &'static str, default: &str) -> CliResult<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key, default);
        parse_list(&v).map_err(|e| CliError::input(format!("--{}: {e}", key.replace('_', "-"))))
    }

    fn log(&self, command: &str) {
        let body: Vec<String> = self.resolved.iter().map(|(k, v)| format!("{k}={v}")).collect();
        eprintln!("[{command}] config: {}", body.join(" "));
    }
}

/// `a,b,c` or `start:end:step` (inclusive end).
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range {s:?} must be start:end:step"));
        }
        let p = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
        let (a, b, step) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
        if step <= 0 || b < a {
            return Err(format!("empty or invalid range {s:?}"));
        }
        return (a..=b)
            .step_by(step as usize)
            .map(|v| v.to_string().parse::<T>().map_err(|e| e.to_string()))
            .collect();
    }
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}

fn open_out(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

fn out_path(r: &mut Resolver, default: &str) -> Option<PathBuf> {
    let v = r.raw("out", default);
    if v.is_empty() || v == "-" {
        None
    } else {
        Some(PathBuf::from(v))
    }
}

fn alphabet(r: &mut Resolver) -> CliResult<Alphabet> {
    let d: f64 = r.get("d", "1")?;
    let q: u32 = r.get("q", "1")?;
    Ok(Alphabet::new(d, q)?)
}

fn cmd_recover(matrix: &Path, y: &Path, common: &CommonArgs) -> CliResult<()> {
    let mut r = Resolver::new(common)?;
    let solver: SolverKind = r.get("solver", "madmm_r")?;
    let alphabet = alphabet(&mut r)?;
    let defaults = SolverConfig::default();
    let config = SolverConfig {
        lambda: r.get("lambda", &defaults.lambda.to_string())?,
        alpha: r.get("alpha", &defaults.alpha.to_string())?,
        max_iters: r.get("max_iters", &defaults.max_iters.to_string())?,
        iterate_tol: r.get("tol", &defaults.iterate_tol.to_string())?,
        exact_tol: r.get("exact_tol", &defaults.exact_tol.to_string())?,
        max_reshuffles: r.get("max_reshuffles", &defaults.max_reshuffles.to_string())?,
        seed: r.get("seed", "0")?,
        ..defaults
    };
    let out = out_path(&mut r, "estimate.csv");
    r.log("recover");
    let a = read_matrix(matrix)?;
    let yv = read_vector(y)?;
    if a.nrows() != yv.len() {
        return Err(CliError::input(format!(
            "dimension mismatch: {} has {} rows but {} has {} values",
            matrix.display(),
            a.nrows(),
            y.display(),
            yv.len()
        )));
    }
    let problem = Problem::new(a, yv)?;
    let baseline = BaselineConfig {
        lambda: config.lambda,
        alpha: config.alpha,
        max_iters: config.max_iters,
        iterate_tol: config.iterate_tol,
        exact_tol: config.exact_tol,
        quantize_output: true,
    };
    let result = match solver {
        SolverKind::Madmm => solve_madmm(&problem, &alphabet, &config)?,
        SolverKind::MadmmR => solve_madmm_r(&problem, &alphabet, &config)?,
        SolverKind::Lasso => solve_lasso_admm(&problem, &alphabet, &baseline)?,
        SolverKind::Bp => solve_bp_admm(&problem, &alphabet, &baseline)?,
    };
    match &out {
        Some(p) => save_vector(p, &result.estimate)?,
        None => crate::io::write_vector(io::stdout().lock(), &result.estimate)?,
    }
    eprintln!(
        "solver={} iterations={} reshuffles={} converged={} exact={} stationarity_residual={} objective={}",
        solver,
        result.iterations,
        result.reshuffles,
        result.converged,
        result.exact,
        fmt_f64(result.stationarity_residual),
        fmt_f64(result.objective)
    );
    Ok(())
}

fn bench_spec(r: &mut Resolver, timing: bool) -> CliResult<ExperimentSpec> {
    let d = ExperimentSpec::default();
    Ok(ExperimentSpec {
        n: r.get("n", &d.n.to_string())?,
        k_values: r.list("k", "10")?,
        m_values: r.list("m", "20:60:5")?,
        alphabet: alphabet(r)?,
        snr_values: r.list("snr_db", "inf")?,
        trials: r.get("trials", &d.trials.to_string())?,
        seed: r.get("seed", "0")?,
        solvers: r.list("solver", "madmm,madmm_r,lasso")?,
        lambda: r.get("lambda", &d.lambda.to_string())?,
        alpha: r.get("alpha", &d.alpha.to_string())?,
        iterate_tol: r.get("tol", &d.iterate_tol.to_string())?,
        exact_tol: r.get("exact_tol", &d.exact_tol.to_string())?,
        max_iters: r.get("max_iters", &d.max_iters.to_string())?,
        max_reshuffles: r.get("max_reshuffles", &d.max_reshuffles.to_string())?,
        workers: r.get("workers", "1")?,
        record_runtime: timing,
    })
}

fn cmd_bench(common: &CommonArgs, summary: &Option<PathBuf>, timing: bool) -> CliResult<()> {
    let mut r = Resolver::new(common)?;
    let spec = bench_spec(&mut r, timing)?;
    let out = out_path(&mut r, "results.csv");
    r.log("bench");
    let records = run_sweep(&spec)?;
    let mut w = open_out(&out)?;
    write_records(&mut w, &records)?;
    w.flush()?;
    if let Some(p) = summary {
        let mut s = open_out(&Some(p.clone()))?;
        writeln!(s, "{SUMMARY_HEADER}")?;
        for row in aggregate(&records)? {
            writeln!(s, "{}", row.csv_line())?;
        }
        s.flush()?;
    }
    eprintln!("wrote {} records", records.len());
    Ok(())
}

fn cmd_certify(matrix: &Path, common: &CommonArgs, budget: Option<u64>) -> CliResult<()> {
    let mut r = Resolver::new(common)?;
    let lambda: f64 = r.get("lambda", "0.01")?;
    let alphabet = alphabet(&mut r)?;
    let k: usize = r.get("k", "1")?;
    let out = out_path(&mut r, "-");
    r.log("certify");
    let a = read_matrix(matrix)?;
    let report = certify_all_supports_with_budget(&a, lambda, &alphabet, k, budget.unwrap_or(DEFAULT_SUPPORT_BUDGET))?;
    let mut w = open_out(&out)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let worst: Vec<String> = report.worst_support.iter().map(|i| i.to_string()).collect();
    eprintln!(
        "pass={} worst_support={} worst_min_eig={} supports={}",
        report.pass,
        worst.join(";"),
        fmt_f64(report.worst_min_eig),
        report.supports.len()
    );
    Ok(())
}

fn localize_spec(r: &mut Resolver, train_snr: &Option<String>) -> CliResult<LocalizationSpec> {
    let c = LocalizeConfig::default();
    let d = LocalizationSpec::default();
    let train_snr_db = match train_snr {
        Some(s) => s.parse::<f64>().map_err(|e| CliError::input(format!("--train-snr-db: {e}")))?,
        None => r.file.get("train_snr_db").map(|s| s.parse::<f64>()).transpose().map_err(|e| CliError::input(format!("train_snr_db: {e}")))?.unwrap_or(d.train_snr_db),
    };
    r.resolved.push(("train_snr_db".into(), train_snr_db.to_string()));
    Ok(LocalizationSpec {
        m_values: r.list("m", "20,30,40,50")?,
        k: r.get("k", &d.k.to_string())?,
        trials: r.get("trials", &d.trials.to_string())?,
        seed: r.get("seed", "0")?,
        solvers: r.list("solver", "madmm,lasso")?,
        train_snr_db,
        meas_snr_db: r.get("snr_db", "inf")?,
        clean_measurements: r.get("clean_measurements", "false")?,
        rss: d.rss,
        config: LocalizeConfig {
            lambda: r.get("lambda", &c.lambda.to_string())?,
            alpha: r.get("alpha", &c.alpha.to_string())?,
            iterate_tol: r.get("tol", &c.iterate_tol.to_string())?,
            max_iters: r.get("max_iters", &c.max_iters.to_string())?,
            exact_tol: r.get("exact_tol", &c.exact_tol.to_string())?,
            max_reshuffles: r.get("max_reshuffles", &c.max_reshuffles.to_string())?,
            seed: 0,
        },
        workers: r.get("workers", "1")?,
    })
}

fn cmd_localize(common: &CommonArgs, train_snr: &Option<String>, dump: &Option<PathBuf>) -> CliResult<()> {
    let mut r = Resolver::new(common)?;
    let spec = localize_spec(&mut r, train_snr)?;
    let out = out_path(&mut r, "localize.csv");
    r.log("localize");
    if let Some(dir) = dump {
        fs::create_dir_all(dir)?;
        let grid = Grid::default();
        for &m in &spec.m_values {
            let inst = spec.instance(&grid, m, 0)?;
            let mut f = fs::File::create(dir.join(format!("layout_m{m}.csv")))?;
            inst.layout.write_csv(&mut f)?;
            save_matrix(&dir.join(format!("dictionary_m{m}.csv")), &inst.dictionary)?;
        }
    }
    let records = run_localization(&spec)?;
    let mut w = open_out(&out)?;
    write_localization_records(&mut w, &records)?;
    w.flush()?;
    eprintln!("wrote {} records", records.len());
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Recover { matrix, y, common } => cmd_recover(matrix, y, common),
        Command::Bench { common, summary, timing } => cmd_bench(common, summary, *timing),
        Command::Certify { matrix, common, budget } => cmd_certify(matrix, common, *budget),
        Command::Localize { common, train_snr_db, dump } => cmd_localize(common, train_snr_db, dump),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

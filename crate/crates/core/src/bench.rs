//! Seeded benchmark sweeps over `m`, `k` and SNR with CSV persistence.
//!
//! Each trial index owns a seed derived from the master seed, and every
//! random ingredient of the trial (matrix, signal, noise, restarts) is
//! derived from it under a fixed purpose tag. The same trial therefore sees
//! the same signal at every grid point, nested measurement rows as `m`
//! grows, and the same noise direction at every SNR.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Deserialize;

use crate::baselines::{solve_bp_admm, solve_lasso_admm, BaselineConfig};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{add_measurement_noise, gen_gaussian_matrix, gen_signal, Alphabet, Problem};
use crate::rng::{derive_seed, purpose};
use crate::solver::{solve_madmm, solve_madmm_r, RecoveryResult, SolverConfig};

/// Tolerance of [`exact_recovery`] used by the harness.
pub const EXACT_RECOVERY_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str =
    "solver,m,n,k,q,d,snr_db,seed,trial,rse,exact,iterations,reshuffles,runtime_s,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Madmm,
    MadmmR,
    Lasso,
    Bp,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Madmm => "madmm",
            SolverKind::MadmmR => "madmm_r",
            SolverKind::Lasso => "lasso",
            SolverKind::Bp => "bp",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "madmm" => Ok(SolverKind::Madmm),
            "madmm_r" | "madmm-r" => Ok(SolverKind::MadmmR),
            "lasso" => Ok(SolverKind::Lasso),
            "bp" => Ok(SolverKind::Bp),
            other => Err(Error::InvalidArgument(format!(
                "unknown solver {other:?} (expected madmm, madmm_r, lasso or bp)"
            ))),
        }
    }
}

/// A sweep: the cartesian product of `m_values × k_values × snr_values`,
/// each point run for `trials` trials with every listed solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub k_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub alphabet: Alphabet,
    /// `f64::INFINITY` means noise-free.
    pub snr_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<SolverKind>,
    pub lambda: f64,
    pub alpha: f64,
    pub iterate_tol: f64,
    pub exact_tol: f64,
    pub max_iters: usize,
    pub max_reshuffles: usize,
    pub workers: usize,
    /// Record wall-clock runtimes; off keeps output byte-reproducible.
    pub record_runtime: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            n: 100,
            k_values: vec![10],
            m_values: (20..=60).step_by(5).collect(),
            alphabet: Alphabet::ternary(1.0).expect("valid alphabet"),
            snr_values: vec![f64::INFINITY],
            trials: 100,
            seed: 0,
            solvers: vec![SolverKind::Madmm, SolverKind::MadmmR, SolverKind::Lasso],
            lambda: solver.lambda,
            alpha: solver.alpha,
            iterate_tol: solver.iterate_tol,
            exact_tol: solver.exact_tol,
            max_iters: solver.max_iters,
            max_reshuffles: solver.max_reshuffles,
            workers: 1,
            record_runtime: false,
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub m: usize,
    pub k: usize,
    pub snr_db: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.k_values.is_empty() || self.m_values.is_empty() || self.snr_values.is_empty() {
            return Err(Error::InvalidArgument("sweep ranges must be nonempty".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidArgument("no solvers listed".into()));
        }
        if self.n == 0 || self.m_values.contains(&0) {
            return Err(Error::InvalidArgument("n and m must be positive".into()));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k > self.n) {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {}", self.n)));
        }
        if self.snr_values.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidArgument("snr_db is NaN".into()));
        }
        let noisy = self.snr_values.iter().any(|s| s.is_finite());
        if noisy && self.solvers.contains(&SolverKind::Bp) {
            return Err(Error::InvalidArgument(
                "basis pursuit is only meaningful without measurement noise".into(),
            ));
        }
        self.solver_config(0).validate()?;
        self.baseline_config().validate()
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &m in &self.m_values {
            for &k in &self.k_values {
                for &snr_db in &self.snr_values {
                    out.push(GridPoint { m, k, snr_db });
                }
            }
        }
        out
    }

    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            max_iters: self.max_iters,
            iterate_tol: self.iterate_tol,
            exact_tol: self.exact_tol,
            max_reshuffles: self.max_reshuffles,
            seed,
            ..SolverConfig::default()
        }
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            max_iters: self.max_iters,
            iterate_tol: self.iterate_tol,
            exact_tol: self.exact_tol,
            quantize_output: true,
        }
    }

    /// Seed owned by a trial index.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, trial as u64)
    }

    /// The instance every solver sees at `point` in `trial`.
    pub fn instance(&self, point: &GridPoint, trial: usize) -> Result<Problem> {
        let ts = self.trial_seed(trial);
        let a = gen_gaussian_matrix(point.m, self.n, derive_seed(ts, purpose::MATRIX))?;
        let x = gen_signal(self.n, point.k, &self.alphabet, derive_seed(ts, purpose::SIGNAL))?;
        let clean = &a * x.values();
        if point.snr_db.is_infinite() || clean.norm() == 0.0 {
            return Problem::from_truth(a, x, None, None);
        }
        let (_, eps) = add_measurement_noise(&clean, point.snr_db, derive_seed(ts, purpose::NOISE))?;
        Problem::from_truth(a, x, None, Some(eps))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TrialRecord {
    pub solver: SolverKind,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub d: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub trial: usize,
    pub rse: f64,
    pub exact: u8,
    pub iterations: usize,
    pub reshuffles: usize,
    pub runtime_s: f64,
    pub status: String,
}

impl TrialRecord {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            self.m,
            self.n,
            self.k,
            self.q,
            fmt_f64(self.d),
            fmt_f64(self.snr_db),
            self.seed,
            self.trial,
            fmt_f64(self.rse),
            self.exact,
            self.iterations,
            self.reshuffles,
            fmt_f64(self.runtime_s),
            self.status
        )
    }
}

/// `‖x̃ − x̂‖² / ‖x̃‖²`.
pub fn rse(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::Dimension("estimate and truth differ in length".into()));
    }
    let den = truth.norm_squared();
    if den == 0.0 {
        return Err(Error::InvalidArgument("RSE undefined for a zero truth vector".into()));
    }
    Ok((truth - estimate).norm_squared() / den)
}

/// Componentwise `max |x̂ᵢ − x̃ᵢ| ≤ tol`.
pub fn exact_recovery(estimate: &DVector<f64>, truth: &DVector<f64>, tol: f64) -> bool {
    estimate.len() == truth.len() && (estimate - truth).amax() <= tol
}

fn run_solver(kind: SolverKind, problem: &Problem, spec: &ExperimentSpec, seed: u64) -> Result<RecoveryResult> {
    let alphabet = &spec.alphabet;
    match kind {
        SolverKind::Madmm => solve_madmm(problem, alphabet, &spec.solver_config(seed)),
        SolverKind::MadmmR => solve_madmm_r(problem, alphabet, &spec.solver_config(seed)),
        SolverKind::Lasso => solve_lasso_admm(problem, alphabet, &spec.baseline_config()),
        SolverKind::Bp => solve_bp_admm(problem, alphabet, &spec.baseline_config()),
    }
}

/// Runs every solver of `spec` on the instance of `(point, trial)`.
pub fn run_trial(spec: &ExperimentSpec, point: &GridPoint, trial: usize) -> Result<Vec<TrialRecord>> {
    let problem = spec.instance(point, trial)?;
    let truth = problem.truth.as_ref().expect("generated instances carry truth").values();
    let seed = spec.trial_seed(trial);
    let solver_seed = derive_seed(seed, purpose::SOLVER);
    let mut out = Vec::with_capacity(spec.solvers.len());
    for &kind in &spec.solvers {
        let started = Instant::now();
        let (estimate, iterations, reshuffles, status) = match run_solver(kind, &problem, spec, solver_seed) {
            Ok(r) => {
                let status = if r.converged { "ok" } else { "max_iters" };
                (r.estimate, r.iterations, r.reshuffles, status.to_string())
            }
            Err(Error::Numerical { iteration, last_finite, .. }) => (
                DVector::from_vec(last_finite),
                iteration,
                0,
                "numerical_failure".to_string(),
            ),
            Err(e) => return Err(e),
        };
        let runtime_s = if spec.record_runtime { started.elapsed().as_secs_f64() } else { 0.0 };
        let quantized = spec.alphabet.quantize_vec(&estimate);
        let rse = if truth.norm_squared() > 0.0 {
            rse(&estimate, truth)?
        } else {
            estimate.norm_squared()
        };
        out.push(TrialRecord {
            solver: kind,
            m: point.m,
            n: spec.n,
            k: point.k,
            q: spec.alphabet.q(),
            d: spec.alphabet.d(),
            snr_db: point.snr_db,
            seed,
            trial,
            rse,
            exact: exact_recovery(&quantized, truth, EXACT_RECOVERY_TOL) as u8,
            iterations,
            reshuffles,
            runtime_s,
            status,
        });
    }
    Ok(out)
}

/// Runs the whole sweep on `spec.workers` threads. Records come back in
/// grid order, then trial, then the listed solver order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let grid = spec.grid();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..spec.trials).map(move |t| (g, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let chunks: Vec<Result<Vec<TrialRecord>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| run_trial(spec, &grid[g], t))
            .collect()
    });
    let mut out = Vec::with_capacity(jobs.len() * spec.solvers.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn write_records<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidArgument(format!(
            "unexpected header {:?}",
            header.join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Per-(solver, grid point) means and standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: SolverKind,
    pub m: usize,
    pub k: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub mean_rse: f64,
    pub se_rse: f64,
    pub exact_rate: f64,
    pub mean_iterations: f64,
    pub se_iterations: f64,
    pub mean_reshuffles: f64,
    pub mean_runtime_s: f64,
    pub failures: usize,
}

pub const SUMMARY_HEADER: &str = "solver,m,k,snr_db,trials,mean_rse,se_rse,exact_rate,mean_iterations,se_iterations,mean_reshuffles,mean_runtime_s,failures";

impl SummaryRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            self.m,
            self.k,
            fmt_f64(self.snr_db),
            self.trials,
            fmt_f64(self.mean_rse),
            fmt_f64(self.se_rse),
            fmt_f64(self.exact_rate),
            fmt_f64(self.mean_iterations),
            fmt_f64(self.se_iterations),
            fmt_f64(self.mean_reshuffles),
            fmt_f64(self.mean_runtime_s),
            self.failures
        )
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups by `(solver, m, k, snr_db)` in first-appearance order.
pub fn aggregate(records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to aggregate".into()));
    }
    let mut keys: Vec<(SolverKind, usize, usize, u64)> = Vec::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for r in records {
        let key = (r.solver, r.m, r.k, r.snr_db.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let first = g[0];
            let rses: Vec<f64> = g.iter().map(|r| r.rse).collect();
            let iters: Vec<f64> = g.iter().map(|r| r.iterations as f64).collect();
            let (mean_rse, se_rse) = mean_se(&rses);
            let (mean_iterations, se_iterations) = mean_se(&iters);
            let n = g.len() as f64;
            SummaryRow {
                solver: first.solver,
                m: first.m,
                k: first.k,
                snr_db: first.snr_db,
                trials: g.len(),
                mean_rse,
                se_rse,
                exact_rate: g.iter().map(|r| r.exact as f64).sum::<f64>() / n,
                mean_iterations,
                se_iterations,
                mean_reshuffles: g.iter().map(|r| r.reshuffles as f64).sum::<f64>() / n,
                mean_runtime_s: g.iter().map(|r| r.runtime_s).sum::<f64>() / n,
                failures: g.iter().filter(|r| r.status == "numerical_failure").count(),
            }
        })
        .collect())
}

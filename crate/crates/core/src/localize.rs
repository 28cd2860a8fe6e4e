//! Multiple-target localization on a 10×10 grid of 2 m cells from RSS
//! measurements, posed as recovery of a binary occupancy vector.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::seq::index;
use rayon::prelude::*;

use crate::baselines::{solve_lasso_admm, BaselineConfig};
use crate::bench::SolverKind;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{add_measurement_noise, Alphabet, Problem};
use crate::rng::{derive_seed, purpose, rng_from_seed};
use crate::solver::{solve_madmm, solve_madmm_r, RecoveryResult, SolverConfig};

pub const AREA_SIDE_M: f64 = 20.0;
pub const CELLS_PER_SIDE: usize = 10;
pub const CELL_SIDE_M: f64 = 2.0;

pub type Point = (f64, f64);

/// Square grid of cells; cell `(r, c)` has index `r·10 + c` and center
/// `(2r + 1, 2c + 1)` meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    centers: Vec<Point>,
}

impl Default for Grid {
    fn default() -> Self {
        let mut centers = Vec::with_capacity(CELLS_PER_SIDE * CELLS_PER_SIDE);
        for r in 0..CELLS_PER_SIDE {
            for c in 0..CELLS_PER_SIDE {
                centers.push((
                    CELL_SIDE_M * r as f64 + CELL_SIDE_M / 2.0,
                    CELL_SIDE_M * c as f64 + CELL_SIDE_M / 2.0,
                ));
            }
        }
        Self { centers }
    }
}

impl Grid {
    pub fn n(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn center(&self, cell: usize) -> Point {
        self.centers[cell]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    pub sensors: Vec<Point>,
    pub seed: u64,
}

impl SensorLayout {
    /// `m` sensors uniform on the square area.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one sensor".into()));
        }
        let mut rng = rng_from_seed(seed);
        let sensors = (0..m)
            .map(|_| (rng.random_range(0.0..=AREA_SIDE_M), rng.random_range(0.0..=AREA_SIDE_M)))
            .collect();
        Ok(Self { sensors, seed })
    }

    pub fn m(&self) -> usize {
        self.sensors.len()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (x, y) in &self.sensors {
            writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*y))?;
        }
        Ok(())
    }
}

/// Two-slope log-distance path-loss model with a distance floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssParams {
    pub tx_power_dbm: f64,
    /// Loss at 1 m for the near segment.
    pub near_loss_db: f64,
    pub near_slope_db: f64,
    pub breakpoint_m: f64,
    /// Loss at the breakpoint for the far segment.
    pub far_loss_db: f64,
    pub far_slope_db: f64,
    pub min_distance_m: f64,
}

impl Default for RssParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 0.0,
            near_loss_db: 40.2,
            near_slope_db: 20.0,
            breakpoint_m: 8.0,
            far_loss_db: 58.5,
            far_slope_db: 33.0,
            min_distance_m: 0.1,
        }
    }
}

impl RssParams {
    pub fn path_loss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.min_distance_m);
        if d <= self.breakpoint_m {
            self.near_loss_db + self.near_slope_db * d.log10()
        } else {
            self.far_loss_db + self.far_slope_db * (d / self.breakpoint_m).log10()
        }
    }
}

/// Received power in dB at `distance_m`.
pub fn rss_model(distance_m: f64, params: &RssParams) -> f64 {
    params.tx_power_dbm - params.path_loss_db(distance_m)
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Noise-free `m × n` RSS dictionary.
pub fn clean_dictionary(grid: &Grid, layout: &SensorLayout, params: &RssParams) -> DMatrix<f64> {
    DMatrix::from_fn(layout.m(), grid.n(), |s, c| {
        rss_model(dist(layout.sensors[s], grid.center(c)), params)
    })
}

/// Training dictionary: the clean RSS matrix plus Gaussian noise at
/// `train_snr_db`, scaled on the whole matrix as one stacked vector.
pub fn build_dictionary(
    grid: &Grid,
    layout: &SensorLayout,
    params: &RssParams,
    train_snr_db: f64,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let clean = clean_dictionary(grid, layout, params);
    if train_snr_db.is_infinite() {
        return Ok(clean);
    }
    let stacked = DVector::from_column_slice(clean.as_slice());
    let (noisy, _) = add_measurement_noise(&stacked, train_snr_db, seed)?;
    Ok(DMatrix::from_column_slice(clean.nrows(), clean.ncols(), noisy.as_slice()))
}

/// Row whitening: `(MA, My)` with `M = (AAᵀ)^{-1/2}`.
pub fn orthogonalize(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if a.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "dictionary has {} rows but y has length {}",
            a.nrows(),
            y.len()
        )));
    }
    let eig = (a * a.transpose()).symmetric_eigen();
    let top = eig.eigenvalues.amax();
    if eig.eigenvalues.iter().any(|&l| !(l > 1e-13 * top)) {
        return Err(Error::InvalidProblem(
            "AAᵀ is singular: the dictionary lacks full row rank".into(),
        ));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let m = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    Ok((&m * a, &m * y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub iterate_tol: f64,
    pub max_iters: usize,
    pub exact_tol: f64,
    pub max_reshuffles: usize,
    pub seed: u64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            alpha: 1.0,
            iterate_tol: 1e-8,
            max_iters: 100_000,
            exact_tol: 1e-4,
            max_reshuffles: 50,
            seed: 0,
        }
    }
}

impl LocalizeConfig {
    fn solver(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            max_iters: self.max_iters,
            iterate_tol: self.iterate_tol,
            exact_tol: self.exact_tol,
            max_reshuffles: self.max_reshuffles,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }

    fn baseline(&self) -> BaselineConfig {
        BaselineConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            max_iters: self.max_iters,
            iterate_tol: self.iterate_tol,
            exact_tol: self.exact_tol,
            quantize_output: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub cells: Vec<usize>,
    pub positions: Vec<Point>,
    pub result: RecoveryResult,
}

/// Indices of the `k` largest-magnitude entries, ties to the lower index.
pub fn top_k(x: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    idx.truncate(k);
    idx
}

/// Recovers the occupancy vector with ternary machinery at `d = 1` (or
/// Lasso) and reports the `k` strongest cells.
pub fn localize_targets(
    grid: &Grid,
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    solver: SolverKind,
    config: &LocalizeConfig,
) -> Result<Localization> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if a.ncols() != grid.n() {
        return Err(Error::Dimension(format!(
            "dictionary has {} columns for {} cells",
            a.ncols(),
            grid.n()
        )));
    }
    let problem = Problem::new(a.clone(), y.clone())?;
    let alphabet = Alphabet::ternary(1.0)?;
    let result = match solver {
        SolverKind::Madmm => solve_madmm(&problem, &alphabet, &config.solver())?,
        SolverKind::MadmmR => solve_madmm_r(&problem, &alphabet, &config.solver())?,
        SolverKind::Lasso => solve_lasso_admm(&problem, &alphabet, &config.baseline())?,
        SolverKind::Bp => {
            return Err(Error::InvalidArgument("localization supports madmm, madmm_r and lasso".into()))
        }
    };
    let cells = top_k(&result.estimate, k);
    let positions = cells.iter().map(|&c| grid.center(c)).collect();
    Ok(Localization {
        cells,
        positions,
        result,
    })
}

/// Mean distance under the best one-to-one matching of the two lists.
pub fn localization_error(truth: &[Point], estimate: &[Point]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::Dimension(format!(
            "{} true positions but {} estimates",
            truth.len(),
            estimate.len()
        )));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let k = truth.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let total: f64 = p.iter().enumerate().map(|(i, &j)| dist(truth[i], estimate[j])).sum();
        best = best.min(total / k as f64);
    });
    Ok(best)
}

fn permute(p: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationSpec {
    pub m_values: Vec<usize>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub solvers: Vec<SolverKind>,
    pub train_snr_db: f64,
    /// Noise on the online measurements; infinite for none.
    pub meas_snr_db: f64,
    /// Take measurements from the noise-free path-loss model instead of the
    /// trained dictionary.
    pub clean_measurements: bool,
    pub rss: RssParams,
    pub config: LocalizeConfig,
    pub workers: usize,
}

impl Default for LocalizationSpec {
    fn default() -> Self {
        Self {
            m_values: vec![20, 30, 40, 50],
            k: 4,
            trials: 100,
            seed: 0,
            solvers: vec![SolverKind::Madmm, SolverKind::Lasso],
            train_snr_db: 25.0,
            meas_snr_db: f64::INFINITY,
            clean_measurements: false,
            rss: RssParams::default(),
            config: LocalizeConfig::default(),
            workers: 1,
        }
    }
}

pub const LOCALIZE_CSV_HEADER: &str = "m,seed,solver,loc_error_m,iterations,trial,status";

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRecord {
    pub m: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub loc_error_m: f64,
    pub iterations: usize,
    pub trial: usize,
    pub status: String,
}

/// One localization instance: dictionary, orthogonalized system and truth.
pub struct LocalizationInstance {
    pub layout: SensorLayout,
    pub dictionary: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub cells: Vec<usize>,
}

impl LocalizationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.m_values.is_empty() || self.solvers.is_empty() {
            return Err(Error::InvalidArgument("trials, m range and solvers must be nonempty".into()));
        }
        if self.k == 0 || self.k > CELLS_PER_SIDE * CELLS_PER_SIDE {
            return Err(Error::InvalidArgument(format!("k = {} out of range", self.k)));
        }
        if self.m_values.contains(&0) {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        if self.solvers.contains(&SolverKind::Bp) {
            return Err(Error::InvalidArgument("localization supports madmm, madmm_r and lasso".into()));
        }
        self.config.solver().validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, trial as u64)
    }

    pub fn instance(&self, grid: &Grid, m: usize, trial: usize) -> Result<LocalizationInstance> {
        let ts = self.trial_seed(trial);
        let layout = SensorLayout::random(m, derive_seed(ts, purpose::LAYOUT))?;
        let dictionary = build_dictionary(grid, &layout, &self.rss, self.train_snr_db, derive_seed(ts, purpose::DICTIONARY))?;
        let mut cells = index::sample(&mut rng_from_seed(derive_seed(ts, purpose::SIGNAL)), grid.n(), self.k).into_vec();
        cells.sort_unstable();
        let mut x = DVector::zeros(grid.n());
        for &c in &cells {
            x[c] = 1.0;
        }
        let clean = if self.clean_measurements {
            clean_dictionary(grid, &layout, &self.rss) * &x
        } else {
            &dictionary * &x
        };
        let (y, _) = add_measurement_noise(&clean, self.meas_snr_db, derive_seed(ts, purpose::NOISE))?;
        let (a, y) = orthogonalize(&dictionary, &y)?;
        Ok(LocalizationInstance {
            layout,
            dictionary,
            a,
            y,
            cells,
        })
    }

    fn run_trial(&self, grid: &Grid, m: usize, trial: usize) -> Result<Vec<LocalizationRecord>> {
        let inst = self.instance(grid, m, trial)?;
        let truth: Vec<Point> = inst.cells.iter().map(|&c| grid.center(c)).collect();
        let seed = self.trial_seed(trial);
        let config = LocalizeConfig {
            seed: derive_seed(seed, purpose::SOLVER),
            ..self.config
        };
        let mut out = Vec::new();
        for &solver in &self.solvers {
            let rec = match localize_targets(grid, &inst.a, &inst.y, self.k, solver, &config) {
                Ok(loc) => LocalizationRecord {
                    m,
                    seed,
                    solver,
                    loc_error_m: localization_error(&truth, &loc.positions)?,
                    iterations: loc.result.iterations,
                    trial,
                    status: if loc.result.converged { "ok" } else { "max_iters" }.into(),
                },
                Err(Error::Numerical { iteration, last_finite, .. }) => {
                    let est = top_k(&DVector::from_vec(last_finite), self.k);
                    let pos: Vec<Point> = est.iter().map(|&c| grid.center(c)).collect();
                    LocalizationRecord {
                        m,
                        seed,
                        solver,
                        loc_error_m: localization_error(&truth, &pos)?,
                        iterations: iteration,
                        trial,
                        status: "numerical_failure".into(),
                    }
                }
                Err(e) => return Err(e),
            };
            out.push(rec);
        }
        Ok(out)
    }
}

/// Runs every `(m, trial)` pair; records in `m`, trial, solver order.
pub fn run_localization(spec: &LocalizationSpec) -> Result<Vec<LocalizationRecord>> {
    spec.validate()?;
    let grid = Grid::default();
    let jobs: Vec<(usize, usize)> = spec
        .m_values
        .iter()
        .flat_map(|&m| (0..spec.trials).map(move |t| (m, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let chunks: Vec<Result<Vec<LocalizationRecord>>> =
        pool.install(|| jobs.par_iter().map(|&(m, t)| spec.run_trial(&grid, m, t)).collect());
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn write_localization_records<W: Write>(mut w: W, records: &[LocalizationRecord]) -> Result<()> {
    writeln!(w, "{LOCALIZE_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.m,
            r.seed,
            r.solver,
            fmt_f64(r.loc_error_m),
            r.iterations,
            r.trial,
            r.status
        )?;
    }
    Ok(())
}

//! MADMM: ADMM on the split form of MCP-Lasso.
//!
//! The problem `min ½‖y − Ax‖² − (λ/2)‖x‖² + λΣwᵢ|zᵢ|  s.t. x = z, x ∈ box`
//! is solved by alternating a box-constrained quadratic solve in `x`, a projected
//! soft-threshold in `z` and a dual ascent step on `μ`. For the ternary
//! alphabet the weights `w` and the box half-widths are the constant `d`.
//! For larger alphabets both are the per-component weights `β`, re-quantized
//! from `|z|` after every iteration, so the box can only shrink.
//!
//! [`solve_madmm_r`] adds restarts from a uniformly random `z` whenever the
//! estimate is not close enough to the alphabet lattice.

use std::cell::RefCell;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Problem};
use crate::penalty::{beta_weights, objective, ObjectiveParams};
use crate::rng::rng_from_seed;

/// Components with `|xᵢ|` below this count as zero in stationarity checks.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Augmented-Lagrangian penalty `α`.
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop when `‖xₜ − xₜ₋₁‖`, `‖zₜ − zₜ₋₁‖` and `‖xₜ − zₜ‖` all fall below this.
    pub iterate_tol: f64,
    /// Relative square distance to the alphabet lattice accepted as exact.
    pub exact_tol: f64,
    pub max_reshuffles: usize,
    pub seed: u64,
    /// Larger alphabets only: hold `β = qd` until the iterates first meet
    /// the stopping rule, then start re-quantizing. With `false`, `β` is
    /// re-quantized from the very first iteration.
    pub beta_warmup: bool,
    pub x_rule: XUpdateRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            alpha: 1.0,
            max_iters: 10_000,
            iterate_tol: 1e-12,
            exact_tol: 1e-4,
            max_reshuffles: 50,
            seed: 0,
            beta_warmup: true,
            x_rule: XUpdateRule::Exact,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.alpha.is_finite() && self.alpha > self.lambda) {
            return Err(Error::Config(format!(
                "alpha ({}) must exceed lambda ({}) for the x-subproblem to be strongly convex",
                self.alpha, self.lambda
            )));
        }
        if !(self.iterate_tol > 0.0 && self.exact_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Constants of the nonconvex ADMM convergence assumptions for a given
/// sensing matrix: the gradient Lipschitz constant `C = ‖AᵀA − λI‖₂` and the
/// strong-convexity modulus `γ = λ_min(AᵀA) + α − λ` of the x-subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceAssumption {
    pub lipschitz: f64,
    pub strong_convexity: f64,
    /// `αγ > 2C²` and `α ≥ C`.
    pub satisfied: bool,
}

pub fn convergence_assumption(a: &DMatrix<f64>, lambda: f64, alpha: f64) -> ConvergenceAssumption {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let eig = (gram - DMatrix::identity(n, n) * lambda).symmetric_eigenvalues();
    let lipschitz = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let strong_convexity = eig.min() + alpha;
    ConvergenceAssumption {
        lipschitz,
        strong_convexity,
        satisfied: alpha * strong_convexity > 2.0 * lipschitz * lipschitz && alpha >= lipschitz,
    }
}

/// Cholesky factor of `AᵀA + shift·I` together with `Aᵀy`, built once per solve.
///
/// Columns of the inverse are computed on demand and cached; the box-constrained
/// x-update only ever touches the columns of its active set.
pub struct SystemFactor {
    sys: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    aty: DVector<f64>,
    inv_cols: RefCell<Vec<Option<DVector<f64>>>>,
}

const MAX_ACTIVE_SET_ROUNDS: usize = 100;
const MAX_CD_SWEEPS: usize = 100_000;

impl SystemFactor {
    pub fn new(problem: &Problem, shift: f64) -> Result<Self> {
        let n = problem.n();
        let at = problem.a.transpose();
        let mut sys = &at * &problem.a;
        for i in 0..n {
            sys[(i, i)] += shift;
        }
        let chol = Cholesky::new(sys.clone()).ok_or_else(|| {
            Error::Config(format!(
                "AᵀA + {shift}·I is not positive definite; increase alpha"
            ))
        })?;
        Ok(Self {
            sys,
            chol,
            aty: at * &problem.y,
            inv_cols: RefCell::new(vec![None; n]),
        })
    }

    pub fn aty(&self) -> &DVector<f64> {
        &self.aty
    }

    /// Solves `(AᵀA + shift·I) v = rhs` in place.
    pub fn solve_mut(&self, rhs: &mut DVector<f64>) {
        self.chol.solve_mut(rhs);
    }

    fn with_inv_col<R>(&self, j: usize, f: impl FnOnce(&DVector<f64>) -> R) -> R {
        let mut cols = self.inv_cols.borrow_mut();
        let col = cols[j].get_or_insert_with(|| {
            let mut e = DVector::zeros(self.sys.nrows());
            e[j] = 1.0;
            self.chol.solve_mut(&mut e);
            e
        });
        f(col)
    }

    /// Minimizes `½vᵀQv − rhsᵀv` over `|vᵢ| ≤ boundᵢ`, `Q = AᵀA + shift·I`.
    ///
    /// Primal-dual active-set iterations starting from the clamped unconstrained
    /// minimizer; projected coordinate descent takes over if they cycle.
    pub fn solve_box_qp(&self, rhs: &DVector<f64>, bound: &DVector<f64>) -> DVector<f64> {
        let n = rhs.len();
        let mut w = rhs.clone();
        self.chol.solve_mut(&mut w);
        // +1 upper face, -1 lower face, 0 free
        let mut side: Vec<i8> = (0..n)
            .map(|i| {
                if bound[i] == 0.0 || w[i] > bound[i] {
                    1
                } else if w[i] < -bound[i] {
                    -1
                } else {
                    0
                }
            })
            .collect();
        for _ in 0..MAX_ACTIVE_SET_ROUNDS {
            let active: Vec<usize> = (0..n).filter(|&i| side[i] != 0).collect();
            if active.is_empty() {
                return w;
            }
            let b = active.len();
            let mut g = DMatrix::zeros(b, b);
            for (c, &j) in active.iter().enumerate() {
                self.with_inv_col(j, |col| {
                    for (r, &i) in active.iter().enumerate() {
                        g[(r, c)] = col[i];
                    }
                });
            }
            let gap = DVector::from_fn(b, |r, _| f64::from(side[active[r]]) * bound[active[r]] - w[active[r]]);
            let Some(gc) = Cholesky::new(g) else { break };
            let nu = gc.solve(&gap);
            let mut x = w.clone();
            for (c, &j) in active.iter().enumerate() {
                self.with_inv_col(j, |col| x.axpy(nu[c], col, 1.0));
            }
            let mut changed = false;
            let mut r = 0;
            for i in 0..n {
                let lam = if side[i] != 0 {
                    let v = -nu[r];
                    r += 1;
                    v
                } else {
                    0.0
                };
                let next = if bound[i] == 0.0 || lam + x[i] - bound[i] > 0.0 {
                    1
                } else if lam + x[i] + bound[i] < 0.0 {
                    -1
                } else {
                    0
                };
                changed |= next != side[i];
                side[i] = next;
            }
            if !changed {
                for i in 0..n {
                    x[i] = if side[i] != 0 {
                        f64::from(side[i]) * bound[i]
                    } else {
                        x[i].clamp(-bound[i], bound[i])
                    };
                }
                return x;
            }
        }
        self.box_qp_coordinate_descent(rhs, bound, &w)
    }

    fn box_qp_coordinate_descent(&self, rhs: &DVector<f64>, bound: &DVector<f64>, start: &DVector<f64>) -> DVector<f64> {
        let n = rhs.len();
        let mut x = DVector::from_fn(n, |i, _| start[i].clamp(-bound[i], bound[i]));
        let mut grad = &self.sys * &x - rhs;
        for _ in 0..MAX_CD_SWEEPS {
            let mut moved = 0.0f64;
            for i in 0..n {
                let qii = self.sys[(i, i)];
                let xi = (x[i] - grad[i] / qii).clamp(-bound[i], bound[i]);
                let delta = xi - x[i];
                if delta != 0.0 {
                    grad.axpy(delta, &self.sys.column(i), 1.0);
                    x[i] = xi;
                    moved = moved.max(delta.abs());
                }
            }
            if moved <= 1e-15 * (1.0 + x.amax()) {
                break;
            }
        }
        x
    }
}

/// How the x-subproblem handles the feasibility box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XUpdateRule {
    /// Exact minimizer of the augmented Lagrangian over the box.
    #[default]
    Exact,
    /// Clamp of the unconstrained minimizer. Cheaper, and identical to
    /// `Exact` when `AᵀA` is diagonal, but its fixed points need not be
    /// stationary.
    Projected,
}

/// Iterates of one MADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub mu: DVector<f64>,
    /// Per-component ℓ1 weights and box half-widths.
    pub beta: DVector<f64>,
    pub t: usize,
}

impl SolverState {
    /// `z₀ = μ₀ = 0`, `β₀ = qd`.
    pub fn initial(n: usize, alphabet: &Alphabet) -> Self {
        Self::from_z(DVector::zeros(n), alphabet)
    }

    /// Restart from a given `z` with `μ = 0` and full-width boxes.
    pub fn from_z(z: DVector<f64>, alphabet: &Alphabet) -> Self {
        let n = z.len();
        Self {
            x: z.clone(),
            z,
            mu: DVector::zeros(n),
            beta: DVector::from_element(n, alphabet.bound()),
            t: 0,
        }
    }
}

/// Componentwise soft threshold; entries with `|vᵢ| ≤ aᵢ` go to zero.
pub fn soft_threshold(v: &DVector<f64>, thresholds: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != thresholds.len() {
        return Err(Error::Dimension(format!(
            "{} values but {} thresholds",
            v.len(),
            thresholds.len()
        )));
    }
    if let Some(a) = thresholds.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative threshold {a}")));
    }
    Ok(v.zip_map(thresholds, shrink))
}

#[inline]
pub(crate) fn shrink(v: f64, a: f64) -> f64 {
    if v > a {
        v - a
    } else if v < -a {
        v + a
    } else {
        0.0
    }
}

/// Componentwise clamp to `[lower, upper]`.
pub fn project_box(
    v: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<DVector<f64>> {
    if v.len() != lower.len() || v.len() != upper.len() {
        return Err(Error::Dimension("box bounds and vector differ in length".into()));
    }
    for i in 0..v.len() {
        if lower[i] > upper[i] {
            return Err(Error::InvalidArgument(format!(
                "inverted bounds at {i}: [{}, {}]",
                lower[i], upper[i]
            )));
        }
    }
    Ok(DVector::from_fn(v.len(), |i, _| v[i].max(lower[i]).min(upper[i])))
}

/// `P_β([AᵀA + (α−λ)I]⁻¹(Aᵀy + αz − μ))` for the current state.
pub fn x_update(state: &SolverState, factor: &SystemFactor, alpha: f64) -> DVector<f64> {
    let mut rhs = factor.aty() + &state.z * alpha - &state.mu;
    factor.solve_mut(&mut rhs);
    clamp_symmetric(&mut rhs, &state.beta);
    rhs
}

/// `argmin_{|xᵢ| ≤ βᵢ} L(x, z, μ)`, solved exactly.
pub fn x_update_exact(state: &SolverState, factor: &SystemFactor, alpha: f64) -> DVector<f64> {
    let rhs = factor.aty() + &state.z * alpha - &state.mu;
    factor.solve_box_qp(&rhs, &state.beta)
}

/// `P_β(𝕊_{λβ/α}(xₜ + μ/α))`.
pub fn z_update(x_t: &DVector<f64>, state: &SolverState, lambda: f64, alpha: f64) -> DVector<f64> {
    DVector::from_fn(x_t.len(), |i, _| {
        let b = state.beta[i];
        shrink(x_t[i] + state.mu[i] / alpha, lambda * b / alpha).clamp(-b, b)
    })
}

/// Re-quantized weights: `dj` for `|zᵢ| ∈ (d(j−1), dj]`, zero for `zᵢ = 0`.
pub fn beta_update(z_t: &DVector<f64>, alphabet: &Alphabet) -> DVector<f64> {
    // z is already inside the current box, which lies inside the hull
    beta_weights(z_t, alphabet).expect("z iterate inside the alphabet hull")
}

/// `μ + α(xₜ − zₜ)`.
pub fn dual_update(mu: &DVector<f64>, x_t: &DVector<f64>, z_t: &DVector<f64>, alpha: f64) -> DVector<f64> {
    mu + (x_t - z_t) * alpha
}

fn clamp_symmetric(v: &mut DVector<f64>, bound: &DVector<f64>) {
    for (vi, &b) in v.iter_mut().zip(bound.iter()) {
        *vi = vi.clamp(-b, b);
    }
}

/// Augmented Lagrangian of the split problem at `(x, z, μ)` with weights `β`.
pub fn augmented_lagrangian(
    state: &SolverState,
    problem: &Problem,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let r = &problem.y - &problem.a * &state.x;
    let diff = &state.x - &state.z;
    let l1: f64 = state.z.iter().zip(state.beta.iter()).map(|(z, b)| b * z.abs()).sum();
    0.5 * r.norm_squared() - 0.5 * lambda * state.x.norm_squared()
        + lambda * l1
        + state.mu.dot(&diff)
        + 0.5 * alpha * diff.norm_squared()
}

/// Step-by-step MADMM driver over a single start.
pub struct Madmm<'a> {
    problem: &'a Problem,
    alphabet: Alphabet,
    config: SolverConfig,
    factor: SystemFactor,
    state: SolverState,
    last_step: f64,
    last_gap: f64,
    weights_frozen: bool,
}

impl<'a> Madmm<'a> {
    pub fn new(problem: &'a Problem, alphabet: Alphabet, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let factor = SystemFactor::new(problem, config.alpha - config.lambda)?;
        Ok(Self {
            problem,
            alphabet,
            config,
            factor,
            state: SolverState::initial(problem.n(), &alphabet),
            last_step: f64::INFINITY,
            last_gap: f64::INFINITY,
            weights_frozen: config.beta_warmup,
        })
    }

    /// Resets the iterates to start from `z` (and `μ = 0`, `β = qd`).
    pub fn restart_from(&mut self, z: DVector<f64>) {
        self.state = SolverState::from_z(z, &self.alphabet);
        self.last_step = f64::INFINITY;
        self.weights_frozen = self.config.beta_warmup;
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// Largest of the last x and z step lengths.
    pub fn last_step(&self) -> f64 {
        self.last_step
    }

    /// One x / z / β / μ cycle.
    pub fn step(&mut self) -> Result<&SolverState> {
        let (lambda, alpha) = (self.config.lambda, self.config.alpha);
        let x = match self.config.x_rule {
            XUpdateRule::Exact => x_update_exact(&self.state, &self.factor, alpha),
            XUpdateRule::Projected => x_update(&self.state, &self.factor, alpha),
        };
        let z = z_update(&x, &self.state, lambda, alpha);
        let t = self.state.t + 1;
        if x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                iteration: t,
                reason: "non-finite iterate".into(),
                last_finite: self.state.x.iter().copied().collect(),
            });
        }
        let mu = dual_update(&self.state.mu, &x, &z, alpha);
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                iteration: t,
                reason: "non-finite dual variable".into(),
                last_finite: x.iter().copied().collect(),
            });
        }
        self.last_step = (&x - &self.state.x).norm().max((&z - &self.state.z).norm());
        self.last_gap = (&x - &z).norm();
        if !self.alphabet.is_ternary() && !self.weights_frozen {
            self.state.beta = beta_update(&z, &self.alphabet);
        }
        self.state.x = x;
        self.state.z = z;
        self.state.mu = mu;
        self.state.t = t;
        Ok(&self.state)
    }

    /// Iterates until the step length and the gap `‖xₜ − zₜ‖` both drop below
    /// `iterate_tol` or the iteration budget runs out. Returns `(iterations, converged)`.
    pub fn run(&mut self) -> Result<(usize, bool)> {
        let start = self.state.t;
        while self.state.t - start < self.config.max_iters {
            self.step()?;
            if self.last_step < self.config.iterate_tol && self.last_gap < self.config.iterate_tol {
                if self.weights_frozen && !self.alphabet.is_ternary() {
                    self.weights_frozen = false;
                    self.state.beta = beta_update(&self.state.z, &self.alphabet);
                    self.last_step = f64::INFINITY;
                    continue;
                }
                return Ok((self.state.t - start, true));
            }
        }
        Ok((self.state.t - start, false))
    }
}

/// Output of a recovery solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub estimate: DVector<f64>,
    /// Total iterations across all restarts.
    pub iterations: usize,
    pub reshuffles: usize,
    pub converged: bool,
    /// Estimate within `exact_tol` of the alphabet lattice.
    pub exact: bool,
    pub stationarity_residual: f64,
    pub objective: f64,
    /// Largest x/z step at termination.
    pub final_step: f64,
    pub runtime_s: f64,
}

fn check_dims(problem: &Problem) -> Result<()> {
    if problem.a.nrows() != problem.y.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but y has length {}",
            problem.a.nrows(),
            problem.y.len()
        )));
    }
    Ok(())
}

struct RunOutcome {
    state: SolverState,
    converged: bool,
    final_step: f64,
    objective: f64,
    distance: f64,
}

fn finish_run(solver: &Madmm<'_>, converged: bool, params: &ObjectiveParams) -> Result<RunOutcome> {
    let state = solver.state().clone();
    let objective = objective(&state.x, solver.problem, params)?;
    let distance = exactness_distance(&state.x, &solver.alphabet);
    Ok(RunOutcome {
        state,
        converged,
        final_step: solver.last_step(),
        objective,
        distance,
    })
}

fn into_result(
    best: RunOutcome,
    problem: &Problem,
    alphabet: &Alphabet,
    config: &SolverConfig,
    iterations: usize,
    reshuffles: usize,
    started: Instant,
) -> RecoveryResult {
    let stationarity =
        weighted_stationarity_residual(&best.state.x, problem, config.lambda, &best.state.beta, alphabet);
    RecoveryResult {
        exact: best.distance < config.exact_tol,
        estimate: best.state.x,
        iterations,
        reshuffles,
        converged: best.converged,
        stationarity_residual: stationarity,
        objective: best.objective,
        final_step: best.final_step,
        runtime_s: started.elapsed().as_secs_f64(),
    }
}

/// MADMM from `z₀ = μ₀ = 0`. Ternary alphabets keep a fixed `[-d, d]` box;
/// larger alphabets re-quantize the weights every iteration.
pub fn solve_madmm(problem: &Problem, alphabet: &Alphabet, config: &SolverConfig) -> Result<RecoveryResult> {
    let started = Instant::now();
    check_dims(problem)?;
    let params = ObjectiveParams::new(config.lambda, *alphabet)?;
    let mut solver = Madmm::new(problem, *alphabet, *config)?;
    let (iters, converged) = solver.run()?;
    let outcome = finish_run(&solver, converged, &params)?;
    Ok(into_result(outcome, problem, alphabet, config, iters, 0, started))
}

/// MADMM with random restarts of `z` on the hull box until the estimate is
/// within `exact_tol` of the lattice or `max_reshuffles` restarts are spent.
/// Without an exact run, the lowest-objective run is returned.
pub fn solve_madmm_r(problem: &Problem, alphabet: &Alphabet, config: &SolverConfig) -> Result<RecoveryResult> {
    let started = Instant::now();
    check_dims(problem)?;
    let params = ObjectiveParams::new(config.lambda, *alphabet)?;
    let mut solver = Madmm::new(problem, *alphabet, *config)?;
    let mut rng = rng_from_seed(config.seed);
    let bound = alphabet.bound();

    let (mut total, converged) = solver.run()?;
    let mut best = finish_run(&solver, converged, &params)?;
    let mut reshuffles = 0;
    while best.distance >= config.exact_tol && reshuffles < config.max_reshuffles {
        reshuffles += 1;
        let z0 = DVector::from_fn(problem.n(), |_, _| rng.random_range(-bound..=bound));
        solver.restart_from(z0);
        let (iters, converged) = solver.run()?;
        total += iters;
        let run = finish_run(&solver, converged, &params)?;
        if run.distance < config.exact_tol || run.objective < best.objective {
            best = run;
        }
    }
    Ok(into_result(best, problem, alphabet, config, total, reshuffles, started))
}

/// `‖x − Q(x)‖² / max(‖Q(x)‖², d²)` with `Q` the nearest-symbol quantizer.
///
/// The `d²` floor only engages when `Q(x) = 0`, since any nonzero lattice
/// point has squared norm at least `d²`.
pub fn exactness_distance(x: &DVector<f64>, alphabet: &Alphabet) -> f64 {
    let q = alphabet.quantize_vec(x);
    let num = (x - &q).norm_squared();
    num / q.norm_squared().max(alphabet.d() * alphabet.d())
}

/// Stationarity violation of `x` for the ternary objective `F`.
///
/// With `μ := λx − Aᵀ(Ax − y)` a stationary point satisfies `|μᵢ| ≤ λd` where
/// `xᵢ = 0`, `μᵢ = λd·sign(xᵢ)` in the open box, and `μᵢ·sign(xᵢ) ≥ λd` on
/// the box faces `|xᵢ| = d`. Returns the largest violation.
pub fn stationarity_residual(x: &DVector<f64>, problem: &Problem, lambda: f64, alphabet: &Alphabet) -> f64 {
    let bound = DVector::from_element(x.len(), alphabet.bound());
    weighted_stationarity_residual(x, problem, lambda, &bound, alphabet)
}

/// Stationarity violation with per-component weights/boxes `β` (the final
/// MADMM weights for generic alphabets). For ternary alphabets `β` is
/// ignored and `d` is used.
pub fn weighted_stationarity_residual(
    x: &DVector<f64>,
    problem: &Problem,
    lambda: f64,
    beta: &DVector<f64>,
    alphabet: &Alphabet,
) -> f64 {
    let mu = x * lambda - problem.a.transpose() * (&problem.a * x - &problem.y);
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let w = if alphabet.is_ternary() { alphabet.d() } else { beta[i] };
        let xi = x[i];
        let v = if w == 0.0 {
            // pinned to zero by an empty box
            0.0
        } else if xi.abs() <= ZERO_TOL {
            (mu[i].abs() - lambda * w).max(0.0)
        } else if xi.abs() >= w - ZERO_TOL {
            (lambda * w - mu[i] * xi.signum()).max(0.0)
        } else {
            (mu[i] - lambda * w * xi.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

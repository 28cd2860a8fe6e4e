//! Convex comparison methods: Lasso and Basis Pursuit, both by ADMM, with an
//! optional final projection onto the alphabet lattice.

use std::time::Instant;

use nalgebra::{Cholesky, DVector, Dyn};

use crate::error::{Error, Result};
use crate::model::{Alphabet, Problem};
use crate::solver::{exactness_distance, shrink, RecoveryResult, SystemFactor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    /// ℓ1 weight (Lasso only).
    pub lambda: f64,
    pub alpha: f64,
    pub max_iters: usize,
    pub iterate_tol: f64,
    /// Threshold on the lattice distance reported in `RecoveryResult::exact`.
    pub exact_tol: f64,
    pub quantize_output: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            alpha: 1.0,
            max_iters: 10_000,
            iterate_tol: 1e-12,
            exact_tol: 1e-4,
            quantize_output: true,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.iterate_tol > 0.0 && self.exact_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("tolerances and max_iters must be positive".into()));
        }
        Ok(())
    }
}

fn non_finite(t: usize, x: &DVector<f64>) -> Error {
    Error::Numerical {
        iteration: t,
        reason: "non-finite iterate".into(),
        last_finite: x.iter().copied().collect(),
    }
}

/// KKT violation of `x` for `½‖y − Ax‖² + λ‖x‖₁`.
pub fn lasso_kkt_residual(x: &DVector<f64>, problem: &Problem, lambda: f64) -> f64 {
    let g = problem.a.transpose() * (&problem.y - &problem.a * x);
    x.iter()
        .zip(g.iter())
        .map(|(&xi, &gi)| {
            if xi == 0.0 {
                (gi.abs() - lambda).max(0.0)
            } else {
                (gi - lambda * xi.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn lasso_objective(x: &DVector<f64>, problem: &Problem, lambda: f64) -> f64 {
    0.5 * (&problem.y - &problem.a * x).norm_squared() + lambda * x.lp_norm(1)
}

struct Finished {
    x: DVector<f64>,
    iterations: usize,
    converged: bool,
    final_step: f64,
}

fn finalize(
    run: Finished,
    alphabet: &Alphabet,
    config: &BaselineConfig,
    objective: f64,
    residual: f64,
    started: Instant,
) -> RecoveryResult {
    let estimate = if config.quantize_output {
        alphabet.quantize_vec(&run.x)
    } else {
        run.x
    };
    RecoveryResult {
        exact: exactness_distance(&estimate, alphabet) < config.exact_tol,
        estimate,
        iterations: run.iterations,
        reshuffles: 0,
        converged: run.converged,
        stationarity_residual: residual,
        objective,
        final_step: run.final_step,
        runtime_s: started.elapsed().as_secs_f64(),
    }
}

/// Lasso by ADMM from `z₀ = μ₀ = 0`.
///
/// `objective` and `stationarity_residual` of the result refer to the
/// unquantized ADMM iterate.
pub fn solve_lasso_admm(problem: &Problem, alphabet: &Alphabet, config: &BaselineConfig) -> Result<RecoveryResult> {
    solve_lasso_admm_from(problem, alphabet, config, DVector::zeros(problem.n()))
}

/// Lasso by ADMM from a given `z₀` (with `μ₀ = 0`).
pub fn solve_lasso_admm_from(
    problem: &Problem,
    alphabet: &Alphabet,
    config: &BaselineConfig,
    z0: DVector<f64>,
) -> Result<RecoveryResult> {
    let started = Instant::now();
    config.validate()?;
    if z0.len() != problem.n() {
        return Err(Error::Dimension("initial z has the wrong length".into()));
    }
    let factor = SystemFactor::new(problem, config.alpha)?;
    let (alpha, thr) = (config.alpha, config.lambda / config.alpha);
    let mut x = z0.clone();
    let mut z = z0;
    let mut mu = DVector::zeros(problem.n());
    let mut run = Finished {
        x: x.clone(),
        iterations: 0,
        converged: false,
        final_step: f64::INFINITY,
    };
    for t in 1..=config.max_iters {
        let mut x_new = factor.aty() + &z * alpha - &mu;
        factor.solve_mut(&mut x_new);
        let z_new = DVector::from_fn(x_new.len(), |i, _| shrink(x_new[i] + mu[i] / alpha, thr));
        if x_new.iter().chain(z_new.iter()).any(|v| !v.is_finite()) {
            return Err(non_finite(t, &x));
        }
        mu += (&x_new - &z_new) * alpha;
        let step = (&x_new - &x).norm().max((&z_new - &z).norm());
        x = x_new;
        z = z_new;
        run.iterations = t;
        run.final_step = step;
        if step < config.iterate_tol && (&x - &z).norm() < config.iterate_tol {
            run.converged = true;
            break;
        }
    }
    // z carries the exact zeros of the soft threshold
    run.x = z;
    let objective = lasso_objective(&run.x, problem, config.lambda);
    let residual = lasso_kkt_residual(&run.x, problem, config.lambda);
    Ok(finalize(run, alphabet, config, objective, residual, started))
}

/// Basis Pursuit `min ‖x‖₁ s.t. Ax = y` by ADMM.
///
/// The x-step is the affine projection `v ↦ v − Aᵀ(AAᵀ)⁻¹(Av − y)`, so every
/// x iterate is feasible. `stationarity_residual` of the result reports the
/// feasibility `‖Ax − y‖₂` of the unquantized iterate.
pub fn solve_bp_admm(problem: &Problem, alphabet: &Alphabet, config: &BaselineConfig) -> Result<RecoveryResult> {
    solve_bp_admm_traced(problem, alphabet, config, |_, _| {})
}

/// [`solve_bp_admm`] calling `on_iterate(t, x_t)` after every x-step.
pub fn solve_bp_admm_traced<F>(
    problem: &Problem,
    alphabet: &Alphabet,
    config: &BaselineConfig,
    mut on_iterate: F,
) -> Result<RecoveryResult>
where
    F: FnMut(usize, &DVector<f64>),
{
    let started = Instant::now();
    config.validate()?;
    let projector = AffineProjector::new(problem)?;
    let alpha = config.alpha;
    let thr = 1.0 / alpha;
    let n = problem.n();
    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    let mut mu = DVector::zeros(n);
    let mut run = Finished {
        x: x.clone(),
        iterations: 0,
        converged: false,
        final_step: f64::INFINITY,
    };
    for t in 1..=config.max_iters {
        let x_new = projector.project(&(&z - &mu / alpha));
        on_iterate(t, &x_new);
        let z_new = DVector::from_fn(n, |i, _| shrink(x_new[i] + mu[i] / alpha, thr));
        if x_new.iter().chain(z_new.iter()).any(|v| !v.is_finite()) {
            return Err(non_finite(t, &x));
        }
        mu += (&x_new - &z_new) * alpha;
        let step = (&x_new - &x).norm().max((&z_new - &z).norm());
        x = x_new;
        z = z_new;
        run.iterations = t;
        run.final_step = step;
        if step < config.iterate_tol && (&x - &z).norm() < config.iterate_tol {
            run.converged = true;
            break;
        }
    }
    run.x = x;
    let objective = run.x.lp_norm(1);
    let residual = (&problem.a * &run.x - &problem.y).norm();
    Ok(finalize(run, alphabet, config, objective, residual, started))
}

/// Orthogonal projection onto `{x : Ax = y}`.
pub struct AffineProjector<'a> {
    problem: &'a Problem,
    chol: Cholesky<f64, Dyn>,
}

impl<'a> AffineProjector<'a> {
    pub fn new(problem: &'a Problem) -> Result<Self> {
        let aat = &problem.a * problem.a.transpose();
        let scale = aat.diagonal().amax().max(f64::MIN_POSITIVE);
        let chol = Cholesky::new(aat).ok_or_else(|| {
            Error::InvalidProblem("AAᵀ is singular: the sensing matrix lacks full row rank".into())
        })?;
        // reject numerically rank-deficient systems that still factor
        let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min_pivot * min_pivot < 1e-12 * scale {
            return Err(Error::InvalidProblem(
                "AAᵀ is numerically singular: the sensing matrix lacks full row rank".into(),
            ));
        }
        Ok(Self { problem, chol })
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut r = &self.problem.a * v - &self.problem.y;
        self.chol.solve_mut(&mut r);
        v - self.problem.a.transpose() * r
    }
}

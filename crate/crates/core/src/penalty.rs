//! MCP penalty and the MCP-Lasso objectives.
//!
//! For the ternary alphabet the objective is
//! `F(x) = ½‖y − Ax‖² + λ(d‖x‖₁ − ½‖x‖²)` on `[-d, d]ⁿ`. For a generic
//! alphabet the ℓ1 weight of each component becomes the smallest symbol
//! magnitude that dominates it, giving `H(x) = ½‖y − Ax‖² + λΣβᵢ(xᵢ)|xᵢ| − (λ/2)‖x‖²`
//! on `[-qd, qd]ⁿ`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Problem};

/// Slack for iterates that overshoot the box by rounding.
pub const BOX_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    pub lambda: f64,
    pub alphabet: Alphabet,
}

impl ObjectiveParams {
    pub fn new(lambda: f64, alphabet: Alphabet) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self { lambda, alphabet })
    }
}

/// Scalar MCP `d|z| − z²/2` for `|z| ≤ d`, `d²/2` beyond.
pub fn mcp_g(z: f64, d: f64) -> f64 {
    let a = z.abs();
    if a <= d {
        d * a - 0.5 * z * z
    } else {
        0.5 * d * d
    }
}

fn clamp_to_box(v: f64, bound: f64, index: usize) -> Result<f64> {
    if v.abs() <= bound {
        Ok(v)
    } else if v.abs() <= bound + BOX_SLACK {
        Ok(v.signum() * bound)
    } else {
        Err(Error::Domain {
            index,
            value: v,
            bound,
        })
    }
}

/// `G(x) = d‖x‖₁ − ½‖x‖₂²` on `[-d, d]ⁿ`.
pub fn concave_g(x: &DVector<f64>, d: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let v = clamp_to_box(v, d, i)?;
        acc += d * v.abs() - 0.5 * v * v;
    }
    Ok(acc)
}

/// Smallest level `j` with `|v| ≤ j·d`, using the same `j·d` products
/// as [`Alphabet::symbols`] so exact symbols map to themselves.
fn level_above(v: f64, d: f64) -> u64 {
    let a = v.abs();
    if a == 0.0 {
        return 0;
    }
    let mut j = (a / d).ceil().max(1.0) as u64;
    while j > 1 && ((j - 1) as f64) * d >= a {
        j -= 1;
    }
    while (j as f64) * d < a {
        j += 1;
    }
    j
}

/// `βᵢ(xᵢ) = min{α ∈ 𝒜 : |xᵢ| ≤ α}`.
pub fn beta_weight(x_i: f64, alphabet: &Alphabet) -> Result<f64> {
    let v = clamp_to_box(x_i, alphabet.bound(), 0)?;
    let j = level_above(v, alphabet.d()).min(alphabet.q() as u64);
    Ok(j as f64 * alphabet.d())
}

/// Componentwise [`beta_weight`] with the offending index in the error.
pub fn beta_weights(x: &DVector<f64>, alphabet: &Alphabet) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(x.len());
    for (i, &v) in x.iter().enumerate() {
        let v = clamp_to_box(v, alphabet.bound(), i)?;
        out[i] = level_above(v, alphabet.d()).min(alphabet.q() as u64) as f64 * alphabet.d();
    }
    Ok(out)
}

fn half_residual_sq(x: &DVector<f64>, problem: &Problem) -> Result<f64> {
    if x.len() != problem.n() {
        return Err(Error::Dimension(format!(
            "x has length {} but the problem has {} columns",
            x.len(),
            problem.n()
        )));
    }
    Ok(0.5 * (&problem.y - &problem.a * x).norm_squared())
}

/// Ternary MCP-Lasso `F`.
pub fn objective_f(x: &DVector<f64>, problem: &Problem, params: &ObjectiveParams) -> Result<f64> {
    if !params.alphabet.is_ternary() {
        return Err(Error::InvalidArgument(
            "objective F is defined for the ternary alphabet only; use objective_h".into(),
        ));
    }
    let data = half_residual_sq(x, problem)?;
    Ok(data + params.lambda * concave_g(x, params.alphabet.d())?)
}

/// Generic-alphabet MCP-Lasso `H`.
pub fn objective_h(x: &DVector<f64>, problem: &Problem, params: &ObjectiveParams) -> Result<f64> {
    let data = half_residual_sq(x, problem)?;
    let beta = beta_weights(x, &params.alphabet)?;
    let mut pen = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let v = v.clamp(-params.alphabet.bound(), params.alphabet.bound());
        pen += beta[i] * v.abs() - 0.5 * v * v;
    }
    Ok(data + params.lambda * pen)
}

/// `F` for ternary alphabets, `H` otherwise.
pub fn objective(x: &DVector<f64>, problem: &Problem, params: &ObjectiveParams) -> Result<f64> {
    if params.alphabet.is_ternary() {
        objective_f(x, problem, params)
    } else {
        objective_h(x, problem, params)
    }
}

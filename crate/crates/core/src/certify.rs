//! Recoverability certificates and exhaustive oracles for tiny instances.
//!
//! The quadratic-form certificate asks that `λ⁻¹AᵀA + d·I_{Sᶜ} − I_S`
//! (ternary) or `λ⁻¹AᵀA + I_{Sᶜ} − q·I_S` (generic alphabet) be positive
//! definite for every support `S` of size at most `k`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Problem};
use crate::penalty::mcp_g;

/// Eigenvalues above this count as positive.
pub const EIG_POSITIVE: f64 = 1e-10;
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_KERNEL_MAX_N: usize = 14;
pub const DEFAULT_ENUM_BUDGET: u64 = 10_000_000;

fn check_support(n: usize, support: &[usize]) -> Result<()> {
    if let Some(&i) = support.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("support index {i} out of range 0..{n}")));
    }
    Ok(())
}

fn shifted_min_eig(gram_over_lambda: &DMatrix<f64>, support: &[usize], off: f64, on: f64) -> f64 {
    let n = gram_over_lambda.nrows();
    let mut m = gram_over_lambda.clone();
    let mut in_s = vec![false; n];
    for &i in support {
        in_s[i] = true;
    }
    for (i, &s) in in_s.iter().enumerate() {
        m[(i, i)] += if s { -on } else { off };
    }
    m.symmetric_eigenvalues().min()
}

/// Minimum eigenvalue of `λ⁻¹AᵀA + d·I_{Sᶜ} − I_S`.
pub fn certificate_ternary(a: &DMatrix<f64>, lambda: f64, d: f64, support: &[usize]) -> Result<f64> {
    check_support(a.ncols(), support)?;
    let g = a.transpose() * a / lambda;
    Ok(shifted_min_eig(&g, support, d, 1.0))
}

/// Minimum eigenvalue of `λ⁻¹AᵀA + I_{Sᶜ} − q·I_S`.
///
/// For `q = 1` this differs from the ternary matrix by `(d − 1)·I_{Sᶜ}`,
/// so the two coincide when `d = 1`.
pub fn certificate_generic(a: &DMatrix<f64>, lambda: f64, q: u32, support: &[usize]) -> Result<f64> {
    check_support(a.ncols(), support)?;
    let g = a.transpose() * a / lambda;
    Ok(shifted_min_eig(&g, support, 1.0, q as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportCertificate {
    pub support: Vec<usize>,
    pub min_eig: f64,
}

impl SupportCertificate {
    pub fn passes(&self) -> bool {
        self.min_eig > EIG_POSITIVE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// One entry per support of size `0..=k`, in enumeration order.
    pub supports: Vec<SupportCertificate>,
    pub worst_support: Vec<usize>,
    pub worst_min_eig: f64,
    pub pass: bool,
    pub lambda: f64,
    pub alphabet: Alphabet,
    pub k: usize,
}

impl CertificateReport {
    /// CSV with header `support,min_eig,pass`; indices joined by `;`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "support,min_eig,pass")?;
        for s in &self.supports {
            let idx: Vec<String> = s.support.iter().map(|i| i.to_string()).collect();
            writeln!(w, "{},{},{}", idx.join(";"), crate::io::fmt_f64(s.min_eig), s.passes())?;
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of supports with size `0..=k` over `n` indices.
pub fn support_count(n: usize, k: usize) -> f64 {
    (0..=k.min(n)).map(|j| binomial(n as u64, j as u64)).sum()
}

/// All `j`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if j > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        out.push(idx.clone());
        let mut p = j;
        while p > 0 && idx[p - 1] == n - j + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return out;
        }
        idx[p - 1] += 1;
        for r in p..j {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

/// Evaluates the certificate on every support of size at most `k`.
pub fn certify_all_supports(a: &DMatrix<f64>, lambda: f64, alphabet: &Alphabet, k: usize) -> Result<CertificateReport> {
    certify_all_supports_with_budget(a, lambda, alphabet, k, DEFAULT_SUPPORT_BUDGET)
}

pub fn certify_all_supports_with_budget(
    a: &DMatrix<f64>,
    lambda: f64,
    alphabet: &Alphabet,
    k: usize,
    budget: u64,
) -> Result<CertificateReport> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let n = a.ncols();
    let k = k.min(n);
    let count = support_count(n, k);
    if count > budget as f64 {
        return Err(Error::BudgetExceeded {
            what: "support enumeration",
            required: count,
            budget: budget as f64,
        });
    }
    let g = a.transpose() * a / lambda;
    let (off, on) = if alphabet.is_ternary() {
        (alphabet.d(), 1.0)
    } else {
        (1.0, alphabet.q() as f64)
    };
    let all: Vec<Vec<usize>> = (0..=k).flat_map(|j| combinations(n, j)).collect();
    let supports: Vec<SupportCertificate> = all
        .into_par_iter()
        .map(|support| {
            let min_eig = shifted_min_eig(&g, &support, off, on);
            SupportCertificate { support, min_eig }
        })
        .collect();
    // first minimum in enumeration order, independent of scheduling
    let worst = supports
        .iter()
        .fold(None::<&SupportCertificate>, |best, s| match best {
            Some(b) if b.min_eig <= s.min_eig => Some(b),
            _ => Some(s),
        })
        .expect("the empty support is always enumerated");
    Ok(CertificateReport {
        worst_support: worst.support.clone(),
        worst_min_eig: worst.min_eig,
        pass: worst.min_eig > EIG_POSITIVE,
        supports,
        lambda,
        alphabet: *alphabet,
        k,
    })
}

/// True iff no nonzero `h ∈ d·{0, ±1, ±2}ⁿ` satisfies `A_SᵀA·h = 0`.
pub fn kernel_general_position_check(a: &DMatrix<f64>, support: &[usize], d: f64) -> Result<bool> {
    kernel_general_position_check_with_limit(a, support, d, DEFAULT_KERNEL_MAX_N)
}

pub fn kernel_general_position_check_with_limit(
    a: &DMatrix<f64>,
    support: &[usize],
    d: f64,
    max_n: usize,
) -> Result<bool> {
    let n = a.ncols();
    if n > max_n {
        return Err(Error::BudgetExceeded {
            what: "kernel search",
            required: 5f64.powi(n as i32) - 1.0,
            budget: 5f64.powi(max_n as i32) - 1.0,
        });
    }
    check_support(n, support)?;
    if support.is_empty() {
        // A_Sᵀ A has no rows: every candidate is in its kernel
        return Ok(false);
    }
    let rows: Vec<usize> = support.to_vec();
    let b = DMatrix::from_fn(rows.len(), n, |r, j| a.column(rows[r]).dot(&a.column(j)));
    let scale = b.amax().max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale * d * n as f64;
    // tail[j][r]: largest |Σ_{l ≥ j} b[r,l]·h_l| attainable with |h_l| ≤ 2d
    let mut tail = vec![vec![0.0; rows.len()]; n + 1];
    for j in (0..n).rev() {
        for r in 0..rows.len() {
            tail[j][r] = tail[j + 1][r] + 2.0 * d * b[(r, j)].abs();
        }
    }
    let mut search = KernelSearch {
        b: &b,
        tail: &tail,
        tol,
        d,
        partial: vec![0.0; rows.len()],
    };
    Ok(!search.find(0, false))
}

struct KernelSearch<'a> {
    b: &'a DMatrix<f64>,
    tail: &'a [Vec<f64>],
    tol: f64,
    d: f64,
    partial: Vec<f64>,
}

impl KernelSearch<'_> {
    /// Depth-first over components `j..`; `nonzero` records whether an
    /// earlier component is nonzero. Only candidates whose first nonzero
    /// entry is positive are visited, since `h` and `−h` are equivalent.
    fn find(&mut self, j: usize, nonzero: bool) -> bool {
        let n = self.b.ncols();
        if j == n {
            return nonzero && self.partial.iter().all(|p| p.abs() <= self.tol);
        }
        if self
            .partial
            .iter()
            .zip(&self.tail[j])
            .any(|(p, t)| p.abs() > t + self.tol)
        {
            return false;
        }
        let levels: &[f64] = if nonzero { &[0.0, 1.0, -1.0, 2.0, -2.0] } else { &[0.0, 1.0, 2.0] };
        for &lv in levels {
            let h = lv * self.d;
            for r in 0..self.partial.len() {
                self.partial[r] += self.b[(r, j)] * h;
            }
            let found = self.find(j + 1, nonzero || lv != 0.0);
            for r in 0..self.partial.len() {
                self.partial[r] -= self.b[(r, j)] * h;
            }
            if found {
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BruteForceMode {
    /// Every point of `𝒜ⁿ`.
    Alphabet,
    /// A uniform grid on `[-qd, qd]ⁿ` with this many points per axis.
    Grid(usize),
}

/// Exhaustive minimizer of `F` (ternary) or `H` over a finite candidate set,
/// ties resolved to the lexicographically first candidate.
pub fn brute_force_minimizer(
    problem: &Problem,
    alphabet: &Alphabet,
    lambda: f64,
    mode: BruteForceMode,
) -> Result<DVector<f64>> {
    brute_force_minimizer_with_budget(problem, alphabet, lambda, mode, DEFAULT_ENUM_BUDGET)
}

pub fn brute_force_minimizer_with_budget(
    problem: &Problem,
    alphabet: &Alphabet,
    lambda: f64,
    mode: BruteForceMode,
    budget: u64,
) -> Result<DVector<f64>> {
    let n = problem.n();
    let levels: Vec<f64> = match mode {
        BruteForceMode::Alphabet => alphabet.symbols(),
        BruteForceMode::Grid(points) => {
            if points < 2 {
                return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
            }
            let b = alphabet.bound();
            let step = 2.0 * b / (points - 1) as f64;
            (0..points).map(|i| -b + step * i as f64).collect()
        }
    };
    let count = (levels.len() as f64).powi(n as i32);
    if count > budget as f64 {
        return Err(Error::BudgetExceeded {
            what: "brute-force enumeration",
            required: count,
            budget: budget as f64,
        });
    }
    // per-level penalty λ(β(v)|v| − v²/2), which is λ·mcp_g for ternary
    let pen: Vec<f64> = levels
        .iter()
        .map(|&v| {
            if alphabet.is_ternary() {
                lambda * mcp_g(v, alphabet.d())
            } else {
                let beta = crate::penalty::beta_weight(v, alphabet).expect("grid inside hull");
                lambda * (beta * v.abs() - 0.5 * v * v)
            }
        })
        .collect();
    let a = &problem.a;
    let m = problem.m();
    let mut idx = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut best_idx = idx.clone();
    let mut r = vec![0.0; m];
    loop {
        for (i, ri) in r.iter_mut().enumerate() {
            let mut s = problem.y[i];
            for j in 0..n {
                s -= a[(i, j)] * levels[idx[j]];
            }
            *ri = s;
        }
        let val = 0.5 * r.iter().map(|v| v * v).sum::<f64>() + idx.iter().map(|&l| pen[l]).sum::<f64>();
        if val < best {
            best = val;
            best_idx.copy_from_slice(&idx);
        }
        // odometer with the first component most significant
        let mut p = n;
        loop {
            if p == 0 {
                return Ok(DVector::from_iterator(n, best_idx.iter().map(|&l| levels[l])));
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < levels.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

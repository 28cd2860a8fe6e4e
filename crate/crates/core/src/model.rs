//! Alphabets, sparse signals, sensing problems and seeded instance generators.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Symbol set `d·{0, ±1, …, ±q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphabet {
    d: f64,
    q: u32,
}

impl Alphabet {
    pub fn new(d: f64, q: u32) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alphabet spacing must be positive, got {d}"
            )));
        }
        if q == 0 {
            return Err(Error::InvalidArgument("alphabet level q must be >= 1".into()));
        }
        Ok(Self { d, q })
    }

    /// The ternary alphabet `{0, ±d}`.
    pub fn ternary(d: f64) -> Result<Self> {
        Self::new(d, 1)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_ternary(&self) -> bool {
        self.q == 1
    }

    /// Half-width `q·d` of the convex hull `[-qd, qd]`.
    pub fn bound(&self) -> f64 {
        self.q as f64 * self.d
    }

    /// All symbols in increasing order.
    pub fn symbols(&self) -> Vec<f64> {
        let q = self.q as i64;
        (-q..=q).map(|j| j as f64 * self.d).collect()
    }

    /// The `2q` nonzero symbols in increasing order.
    pub fn nonzero_symbols(&self) -> Vec<f64> {
        self.symbols().into_iter().filter(|&s| s != 0.0).collect()
    }

    /// Nearest symbol to `v`; midpoints go to the smaller magnitude.
    pub fn quantize(&self, v: f64) -> f64 {
        let r = (v.abs() / self.d).min(self.q as f64);
        let lo = r.floor();
        // ties toward zero: only round up when strictly past the midpoint
        let level = if r - lo > 0.5 { lo + 1.0 } else { lo };
        v.signum() * level.min(self.q as f64) * self.d
    }

    pub fn quantize_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| self.quantize(v))
    }

    pub fn contains(&self, v: f64) -> bool {
        self.quantize(v) == v
    }
}

/// A sparse vector whose nonzero entries are alphabet symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: DVector<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Builds a signal from dense values, checking every entry against `alphabet`.
    pub fn from_dense(values: DVector<f64>, alphabet: &Alphabet) -> Result<Self> {
        let mut support = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if !alphabet.contains(v) {
                return Err(Error::InvalidArgument(format!(
                    "entry {i} = {v} is not an alphabet symbol"
                )));
            }
            if v != 0.0 {
                support.push(i);
            }
        }
        Ok(Self { values, support })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Sorted support indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Linear sensing problem `y = A(x̃ + δ) + ε`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub truth: Option<SparseSignal>,
    pub signal_noise: Option<DVector<f64>>,
    pub meas_noise: Option<DVector<f64>>,
}

impl Problem {
    /// Problem from raw measurements, no ground truth.
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows but y has length {}",
                a.nrows(),
                y.len()
            )));
        }
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::Dimension("empty sensing matrix".into()));
        }
        Ok(Self {
            a,
            y,
            truth: None,
            signal_noise: None,
            meas_noise: None,
        })
    }

    /// Builds `y = A(x̃ + δ) + ε` from its ingredients.
    pub fn from_truth(
        a: DMatrix<f64>,
        truth: SparseSignal,
        signal_noise: Option<DVector<f64>>,
        meas_noise: Option<DVector<f64>>,
    ) -> Result<Self> {
        let (m, n) = a.shape();
        if truth.len() != n {
            return Err(Error::Dimension(format!(
                "signal length {} does not match {n} columns",
                truth.len()
            )));
        }
        let mut x = truth.values().clone();
        if let Some(delta) = &signal_noise {
            if delta.len() != n {
                return Err(Error::Dimension(format!(
                    "signal noise length {} does not match {n} columns",
                    delta.len()
                )));
            }
            x += delta;
        }
        let mut y = &a * x;
        if let Some(eps) = &meas_noise {
            if eps.len() != m {
                return Err(Error::Dimension(format!(
                    "measurement noise length {} does not match {m} rows",
                    eps.len()
                )));
            }
            y += eps;
        }
        Ok(Self {
            a,
            y,
            truth: Some(truth),
            signal_noise,
            meas_noise,
        })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }
}

/// `m×n` matrix with i.i.d. `N(0, 1/m)` entries.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (m as f64).sqrt();
    // fill row-major so the stream order matches the CSV layout
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        let g: f64 = StandardNormal.sample(&mut rng);
        data.push(g * scale);
    }
    Ok(DMatrix::from_row_slice(m, n, &data))
}

/// `k`-sparse signal with uniform support and i.i.d. uniform nonzero symbols.
pub fn gen_signal(n: usize, k: usize, alphabet: &Alphabet, seed: u64) -> Result<SparseSignal> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} exceeds signal length {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let symbols = alphabet.nonzero_symbols();
    let mut values = DVector::zeros(n);
    for &i in &support {
        values[i] = symbols[rng.random_range(0..symbols.len())];
    }
    Ok(SparseSignal { values, support })
}

/// Adds Gaussian noise with per-component std `‖y‖₂ / (√m · 10^{snr/20})`.
///
/// An infinite `snr_db` means no noise. Returns the noisy vector and the
/// noise that was added.
pub fn add_measurement_noise(
    y_clean: &DVector<f64>,
    snr_db: f64,
    seed: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = y_clean.len();
    if snr_db == f64::INFINITY {
        return Ok((y_clean.clone(), DVector::zeros(m)));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("snr_db is NaN".into()));
    }
    let norm = y_clean.norm();
    if norm <= 0.0 {
        return Err(Error::InvalidArgument(
            "cannot scale noise to a zero-norm measurement vector".into(),
        ));
    }
    let sigma = noise_sigma(norm, m, snr_db);
    let mut rng = rng_from_seed(seed);
    let eps = DVector::from_fn(m, |_, _| {
        let g: f64 = StandardNormal.sample(&mut rng);
        sigma * g
    });
    Ok((y_clean + &eps, eps))
}

/// Per-component noise std for a clean vector of norm `norm` and length `m`.
pub fn noise_sigma(norm: f64, m: usize, snr_db: f64) -> f64 {
    norm / ((m as f64).sqrt() * 10f64.powf(snr_db / 20.0))
}

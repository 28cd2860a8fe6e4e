#![allow(dead_code)]

use mcplasso::certify::{certify_all_supports, combinations, kernel_general_position_check};
use mcplasso::model::{gen_gaussian_matrix, gen_signal};
use mcplasso::rng::derive_seed;
use mcplasso::{Alphabet, Problem, SparseSignal};
use nalgebra::{DMatrix, DVector};

pub fn noise_free(m: usize, n: usize, k: usize, alphabet: &Alphabet, seed: u64) -> (Problem, SparseSignal) {
    let a = gen_gaussian_matrix(m, n, derive_seed(seed, 1)).unwrap();
    let x = gen_signal(n, k, alphabet, derive_seed(seed, 2)).unwrap();
    let p = Problem::from_truth(a, x.clone(), None, None).unwrap();
    (p, x)
}

/// Cyclic coordinate descent on `½‖y − Ax‖² + λ‖x‖₁`, run to machine precision.
pub fn lasso_cd(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let aty = a.transpose() * y;
    let mut x = DVector::zeros(n);
    for _ in 0..1_000_000 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let rho = aty[j] - gram.row(j).dot(&x.transpose()) + gram[(j, j)] * x[j];
            let next = if rho > lambda {
                (rho - lambda) / gram[(j, j)]
            } else if rho < -lambda {
                (rho + lambda) / gram[(j, j)]
            } else {
                0.0
            };
            moved = moved.max((next - x[j]).abs());
            x[j] = next;
        }
        if moved < 1e-16 {
            break;
        }
    }
    x
}

/// Minimum-ℓ1 solution of `Ax = y` by enumerating every basic solution
/// (an optimal LP vertex has at most `m` nonzeros). Returns the best point
/// and the gap to the runner-up objective value among distinct points.
pub fn bp_vertex_oracle(a: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
    let (m, n) = a.shape();
    let mut found: Vec<(f64, DVector<f64>)> = Vec::new();
    for cols in combinations(n, m) {
        let sub = DMatrix::from_fn(m, m, |i, j| a[(i, cols[j])]);
        let lu = sub.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let xs = lu.solve(y).unwrap();
        let mut x = DVector::zeros(n);
        for (j, &c) in cols.iter().enumerate() {
            x[c] = xs[j];
        }
        found.push((x.iter().map(|v| v.abs()).sum(), x));
    }
    found.sort_by(|p, q| p.0.total_cmp(&q.0));
    let best = found[0].clone();
    let gap = found
        .iter()
        .find(|(_, x)| (x - &best.1).amax() > 1e-9)
        .map_or(f64::INFINITY, |(v, _)| v - best.0);
    (best.1, gap)
}

/// Deterministic stream of tiny ternary noise-free instances; the first
/// `count` that pass both the all-support certificate and the kernel check.
pub fn certified_instances(count: usize, lambda: f64) -> Vec<(Problem, SparseSignal)> {
    const SHAPES: [(usize, usize, usize); 4] = [(5, 6, 1), (6, 8, 1), (6, 6, 2), (8, 8, 2)];
    let alphabet = Alphabet::ternary(1.0).unwrap();
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let (m, n, k) = SHAPES[seed as usize % SHAPES.len()];
        let (p, x) = noise_free(m, n, k, &alphabet, derive_seed(0xA5, seed));
        seed += 1;
        assert!(seed < 100_000, "certified instance stream ran dry");
        if !certify_all_supports(&p.a, lambda, &alphabet, k).unwrap().pass {
            continue;
        }
        if !kernel_general_position_check(&p.a, x.support(), 1.0).unwrap() {
            continue;
        }
        out.push((p, x));
    }
    out
}

/// Mean and standard error of paired differences `a − b`.
pub fn paired_diff(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    if d.len() < 2 {
        return (mean, 0.0);
    }
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

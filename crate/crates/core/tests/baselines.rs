mod common;

use common::{bp_vertex_oracle, lasso_cd, noise_free};
use mcplasso::baselines::{
    lasso_kkt_residual, solve_bp_admm, solve_bp_admm_traced, solve_lasso_admm, solve_lasso_admm_from, BaselineConfig,
};
use mcplasso::model::add_measurement_noise;
use mcplasso::rng::rng_from_seed;
use mcplasso::{Alphabet, Problem};
use nalgebra::DVector;
use rand::Rng;

fn raw() -> BaselineConfig {
    BaselineConfig { quantize_output: false, max_iters: 200_000, ..BaselineConfig::default() }
}

#[test]
fn lasso_matches_coordinate_descent_on_overdetermined_instances() {
    let alphabet = Alphabet::ternary(1.0).unwrap();
    for seed in 0..5 {
        let (p, _) = noise_free(40, 20, 4, &alphabet, seed);
        let (y, _) = add_measurement_noise(&p.y, 20.0, seed).unwrap();
        let p = Problem::new(p.a, y).unwrap();
        for lambda in [1e-2, 0.5] {
            let oracle = lasso_cd(&p.a, &p.y, lambda);
            assert!(lasso_kkt_residual(&oracle, &p, lambda) < 1e-11);
            let res = solve_lasso_admm(&p, &alphabet, &BaselineConfig { lambda, ..raw() }).unwrap();
            assert!(res.converged);
            assert!((res.estimate - oracle).amax() <= 1e-8, "seed {seed} lambda {lambda}");
        }
    }
}

#[test]
fn lasso_limit_does_not_depend_on_the_start() {
    let alphabet = Alphabet::ternary(1.0).unwrap();
    let (p, _) = noise_free(40, 20, 4, &alphabet, 11);
    let mut rng = rng_from_seed(5);
    let starts: Vec<DVector<f64>> = (0..2).map(|_| DVector::from_fn(20, |_, _| rng.random_range(-3.0..3.0))).collect();
    let a = solve_lasso_admm_from(&p, &alphabet, &raw(), starts[0].clone()).unwrap();
    let b = solve_lasso_admm_from(&p, &alphabet, &raw(), starts[1].clone()).unwrap();
    assert!((a.estimate - b.estimate).amax() <= 1e-8);
}

#[test]
fn quantized_lasso_output_is_on_the_lattice() {
    let alphabet = Alphabet::new(0.5, 3).unwrap();
    let (p, _) = noise_free(30, 60, 6, &alphabet, 2);
    let res = solve_lasso_admm(&p, &alphabet, &BaselineConfig::default()).unwrap();
    assert!(res.estimate.iter().all(|&v| alphabet.contains(v)));
}

#[test]
fn bp_matches_the_vertex_oracle() {
    let alphabet = Alphabet::ternary(1.0).unwrap();
    let mut compared = 0;
    for seed in 0..20 {
        let (p, _) = noise_free(6, 8, 1, &alphabet, seed);
        let (oracle, gap) = bp_vertex_oracle(&p.a, &p.y);
        if gap < 1e-6 {
            continue;
        }
        let res = solve_bp_admm(&p, &alphabet, &raw()).unwrap();
        assert!(res.converged, "seed {seed}");
        let diff = (&res.estimate - &oracle).amax();
        assert!(diff <= 1e-8, "seed {seed}: off by {diff}");
        compared += 1;
    }
    assert!(compared >= 15);
}

#[test]
fn bp_iterates_stay_feasible() {
    let alphabet = Alphabet::ternary(1.0).unwrap();
    for seed in 0..5 {
        let (p, _) = noise_free(30, 100, 8, &alphabet, seed);
        let mut worst = 0.0f64;
        let mut count = 0;
        solve_bp_admm_traced(&p, &alphabet, &BaselineConfig::default(), |_, x| {
            worst = worst.max((&p.a * x - &p.y).norm());
            count += 1;
        })
        .unwrap();
        assert!(count > 0);
        assert!(worst <= 1e-10, "seed {seed}: {worst}");
    }
}

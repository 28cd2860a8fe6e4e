use mcplasso::bench::SolverKind;
use mcplasso::localize::{
    build_dictionary, localization_error, localize_targets, orthogonalize, run_localization,
    write_localization_records, Grid, LocalizationSpec, LocalizeConfig, RssParams, SensorLayout,
    LOCALIZE_CSV_HEADER,
};
use mcplasso::model::gen_gaussian_matrix;
use mcplasso::rng::derive_seed;
use nalgebra::DVector;

fn occupancy(cells: &[usize]) -> DVector<f64> {
    let mut x = DVector::zeros(100);
    for &c in cells {
        x[c] = 1.0;
    }
    x
}

#[test]
fn single_target_on_a_clean_dictionary_is_found() {
    let grid = Grid::default();
    let cfg = LocalizeConfig::default();
    for (seed, cell) in [(1u64, 0usize), (2, 37), (3, 99)] {
        let layout = SensorLayout::random(40, seed).unwrap();
        let a = build_dictionary(&grid, &layout, &RssParams::default(), f64::INFINITY, 0).unwrap();
        let (a, y) = orthogonalize(&a, &(&a * occupancy(&[cell]))).unwrap();
        for solver in [SolverKind::Madmm, SolverKind::Lasso] {
            let loc = localize_targets(&grid, &a, &y, 1, solver, &cfg).unwrap();
            assert_eq!(loc.cells, vec![cell], "{solver} seed {seed}");
        }
    }
}

#[test]
fn adjacent_targets_are_separated() {
    let grid = Grid::default();
    let cfg = LocalizeConfig::default();
    let mut hits = 0;
    for run in 0..50u64 {
        let seed = derive_seed(77, run);
        let layout = SensorLayout::random(60, derive_seed(seed, 1)).unwrap();
        let a = build_dictionary(&grid, &layout, &RssParams::default(), 25.0, derive_seed(seed, 2)).unwrap();
        let first = (run as usize * 7) % 90;
        let first = if first % 10 == 9 { first - 1 } else { first };
        let truth = [first, first + 1];
        let (a, y) = orthogonalize(&a, &(&a * occupancy(&truth))).unwrap();
        let mut cells = localize_targets(&grid, &a, &y, 2, SolverKind::Madmm, &cfg).unwrap().cells;
        cells.sort_unstable();
        hits += usize::from(cells == truth);
    }
    assert!(hits >= 45, "{hits}/50");
}

#[test]
fn whitening_keeps_the_solution_set() {
    for seed in 0..10 {
        let a = gen_gaussian_matrix(5, 8, seed).unwrap();
        let x = DVector::from_fn(8, |i, _| (i as f64 - 3.5) * 0.3);
        let y = &a * &x;
        let (aw, yw) = orthogonalize(&a, &y).unwrap();
        let gram = &aw * aw.transpose();
        assert!((gram - nalgebra::DMatrix::identity(5, 5)).amax() <= 1e-10);
        assert!((&aw * &x - &yw).amax() <= 1e-10);
        // a point off the solution set stays off it
        let mut off = x.clone();
        off[0] += 1.0;
        assert!((&aw * &off - &yw).norm() > 1e-3);
    }
}

#[test]
fn error_is_symmetric_under_relabelling() {
    let truth = [(1.0, 1.0), (5.0, 3.0), (9.0, 19.0), (13.0, 7.0)];
    let est = [(3.0, 1.0), (13.0, 9.0), (5.0, 5.0), (9.0, 17.0)];
    let base = localization_error(&truth, &est).unwrap();
    let mut rev = est;
    rev.reverse();
    assert_eq!(localization_error(&truth, &rev).unwrap(), base);
    assert_eq!(localization_error(&est, &truth).unwrap(), base);
    assert!((base - 2.0).abs() < 1e-12);
}

#[test]
fn experiment_is_deterministic() {
    let spec = LocalizationSpec { m_values: vec![20, 40], trials: 3, ..LocalizationSpec::default() };
    let a = run_localization(&spec).unwrap();
    let b = run_localization(&LocalizationSpec { workers: 2, ..spec.clone() }).unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    write_localization_records(&mut buf, &a).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), LOCALIZE_CSV_HEADER);
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
}

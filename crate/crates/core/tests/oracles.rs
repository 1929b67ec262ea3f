mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rlasso_core::simulation::study_restrictions;
use rlasso_core::{
    fit_lasso_lqa, fit_ols, fit_restricted_lasso, fit_restricted_ols, lambda_grid, solve_spd,
    Dataset, FitConfig, RestrictionSet,
};

#[test]
fn solve_spd_matches_explicit_inverse() {
    let mut rng = rng(11);
    for _ in 0..20 {
        let m = normal_matrix(&mut rng, 5, 5);
        let a = m.transpose() * &m + DMatrix::identity(5, 5);
        let b = normal_matrix(&mut rng, 5, 2);
        let z = solve_spd(&a, &b).unwrap();
        let oracle = gauss_jordan_inverse(&a) * &b;
        assert!((z - oracle).amax() < 1e-10);
    }
}

#[test]
fn ols_matches_normal_equations_oracle() {
    let mut rng = rng(12);
    for _ in 0..20 {
        let x = normal_matrix(&mut rng, 20, 3);
        let y = normal_vector(&mut rng, 20);
        let fit = fit_ols(&Dataset::unnamed(x.clone(), y.clone()).unwrap()).unwrap();
        assert!((fit.beta() - normal_equations_oracle(&x, &y)).amax() < 1e-10);
    }
}

#[test]
fn restricted_ols_matches_null_space_oracle() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let x = normal_matrix(&mut rng, 30, 4);
        let y = normal_vector(&mut rng, 30);
        let rmat = full_rank_restrictions(&mut rng, 2, 4);
        let rvec = normal_vector(&mut rng, 2);
        let set = RestrictionSet::new(rmat.clone(), rvec.clone(), 4).unwrap();
        let fit = fit_restricted_ols(&Dataset::unnamed(x.clone(), y.clone()).unwrap(), &set).unwrap();
        let oracle = constrained_ridge_oracle(&x, &y, &DVector::zeros(4), &rmat, &rvec);
        assert!((fit.beta() - oracle).amax() < 1e-8);
        assert!(set.residual(fit.beta()) <= 1e-8);
    }
}

#[test]
fn soft_threshold_matches_grid_search() {
    for &(z, lambda) in &[(3.0, 2.0), (-1.5, 4.0), (0.4, 0.2), (-2.2, 1.0)] {
        // A value search resolves the minimizer only to about sqrt(machine epsilon).
        let grid = grid_minimize_1d(z, lambda);
        assert!((grid - soft_threshold(z, lambda / 2.0)).abs() < 1e-6);
    }
}

#[test]
fn orthonormal_design_gives_soft_thresholding() {
    let mut rng = rng(14);
    let mut checked = 0;
    while checked < 10 {
        let x = orthonormal_columns(&mut rng, 20, 4);
        let y = normal_vector(&mut rng, 20) * 2.0;
        let z = x.transpose() * &y;
        let lambda = z.iter().map(|v| v.abs()).sum::<f64>() / 2.0;
        // Coordinates right at the threshold converge arbitrarily slowly.
        if z.iter().any(|v| (v.abs() - lambda / 2.0).abs() < 0.05 * lambda) {
            continue;
        }
        let data = Dataset::unnamed(x, y).unwrap();
        let fit = fit_lasso_lqa(&data, &FitConfig::with_lambda(lambda)).unwrap();
        for j in 0..4 {
            let expected = grid_minimize_1d(z[j], lambda);
            assert!((expected - soft_threshold(z[j], lambda / 2.0)).abs() < 1e-6);
            assert!(
                (fit.beta()[j] - expected).abs() < 1e-4,
                "coordinate {j}: {} vs {expected}",
                fit.beta()[j]
            );
        }
        checked += 1;
    }
}

fn standardized(x: DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut x = x;
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / n).sqrt();
        col.unscale_mut(sd);
    }
    x
}

#[test]
fn lambda_above_max_gives_empty_selection() {
    let mut rng = rng(15);
    for _ in 0..10 {
        let x = standardized(normal_matrix(&mut rng, 40, 5));
        let y = normal_vector(&mut rng, 40);
        let xty = x.transpose() * &y;
        let lambda = 2.0 * xty.amax() + 1.0;
        // Subgradient condition at zero: |2 x_jᵀ y| ≤ λ.
        assert!(xty.iter().all(|v| 2.0 * v.abs() <= lambda));
        let data = Dataset::unnamed(x, y).unwrap();
        let fit = fit_lasso_lqa(&data, &FitConfig::with_lambda(lambda)).unwrap();
        assert!(fit.selected.is_empty());
        assert_eq!(fit.beta(), &DVector::zeros(5));

        let at_max = lambda_grid(&data, 10).unwrap().values()[0];
        let fit = fit_lasso_lqa(&data, &FitConfig::with_lambda(at_max)).unwrap();
        assert!(fit.selected.is_empty());
    }
}

/// Penalty weights the LQA uses at its final iterate, plus pins for dropped
/// coordinates.
fn surrogate_at(fit_beta: &DVector<f64>, active: &[bool], lambda: f64, eps: f64) -> DVector<f64> {
    DVector::from_fn(fit_beta.len(), |j, _| {
        if active[j] {
            0.5 * lambda / fit_beta[j].abs().max(eps)
        } else {
            0.0
        }
    })
}

#[test]
fn restricted_lasso_is_fixed_point_of_constrained_surrogate() {
    let mut rng = rng(16);
    let truth = DVector::from_vec(vec![0.0, 1.0, 3.0, 1.0, 5.0, 0.0]);
    let set = study_restrictions();
    for _ in 0..5 {
        let x = normal_matrix(&mut rng, 50, 6);
        let y = &x * &truth + normal_vector(&mut rng, 50);
        let data = Dataset::unnamed(x.clone(), y.clone()).unwrap();
        let grid = lambda_grid(&data, 10).unwrap();
        for &lambda in grid.values() {
            let cfg = FitConfig {
                lambda,
                max_iter: 5000,
                ..FitConfig::default()
            };
            let fit = fit_restricted_lasso(&data, &set, &cfg).unwrap();
            assert!(set.residual(fit.beta()) <= 1e-8, "lambda {lambda}");
            assert!(fit.converged, "lambda {lambda} did not converge");

            // Dropped coordinates are exactly zero and not in any restriction.
            let active: Vec<bool> = (0..6)
                .map(|j| fit.beta()[j] != 0.0 || set.involves(j))
                .collect();
            let d = surrogate_at(fit.beta(), &active, lambda, cfg.zero_eps);
            let pinned: Vec<usize> = (0..6).filter(|&j| !active[j]).collect();
            let m = set.m() + pinned.len();
            let mut rmat = DMatrix::zeros(m, 6);
            let mut rvec = DVector::zeros(m);
            rmat.rows_mut(0, set.m()).copy_from(set.rmat());
            rvec.rows_mut(0, set.m()).copy_from(set.rvec());
            for (k, &j) in pinned.iter().enumerate() {
                rmat[(set.m() + k, j)] = 1.0;
            }
            let oracle = constrained_ridge_oracle(&x, &y, &d, &rmat, &rvec);
            assert!(
                (fit.beta() - &oracle).amax() < 1e-6,
                "lambda {lambda}: {} vs {}",
                fit.beta(),
                oracle
            );
        }
    }
}

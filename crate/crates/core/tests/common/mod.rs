//! Independent reference computations for the estimator tests. Nothing here
//! calls into the crate's solvers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(i, n + i)] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &k| aug[(i, col)].abs().total_cmp(&aug[(k, col)].abs()))
            .unwrap();
        assert!(aug[(pivot, col)].abs() > 1e-300, "singular matrix in oracle");
        aug.swap_rows(col, pivot);
        let d = aug[(col, col)];
        for j in 0..2 * n {
            aug[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = aug[(i, col)];
                if f != 0.0 {
                    for j in 0..2 * n {
                        aug[(i, j)] -= f * aug[(col, j)];
                    }
                }
            }
        }
    }
    aug.columns(n, n).into_owned()
}

/// Reduced row echelon form of `[R | r]`: returns a particular solution of
/// `Rβ = r` (free variables at zero) and a basis of `null(R)` as columns.
pub fn null_space(rmat: &DMatrix<f64>, rvec: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let (m, p) = rmat.shape();
    let mut a = DMatrix::zeros(m, p + 1);
    for i in 0..m {
        for j in 0..p {
            a[(i, j)] = rmat[(i, j)];
        }
        a[(i, p)] = rvec[i];
    }
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..p {
        if row == m {
            break;
        }
        let best = (row..m)
            .max_by(|&i, &k| a[(i, col)].abs().total_cmp(&a[(k, col)].abs()))
            .unwrap();
        if a[(best, col)].abs() < 1e-12 {
            continue;
        }
        a.swap_rows(row, best);
        let d = a[(row, col)];
        for j in 0..=p {
            a[(row, j)] /= d;
        }
        for i in 0..m {
            if i != row {
                let f = a[(i, col)];
                for j in 0..=p {
                    a[(i, j)] -= f * a[(row, j)];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..p).filter(|j| !pivots.contains(j)).collect();
    let mut particular = DVector::zeros(p);
    for (i, &pc) in pivots.iter().enumerate() {
        particular[pc] = a[(i, p)];
    }
    let mut basis = DMatrix::zeros(p, free.len());
    for (k, &fc) in free.iter().enumerate() {
        basis[(fc, k)] = 1.0;
        for (i, &pc) in pivots.iter().enumerate() {
            basis[(pc, k)] = -a[(i, fc)];
        }
    }
    (particular, basis)
}

/// Minimizer of `‖y − Xβ‖² + βᵀ diag(d) β` subject to `Rβ = r`, through the
/// reparameterization `β = β₀ + N z`.
pub fn constrained_ridge_oracle(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    d: &DVector<f64>,
    rmat: &DMatrix<f64>,
    rvec: &DVector<f64>,
) -> DVector<f64> {
    let (b0, basis) = null_space(rmat, rvec);
    if basis.ncols() == 0 {
        return b0;
    }
    let dm = DMatrix::from_diagonal(d);
    let xn = x * &basis;
    let lhs = xn.transpose() * &xn + basis.transpose() * &dm * &basis;
    let rhs = xn.transpose() * (y - x * &b0) - basis.transpose() * &dm * &b0;
    let z = gauss_jordan_inverse(&lhs) * rhs;
    b0 + basis * z
}

/// `(XᵀX)⁻¹Xᵀy` through the explicit inverse.
pub fn normal_equations_oracle(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    gauss_jordan_inverse(&(x.transpose() * x)) * (x.transpose() * y)
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Minimizer of `(b − z)² + λ|b|` found by a bracketing grid search.
pub fn grid_minimize_1d(z: f64, lambda: f64) -> f64 {
    let f = |b: f64| (b - z) * (b - z) + lambda * b.abs();
    let (mut lo, mut hi) = (-(z.abs() + 1.0), z.abs() + 1.0);
    for _ in 0..60 {
        let step = (hi - lo) / 200.0;
        let best = (0..=200)
            .map(|k| lo + step * k as f64)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    0.5 * (lo + hi)
}

/// Matrix with orthonormal columns from Gram-Schmidt on a random draw.
pub fn orthonormal_columns(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let mut q = normal_matrix(rng, n, p);
    for j in 0..p {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let ck = q.column(k).into_owned();
            let mut cj = q.column_mut(j);
            cj -= ck * proj;
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

/// Random m×p matrix with independent rows.
pub fn full_rank_restrictions(rng: &mut ChaCha8Rng, m: usize, p: usize) -> DMatrix<f64> {
    normal_matrix(rng, m, p)
}

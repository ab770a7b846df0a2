//! Symmetric eigen-decomposition, economy SVD, pseudo-inverse, condition
//! numbers. Sized for the wide-and-short Jacobians this crate produces
//! (d <= 64 rows, N up to a few 1e5 columns), not for general BLAS work.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

/// Result of a symmetric eigen-decomposition, eigenvalues descending,
/// eigenvectors in the matching columns.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

/// Economy SVD of a full-row-rank d x N matrix (d <= N):
/// a = u * diag(sigma) * v_r^T with u d x d orthogonal, v_r N x d with
/// orthonormal columns and sigma descending.
#[derive(Debug, Clone)]
pub struct EconomySvd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v_r: Matrix<T>,
}

/// Relative threshold below which the smallest singular value marks the
/// input as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Gram-matrix condition bound beyond which the Cholesky route of the
/// pseudo-inverse falls back to the SVD route.
pub const PINV_CHOLESKY_COND_LIMIT: f64 = 1e10;

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// The sweep order is fixed (row-major over the strict upper triangle) so the
/// result is deterministic. Convergence: off(A) < tol * ||A||_F with
/// tol = max(1e-12, 8 eps).
pub fn sym_eig<T: Real>(a: &Matrix<T>) -> Result<SymEig<T>> {
    let d = a.rows();
    if d != a.cols() {
        return Err(Error::DimMismatch {
            op: "sym_eig",
            detail: format!("{}x{} is not square", a.rows(), a.cols()),
        });
    }
    let mut max_asym = T::zero();
    for i in 0..d {
        for j in (i + 1)..d {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_asym > T::of(1e-9) {
        return Err(Error::NotSymmetric { max_asym: max_asym.f64() });
    }

    let mut m = a.clone();
    // Symmetrize exactly so rotations keep symmetry to the last bit.
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)]) * T::of(0.5);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut q = Matrix::<T>::identity(d);
    let norm = m.frobenius_norm();
    let tol = T::of(1e-12).max(T::epsilon() * T::of(8.0)) * norm;

    let off = |m: &Matrix<T>| -> T {
        let mut s = T::zero();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        if off(&m) <= tol || d < 2 {
            break;
        }
        for p in 0..d {
            for r in (p + 1)..d {
                let apq = m[(p, r)];
                if apq.abs() <= tol * T::of(1e-3) {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(r, r)];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                // Stable tangent of the rotation angle.
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                // A <- J^T A J on rows/cols p and r.
                for k in 0..d {
                    let akp = m[(k, p)];
                    let akq = m[(k, r)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, r)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = m[(p, k)];
                    let aqk = m[(r, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(r, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }

    // Sort eigenpairs descending by eigenvalue; stable order for ties.
    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<T> = (0..d).map(|i| m[(i, i)]).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigenvalues: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = Matrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..d {
            eigenvectors[(row, col)] = q[(row, src)];
        }
    }
    Ok(SymEig { eigenvalues, eigenvectors })
}

/// Economy SVD of a d x N matrix with d <= N, via eigen-decomposition of the
/// d x d Gram matrix a a^T and v_r = a^T u diag(1/sigma).
///
/// Rank deficiency (sigma_min < RANK_TOL * sigma_max) is an error carrying a
/// condition estimate; callers that can proceed should catch it.
pub fn economy_svd<T: Real>(a: &Matrix<T>) -> Result<EconomySvd<T>> {
    let (d, n) = (a.rows(), a.cols());
    if d > n {
        return Err(Error::DimMismatch {
            op: "economy_svd",
            detail: format!("{d}x{n} has more rows than columns"),
        });
    }
    let eig = sym_eig(&a.gram())?;
    let lam_max = eig.eigenvalues[0].max(T::zero());
    let mut sigma = Vec::with_capacity(d);
    for &lam in &eig.eigenvalues {
        sigma.push(lam.max(T::zero()).sqrt());
    }
    let smax = sigma[0];
    let smin = sigma[d - 1];
    if !(smin > T::of(RANK_TOL) * smax) || smax == T::zero() {
        let cond = if smin > T::zero() { (smax / smin).f64() } else { f64::INFINITY };
        let _ = lam_max;
        return Err(Error::RankDeficient { op: "economy_svd", cond });
    }

    let u = eig.eigenvectors;
    // v_r columns: a^T u_i / sigma_i.
    let mut v_r = Matrix::zeros(n, d);
    for i in 0..d {
        let ui: Vec<T> = (0..d).map(|r| u[(r, i)]).collect();
        let col = a.tr_mul_vec(&ui)?;
        let inv = T::one() / sigma[i];
        for r in 0..n {
            v_r[(r, i)] = col[r] * inv;
        }
    }
    Ok(EconomySvd { u, sigma, v_r })
}

impl<T: Real> EconomySvd<T> {
    /// u * diag(sigma) * v_r^T, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix<T> {
        let d = self.sigma.len();
        let n = self.v_r.rows();
        let mut out = Matrix::zeros(d, n);
        for i in 0..d {
            for k in 0..d {
                let w = self.u[(i, k)] * self.sigma[k];
                for j in 0..n {
                    out[(i, j)] += w * self.v_r[(j, k)];
                }
            }
        }
        out
    }
}

/// Cholesky factorization of an SPD matrix: returns lower-triangular L with
/// a = L L^T, or the offending pivot if not positive definite.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let d = a.rows();
    if d != a.cols() {
        return Err(Error::DimMismatch {
            op: "cholesky",
            detail: format!("{}x{} is not square", a.rows(), a.cols()),
        });
    }
    let mut l = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(Error::NotPositiveDefinite { lambda_min: sum.f64() });
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve a x = b given the Cholesky factor L of a.
pub fn cholesky_solve<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let d = l.rows();
    debug_assert_eq!(b.len(), d);
    let mut y = vec![T::zero(); d];
    for i in 0..d {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = vec![T::zero(); d];
    for i in (0..d).rev() {
        let mut sum = y[i];
        for k in (i + 1)..d {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    x
}

/// Inverse of an SPD matrix via its Cholesky factor.
pub fn spd_inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let d = a.rows();
    let l = cholesky(a)?;
    let mut inv = Matrix::zeros(d, d);
    let mut e = vec![T::zero(); d];
    for j in 0..d {
        e[j] = T::one();
        let col = cholesky_solve(&l, &e);
        e[j] = T::zero();
        for i in 0..d {
            inv[(i, j)] = col[i];
        }
    }
    // Symmetrize to scrub solve round-off.
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = (inv[(i, j)] + inv[(j, i)]) * T::of(0.5);
            inv[(i, j)] = avg;
            inv[(j, i)] = avg;
        }
    }
    Ok(inv)
}

/// Moore-Penrose inverse of a full-row-rank d x N matrix through the
/// normal-equations form a^T (a a^T)^{-1}; O(d^2 N) rather than the O(d N^2)
/// of a full SVD. Falls back to the SVD route when the Gram matrix condition
/// exceeds PINV_CHOLESKY_COND_LIMIT.
pub fn pinv_full_row_rank<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let (d, n) = (a.rows(), a.cols());
    if d > n {
        return Err(Error::DimMismatch {
            op: "pinv_full_row_rank",
            detail: format!("{d}x{n} has more rows than columns"),
        });
    }
    let g = a.gram();
    let eig = sym_eig(&g)?;
    let lam_max = eig.eigenvalues[0];
    let lam_min = eig.eigenvalues[d - 1];
    if !(lam_min > T::of(RANK_TOL * RANK_TOL) * lam_max) || lam_max <= T::zero() {
        let cond = if lam_min > T::zero() { (lam_max / lam_min).f64() } else { f64::INFINITY };
        return Err(Error::RankDeficient { op: "pinv_full_row_rank", cond });
    }

    let cond = lam_max / lam_min;
    let g_inv = if cond.f64() <= PINV_CHOLESKY_COND_LIMIT {
        spd_inverse(&g)?
    } else {
        // (a a^T)^{-1} = Q diag(1/lambda) Q^T from the eigen pairs.
        let q = &eig.eigenvectors;
        let mut inv = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = T::zero();
                for k in 0..d {
                    acc += q[(i, k)] * q[(j, k)] / eig.eigenvalues[k];
                }
                inv[(i, j)] = acc;
            }
        }
        inv
    };
    a.transpose().matmul(&g_inv)
}

/// Condition number of an SPD matrix: lambda_max / lambda_min.
pub fn condition_number<T: Real>(g: &Matrix<T>) -> Result<T> {
    let eig = sym_eig(g)?;
    let d = g.rows();
    let lam_max = eig.eigenvalues[0];
    let lam_min = eig.eigenvalues[d - 1];
    if lam_min <= T::zero() {
        return Err(Error::NotPositiveDefinite { lambda_min: lam_min.f64() });
    }
    Ok(lam_max.abs() / lam_min.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256;

    fn random_matrix(rows: usize, cols: usize, rng: &mut Xoshiro256) -> Matrix<f64> {
        Matrix::from_fn(rows, cols, |_, _| rng.uniform_in(-1.0, 1.0))
    }

    #[test]
    fn sym_eig_identity() {
        let eig = sym_eig(&Matrix::<f64>::identity(5)).unwrap();
        for &lam in &eig.eigenvalues {
            assert!((lam - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sym_eig_diagonal_sorted() {
        let a = Matrix::from_rows(&[
            vec![5.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let eig = sym_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![5.0, 2.0, 1.0]);
    }

    #[test]
    fn sym_eig_reconstructs_random_psd() {
        let mut rng = Xoshiro256::new(1);
        for _ in 0..20 {
            let b = random_matrix(4, 7, &mut rng);
            let g = b.gram();
            let eig = sym_eig(&g).unwrap();
            // All eigenvalues of B B^T are >= 0.
            for &lam in &eig.eigenvalues {
                assert!(lam >= -1e-12, "negative eigenvalue {lam}");
            }
            // A q_i = lambda_i q_i within 1e-8 relative.
            let scale = eig.eigenvalues[0].abs().max(1.0);
            for i in 0..4 {
                let qi: Vec<f64> = (0..4).map(|r| eig.eigenvectors[(r, i)]).collect();
                let aq = g.mul_vec(&qi).unwrap();
                for r in 0..4 {
                    assert!(
                        (aq[r] - eig.eigenvalues[i] * qi[r]).abs() < 1e-8 * scale,
                        "eigenpair residual too large"
                    );
                }
            }
            // Reconstruction Q diag(lambda) Q^T = G within 1e-8.
            let q = &eig.eigenvectors;
            let mut rec = Matrix::<f64>::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for k in 0..4 {
                        acc += q[(i, k)] * eig.eigenvalues[k] * q[(j, k)];
                    }
                    rec[(i, j)] = acc;
                }
            }
            assert!(rec.sub(&g).unwrap().frobenius_norm() < 1e-8 * g.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn svd_orthonormal_rows_gives_unit_sigma() {
        // a = [I_2 | 0] (2x5)
        let mut a = Matrix::<f64>::zeros(2, 5);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 1.0;
        let svd = economy_svd(&a).unwrap();
        assert!((svd.sigma[0] - 1.0).abs() < 1e-12);
        assert!((svd.sigma[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_diagonal_padded() {
        let mut a = Matrix::<f64>::zeros(2, 4);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 2.0;
        let svd = economy_svd(&a).unwrap();
        assert!((svd.sigma[0] - 3.0).abs() < 1e-12);
        assert!((svd.sigma[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstruction_and_orthogonality() {
        let mut rng = Xoshiro256::new(2);
        let a = random_matrix(4, 20, &mut rng);
        let svd = economy_svd(&a).unwrap();
        let rec = svd.reconstruct();
        let err = rec.sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-9, "reconstruction error {err}");

        let utu = svd.u.transpose().matmul(&svd.u).unwrap();
        assert!(utu.sub(&Matrix::identity(4)).unwrap().frobenius_norm() < 1e-10);
        let vtv = svd.v_r.transpose().matmul(&svd.v_r).unwrap();
        assert!(vtv.sub(&Matrix::identity(4)).unwrap().frobenius_norm() < 1e-10);

        for w in svd.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(svd.sigma.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn svd_flags_rank_deficiency() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0]]);
        assert!(matches!(economy_svd(&a), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn pinv_orthonormal_rows_is_transpose() {
        let mut a = Matrix::<f64>::zeros(3, 6);
        for i in 0..3 {
            a[(i, i)] = 1.0;
        }
        let p = pinv_full_row_rank(&a).unwrap();
        assert!(p.sub(&a.transpose()).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn pinv_closed_form_1x2() {
        // a = (3, 4): a a^T = 25, pinv = a^T / 25 = (0.12, 0.16)^T.
        let a = Matrix::<f64>::from_rows(&[vec![3.0, 4.0]]);
        let p = pinv_full_row_rank(&a).unwrap();
        assert!((p[(0, 0)] - 0.12).abs() < 1e-14);
        assert!((p[(1, 0)] - 0.16).abs() < 1e-14);
    }

    #[test]
    fn pinv_right_identity_random() {
        let mut rng = Xoshiro256::new(3);
        let a = random_matrix(4, 100, &mut rng);
        let p = pinv_full_row_rank(&a).unwrap();
        let ap = a.matmul(&p).unwrap();
        let err = ap.sub(&Matrix::identity(4)).unwrap().frobenius_norm();
        assert!(err < 1e-10, "a * pinv deviates from identity by {err}");
    }

    #[test]
    fn pinv_rejects_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert!(matches!(
            pinv_full_row_rank(&a),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn condition_number_basics() {
        assert!((condition_number(&Matrix::<f64>::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        let g = Matrix::<f64>::from_rows(&[vec![4.0, 0.0], vec![0.0, 1.0]]);
        assert!((condition_number(&g).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn condition_number_not_spd_is_error() {
        let g = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -2.0]]);
        assert!(matches!(
            condition_number(&g),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn condition_number_matches_eig_ratio() {
        let mut rng = Xoshiro256::new(4);
        let j = random_matrix(3, 8, &mut rng);
        let g = j.gram();
        let kappa = condition_number(&g).unwrap();
        let eig = sym_eig(&g).unwrap();
        let ratio = eig.eigenvalues[0] / eig.eigenvalues[2];
        assert!((kappa - ratio).abs() <= 1e-10 * ratio);
    }

    #[test]
    fn condition_number_scale_invariant() {
        let mut rng = Xoshiro256::new(5);
        for _ in 0..10 {
            let j = random_matrix(3, 9, &mut rng);
            let g = j.gram();
            let k1 = condition_number(&g).unwrap();
            let k2 = condition_number(&g.scale(7.25)).unwrap();
            assert!((k1 - k2).abs() <= 1e-12 * k1);
        }
    }

    #[test]
    fn eigenvalues_of_gram_are_squared_singular_values() {
        let mut rng = Xoshiro256::new(6);
        for _ in 0..10 {
            let j = random_matrix(4, 15, &mut rng);
            let svd = economy_svd(&j).unwrap();
            let eig = sym_eig(&j.gram()).unwrap();
            for i in 0..4 {
                let s2 = svd.sigma[i] * svd.sigma[i];
                assert!(
                    (eig.eigenvalues[i] - s2).abs() <= 1e-8 * s2.max(1e-30),
                    "lambda {} vs sigma^2 {}",
                    eig.eigenvalues[i],
                    s2
                );
            }
        }
    }

    #[test]
    fn cholesky_solve_random_spd() {
        let mut rng = Xoshiro256::new(7);
        let j = random_matrix(5, 12, &mut rng);
        let g = j.gram();
        let l = cholesky(&g).unwrap();
        let b: Vec<f64> = (0..5).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let x = cholesky_solve(&l, &b);
        let gx = g.mul_vec(&x).unwrap();
        for i in 0..5 {
            assert!((gx[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn generic_scalar_f32_smoke() {
        let a = Matrix::<f32>::from_rows(&[vec![3.0, 4.0]]);
        let p = pinv_full_row_rank(&a).unwrap();
        assert!((p[(0, 0)] - 0.12).abs() < 1e-6);
    }
}

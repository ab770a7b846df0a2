//! Condition-number penalty (kappa(J J^T) - 1)^2 on a stacked encoder
//! Jacobian and its exact gradient with respect to the trainable network
//! parameters.
//!
//! The stacked Jacobian is J = [J_fixed; J_net], where J_fixed holds the
//! prescribed observable rows (no parameters) and J_net the network rows.
//! With G = J J^T, first-order eigenvalue perturbation gives
//! d lambda_i = q_i^T dG q_i = 2 q_i^T dJ (J^T q_i), and dJ is nonzero only
//! on the network rows, so each extreme eigenvalue reduces to one bilinear
//! Jacobian gradient.

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix};
use crate::net::mlp::{jacobian_bilinear_grad, ForwardTape, MlpParams, MlpSpec};
use crate::real::Real;

/// Relative eigenvalue gap below which extreme eigenvalues are treated as a
/// degenerate group and their perturbations averaged.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Relative threshold declaring the stacked Jacobian rank deficient.
pub const COND_RANK_TOL: f64 = 1e-24;

/// Penalty and parameter gradient for a prebuilt stacked Jacobian.
///
/// `phi_full` is the d x N stacked Jacobian whose first `d_star` rows carry
/// no parameters. `pool_back` maps an N-vector w to the network-input space
/// (the transpose action of any fixed linear front end; identity when the
/// network reads the raw state).
pub fn cond_penalty_grad_stacked<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    tape: &ForwardTape<T>,
    phi_full: &Matrix<T>,
    d_star: usize,
    pool_back: impl Fn(&[T]) -> Vec<T>,
) -> Result<(T, Vec<T>)> {
    let d = phi_full.rows();
    let g = phi_full.gram();
    let eig = sym_eig(&g)?;
    let lam_max = eig.eigenvalues[0];
    let lam_min = eig.eigenvalues[d - 1];
    if !(lam_min > T::of(COND_RANK_TOL) * lam_max) || lam_max <= T::zero() {
        let cond = if lam_min > T::zero() { (lam_max / lam_min).f64() } else { f64::INFINITY };
        return Err(Error::RankDeficient { op: "cond_penalty", cond });
    }

    let kappa = lam_max / lam_min;
    let penalty = (kappa - T::one()) * (kappa - T::one());

    // d penalty / d lambda for the two extremes.
    let dpen_dmax = T::of(2.0) * (kappa - T::one()) / lam_min;
    let dpen_dmin = -T::of(2.0) * (kappa - T::one()) * lam_max / (lam_min * lam_min);

    let gap = T::of(DEGENERACY_GAP) * lam_max;
    let top: Vec<usize> = (0..d)
        .filter(|&i| lam_max - eig.eigenvalues[i] < gap)
        .collect();
    let bottom: Vec<usize> = (0..d)
        .filter(|&i| eig.eigenvalues[i] - lam_min < gap)
        .collect();

    // grad lambda_i = 2 * d/dtheta (q_i^T J_net (J^T q_i)), restricted to the
    // network rows of q_i.
    let eigen_grad = |i: usize| -> Result<Vec<T>> {
        let q: Vec<T> = (0..d).map(|r| eig.eigenvectors[(r, i)]).collect();
        let w_full = phi_full.tr_mul_vec(&q)?;
        let w_net = pool_back(&w_full);
        let u_net = &q[d_star..];
        let g = jacobian_bilinear_grad(spec, params, tape, u_net, &w_net)?;
        Ok(g.into_iter().map(|v| v * T::of(2.0)).collect())
    };

    let group_mean = |idx: &[usize]| -> Result<Vec<T>> {
        let mut acc = vec![T::zero(); spec.flat_len()];
        for &i in idx {
            let g = eigen_grad(i)?;
            for (a, v) in acc.iter_mut().zip(&g) {
                *a += *v;
            }
        }
        let inv = T::one() / T::of(idx.len() as f64);
        for a in acc.iter_mut() {
            *a *= inv;
        }
        Ok(acc)
    };

    let gmax = group_mean(&top)?;
    let gmin = group_mean(&bottom)?;
    let grad: Vec<T> = gmax
        .iter()
        .zip(&gmin)
        .map(|(&a, &b)| dpen_dmax * a + dpen_dmin * b)
        .collect();

    Ok((penalty, grad))
}

/// Penalty and gradient for an encoder whose network reads the raw state:
/// stacks the fixed observable Jacobian over the network input-Jacobian at
/// `x` and differentiates through both the product structure and the
/// activation derivatives.
pub fn cond_penalty_and_grad<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    x: &[T],
    phi_star_jac: &Matrix<T>,
) -> Result<(T, Vec<T>)> {
    let (_, tape) = super::mlp::forward(spec, params, x)?;
    let j_net = super::mlp::input_jacobian(spec, params, &tape)?;
    let full = phi_star_jac.vstack(&j_net)?;
    cond_penalty_grad_stacked(
        spec,
        params,
        &tape,
        &full,
        phi_star_jac.rows(),
        |w| w.to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::condition_number;
    use crate::net::mlp::{forward, input_jacobian, Activation};
    use crate::rng::Xoshiro256;

    #[test]
    fn orthonormal_rows_give_zero_penalty_and_gradient() {
        // Single linear layer selecting coordinates 2..4: rows of the stacked
        // Jacobian are distinct unit vectors, kappa = 1.
        let spec = MlpSpec::new(vec![6, 2], Activation::Tanh);
        let mut params = MlpParams::<f64>::zeros(&spec);
        params.weights[0][(0, 2)] = 1.0;
        params.weights[0][(1, 3)] = 1.0;
        let mut phi_star = Matrix::<f64>::zeros(1, 6);
        phi_star[(0, 0)] = 1.0;
        let x = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let (pen, grad) = cond_penalty_and_grad(&spec, &params, &x, &phi_star).unwrap();
        assert!(pen.abs() < 1e-24, "penalty {pen}");
        assert!(grad.iter().all(|&g| g.abs() < 1e-12));
    }

    #[test]
    fn penalty_is_nonnegative() {
        let mut rng = Xoshiro256::new(20);
        let spec = MlpSpec::new(vec![6, 8, 3], Activation::Tanh);
        for _ in 0..10 {
            let params = MlpParams::<f64>::init(&spec, &mut rng);
            let phi_star =
                Matrix::<f64>::from_fn(1, 6, |_, _| rng.uniform_in(-1.0, 1.0));
            let x: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let (pen, _) = cond_penalty_and_grad(&spec, &params, &x, &phi_star).unwrap();
            assert!(pen >= 0.0);
        }
    }

    #[test]
    fn penalty_depends_only_on_gram_eigenvalues() {
        // Two parameterizations with identical G = phi' phi'^T produce the
        // same penalty: permuting network output rows leaves G's spectrum
        // unchanged and only swaps eigenvector entries.
        let spec = MlpSpec::new(vec![5, 4, 2], Activation::Tanh);
        let mut rng = Xoshiro256::new(21);
        let params = MlpParams::<f64>::init(&spec, &mut rng);
        let phi_star = Matrix::<f64>::from_fn(1, 5, |_, j| if j == 0 { 0.7 } else { 0.1 });
        let x: Vec<f64> = (0..5).map(|_| rng.uniform_in(-1.0, 1.0)).collect();

        let mut swapped = params.clone();
        // Swap the two output rows (weights and biases) of the last layer.
        let w = &params.weights[1];
        let mut w2 = w.clone();
        for c in 0..w.cols() {
            w2[(0, c)] = w[(1, c)];
            w2[(1, c)] = w[(0, c)];
        }
        swapped.weights[1] = w2;
        swapped.biases[1].swap(0, 1);

        let (p1, _) = cond_penalty_and_grad(&spec, &params, &x, &phi_star).unwrap();
        let (p2, _) = cond_penalty_and_grad(&spec, &swapped, &x, &phi_star).unwrap();
        assert!((p1 - p2).abs() <= 1e-12 * p1.abs().max(1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Xoshiro256::new(22);
        // N = 6, d_star = 1, network outputs 2 => d = 3 as in the toy sizing.
        let spec = MlpSpec::new(vec![6, 5, 2], Activation::Tanh);
        for case in 0..6 {
            let params = MlpParams::<f64>::init(&spec, &mut rng);
            let phi_star =
                Matrix::<f64>::from_fn(1, 6, |_, _| rng.uniform_in(-1.0, 1.0));
            let x: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();

            let (_, grad) = cond_penalty_and_grad(&spec, &params, &x, &phi_star).unwrap();

            let value = |p: &MlpParams<f64>| -> f64 {
                let (_, tape) = forward(&spec, p, &x).unwrap();
                let jn = input_jacobian(&spec, p, &tape).unwrap();
                let full = phi_star.vstack(&jn).unwrap();
                let kappa = condition_number(&full.gram()).unwrap();
                (kappa - 1.0) * (kappa - 1.0)
            };
            let flat = params.to_flat();
            let h = 1e-5;
            let mut fd = vec![0.0; flat.len()];
            for i in 0..flat.len() {
                let mut plus = flat.clone();
                plus[i] += h;
                let mut minus = flat.clone();
                minus[i] -= h;
                fd[i] = (value(&MlpParams::from_flat(&spec, &plus).unwrap())
                    - value(&MlpParams::from_flat(&spec, &minus).unwrap()))
                    / (2.0 * h);
            }
            let num: f64 = grad
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = num / den.max(1e-12);
            assert!(err < 1e-4, "case {case}: cond grad rel err {err}");
        }
    }

    #[test]
    fn rank_deficient_stack_is_an_error() {
        // Zero network weights make the network rows vanish.
        let spec = MlpSpec::new(vec![4, 3, 1], Activation::Tanh);
        let params = MlpParams::<f64>::zeros(&spec);
        let phi_star = Matrix::<f64>::from_fn(1, 4, |_, j| (j + 1) as f64);
        let x = [0.1, 0.2, 0.3, 0.4];
        assert!(matches!(
            cond_penalty_and_grad(&spec, &params, &x, &phi_star),
            Err(Error::RankDeficient { .. })
        ));
    }
}

//! Two-dimensional Allen-Cahn equation on the unit square with zero Neumann
//! boundaries: dv/dt = lap(v) - F'(v)/eps^2, F(v) = (v^2-1)^2/4.
//!
//! Grid cells are the microscopic particles (m = 1), row-major layout:
//! x[i*grid + j] = v at cell (i, j), cell centers ((i+1/2)h, (j+1/2)h).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcParams<T> {
    pub grid: usize,
    pub epsilon: T,
    pub dt: T,
}

/// atanh(0.9), the interface-profile constant in the epsilon formula.
const ATANH_09: f64 = 1.472_219_489_583_220_3;

impl<T: Real> AcParams<T> {
    /// Parameters for a grid x grid discretization. The interface parameter
    /// keeps the transition layer about ten cells wide at any resolution:
    /// eps = (10 h) / (2 sqrt(2) atanh(0.9)) with h = 1/grid. The default
    /// step keeps dt * lap_max = 2 inside the RK4 stability region.
    pub fn new(grid: usize) -> Self {
        assert!(grid >= 8, "grid too coarse");
        let h = 1.0 / grid as f64;
        let epsilon = 10.0 * h / (2.0 * std::f64::consts::SQRT_2 * ATANH_09);
        let dt = 1.0 / (4.0 * (grid * grid) as f64);
        AcParams { grid, epsilon: T::of(epsilon), dt: T::of(dt) }
    }

    pub fn n(&self) -> usize {
        self.grid * self.grid
    }

    #[inline]
    pub fn h(&self) -> T {
        T::one() / T::of(self.grid as f64)
    }
}

impl<T: Real> Default for AcParams<T> {
    fn default() -> Self {
        Self::new(64)
    }
}

/// Neumann ghost: reflect the index at the boundary.
#[inline]
fn reflect(i: isize, g: usize) -> usize {
    if i < 0 {
        0
    } else if i as usize >= g {
        g - 1
    } else {
        i as usize
    }
}

#[inline]
fn cell_rhs<T: Real>(p: &AcParams<T>, x: &[T], i: usize, j: usize) -> T {
    let g = p.grid;
    let h2_inv = T::of((g * g) as f64);
    let at = |r: isize, c: isize| x[reflect(r, g) * g + reflect(c, g)];
    let v = at(i as isize, j as isize);
    let lap = (at(i as isize + 1, j as isize)
        + at(i as isize - 1, j as isize)
        + at(i as isize, j as isize + 1)
        + at(i as isize, j as isize - 1)
        - v * T::of(4.0))
        * h2_inv;
    let fp = v * v * v - v;
    lap - fp / (p.epsilon * p.epsilon)
}

pub fn ac_rhs<T: Real>(p: &AcParams<T>, x: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), p.n());
    let g = p.grid;
    let mut out = vec![T::zero(); p.n()];
    for i in 0..g {
        for j in 0..g {
            out[i * g + j] = cell_rhs(p, x, i, j);
        }
    }
    out
}

pub fn ac_partial_rhs<T: Real>(p: &AcParams<T>, x: &[T], mask: &[usize]) -> Result<Vec<T>> {
    let g = p.grid;
    let mut out = Vec::with_capacity(mask.len());
    for &k in mask {
        if k >= p.n() {
            return Err(Error::MaskIndex { index: k, n: p.n() });
        }
        out.push(cell_rhs(p, x, k / g, k % g));
    }
    Ok(out)
}

/// Torus profile at distance d from the domain center.
#[inline]
pub fn ac_profile(r1: f64, r2: f64, epsilon: f64, d: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * epsilon;
    -1.0 + ((r1 - d) / s).tanh() - ((r2 - d) / s).tanh()
}

/// Torus initial condition: v = -1 + tanh((r1-d)/(sqrt(2) eps))
/// - tanh((r2-d)/(sqrt(2) eps)), d = distance to the domain center.
pub fn ac_initial<T: Real>(p: &AcParams<T>, r1: f64, r2: f64) -> Result<Vec<T>> {
    if !(0.3..=0.4).contains(&r1) || !(0.1..=0.15).contains(&r2) {
        return Err(Error::ParamOutOfRange(format!(
            "allen-cahn initial condition (r1, r2) = ({r1}, {r2}) outside [0.3,0.4]x[0.1,0.15]"
        )));
    }
    let g = p.grid;
    let h = 1.0 / g as f64;
    let eps = p.epsilon.f64();
    let mut x = vec![T::zero(); p.n()];
    for i in 0..g {
        for j in 0..g {
            let cx = (i as f64 + 0.5) * h;
            let cy = (j as f64 + 0.5) * h;
            let d = ((cx - 0.5).powi(2) + (cy - 0.5).powi(2)).sqrt();
            x[i * g + j] = T::of(ac_profile(r1, r2, eps, d));
        }
    }
    Ok(x)
}

/// Discrete free energy by the midpoint rule with forward differences on
/// interior faces:
///   E = h^2 sum F(v)/eps^2 + (1/2) sum_faces (dv)^2,
/// together with its exact gradient (the observable Jacobian, 1 x N).
///
/// With this quadrature the gradient is dE/dv = -h^2 * rhs, so the discrete
/// flow dissipates exactly this energy.
pub fn ac_energy<T: Real>(p: &AcParams<T>, x: &[T]) -> (Vec<T>, Matrix<T>) {
    let g = p.grid;
    let h2 = T::one() / T::of((g * g) as f64);
    let inv_eps2 = T::one() / (p.epsilon * p.epsilon);
    let mut energy = T::zero();
    let mut jac = Matrix::zeros(1, p.n());

    for i in 0..g {
        for j in 0..g {
            let v = x[i * g + j];
            let q = v * v - T::one();
            energy += h2 * inv_eps2 * q * q * T::of(0.25);
            jac[(0, i * g + j)] += h2 * inv_eps2 * (v * v * v - v);
        }
    }
    // Interior faces in both directions; gradient contribution (dv)^2/2
    // (the h^2 quadrature weight cancels the 1/h^2 of the squared gradient).
    let half = T::of(0.5);
    for i in 0..g {
        for j in 0..g {
            let v = x[i * g + j];
            if i + 1 < g {
                let dv = x[(i + 1) * g + j] - v;
                energy += half * dv * dv;
                jac[(0, i * g + j)] -= dv;
                jac[(0, (i + 1) * g + j)] += dv;
            }
            if j + 1 < g {
                let dv = x[i * g + j + 1] - v;
                energy += half * dv * dv;
                jac[(0, i * g + j)] -= dv;
                jac[(0, i * g + j + 1)] += dv;
            }
        }
    }
    (vec![energy], jac)
}

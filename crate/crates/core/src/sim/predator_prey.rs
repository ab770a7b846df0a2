//! One-dimensional predator-prey reaction-diffusion system, discretized on a
//! uniform grid with Neumann boundaries.
//!
//! State layout: particle i is grid cell i with two components,
//! x[2i] = u_i (prey), x[2i+1] = v_i (predator).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpParams<T> {
    pub a: T,
    pub b: T,
    /// Prey diffusion coefficient; the predator diffusion is fixed at 1.
    pub diffusion: T,
    pub grid: usize,
    pub dx: T,
}

impl<T: Real> Default for PpParams<T> {
    fn default() -> Self {
        PpParams {
            a: T::of(3.0),
            b: T::of(0.4),
            diffusion: T::zero(),
            grid: 50,
            dx: T::of(0.02),
        }
    }
}

impl<T: Real> PpParams<T> {
    pub fn n(&self) -> usize {
        self.grid
    }

    pub fn dim(&self) -> usize {
        2 * self.grid
    }

    /// Cell-centered grid coordinate of cell i.
    #[inline]
    pub fn grid_x(&self, i: usize) -> T {
        (T::of(i as f64) + T::of(0.5)) * self.dx
    }
}

/// One-sided second-difference at the boundaries, centered inside.
#[inline]
fn laplacian_at<T: Real>(field: impl Fn(usize) -> T, i: usize, grid: usize, inv_dx2: T) -> T {
    if i == 0 {
        (field(1) - field(0)) * inv_dx2
    } else if i == grid - 1 {
        (field(grid - 2) - field(grid - 1)) * inv_dx2
    } else {
        (field(i + 1) - field(i) * T::of(2.0) + field(i - 1)) * inv_dx2
    }
}

/// Time derivative of one grid cell: (du_i/dt, dv_i/dt).
#[inline]
fn cell_rhs<T: Real>(p: &PpParams<T>, x: &[T], i: usize) -> (T, T) {
    let inv_dx2 = T::one() / (p.dx * p.dx);
    let u = |k: usize| x[2 * k];
    let v = |k: usize| x[2 * k + 1];
    let ui = u(i);
    let vi = v(i);
    let du = ui * (T::one() - ui - vi) + p.diffusion * laplacian_at(u, i, p.grid, inv_dx2);
    let dv = p.a * vi * (ui - p.b) + laplacian_at(v, i, p.grid, inv_dx2);
    (du, dv)
}

pub fn pp_rhs<T: Real>(p: &PpParams<T>, x: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), p.dim());
    let mut out = vec![T::zero(); p.dim()];
    for i in 0..p.grid {
        let (du, dv) = cell_rhs(p, x, i);
        out[2 * i] = du;
        out[2 * i + 1] = dv;
    }
    out
}

/// Forces on the masked cells only, packed in mask order; each entry needs at
/// most its two grid neighbours, so the cost is O(|mask|).
pub fn pp_partial_rhs<T: Real>(p: &PpParams<T>, x: &[T], mask: &[usize]) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(2 * mask.len());
    for &i in mask {
        if i >= p.grid {
            return Err(Error::MaskIndex { index: i, n: p.grid });
        }
        let (du, dv) = cell_rhs(p, x, i);
        out.push(du);
        out.push(dv);
    }
    Ok(out)
}

/// Initial profile u = mu + sigma cos(5 pi x), v = 1 - u.
pub fn pp_initial<T: Real>(p: &PpParams<T>, mu: f64, sigma: f64) -> Result<Vec<T>> {
    if !(0.0..=0.2).contains(&mu) || !(0.4..=0.6).contains(&sigma) {
        return Err(Error::ParamOutOfRange(format!(
            "predator-prey initial condition (mu, sigma) = ({mu}, {sigma}) outside [0,0.2]x[0.4,0.6]"
        )));
    }
    let mut x = vec![T::zero(); p.dim()];
    for i in 0..p.grid {
        let xi = p.grid_x(i).f64();
        let u = mu + sigma * (5.0 * std::f64::consts::PI * xi).cos();
        x[2 * i] = T::of(u);
        x[2 * i + 1] = T::of(1.0 - u);
    }
    Ok(x)
}

/// Spatial averages (u_bar, v_bar) and their constant Jacobian.
pub fn pp_observable<T: Real>(p: &PpParams<T>, x: &[T]) -> (Vec<T>, Matrix<T>) {
    let inv_n = T::one() / T::of(p.grid as f64);
    let mut u_bar = T::zero();
    let mut v_bar = T::zero();
    for i in 0..p.grid {
        u_bar += x[2 * i];
        v_bar += x[2 * i + 1];
    }
    u_bar *= inv_n;
    v_bar *= inv_n;
    let mut jac = Matrix::zeros(2, p.dim());
    for i in 0..p.grid {
        jac[(0, 2 * i)] = inv_n;
        jac[(1, 2 * i + 1)] = inv_n;
    }
    (vec![u_bar, v_bar], jac)
}

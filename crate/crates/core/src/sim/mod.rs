//! Microscopic systems: full and partial right-hand-side evaluation, time
//! integrators, initial-condition generators, and macroscopic observables
//! with analytic Jacobians.

pub mod allen_cahn;
pub mod lennard_jones;
pub mod predator_prey;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

pub use allen_cahn::AcParams;
pub use lennard_jones::LjParams;
pub use predator_prey::PpParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    PredatorPrey,
    AllenCahn,
    LennardJones,
}

/// Microscopic system: kind plus its parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemDescriptor<T> {
    PredatorPrey(PpParams<T>),
    AllenCahn(AcParams<T>),
    LennardJones(LjParams<T>),
}

impl<T: Real> SystemDescriptor<T> {
    pub fn kind(&self) -> SystemKind {
        match self {
            SystemDescriptor::PredatorPrey(_) => SystemKind::PredatorPrey,
            SystemDescriptor::AllenCahn(_) => SystemKind::AllenCahn,
            SystemDescriptor::LennardJones(_) => SystemKind::LennardJones,
        }
    }

    /// Number of microscopic particles (grid cells or atoms).
    pub fn n(&self) -> usize {
        match self {
            SystemDescriptor::PredatorPrey(p) => p.n(),
            SystemDescriptor::AllenCahn(p) => p.n(),
            SystemDescriptor::LennardJones(p) => p.n(),
        }
    }

    /// Per-particle coordinate dimension m.
    pub fn m(&self) -> usize {
        match self {
            SystemDescriptor::PredatorPrey(_) => 2,
            SystemDescriptor::AllenCahn(_) => 1,
            SystemDescriptor::LennardJones(_) => 6,
        }
    }

    /// Full state dimension N = n * m.
    pub fn dim(&self) -> usize {
        self.n() * self.m()
    }

    /// Dimension of the prescribed macroscopic observable.
    pub fn d_star(&self) -> usize {
        match self {
            SystemDescriptor::PredatorPrey(_) => 2,
            SystemDescriptor::AllenCahn(_) => 1,
            SystemDescriptor::LennardJones(_) => 1,
        }
    }

    /// Full right-hand side f(x).
    pub fn rhs(&self, x: &[T]) -> Result<Vec<T>> {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            SystemDescriptor::PredatorPrey(p) => Ok(predator_prey::pp_rhs(p, x)),
            SystemDescriptor::AllenCahn(p) => Ok(allen_cahn::ac_rhs(p, x)),
            SystemDescriptor::LennardJones(p) => lennard_jones::lj_forces(p, x),
        }
    }

    /// Right-hand-side blocks of the masked particles only, packed in mask
    /// order (|mask| * m values). Never evaluates unmasked coordinates.
    pub fn partial_rhs(&self, x: &[T], mask: &[usize]) -> Result<Vec<T>> {
        match self {
            SystemDescriptor::PredatorPrey(p) => predator_prey::pp_partial_rhs(p, x, mask),
            SystemDescriptor::AllenCahn(p) => allen_cahn::ac_partial_rhs(p, x, mask),
            SystemDescriptor::LennardJones(p) => lennard_jones::lj_partial_forces(p, x, mask),
        }
    }

    /// Macroscopic observable z* and its analytic d* x N Jacobian.
    pub fn observable(&self, x: &[T]) -> (Vec<T>, Matrix<T>) {
        match self {
            SystemDescriptor::PredatorPrey(p) => predator_prey::pp_observable(p, x),
            SystemDescriptor::AllenCahn(p) => allen_cahn::ac_energy(p, x),
            SystemDescriptor::LennardJones(p) => lennard_jones::lj_observable(p, x),
        }
    }

    /// Initial condition from the system's two-parameter family
    /// (predator-prey: (mu, sigma); Allen-Cahn: (r1, r2); Lennard-Jones:
    /// (T0, unused)). `seed` only affects Lennard-Jones velocity directions.
    pub fn initial(&self, p0: f64, p1: f64, seed: u64) -> Result<Vec<T>> {
        match self {
            SystemDescriptor::PredatorPrey(p) => predator_prey::pp_initial(p, p0, p1),
            SystemDescriptor::AllenCahn(p) => allen_cahn::ac_initial(p, p0, p1),
            SystemDescriptor::LennardJones(p) => lennard_jones::lj_initial(p, p0, seed),
        }
    }

    /// Sampling box for the initial-condition parameters.
    pub fn initial_param_ranges(&self) -> [(f64, f64); 2] {
        match self {
            SystemDescriptor::PredatorPrey(_) => [(0.0, 0.2), (0.4, 0.6)],
            SystemDescriptor::AllenCahn(_) => [(0.3, 0.4), (0.1, 0.15)],
            // Second parameter unused for Lennard-Jones.
            SystemDescriptor::LennardJones(_) => [(0.5, 1.5), (0.0, 0.0)],
        }
    }
}

/// Validated microscopic state.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState<T: Real> {
    pub system: SystemDescriptor<T>,
    pub x: Vec<T>,
}

impl<T: Real> MicroState<T> {
    pub fn new(system: SystemDescriptor<T>, x: Vec<T>) -> Result<Self> {
        if x.len() != system.dim() {
            return Err(Error::DimMismatch {
                op: "MicroState::new",
                detail: format!("state length {} vs system dim {}", x.len(), system.dim()),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { op: "MicroState::new", step: 0 });
        }
        Ok(MicroState { system, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    Rk4,
    VelocityVerlet,
}

/// Fixed-step trajectory with snapshots every `stride` steps (including the
/// initial state).
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<T>>,
}

/// Integrate the system for `steps` fixed steps of size `dt`, recording a
/// snapshot every `stride` steps. Aborts with the step index if the state
/// stops being finite.
pub fn integrate<T: Real>(
    system: &SystemDescriptor<T>,
    x0: &[T],
    dt: T,
    steps: usize,
    stride: usize,
    scheme: Scheme,
) -> Result<Trajectory<T>> {
    assert!(dt > T::zero(), "dt must be positive");
    assert!(stride >= 1, "stride must be at least 1");
    let mut x = x0.to_vec();
    let mut times = vec![0.0];
    let mut snapshots = vec![x.clone()];

    // Velocity-Verlet keeps accelerations across steps.
    let mut verlet_accels = match (scheme, system) {
        (Scheme::VelocityVerlet, SystemDescriptor::LennardJones(p)) => {
            Some(lennard_jones::lj_accels(p, &x)?)
        }
        (Scheme::VelocityVerlet, _) => {
            return Err(Error::Config(
                "velocity_verlet applies to the Lennard-Jones system only".into(),
            ))
        }
        _ => None,
    };

    for step in 1..=steps {
        match scheme {
            Scheme::Euler => {
                let f = system.rhs(&x)?;
                for (xi, fi) in x.iter_mut().zip(&f) {
                    *xi += dt * *fi;
                }
                if let SystemDescriptor::LennardJones(p) = system {
                    lennard_jones::wrap_positions(p, &mut x);
                }
            }
            Scheme::Rk4 => {
                rk4_step(|y| system.rhs(y), &mut x, dt)?;
                if let SystemDescriptor::LennardJones(p) = system {
                    lennard_jones::wrap_positions(p, &mut x);
                }
            }
            Scheme::VelocityVerlet => {
                if let SystemDescriptor::LennardJones(p) = system {
                    lennard_jones::velocity_verlet_step(
                        p,
                        &mut x,
                        verlet_accels.as_mut().unwrap(),
                        dt,
                    )?;
                }
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { op: "integrate", step });
        }
        if step % stride == 0 {
            times.push(dt.f64() * step as f64);
            snapshots.push(x.clone());
        }
    }
    Ok(Trajectory { times, snapshots })
}

/// One classical Runge-Kutta step of dx/dt = f(x) in place.
pub fn rk4_step<T: Real>(
    mut f: impl FnMut(&[T]) -> Result<Vec<T>>,
    x: &mut [T],
    dt: T,
) -> Result<()> {
    let half = T::of(0.5);
    let sixth = T::one() / T::of(6.0);
    let k1 = f(x)?;
    let mut tmp: Vec<T> = x.iter().zip(&k1).map(|(&a, &k)| a + half * dt * k).collect();
    let k2 = f(&tmp)?;
    for ((t, &a), &k) in tmp.iter_mut().zip(x.iter()).zip(&k2) {
        *t = a + half * dt * k;
    }
    let k3 = f(&tmp)?;
    for ((t, &a), &k) in tmp.iter_mut().zip(x.iter()).zip(&k3) {
        *t = a + dt * k;
    }
    let k4 = f(&tmp)?;
    for (i, xi) in x.iter_mut().enumerate() {
        *xi += dt * sixth * (k1[i] + T::of(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    Ok(())
}

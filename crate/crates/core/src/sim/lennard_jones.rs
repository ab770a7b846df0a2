//! Lennard-Jones fluid in a cubic periodic box, reduced units
//! (eps = sigma = m = 1), pair potential truncated at r_cut.
//!
//! State layout: atom i occupies x[6i..6i+6] = (r_ix, r_iy, r_iz, v_ix,
//! v_iy, v_iz). The per-atom "force" in the ODE sense is the 6-vector
//! (v_i, F_i): velocity pass-through plus Newtonian acceleration.
//!
//! Neighbor search uses a linked-cell grid in CSR layout with a distance-
//! pruned stencil and per-cell periodic image shifts, so the inner loop is
//! free of per-pair minimum-image rounding. Small boxes (fewer than three
//! cells per side at the reach-1 edge) fall back to the direct O(n^2) sum
//! with minimum image. Full and partial evaluations share the same per-atom
//! traversal, so masked entries match full entries bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;
use crate::rng::Xoshiro256;

pub const DENSITY: f64 = 0.8;
pub const OVERLAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjParams<T> {
    pub n_atoms: usize,
    pub box_len: T,
    pub r_cut: T,
    pub dt: T,
    pub steps: usize,
}

impl<T: Real> LjParams<T> {
    /// Cubic box at density 0.8 for the given atom count.
    pub fn new(n_atoms: usize) -> Self {
        let box_len = (n_atoms as f64 / DENSITY).cbrt();
        let p = LjParams {
            n_atoms,
            box_len: T::of(box_len),
            r_cut: T::of(2.5),
            dt: T::of(0.001),
            steps: 250,
        };
        assert!(
            p.box_len > T::of(2.0) * p.r_cut,
            "box must exceed twice the cutoff ({n_atoms} atoms give box {box_len})"
        );
        p
    }

    pub fn n(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        6 * self.n_atoms
    }
}

impl<T: Real> Default for LjParams<T> {
    fn default() -> Self {
        Self::new(108)
    }
}

/// Pair force factor: F_on_i = factor(r^2) * (r_i - r_j), zero beyond the
/// cutoff. factor = 24 (2 r^-12 - r^-6) / r^2.
#[inline]
fn force_factor<T: Real>(r2: T) -> T {
    let inv_r2 = T::one() / r2;
    let inv_r6 = inv_r2 * inv_r2 * inv_r2;
    let inv_r12 = inv_r6 * inv_r6;
    T::of(24.0) * (T::of(2.0) * inv_r12 - inv_r6) * inv_r2
}

/// Truncated pair potential, unshifted.
#[inline]
fn pair_potential<T: Real>(r2: T) -> T {
    let inv_r2 = T::one() / r2;
    let inv_r6 = inv_r2 * inv_r2 * inv_r2;
    T::of(4.0) * (inv_r6 * inv_r6 - inv_r6)
}

/// Linked-cell grid in CSR layout.
pub struct CellGrid<T> {
    cps: usize,
    edge: f64,
    /// Stencil offsets whose minimum cell-to-cell distance is within r_cut.
    stencil: Vec<(isize, isize, isize)>,
    /// CSR: atoms sorted by cell id; starts[c]..starts[c+1] slices `order`.
    starts: Vec<usize>,
    order: Vec<usize>,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> CellGrid<T> {
    /// Pick the finest cell size that still rules out duplicate periodic
    /// images (cells per side >= 2*reach + 1). Returns None when even the
    /// reach-1 grid has fewer than three cells per side; callers then use
    /// the direct minimum-image sum.
    pub fn build(p: &LjParams<T>, x: &[T]) -> Option<CellGrid<T>> {
        let box_len = p.box_len.f64();
        let r_cut = p.r_cut.f64();
        let cps2 = (2.0 * box_len / r_cut).floor() as usize;
        let cps1 = (box_len / r_cut).floor() as usize;
        let cps = if cps2 >= 5 {
            cps2
        } else if cps1 >= 3 {
            cps1
        } else {
            return None;
        };
        let edge = box_len / cps as f64;
        let reach = (r_cut / edge).ceil() as isize;
        debug_assert!(cps >= (2 * reach + 1) as usize);

        let mut stencil = Vec::new();
        for ox in -reach..=reach {
            for oy in -reach..=reach {
                for oz in -reach..=reach {
                    let min_axis = |o: isize| edge * (o.abs().max(1) - 1) as f64;
                    let d2 =
                        min_axis(ox).powi(2) + min_axis(oy).powi(2) + min_axis(oz).powi(2);
                    if d2 <= r_cut * r_cut {
                        stencil.push((ox, oy, oz));
                    }
                }
            }
        }

        let n = p.n_atoms;
        let n_cells = cps * cps * cps;
        let cell_of = |i: usize| -> usize {
            let cx = cell_coord(x[6 * i], edge, cps);
            let cy = cell_coord(x[6 * i + 1], edge, cps);
            let cz = cell_coord(x[6 * i + 2], edge, cps);
            (cx * cps + cy) * cps + cz
        };
        let mut counts = vec![0usize; n_cells + 1];
        for i in 0..n {
            counts[cell_of(i) + 1] += 1;
        }
        for c in 0..n_cells {
            counts[c + 1] += counts[c];
        }
        let starts = counts.clone();
        let mut cursor = counts;
        let mut order = vec![0usize; n];
        for i in 0..n {
            let c = cell_of(i);
            order[cursor[c]] = i;
            cursor[c] += 1;
        }
        Some(CellGrid {
            cps,
            edge,
            stencil,
            starts,
            order,
            _marker: std::marker::PhantomData,
        })
    }
}

#[inline]
fn cell_coord<T: Real>(r: T, edge: f64, cps: usize) -> usize {
    let c = (r.f64() / edge).floor() as isize;
    // Wrapped positions keep c in range; clamp guards the r == box edge case.
    c.clamp(0, cps as isize - 1) as usize
}

/// Visit every candidate pair partner of atom i: `visit(j, shift, self_image)`
/// where `shift` is the periodic image offset to add to atom j's position.
/// Candidates beyond the cutoff are included; the caller filters by distance.
fn for_each_candidate<T: Real>(
    p: &LjParams<T>,
    x: &[T],
    i: usize,
    grid: Option<&CellGrid<T>>,
    mut visit: impl FnMut(usize, [T; 3], bool) -> Result<()>,
) -> Result<()> {
    match grid {
        Some(g) => {
            let cps = g.cps as isize;
            let box_len = p.box_len;
            let cx = cell_coord(x[6 * i], g.edge, g.cps) as isize;
            let cy = cell_coord(x[6 * i + 1], g.edge, g.cps) as isize;
            let cz = cell_coord(x[6 * i + 2], g.edge, g.cps) as isize;
            for &(ox, oy, oz) in &g.stencil {
                let mut shift = [T::zero(); 3];
                let mut wrap = |c: isize, s: &mut T| -> isize {
                    if c < 0 {
                        *s = -box_len;
                        c + cps
                    } else if c >= cps {
                        *s = box_len;
                        c - cps
                    } else {
                        c
                    }
                };
                let nx = wrap(cx + ox, &mut shift[0]);
                let ny = wrap(cy + oy, &mut shift[1]);
                let nz = wrap(cz + oz, &mut shift[2]);
                let cell = ((nx * cps + ny) * cps + nz) as usize;
                let self_image = shift[0] == T::zero()
                    && shift[1] == T::zero()
                    && shift[2] == T::zero();
                for &j in &g.order[g.starts[cell]..g.starts[cell + 1]] {
                    visit(j, shift, self_image)?;
                }
            }
        }
        None => {
            let box_len = p.box_len;
            for j in 0..p.n_atoms {
                if j == i {
                    continue;
                }
                // Minimum-image shift for this pair.
                let mut shift = [T::zero(); 3];
                for (a, s) in shift.iter_mut().enumerate() {
                    let d = x[6 * i + a] - x[6 * j + a];
                    *s = -box_len * (d / box_len).round();
                }
                visit(j, shift, false)?;
            }
        }
    }
    Ok(())
}

/// Total force on atom i from all pairs within the cutoff.
fn atom_force<T: Real>(
    p: &LjParams<T>,
    x: &[T],
    i: usize,
    grid: Option<&CellGrid<T>>,
) -> Result<[T; 3]> {
    let r_cut2 = p.r_cut * p.r_cut;
    let overlap2 = T::of(OVERLAP_TOL * OVERLAP_TOL);
    let (xi, yi, zi) = (x[6 * i], x[6 * i + 1], x[6 * i + 2]);
    let mut f = [T::zero(); 3];
    for_each_candidate(p, x, i, grid, |j, shift, self_image| {
        if j == i && self_image {
            return Ok(());
        }
        let dx = xi - (x[6 * j] + shift[0]);
        let dy = yi - (x[6 * j + 1] + shift[1]);
        let dz = zi - (x[6 * j + 2] + shift[2]);
        let r2 = dx * dx + dy * dy + dz * dz;
        if r2 > r_cut2 {
            return Ok(());
        }
        if r2 < overlap2 {
            return Err(Error::AtomOverlap { i, j, r: r2.f64().sqrt() });
        }
        let k = force_factor(r2);
        f[0] += k * dx;
        f[1] += k * dy;
        f[2] += k * dz;
        Ok(())
    })?;
    Ok(f)
}

/// Accelerations on every atom (mass 1).
pub fn lj_accels<T: Real>(p: &LjParams<T>, x: &[T]) -> Result<Vec<[T; 3]>> {
    let grid = CellGrid::build(p, x);
    (0..p.n_atoms)
        .map(|i| atom_force(p, x, i, grid.as_ref()))
        .collect()
}

/// Full right-hand side: (dr/dt, dv/dt) = (v, F) per atom.
pub fn lj_forces<T: Real>(p: &LjParams<T>, x: &[T]) -> Result<Vec<T>> {
    let accels = lj_accels(p, x)?;
    let mut out = vec![T::zero(); p.dim()];
    for i in 0..p.n_atoms {
        out[6 * i] = x[6 * i + 3];
        out[6 * i + 1] = x[6 * i + 4];
        out[6 * i + 2] = x[6 * i + 5];
        out[6 * i + 3] = accels[i][0];
        out[6 * i + 4] = accels[i][1];
        out[6 * i + 5] = accels[i][2];
    }
    Ok(out)
}

/// Right-hand side blocks for the masked atoms only, packed in mask order.
/// Cost is O(|mask|) at fixed density, independent of n.
pub fn lj_partial_forces<T: Real>(p: &LjParams<T>, x: &[T], mask: &[usize]) -> Result<Vec<T>> {
    let grid = CellGrid::build(p, x);
    let mut out = Vec::with_capacity(6 * mask.len());
    for &i in mask {
        if i >= p.n_atoms {
            return Err(Error::MaskIndex { index: i, n: p.n_atoms });
        }
        let f = atom_force(p, x, i, grid.as_ref())?;
        out.push(x[6 * i + 3]);
        out.push(x[6 * i + 4]);
        out.push(x[6 * i + 5]);
        out.push(f[0]);
        out.push(f[1]);
        out.push(f[2]);
    }
    Ok(out)
}

/// Instantaneous temperature T = sum m v^2 / (3 (n - 1)).
pub fn lj_temperature<T: Real>(p: &LjParams<T>, x: &[T]) -> T {
    let mut twice_ke = T::zero();
    for i in 0..p.n_atoms {
        for a in 3..6 {
            let v = x[6 * i + a];
            twice_ke += v * v;
        }
    }
    twice_ke / T::of(3.0 * (p.n_atoms as f64 - 1.0))
}

/// Temperature observable with its analytic Jacobian: zero on positions,
/// 2 v / (3 (n - 1)) on velocities.
pub fn lj_observable<T: Real>(p: &LjParams<T>, x: &[T]) -> (Vec<T>, Matrix<T>) {
    let t = lj_temperature(p, x);
    let coeff = T::of(2.0) / T::of(3.0 * (p.n_atoms as f64 - 1.0));
    let mut jac = Matrix::zeros(1, p.dim());
    for i in 0..p.n_atoms {
        for a in 3..6 {
            jac[(0, 6 * i + a)] = coeff * x[6 * i + a];
        }
    }
    (vec![t], jac)
}

/// Kinetic plus cutoff-shifted potential energy. The shift makes the
/// bookkept potential continuous at r_cut so the conserved total is smooth
/// under the truncated forces; the dynamics are unaffected.
pub fn lj_total_energy<T: Real>(p: &LjParams<T>, x: &[T]) -> Result<T> {
    let grid = CellGrid::build(p, x);
    let r_cut2 = p.r_cut * p.r_cut;
    let v_shift = pair_potential(r_cut2);
    let mut pe_twice = T::zero();
    for i in 0..p.n_atoms {
        let (xi, yi, zi) = (x[6 * i], x[6 * i + 1], x[6 * i + 2]);
        for_each_candidate(p, x, i, grid.as_ref(), |j, shift, self_image| {
            if j == i && self_image {
                return Ok(());
            }
            let dx = xi - (x[6 * j] + shift[0]);
            let dy = yi - (x[6 * j + 1] + shift[1]);
            let dz = zi - (x[6 * j + 2] + shift[2]);
            let r2 = dx * dx + dy * dy + dz * dz;
            if r2 <= r_cut2 {
                pe_twice += pair_potential(r2) - v_shift;
            }
            Ok(())
        })?;
    }
    let mut ke = T::zero();
    for i in 0..p.n_atoms {
        for a in 3..6 {
            let v = x[6 * i + a];
            ke += v * v;
        }
    }
    Ok(ke * T::of(0.5) + pe_twice * T::of(0.5))
}

/// Wrap every position into [0, box).
pub fn wrap_positions<T: Real>(p: &LjParams<T>, x: &mut [T]) {
    let b = p.box_len;
    for i in 0..p.n_atoms {
        for a in 0..3 {
            let r = x[6 * i + a];
            x[6 * i + a] = r - b * (r / b).floor();
        }
    }
}

/// FCC lattice positions plus Maxwell-Boltzmann velocities at temperature
/// `t0`. Positions depend only on the atom count; the velocity directions
/// come from `direction_seed`, are shifted to zero net momentum, then
/// rescaled so the instantaneous temperature equals `t0` exactly.
pub fn lj_initial<T: Real>(p: &LjParams<T>, t0: f64, direction_seed: u64) -> Result<Vec<T>> {
    if !(0.5..=1.5).contains(&t0) {
        return Err(Error::ParamOutOfRange(format!(
            "initial temperature {t0} outside [0.5, 1.5]"
        )));
    }
    let cells = (p.n_atoms as f64 / 4.0).cbrt().round() as usize;
    if 4 * cells * cells * cells != p.n_atoms {
        return Err(Error::ParamOutOfRange(format!(
            "{} atoms do not fill an FCC lattice (need 4 k^3)",
            p.n_atoms
        )));
    }
    let a = p.box_len.f64() / cells as f64;
    let basis = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];

    let mut x = vec![T::zero(); p.dim()];
    let mut idx = 0;
    for cx in 0..cells {
        for cy in 0..cells {
            for cz in 0..cells {
                for b in &basis {
                    x[6 * idx] = T::of((cx as f64 + b[0]) * a);
                    x[6 * idx + 1] = T::of((cy as f64 + b[1]) * a);
                    x[6 * idx + 2] = T::of((cz as f64 + b[2]) * a);
                    idx += 1;
                }
            }
        }
    }

    let mut rng = Xoshiro256::new(direction_seed);
    let mut v = vec![0.0f64; 3 * p.n_atoms];
    for vi in v.iter_mut() {
        *vi = rng.standard_normal();
    }
    // Remove net momentum.
    for a in 0..3 {
        let mean: f64 = (0..p.n_atoms).map(|i| v[3 * i + a]).sum::<f64>() / p.n_atoms as f64;
        for i in 0..p.n_atoms {
            v[3 * i + a] -= mean;
        }
    }
    // Rescale to hit t0 exactly at t = 0.
    let twice_ke: f64 = v.iter().map(|&w| w * w).sum();
    let t_now = twice_ke / (3.0 * (p.n_atoms as f64 - 1.0));
    let scale = (t0 / t_now).sqrt();
    for i in 0..p.n_atoms {
        for a in 0..3 {
            x[6 * i + 3 + a] = T::of(v[3 * i + a] * scale);
        }
    }
    Ok(x)
}

/// One velocity-Verlet step with position wrapping; `accels` holds a(t) on
/// entry and a(t+dt) on return.
pub fn velocity_verlet_step<T: Real>(
    p: &LjParams<T>,
    x: &mut [T],
    accels: &mut Vec<[T; 3]>,
    dt: T,
) -> Result<()> {
    let half = T::of(0.5);
    for i in 0..p.n_atoms {
        for a in 0..3 {
            let v = x[6 * i + 3 + a];
            x[6 * i + a] += v * dt + half * accels[i][a] * dt * dt;
        }
    }
    wrap_positions(p, x);
    let new_accels = lj_accels(p, x)?;
    for i in 0..p.n_atoms {
        for a in 0..3 {
            x[6 * i + 3 + a] += half * (accels[i][a] + new_accels[i][a]) * dt;
        }
    }
    *accels = new_accels;
    Ok(())
}

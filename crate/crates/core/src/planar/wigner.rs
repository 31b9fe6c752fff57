//! Discrete Wigner function on the cylinder.
//!
//! Rows are labeled by `n = a + b` for a coherence `rho_ab`, i.e. by the
//! momentum `n / 2`; even `n` form the integer grid and odd `n` the
//! half-integer grid, so every coherence is represented once:
//!
//! `w_n(alpha) = (1 / 2 pi) sum_{a + b = n} rho_ab exp(i (a - b) alpha)`.
//!
//! Summing all rows gives the angular density `<alpha|rho|alpha>` with
//! `<alpha|m> = exp(i m alpha) / sqrt(2 pi)`; integrating an integer row over
//! `alpha` gives the momentum population.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::Serialize;

use super::PlanarBasis;
use crate::error::{Error, Result};
use crate::lindblad::{DensityMatrix, Dopri, Frame, PropagationOptions};
use crate::operator::{Basis, OperatorMatrix, C64};

/// Number of outermost momentum states whose population counts as boundary mass.
pub const BOUNDARY_WIDTH: usize = 5;
/// Boundary mass above which truncation in `m` is flagged.
pub const BOUNDARY_LIMIT: f64 = 1e-10;

/// Wigner function sampled on a uniform angle grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerField {
    m_max: usize,
    n_alpha: usize,
    /// Row `n + 2 m_max`, column `j` for `alpha_j = 2 pi j / n_alpha`.
    values: DMatrix<f64>,
}

impl WignerField {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn alpha(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_alpha as f64
    }

    /// `w` at doubled momentum `n = 2 m` and grid angle `j`.
    pub fn value(&self, n: i64, j: usize) -> f64 {
        self.values[((n + 2 * self.m_max as i64) as usize, j)]
    }

    /// Row of integer momentum `m`.
    pub fn integer_row(&self, m: i64) -> Vec<f64> {
        (0..self.n_alpha).map(|j| self.value(2 * m, j)).collect()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// `(m, alpha, w)` over the integer grid.
    pub fn integer_grid(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        let m = self.m_max as i64;
        (-m..=m).flat_map(move |mm| (0..self.n_alpha).map(move |j| (mm, self.alpha(j), self.value(2 * mm, j))))
    }

    /// `p_m = int w_m(alpha) d alpha` for `m = -m_max..=m_max`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let dx = 2.0 * PI / self.n_alpha as f64;
        let m = self.m_max as i64;
        (-m..=m).map(|mm| self.integer_row(mm).iter().sum::<f64>() * dx).collect()
    }

    /// `<alpha_j|rho|alpha_j>` from all rows.
    pub fn angle_marginal(&self) -> Vec<f64> {
        (0..self.n_alpha).map(|j| self.values.column(j).sum()).collect()
    }

    /// Total probability, `sum_m int w_m`.
    pub fn total(&self) -> f64 {
        self.momentum_marginal().iter().sum()
    }

    /// Largest deviation of row `m` from its angular mean: the fringe
    /// amplitude of interference at that momentum.
    pub fn fringe_amplitude(&self, m: i64) -> f64 {
        let row = self.integer_row(m);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        row.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
    }

    /// Population in the outermost momentum states.
    pub fn boundary_mass(&self) -> f64 {
        boundary_mass(&self.momentum_marginal())
    }
}

pub(crate) fn boundary_mass(marginal: &[f64]) -> f64 {
    let k = BOUNDARY_WIDTH.min(marginal.len() / 2);
    marginal[..k].iter().chain(&marginal[marginal.len() - k..]).map(|p| p.abs()).sum()
}

fn check_grid(m_max: usize, n_alpha: usize) -> Result<()> {
    if n_alpha < 4 * m_max || n_alpha == 0 {
        return Err(Error::InvalidArgument(format!(
            "angle grid needs at least 4 m_max = {} points, got {n_alpha}",
            4 * m_max
        )));
    }
    Ok(())
}

/// Fourier coefficients `c[n][q] = rho_ab` with `a + b = n`, `a - b = q`,
/// arranged as a matrix with rows `n + 2 m_max` and columns `q + 2 m_max`.
fn mode_matrix(rho: &DMatrix<C64>, m_max: usize) -> DMatrix<C64> {
    let k = 4 * m_max + 1;
    let mm = m_max as i64;
    let mut c = DMatrix::zeros(k, k);
    for ia in 0..rho.nrows() {
        for ib in 0..rho.ncols() {
            let (a, b) = (ia as i64 - mm, ib as i64 - mm);
            c[((a + b + 2 * mm) as usize, (a - b + 2 * mm) as usize)] = rho[(ia, ib)];
        }
    }
    c
}

fn density_from_modes(c: &DMatrix<C64>, m_max: usize) -> DMatrix<C64> {
    let d = 2 * m_max + 1;
    let mm = m_max as i64;
    DMatrix::from_fn(d, d, |ia, ib| {
        let (a, b) = (ia as i64 - mm, ib as i64 - mm);
        c[((a + b + 2 * mm) as usize, (a - b + 2 * mm) as usize)]
    })
}

fn field_from_modes(c: &DMatrix<C64>, m_max: usize, n_alpha: usize) -> WignerField {
    let k = 4 * m_max + 1;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n_alpha);
    let mut values = DMatrix::zeros(k, n_alpha);
    let mut buf = vec![C64::new(0.0, 0.0); n_alpha];
    for row in 0..k {
        buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for qi in 0..k {
            let q = qi as i64 - 2 * m_max as i64;
            buf[q.rem_euclid(n_alpha as i64) as usize] += c[(row, qi)];
        }
        fft.process(&mut buf);
        for j in 0..n_alpha {
            values[(row, j)] = buf[j].re / (2.0 * PI);
        }
    }
    WignerField { m_max, n_alpha, values }
}

fn modes_from_field(w: &WignerField) -> Result<DMatrix<C64>> {
    if w.n_alpha < 4 * w.m_max + 1 {
        return Err(Error::InvalidArgument(format!(
            "inversion needs at least 4 m_max + 1 = {} angles, got {}",
            4 * w.m_max + 1,
            w.n_alpha
        )));
    }
    let k = 4 * w.m_max + 1;
    let n = w.n_alpha;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut c = DMatrix::zeros(k, k);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for row in 0..k {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = C64::new(w.values[(row, j)], 0.0);
        }
        fft.process(&mut buf);
        for qi in 0..k {
            let q = qi as i64 - 2 * w.m_max as i64;
            c[(row, qi)] = buf[q.rem_euclid(n as i64) as usize] * (2.0 * PI / n as f64);
        }
    }
    Ok(c)
}

/// Wigner function of a planar-rotor state on `n_alpha` angles.
pub fn wigner_transform(rho: &DensityMatrix, n_alpha: usize) -> Result<WignerField> {
    let Basis::Planar(b) = rho.basis() else {
        return Err(Error::InvalidArgument("Wigner transform needs a planar basis".into()));
    };
    check_grid(b.m_max, n_alpha)?;
    Ok(field_from_modes(&mode_matrix(rho.matrix(), b.m_max), b.m_max, n_alpha))
}

/// Recover the density matrix from a Wigner field (`n_alpha >= 4 m_max + 1`).
pub fn inverse_wigner_transform(w: &WignerField) -> Result<OperatorMatrix> {
    let c = modes_from_field(w)?;
    OperatorMatrix::new(PlanarBasis::new(w.m_max).into(), density_from_modes(&c, w.m_max))
}

/// Result of evolving a Wigner field.
#[derive(Clone, Debug)]
pub struct WignerEvolution {
    pub field: WignerField,
    /// Largest boundary mass seen at the requested times.
    pub boundary_mass: f64,
    /// Set when `boundary_mass` exceeds [`BOUNDARY_LIMIT`].
    pub truncation_flagged: bool,
}

/// Discrete Fokker-Planck operator on one column of the mode matrix:
/// friction and diffusion couple `n` to `n +- 2 s`, where `s = 1` for the
/// standard dissipator and `s = 2` for the inversion-symmetric one.
fn stencil(c: &DMatrix<C64>, out: &mut DMatrix<C64>, friction: f64, diffusion: f64, step: usize, m_max: usize) {
    let k = c.nrows();
    let shift = 2 * step;
    let s = step as f64;
    for col in 0..c.ncols() {
        for row in 0..k {
            let m = (row as f64 - 2.0 * m_max as f64) / 2.0;
            let up = if row + shift < k { c[(row + shift, col)] } else { C64::new(0.0, 0.0) };
            let down = if row >= shift { c[(row - shift, col)] } else { C64::new(0.0, 0.0) };
            out[(row, col)] = up * (friction * (m + s)) - down * (friction * (m - s)) + (up - c[(row, col)] * 2.0 + down) * diffusion;
        }
    }
}

/// Evolve a Wigner field for time `t` under free rotation plus the
/// high-temperature friction and diffusion terms. Friction `gamma / 2` and
/// diffusion `D = xi gamma / 2` apply to the standard dissipator; the
/// inversion-symmetric one uses `gamma / 4`, `D / 4`, and steps of two.
pub fn evolve_wigner_fp(
    w: &WignerField,
    gamma: f64,
    xi: f64,
    t: f64,
    inversion_symmetric: bool,
    opts: PropagationOptions,
) -> Result<WignerEvolution> {
    evolve_wigner_series(w, gamma, xi, &[t], inversion_symmetric, opts).map(|mut v| v.pop().expect("one time"))
}

/// [`evolve_wigner_fp`] returning the field at each of `times` (sorted).
pub fn evolve_wigner_series(
    w: &WignerField,
    gamma: f64,
    xi: f64,
    times: &[f64],
    inversion_symmetric: bool,
    opts: PropagationOptions,
) -> Result<Vec<WignerEvolution>> {
    if !(gamma >= 0.0) || !(xi > 0.0) {
        return Err(Error::InvalidArgument("need gamma >= 0 and xi > 0".into()));
    }
    let m_max = w.m_max;
    let c0 = modes_from_field(w)?;
    let k = 4 * m_max + 1;
    let d = xi * gamma / 2.0;
    let (friction, diffusion, step) = if inversion_symmetric {
        (gamma / 4.0, d / 4.0, 2)
    } else {
        (gamma / 2.0, d, 1)
    };
    let freq = DMatrix::from_fn(k, k, |row, col| {
        let n = row as f64 - 2.0 * m_max as f64;
        let q = col as f64 - 2.0 * m_max as f64;
        n * q / 2.0
    });
    let mut dp = Dopri::new(
        |c: &DMatrix<C64>, out: &mut DMatrix<C64>| stencil(c, out, friction, diffusion, step, m_max),
        Frame::General(freq),
        opts,
    );
    let snaps = dp.evolve(&c0, times)?;
    let mut worst = boundary_mass(&field_from_modes(&c0, m_max, w.n_alpha).momentum_marginal());
    Ok(snaps
        .into_iter()
        .map(|c| {
            let field = field_from_modes(&c, m_max, w.n_alpha);
            worst = worst.max(field.boundary_mass());
            WignerEvolution {
                field,
                boundary_mass: worst,
                truncation_flagged: worst > BOUNDARY_LIMIT,
            }
        })
        .collect())
}

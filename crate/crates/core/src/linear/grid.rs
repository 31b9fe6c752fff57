//! Quadrature on the unit sphere and the orientation representation of states.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use serde::Serialize;

use crate::angular::LinearBasis;
use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::operator::{Basis, C64};
use crate::special::{gauss_legendre, normalized_legendre};

/// Gauss-Legendre nodes in `cos theta` times a uniform grid in `phi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrientationGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Weight of `(theta_i, phi_j)`, row-major in `(i, j)`.
    pub weights: Vec<f64>,
}

impl OrientationGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidArgument("sphere grid needs at least one node per axis".into()));
        }
        let (x, wx) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let wt: Vec<f64> = wx.iter().rev().copied().collect();
        let phi = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let weights = wt.iter().flat_map(|w| std::iter::repeat_n(w * dphi, n_phi)).collect();
        Ok(Self { theta, phi, weights })
    }

    /// Smallest grid that integrates products of two harmonics with
    /// `l <= l_max` exactly.
    pub fn for_band_limit(l_max: usize) -> Self {
        Self::new(l_max + 1, 2 * l_max + 1).expect("non-empty grid")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(theta, phi)` of every node, in weight order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta.iter().flat_map(move |&t| self.phi.iter().map(move |&p| (t, p)))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Y_lm` at every node: row = node, column = basis index.
    pub fn harmonics(&self, basis: LinearBasis) -> DMatrix<C64> {
        let mut y = DMatrix::zeros(self.len(), basis.dim());
        let mut row = 0;
        for &t in &self.theta {
            let table = normalized_legendre(basis.l_max, t.cos());
            for &p in &self.phi {
                fill_harmonics(basis, &table, p, &mut |col, v| y[(row, col)] = v);
                row += 1;
            }
        }
        y
    }

    /// `int f(Omega) dOmega` by quadrature.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points().zip(&self.weights).map(|((t, p), w)| w * f(t, p)).sum()
    }

    /// Coefficients `<l m|f> = int conj(Y_lm) f dOmega`.
    pub fn project(&self, basis: LinearBasis, f: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        let y = self.harmonics(basis);
        let mut out = vec![C64::new(0.0, 0.0); basis.dim()];
        for (k, ((t, p), w)) in self.points().zip(&self.weights).enumerate() {
            let v = f(t, p) * *w;
            for (a, o) in out.iter_mut().enumerate() {
                *o += y[(k, a)].conj() * v;
            }
        }
        out
    }

    /// Orientation density `<Omega|rho|Omega>` at every node.
    pub fn density(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        let Basis::Linear(b) = rho.basis() else {
            return Err(Error::InvalidArgument("orientation density needs a linear-rotor basis".into()));
        };
        let y = self.harmonics(b);
        let yr = &y * rho.matrix();
        Ok((0..self.len())
            .map(|k| (0..b.dim()).map(|a| yr[(k, a)] * y[(k, a)].conj()).sum::<C64>().re)
            .collect())
    }
}

fn fill_harmonics(basis: LinearBasis, table: &[f64], phi: f64, put: &mut impl FnMut(usize, C64)) {
    for (col, (l, m)) in basis.states().enumerate() {
        let am = m.unsigned_abs() as usize;
        let p = table[l * (l + 1) / 2 + am];
        let y = C64::from_polar(p, m as f64 * phi);
        // Y_{l,-m} = (-1)^m conj(Y_lm); the polar form already conjugates the phase.
        let y = if m < 0 && am % 2 == 1 { -y } else { y };
        put(col, y);
    }
}

/// `Y_lm(Omega)` for every basis state at one orientation.
pub fn harmonics_at(basis: LinearBasis, theta: f64, phi: f64) -> Vec<C64> {
    let table = normalized_legendre(basis.l_max, theta.cos());
    let mut out = vec![C64::new(0.0, 0.0); basis.dim()];
    fill_harmonics(basis, &table, phi, &mut |c, v| out[c] = v);
    out
}

/// Polar angles of a unit vector.
pub fn angles_of(n: &Vector3<f64>) -> (f64, f64) {
    let t = n.z.clamp(-1.0, 1.0).acos();
    (t, n.y.atan2(n.x))
}

/// Orientation coherence `<Omega|rho|Omega'>`.
pub fn orientation_coherence(rho: &DensityMatrix, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<C64> {
    let Basis::Linear(basis) = rho.basis() else {
        return Err(Error::InvalidArgument("orientation coherence needs a linear-rotor basis".into()));
    };
    let (ta, pa) = angles_of(a);
    let (tb, pb) = angles_of(b);
    let ya = harmonics_at(basis, ta, pa);
    let yb = harmonics_at(basis, tb, pb);
    let m = rho.matrix();
    let mut s = C64::new(0.0, 0.0);
    for (i, yi) in ya.iter().enumerate() {
        for (j, yj) in yb.iter().enumerate() {
            s += yi * m[(i, j)] * yj.conj();
        }
    }
    Ok(s)
}

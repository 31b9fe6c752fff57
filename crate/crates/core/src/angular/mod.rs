//! Angular-momentum kinematics in the truncated `|l m>` basis.
//!
//! States are ordered `l`-major with `m` ascending, so `|l m>` sits at index
//! `l^2 + l + m`. Units have `hbar = 1`.

mod wigner3j;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Basis, OperatorMatrix, SparseOperator, C64, I};

pub use wigner3j::{wigner3j, wigner3j_values, ThreeJArgs};

/// Truncated linear-rotor basis `l = 0..=l_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearBasis {
    pub l_max: usize,
}

impl LinearBasis {
    pub fn new(l_max: usize) -> Self {
        Self { l_max }
    }

    pub fn dim(&self) -> usize {
        (self.l_max + 1).pow(2)
    }

    pub fn index(&self, l: usize, m: i64) -> Option<usize> {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return None;
        }
        Some(((l * l + l) as i64 + m) as usize)
    }

    pub fn state(&self, index: usize) -> Option<(usize, i64)> {
        if index >= self.dim() {
            return None;
        }
        let l = (index as f64).sqrt().floor() as usize;
        let l = if (l + 1) * (l + 1) <= index { l + 1 } else { l };
        Some((l, index as i64 - (l * l + l) as i64))
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, i64)> {
        let l_max = self.l_max;
        (0..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m)))
    }

    /// The same basis grown by `extra` shells.
    pub fn extended(&self, extra: usize) -> Self {
        Self::new(self.l_max + extra)
    }

    /// `l` value of every basis index.
    pub fn l_values(&self) -> Vec<usize> {
        self.states().map(|(l, _)| l).collect()
    }
}

impl From<LinearBasis> for Basis {
    fn from(b: LinearBasis) -> Self {
        Basis::Linear(b)
    }
}

/// Raising and lowering coefficients `c± = sqrt(l(l+1) - m(m±1))`.
pub fn ladder_coefficients(l: i64, m: i64) -> Result<(f64, f64)> {
    if l < 0 || m.abs() > l {
        return Err(Error::InvalidArgument(format!(
            "ladder coefficients need |m| <= l, got l = {l}, m = {m}"
        )));
    }
    let base = (l * (l + 1)) as f64;
    let plus = (base - (m * (m + 1)) as f64).max(0.0).sqrt();
    let minus = (base - (m * (m - 1)) as f64).max(0.0).sqrt();
    Ok((plus, minus))
}

/// Sparse `J1, J2, J3` on the given basis.
pub fn j_sparse(basis: LinearBasis) -> [SparseOperator; 3] {
    let d = basis.dim();
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    let mut t3 = Vec::new();
    for (col, (l, m)) in basis.states().enumerate() {
        let (cp, _) = ladder_coefficients(l as i64, m).expect("basis state is valid");
        t3.push((col, col, C64::new(m as f64, 0.0)));
        if m < l as i64 {
            let row = basis.index(l, m + 1).expect("raised state in basis");
            // J+ = J1 + i J2, so J1 = (J+ + J-)/2 and J2 = (J+ - J-)/(2i).
            t1.push((row, col, C64::new(cp / 2.0, 0.0)));
            t1.push((col, row, C64::new(cp / 2.0, 0.0)));
            t2.push((row, col, C64::new(0.0, -cp / 2.0)));
            t2.push((col, row, C64::new(0.0, cp / 2.0)));
        }
    }
    [
        SparseOperator::from_triplets(d, t1),
        SparseOperator::from_triplets(d, t2),
        SparseOperator::from_triplets(d, t3),
    ]
}

/// Matrix element `<l m| Y_1q |l' m'>`.
pub fn y1_matrix_element(l: usize, m: i64, lp: usize, mp: i64, q: i64) -> f64 {
    let (li, lpi) = (l as i64, lp as i64);
    let a = wigner3j_values(li, lpi, 1, 0, 0, 0).expect("non-negative l");
    if a == 0.0 {
        return 0.0;
    }
    let b = wigner3j_values(li, lpi, 1, -m, mp, q).expect("non-negative l");
    let phase = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * ((2 * l + 1) as f64 * (2 * lp + 1) as f64 * 3.0 / (4.0 * PI)).sqrt() * a * b
}

/// Sparse `M1, M2, M3`: Cartesian components of the orientation unit vector.
pub fn m_sparse(basis: LinearBasis) -> [SparseOperator; 3] {
    let d = basis.dim();
    let k = (4.0 * PI / 3.0).sqrt();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = [Vec::new(), Vec::new(), Vec::new()];
    for (col, (lp, mp)) in basis.states().enumerate() {
        for l in [lp.wrapping_sub(1), lp + 1] {
            if l > basis.l_max {
                continue;
            }
            for m in (mp - 1)..=(mp + 1) {
                let Some(row) = basis.index(l, m) else {
                    continue;
                };
                let y = |q: i64| y1_matrix_element(l, m, lp, mp, q);
                let (ym, y0, yp) = (y(-1), y(0), y(1));
                let v1 = C64::new(k * s * (ym - yp), 0.0);
                let v2 = I * (k * s * (ym + yp));
                let v3 = C64::new(k * y0, 0.0);
                for (ti, v) in t.iter_mut().zip([v1, v2, v3]) {
                    if v.norm() > 0.0 {
                        ti.push((row, col, v));
                    }
                }
            }
        }
    }
    let [t1, t2, t3] = t;
    [
        SparseOperator::from_triplets(d, t1),
        SparseOperator::from_triplets(d, t2),
        SparseOperator::from_triplets(d, t3),
    ]
}

fn dense3(basis: LinearBasis, ops: [SparseOperator; 3]) -> [OperatorMatrix; 3] {
    ops.map(|s| {
        OperatorMatrix::new(basis.into(), s.to_dense()).expect("dimension matches basis")
    })
}

/// Angular-momentum component matrices `J1, J2, J3`.
pub fn j_component_matrices(basis: LinearBasis) -> [OperatorMatrix; 3] {
    dense3(basis, j_sparse(basis))
}

/// Orientation-vector component matrices `M1, M2, M3` (`m_x, m_y, m_z`).
pub fn orientation_vector_matrices(basis: LinearBasis) -> [OperatorMatrix; 3] {
    dense3(basis, m_sparse(basis))
}

/// `J^2 / 2` in the given basis (moment of inertia one).
pub fn free_rotor_hamiltonian(basis: LinearBasis) -> SparseOperator {
    let trip = basis
        .states()
        .enumerate()
        .map(|(i, (l, _))| (i, i, C64::new((l * (l + 1)) as f64 / 2.0, 0.0)))
        .collect();
    SparseOperator::from_triplets(basis.dim(), trip)
}

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{Basis, OperatorMatrix, C64};

/// Tolerance on `|tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerical noise.
pub const POSITIVITY_TOL: f64 = 1e-9;
const HERMITICITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: OperatorMatrix,
}

impl DensityMatrix {
    /// Validate an operator as a state. Tiny anti-Hermitian parts are removed.
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: defect {defect:.3e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.12} deviates from one",
                tr.re
            )));
        }
        let state = Self {
            op: hermitize(op),
        };
        let min = state.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        Ok(state)
    }

    /// Accepts any Hermitian operator with positive trace and rescales it to
    /// unit trace, still checking positivity.
    pub fn normalized(op: OperatorMatrix) -> Result<Self> {
        let tr = op.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(op.scale(C64::new(1.0 / tr, 0.0)))
    }

    /// Pure state `|psi><psi| / <psi|psi>`.
    pub fn pure(basis: Basis, psi: &[C64]) -> Result<Self> {
        if psi.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: psi.len(),
            });
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = DVector::from_column_slice(psi) / C64::new(norm2.sqrt(), 0.0);
        let m = &v * v.adjoint();
        Self::new(OperatorMatrix::new(basis, m)?)
    }

    /// Diagonal state from non-negative weights (normalized here).
    pub fn diagonal(basis: Basis, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidState("negative population".into()));
        }
        let diag: Vec<C64> = weights.iter().map(|&w| C64::new(w, 0.0)).collect();
        Self::normalized(OperatorMatrix::from_diagonal(basis, &diag)?)
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            op: OperatorMatrix::identity(basis).scale(C64::new(1.0 / d as f64, 0.0)),
        }
    }

    /// Wrap without validation. The caller guarantees the invariants hold up to
    /// integrator noise; the matrix is still made exactly Hermitian.
    pub(crate) fn from_trusted(op: OperatorMatrix) -> Self {
        Self { op: hermitize(op) }
    }

    pub fn basis(&self) -> Basis {
        self.op.basis()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.entries()
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.op.entries().clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.op.get(i, i).re).collect()
    }

    pub fn purity(&self) -> f64 {
        self.op.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<A> = tr(rho A)`.
    pub fn expectation(&self, a: &OperatorMatrix) -> C64 {
        let r = self.op.entries();
        let a = a.entries();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..r.nrows() {
            for j in 0..r.ncols() {
                acc += r[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// Copy with negative eigenvalues zeroed and trace restored, for reporting.
    pub fn clipped(&self) -> DensityMatrix {
        let eig = self.op.entries().clone().symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        let d = self.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for (k, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = eig.eigenvectors.column(k);
                m += col * col.adjoint() * C64::new(v / total, 0.0);
            }
        }
        Self::from_trusted(OperatorMatrix::new(self.basis(), m).expect("same dimension"))
    }
}

/// Trace distance `||a - b||_1 / 2`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<C64>) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

fn hermitize(op: OperatorMatrix) -> OperatorMatrix {
    let basis = op.basis();
    let m = op.into_entries();
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    OperatorMatrix::new(basis, h).expect("same dimension")
}

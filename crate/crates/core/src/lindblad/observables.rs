use serde::Serialize;

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::operator::{Basis, OperatorMatrix, C64};

/// Eigenvalues below this are treated as zero in entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Scalar observables of one state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub energy: f64,
    pub purity: f64,
    pub entropy: f64,
    /// `tr rho (log rho - log rho_ref)`; `None` without a reference.
    pub rel_entropy: Option<f64>,
    /// Populations per shell: `p_l` for the linear rotor, `p_m` (ascending `m`)
    /// for the planar rotor, plain diagonal otherwise.
    pub populations: Vec<f64>,
    /// `<J_x>, <J_y>, <J_z>` (planar: `0, 0, <p>`).
    pub j_mean: [f64; 3],
    /// `<J^2>` (planar: `<p^2>`).
    pub j_squared: f64,
    /// Raw smallest eigenvalue, before any clipping.
    pub min_eigenvalue: f64,
}

/// Time series of [`ObservableRecord`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub records: Vec<ObservableRecord>,
}

impl ObservableSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn push(&mut self, r: ObservableRecord) {
        self.records.push(r);
    }
}

struct Spectrum {
    values: Vec<f64>,
    vectors: nalgebra::DMatrix<C64>,
}

fn spectrum(rho: &DensityMatrix) -> Spectrum {
    let eig = rho.matrix().clone().symmetric_eigen();
    Spectrum {
        values: eig.eigenvalues.iter().copied().collect(),
        vectors: eig.eigenvectors,
    }
}

fn entropy_from(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `-tr rho log rho` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_from(&spectrum(rho).values)
}

/// `tr rho (log rho - log sigma)`. Infinite when `rho` has weight where
/// `sigma` vanishes.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let sr = spectrum(rho);
    let ss = spectrum(sigma);
    let neg_entropy = -entropy_from(&sr.values);
    let r = rho.matrix();
    let mut cross = 0.0;
    for (k, &s) in ss.values.iter().enumerate() {
        let v = ss.vectors.column(k);
        let weight = (v.adjoint() * r * v)[(0, 0)].re;
        if s <= ENTROPY_CUTOFF {
            if weight > ENTROPY_CUTOFF {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * s.ln();
    }
    Ok(neg_entropy - cross)
}

fn shell_populations(rho: &DensityMatrix) -> Vec<f64> {
    let diag = rho.populations();
    match rho.basis() {
        Basis::Linear(b) => {
            let mut p = vec![0.0; b.l_max + 1];
            for (i, (l, _)) in b.states().enumerate() {
                p[l] += diag[i];
            }
            p
        }
        _ => diag,
    }
}

fn momentum_moments(rho: &DensityMatrix) -> ([f64; 3], f64) {
    match rho.basis() {
        Basis::Linear(b) => {
            let j = crate::angular::j_component_matrices(b);
            let mean = [0, 1, 2].map(|k| rho.expectation(&j[k]).re);
            let j2: f64 = b
                .states()
                .enumerate()
                .map(|(i, (l, _))| (l * (l + 1)) as f64 * rho.matrix()[(i, i)].re)
                .sum();
            (mean, j2)
        }
        Basis::Planar(b) => {
            let (mut p, mut p2) = (0.0, 0.0);
            for (i, m) in b.momenta().enumerate() {
                let w = rho.matrix()[(i, i)].re;
                p += m as f64 * w;
                p2 += (m * m) as f64 * w;
            }
            ([0.0, 0.0, p], p2)
        }
        Basis::Generic { .. } => ([0.0; 3], 0.0),
    }
}

/// Observables of `rho` under Hamiltonian `h`, optionally relative to `rho_ref`.
/// Fails with the offending eigenvalue when `rho` is not positive within tolerance.
pub fn observables(rho: &DensityMatrix, h: &OperatorMatrix, rho_ref: Option<&DensityMatrix>) -> Result<ObservableRecord> {
    observables_at(0.0, rho, h, rho_ref)
}

/// [`observables`] tagged with a time.
pub fn observables_at(time: f64, rho: &DensityMatrix, h: &OperatorMatrix, rho_ref: Option<&DensityMatrix>) -> Result<ObservableRecord> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    let sp = spectrum(rho);
    let min_eigenvalue = sp.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -super::POSITIVITY_TOL {
        return Err(Error::NotPositive {
            eigenvalue: min_eigenvalue,
        });
    }
    let rel_entropy = rho_ref.map(|s| relative_entropy(rho, s)).transpose()?;
    let (j_mean, j_squared) = momentum_moments(rho);
    Ok(ObservableRecord {
        time,
        energy: rho.expectation(h).re,
        purity: rho.purity(),
        entropy: entropy_from(&sp.values),
        rel_entropy,
        populations: shell_populations(rho),
        j_mean,
        j_squared,
        min_eigenvalue,
    })
}

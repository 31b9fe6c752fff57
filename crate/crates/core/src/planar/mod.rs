//! The planar rotor: one angle `alpha`, integer momenta `m`.
//!
//! Lindblad operators are the components of
//! `A = e_r(alpha) + (i / 2 xi) e_phi(alpha) p`, with `cos alpha` and
//! `sin alpha` acting as half-sums of unit shifts in `m`. The
//! inversion-symmetric variant uses the tensor `B_ij = m_i m_j - (i/xi) m_i (m x J)_j`.

mod fig3;
mod wigner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{project_components, DensityMatrix, GeneratorMap, LindbladTerm};
use crate::operator::{Basis, SparseOperator, C64, I, ONE};
use crate::Variant;

pub use fig3::{fig3_experiment, Fig3Config, Fig3Result, Fig3Snapshot};
pub use fig3::{expand_wave_function, two_blob_state};
pub use wigner::{
    evolve_wigner_fp, evolve_wigner_series, inverse_wigner_transform, wigner_transform, WignerEvolution, WignerField, BOUNDARY_LIMIT,
    BOUNDARY_WIDTH,
};

/// Largest truncated-tail probability accepted by the closed forms.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Momentum basis `m = -m_max..=m_max`, index `m + m_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanarBasis {
    pub m_max: usize,
}

impl PlanarBasis {
    pub fn new(m_max: usize) -> Self {
        Self { m_max }
    }

    pub fn dim(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn index(&self, m: i64) -> Option<usize> {
        if m.unsigned_abs() as usize > self.m_max {
            None
        } else {
            Some((m + self.m_max as i64) as usize)
        }
    }

    pub fn momentum(&self, index: usize) -> i64 {
        index as i64 - self.m_max as i64
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> {
        let m = self.m_max as i64;
        -m..=m
    }
}

impl From<PlanarBasis> for Basis {
    fn from(b: PlanarBasis) -> Self {
        Basis::Planar(b)
    }
}

/// Physical and numerical parameters of a planar-rotor generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarRotorParams {
    pub xi: f64,
    pub gamma: f64,
    pub m_max: usize,
    pub variant: Variant,
    pub inversion_symmetric: bool,
}

impl PlanarRotorParams {
    pub fn new(xi: f64, gamma: f64, m_max: usize) -> Result<Self> {
        let p = Self {
            xi,
            gamma,
            m_max,
            variant: Variant::Full,
            inversion_symmetric: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_inversion_symmetry(mut self, on: bool) -> Self {
        self.inversion_symmetric = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidArgument(format!("xi must be positive, got {}", self.xi)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.m_max < 4 {
            return Err(Error::InvalidArgument(format!("m_max must be at least 4, got {}", self.m_max)));
        }
        Ok(())
    }

    pub fn basis(&self) -> PlanarBasis {
        PlanarBasis::new(self.m_max)
    }

    pub fn kt(&self) -> f64 {
        self.xi / 2.0
    }

    /// `D = kT gamma`.
    pub fn diffusion(&self) -> f64 {
        self.xi * self.gamma / 2.0
    }
}

/// `cos alpha`, `sin alpha`, and `p` on a planar basis.
pub fn circle_operators(basis: PlanarBasis) -> [SparseOperator; 3] {
    let d = basis.dim();
    let mut cos = Vec::new();
    let mut sin = Vec::new();
    let mut p = Vec::new();
    for i in 0..d {
        p.push((i, i, C64::new(basis.momentum(i) as f64, 0.0)));
        if i + 1 < d {
            // shift |m> -> |m+1> has entry (i+1, i)
            cos.push((i + 1, i, C64::new(0.5, 0.0)));
            cos.push((i, i + 1, C64::new(0.5, 0.0)));
            sin.push((i + 1, i, C64::new(0.0, -0.5)));
            sin.push((i, i + 1, C64::new(0.0, 0.5)));
        }
    }
    [
        SparseOperator::from_triplets(d, cos),
        SparseOperator::from_triplets(d, sin),
        SparseOperator::from_triplets(d, p),
    ]
}

/// `p^2 / 2`.
pub fn planar_hamiltonian(basis: PlanarBasis) -> SparseOperator {
    let trip = (0..basis.dim())
        .map(|i| {
            let m = basis.momentum(i) as f64;
            (i, i, C64::new(m * m / 2.0, 0.0))
        })
        .collect();
    SparseOperator::from_triplets(basis.dim(), trip)
}

/// Lindblad terms for operators `P - i eps K`. The full variant is the single
/// term; the high-temperature variant subtracts the `eps^2` part, leaving a
/// trace-preserving generator that is first order in `eps`.
pub(crate) fn expanded_terms(
    weight: f64,
    eps: f64,
    leading: Vec<SparseOperator>,
    correction: Vec<SparseOperator>,
    variant: Variant,
) -> Vec<LindbladTerm> {
    let combined: Vec<SparseOperator> = leading
        .iter()
        .zip(&correction)
        .map(|(p, k)| p.add(&k.scaled(-I * eps)))
        .collect();
    match variant {
        Variant::Full => vec![LindbladTerm::new(weight, combined)],
        Variant::HighT => vec![
            LindbladTerm::new(weight, combined),
            LindbladTerm::new(-weight * eps * eps, correction),
        ],
    }
}

/// Planar-rotor generator for the given parameters.
pub fn build_planar_generator(p: &PlanarRotorParams) -> Result<GeneratorMap> {
    p.validate()?;
    let basis = p.basis();
    let ext = PlanarBasis::new(p.m_max + 2);
    let keep = Basis::from(basis).indices_in(&Basis::from(ext))?;
    let [cos, sin, mom] = circle_operators(ext);
    let m_vec = [cos.clone(), sin.clone()];
    // (m x J) for m = (cos, sin, 0), J = (0, 0, p): (sin p, -cos p, 0)
    let cross = [sin.mul_sparse(&mom), cos.mul_sparse(&mom).scaled(-ONE)];
    let d = p.diffusion();
    let terms = if p.inversion_symmetric {
        let mut lead = Vec::new();
        let mut corr = Vec::new();
        for mi in &m_vec {
            for (mj, cj) in m_vec.iter().zip(&cross) {
                lead.push(mi.mul_sparse(mj));
                corr.push(mi.mul_sparse(cj));
            }
        }
        expanded_terms(
            d,
            1.0 / p.xi,
            project_components(&lead, &keep),
            project_components(&corr, &keep),
            p.variant,
        )
    } else {
        expanded_terms(
            2.0 * d,
            1.0 / (2.0 * p.xi),
            project_components(&m_vec, &keep),
            project_components(&cross, &keep),
            p.variant,
        )
    };
    GeneratorMap::new(basis.into(), planar_hamiltonian(basis), terms)
}

/// Ratio `w_{k+1} / w_k` of successive closed-form weights in `|m| = k`.
fn weight_step(xi: f64, k: f64, variant: Variant) -> f64 {
    let a = 2.0 * xi;
    match variant {
        // [C(a, k) / C(a + k, k)]^2
        Variant::Full => ((a - k) / (a + k + 1.0)).powi(2),
        // C(a, xi + k) / C(a, xi)
        Variant::HighT => (xi - k) / (xi + k + 1.0),
    }
}

/// Unnormalized closed-form stationary weight of momentum `m`.
pub fn stationary_weight(xi: f64, m: i64, variant: Variant) -> f64 {
    (0..m.unsigned_abs()).fold(1.0, |w, k| if w == 0.0 { 0.0 } else { w * weight_step(xi, k as f64, variant) })
}

/// Probability beyond `|m| > m_max`, relative to the total.
fn tail_fraction(xi: f64, m_max: usize, variant: Variant, inside: f64, mut w: f64) -> Result<f64> {
    let mut tail = 0.0;
    let mut k = m_max as f64;
    for _ in 0..10_000_000 {
        w *= weight_step(xi, k, variant);
        if w < 0.0 {
            return Err(Error::InvalidArgument(
                "the high-temperature form needs integer xi".into(),
            ));
        }
        tail += 2.0 * w;
        if w == 0.0 || w < 1e-20 * inside {
            return Ok(tail / (inside + tail));
        }
        k += 1.0;
    }
    Ok(1.0)
}

/// Closed-form stationary state of the planar rotor.
pub fn stationary_planar(xi: f64, m_max: usize, variant: Variant) -> Result<DensityMatrix> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
    }
    let basis = PlanarBasis::new(m_max);
    let mut half = vec![1.0];
    for k in 0..m_max {
        let w = if half[k] == 0.0 { 0.0 } else { half[k] * weight_step(xi, k as f64, variant) };
        half.push(w);
    }
    if let Some(w) = half.iter().find(|w| **w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "closed form gives a negative weight {w:.3e}; the high-temperature form needs integer xi"
        )));
    }
    let weights: Vec<f64> = basis.momenta().map(|m| half[m.unsigned_abs() as usize]).collect();
    let inside: f64 = weights.iter().sum();
    let frac = tail_fraction(xi, m_max, variant, inside, half[m_max])?;
    if frac > TAIL_LIMIT {
        return Err(Error::CutoffTooSmall {
            tail: frac,
            limit: TAIL_LIMIT,
        });
    }
    DensityMatrix::diagonal(basis.into(), &weights)
}

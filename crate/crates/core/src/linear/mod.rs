//! The linear rotor: orientation unit vector `m`, angular momentum `J` with
//! `J . m = 0`, Hamiltonian `J^2 / 2`.
//!
//! The Lindblad operator is the vector `A = m - (i / 2 xi) m x J`, weighted by
//! `2D`. The inversion-symmetric variant uses the nine components
//! `B_ij = m_i m_j - (i / xi) m_i (m x J)_j` with weight `D`.

mod fig2;
mod grid;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::angular::{free_rotor_hamiltonian, j_sparse, m_sparse, LinearBasis};
use crate::error::{Error, Result};
use crate::lindblad::{project_components, trace_norm, DensityMatrix, GeneratorMap};
use crate::operator::{Basis, OperatorMatrix, SparseOperator, C64, ONE};
use crate::planar::expanded_terms;
use crate::Variant;

pub use fig2::{fig2_experiment, initial_superposition, shell_populations, Fig2Config, Fig2Result, Fig2Snapshot};
pub use grid::{angles_of, harmonics_at, orientation_coherence, OrientationGrid};

/// Largest truncated-tail probability accepted by the closed form.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Physical and numerical parameters of a linear-rotor generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRotorParams {
    pub xi: f64,
    pub gamma: f64,
    pub l_max: usize,
    pub variant: Variant,
    pub inversion_symmetric: bool,
}

impl LinearRotorParams {
    pub fn new(xi: f64, gamma: f64, l_max: usize) -> Result<Self> {
        let p = Self {
            xi,
            gamma,
            l_max,
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
        let min = if self.inversion_symmetric { 3 } else { 2 };
        if self.l_max < min {
            return Err(Error::InvalidArgument(format!("l_max must be at least {min}, got {}", self.l_max)));
        }
        Ok(())
    }

    pub fn basis(&self) -> LinearBasis {
        LinearBasis::new(self.l_max)
    }

    pub fn kt(&self) -> f64 {
        self.xi / 2.0
    }

    /// `D = kT gamma`.
    pub fn diffusion(&self) -> f64 {
        self.xi * self.gamma / 2.0
    }
}

/// `(M x J)_i = eps_ijk M_j J_k` with every `M` to the left of its `J`.
pub fn cross_components(m: &[SparseOperator; 3], j: &[SparseOperator; 3]) -> [SparseOperator; 3] {
    let term = |a: usize, b: usize, c: usize, d: usize| m[a].mul_sparse(&j[b]).add(&m[c].mul_sparse(&j[d]).scaled(-ONE));
    [term(1, 2, 2, 1), term(2, 0, 0, 2), term(0, 1, 1, 0)]
}

/// Linear-rotor generator; dispatches to the inversion-symmetric form when flagged.
pub fn build_linear_generator(p: &LinearRotorParams) -> Result<GeneratorMap> {
    p.validate()?;
    if p.inversion_symmetric {
        return build_inversion_symmetric_generator(p);
    }
    let basis = p.basis();
    let ext = basis.extended(2);
    let keep = Basis::from(basis).indices_in(&Basis::from(ext))?;
    let m = m_sparse(ext);
    let cross = cross_components(&m, &j_sparse(ext));
    let terms = expanded_terms(
        2.0 * p.diffusion(),
        1.0 / (2.0 * p.xi),
        project_components(&m, &keep),
        project_components(&cross, &keep),
        p.variant,
    );
    GeneratorMap::new(basis.into(), free_rotor_hamiltonian(basis), terms)
}

/// Generator with the nine quadratic Lindblad components `B_ij`.
pub fn build_inversion_symmetric_generator(p: &LinearRotorParams) -> Result<GeneratorMap> {
    let p = p.with_inversion_symmetry(true);
    p.validate()?;
    let basis = p.basis();
    let ext = basis.extended(2);
    let keep = Basis::from(basis).indices_in(&Basis::from(ext))?;
    let m = m_sparse(ext);
    let cross = cross_components(&m, &j_sparse(ext));
    let mut lead = Vec::with_capacity(9);
    let mut corr = Vec::with_capacity(9);
    for mi in &m {
        for (mj, cj) in m.iter().zip(&cross) {
            lead.push(mi.mul_sparse(mj));
            corr.push(mi.mul_sparse(cj));
        }
    }
    let terms = expanded_terms(
        p.diffusion(),
        1.0 / p.xi,
        project_components(&lead, &keep),
        project_components(&corr, &keep),
        p.variant,
    );
    GeneratorMap::new(basis.into(), free_rotor_hamiltonian(basis), terms)
}

/// Amplitude ratio `r_l / r_{l-1}` of the closed-form weights `r_l^2`.
fn amplitude_step(xi: f64, l: f64) -> f64 {
    let a = 2.0 * xi;
    (a - l + 1.0) / (a + l + 1.0)
}

/// Unnormalized closed-form weight of each `|l m>` state with the given `l`.
pub fn stationary_weight(xi: f64, l: usize) -> f64 {
    (1..=l).fold(1.0, |r, k| r * amplitude_step(xi, k as f64)).powi(2)
}

/// Closed-form stationary state of the full generator, diagonal with
/// `m`-independent weights.
pub fn stationary_closed_form(p: &LinearRotorParams) -> Result<DensityMatrix> {
    if !(p.xi > 0.0) || !p.xi.is_finite() {
        return Err(Error::InvalidArgument(format!("xi must be positive, got {}", p.xi)));
    }
    let basis = p.basis();
    let mut amp = vec![1.0];
    for l in 1..=p.l_max {
        amp.push(amp[l - 1] * amplitude_step(p.xi, l as f64));
    }
    let shell: Vec<f64> = amp.iter().map(|r| r * r).collect();
    let inside: f64 = shell.iter().enumerate().map(|(l, w)| (2 * l + 1) as f64 * w).sum();
    let mut r = amp[p.l_max];
    let mut tail = 0.0;
    let mut l = p.l_max + 1;
    while l < 10_000_000 {
        r *= amplitude_step(p.xi, l as f64);
        let w = (2 * l + 1) as f64 * r * r;
        tail += w;
        if r == 0.0 || w < 1e-20 * inside {
            break;
        }
        l += 1;
    }
    let frac = tail / (inside + tail);
    if frac > TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { tail: frac, limit: TAIL_LIMIT });
    }
    let weights: Vec<f64> = basis.states().map(|(l, _)| shell[l]).collect();
    DensityMatrix::diagonal(basis.into(), &weights)
}

/// Relative residual accepted by the shell-by-shell construction.
const ITERATIVE_TOL: f64 = 1e-10;

/// Stationary state built shell by shell from the diagonal equations at
/// `m = 0`, starting from `l = 0`.
///
/// The state is diagonal with `m`-independent weights, so the equation for
/// `<l 0|L[rho]|l 0>` couples only the shells `l - 1`, `l`, `l + 1`; each
/// equation fixes the next shell. The result is checked against the full
/// generator.
pub fn stationary_iterative(p: &LinearRotorParams) -> Result<DensityMatrix> {
    if p.inversion_symmetric {
        return Err(Error::InvalidArgument(
            "the inversion-symmetric generator has a degenerate kernel; no unique shell recursion".into(),
        ));
    }
    let gen = build_linear_generator(p)?;
    let basis = p.basis();
    let n = p.l_max + 1;
    // rate[l][k]: <l 0| L[sum_m |k m><k m|] |l 0>
    let mut rate = vec![vec![0.0; n]; n];
    for (idx, (k, _)) in basis.states().enumerate() {
        for (i, j, v) in gen.image_of_unit(idx, idx, 0.0) {
            if i != j {
                continue;
            }
            if let Some((l, 0)) = basis.state(i) {
                rate[l][k] += v.re;
            }
        }
    }
    let mut shell = vec![0.0; n];
    shell[0] = 1.0;
    for l in 0..p.l_max {
        let below = if l > 0 { rate[l][l - 1] * shell[l - 1] } else { 0.0 };
        let up = rate[l][l + 1];
        if up == 0.0 {
            return Err(Error::NotConverged { residual: f64::INFINITY });
        }
        let next = -(below + rate[l][l] * shell[l]) / up;
        shell[l + 1] = if next < 0.0 && next.abs() < 1e-14 * shell[0] { 0.0 } else { next };
    }
    if shell.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::NotConverged { residual: f64::INFINITY });
    }
    let weights: Vec<f64> = basis.states().map(|(l, _)| shell[l]).collect();
    let rho = DensityMatrix::diagonal(basis.into(), &weights)?;
    let residual = gen.apply_matrix(rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = (2.0 * p.diffusion() * n as f64 * n as f64).max(1.0);
    if residual > ITERATIVE_TOL * scale {
        return Err(Error::NotConverged { residual });
    }
    Ok(rho)
}

/// Decay rate of the orientation coherence `<Omega|rho|Omega'>`:
/// `2D (1 - m . m')`, or `D |m x m'|^2` for the inversion-symmetric variant.
pub fn localization_rate(a: &Vector3<f64>, b: &Vector3<f64>, p: &LinearRotorParams) -> Result<f64> {
    for v in [a, b] {
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("orientation {v:?} is not a unit vector")));
        }
    }
    let d = p.diffusion();
    Ok(if p.inversion_symmetric {
        d * a.cross(b).norm_squared()
    } else {
        2.0 * d * (1.0 - a.dot(b))
    })
}

/// Thermal state `exp(-H / kT) / Z` with `H / kT = l(l+1) / xi`.
pub fn gibbs_state(basis: LinearBasis, xi: f64) -> Result<DensityMatrix> {
    if !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
    }
    let w: Vec<f64> = basis.states().map(|(l, _)| (-((l * (l + 1)) as f64) / xi).exp()).collect();
    DensityMatrix::diagonal(basis.into(), &w)
}

/// Cutoff at which the thermal weights beyond `l_max` are negligible.
pub fn gibbs_cutoff(xi: f64) -> usize {
    (34.0 * xi).sqrt() as usize + 2
}

/// Trace norm of the dissipator applied to the thermal state.
pub fn gibbs_residual(gamma: f64, xi: f64, l_max: usize) -> Result<f64> {
    let p = LinearRotorParams::new(xi, gamma, l_max)?;
    let gen = build_linear_generator(&p)?;
    let g = gibbs_state(p.basis(), xi)?;
    Ok(trace_norm(&gen.dissipator_matrix(g.matrix())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsScaling {
    pub xi: Vec<f64>,
    pub l_max: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Relative change of each residual when two shells are added.
    pub convergence: Vec<f64>,
    /// Least-squares slope of `log residual` against `log xi`; absent when a
    /// residual vanishes.
    pub slope: Option<f64>,
}

/// Relative change tolerated under `l_max -> l_max + 2`.
pub const GIBBS_CONVERGENCE_TOL: f64 = 1e-6;

/// Thermal-state residuals over a list of temperatures, with a log-log fit.
pub fn gibbs_residual_scaling(gamma: f64, xi_list: &[f64]) -> Result<GibbsScaling> {
    if xi_list.is_empty() {
        return Err(Error::InvalidArgument("temperature list is empty".into()));
    }
    if xi_list.iter().any(|&x| !(x >= 5.0)) || xi_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("xi values must be at least 5 and strictly ascending".into()));
    }
    let mut out = GibbsScaling {
        xi: xi_list.to_vec(),
        l_max: Vec::new(),
        residuals: Vec::new(),
        convergence: Vec::new(),
        slope: None,
    };
    for &xi in xi_list {
        let l_max = gibbs_cutoff(xi);
        let r = gibbs_residual(gamma, xi, l_max)?;
        let r2 = gibbs_residual(gamma, xi, l_max + 2)?;
        let change = if r2 == 0.0 && r == 0.0 { 0.0 } else { (r2 - r).abs() / r2.abs().max(r.abs()) };
        if change > GIBBS_CONVERGENCE_TOL {
            return Err(Error::NotConverged { residual: change });
        }
        out.l_max.push(l_max);
        out.residuals.push(r);
        out.convergence.push(change);
    }
    if xi_list.len() >= 2 && out.residuals.iter().all(|&r| r > 0.0) {
        let xs: Vec<f64> = xi_list.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = out.residuals.iter().map(|r| r.ln()).collect();
        out.slope = Some(fit_slope(&xs, &ys));
    }
    Ok(out)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Wave packet `sum_l exp(-(l - l0)^2 / (4 width^2)) |l, l>` rotating about the z axis.
pub fn rotating_packet(basis: LinearBasis, l0: f64, width: f64) -> Result<DensityMatrix> {
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    for l in 0..=basis.l_max {
        let idx = basis.index(l, l as i64).expect("state in basis");
        psi[idx] = C64::new((-(l as f64 - l0).powi(2) / (4.0 * width * width)).exp(), 0.0);
    }
    DensityMatrix::pure(basis.into(), &psi)
}

/// Mean angular momentum and its instantaneous rate of change under `gen`.
pub fn angular_momentum_rate(gen: &GeneratorMap, rho: &DensityMatrix) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let Basis::Linear(b) = gen.basis() else {
        return Err(Error::InvalidArgument("angular momentum rate needs a linear-rotor generator".into()));
    };
    let drho = gen.apply_matrix(rho.matrix());
    let j = j_sparse(b);
    let mut mean = Vector3::zeros();
    let mut rate = Vector3::zeros();
    for (k, jk) in j.iter().enumerate() {
        let jd = OperatorMatrix::new(b.into(), jk.to_dense())?;
        mean[k] = rho.expectation(&jd).re;
        rate[k] = (jd.entries() * &drho).trace().re;
    }
    Ok((mean, rate))
}

/// `|d<J>/dt + gamma <J>| / (gamma |<J>|)`: deviation from classical friction.
pub fn ehrenfest_defect(gen: &GeneratorMap, rho: &DensityMatrix, gamma: f64) -> Result<f64> {
    let (mean, rate) = angular_momentum_rate(gen, rho)?;
    let norm = mean.norm();
    if norm == 0.0 || gamma == 0.0 {
        return Err(Error::InvalidArgument("need non-zero <J> and gamma".into()));
    }
    Ok((rate + gamma * mean).norm() / (gamma * norm))
}

/// `d<J^2>/dt` under `gen`.
pub fn j_squared_rate(gen: &GeneratorMap, rho: &DensityMatrix) -> Result<f64> {
    let Basis::Linear(b) = gen.basis() else {
        return Err(Error::InvalidArgument("needs a linear-rotor generator".into()));
    };
    let drho = gen.apply_matrix(rho.matrix());
    Ok(b.states().enumerate().map(|(i, (l, _))| (l * (l + 1)) as f64 * drho[(i, i)].re).sum())
}

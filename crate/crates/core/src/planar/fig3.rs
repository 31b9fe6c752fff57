//! Decoherence and thermalization of a two-blob superposition on the circle.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use super::wigner::{boundary_mass, BOUNDARY_LIMIT};
use super::{build_planar_generator, stationary_planar, wigner_transform, PlanarBasis, PlanarRotorParams, WignerField};
use crate::error::{Error, Result};
use crate::lindblad::{propagate_with, DensityMatrix, PropagationOptions};
use crate::operator::C64;
use crate::Variant;

/// Angular samples used to expand the initial wave function.
const INITIAL_GRID: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Config {
    pub xi: f64,
    pub gamma: f64,
    /// Momentum of the two blobs, placed at `+m0` and `-m0`.
    pub m0: i64,
    /// Angular width parameter of the envelope `exp(cos(alpha) / (4 sigma^2))`.
    pub sigma: f64,
    pub m_max: usize,
    /// Angle samples of the Wigner field; `4 m_max + 1` when `None`.
    pub n_alpha: Option<usize>,
    pub times: Vec<f64>,
    pub variant: Variant,
    pub inversion_symmetric: bool,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            xi: 20.0,
            gamma: 1.0 / PI,
            m0: 25,
            sigma: 0.2,
            m_max: 60,
            n_alpha: None,
            times: vec![0.0, 0.4 * PI, 4.0 * PI],
            variant: Variant::Full,
            inversion_symmetric: false,
            rtol: 1e-10,
            atol: 1e-13,
        }
    }
}

impl Fig3Config {
    pub fn validate(&self) -> Result<()> {
        PlanarRotorParams::new(self.xi, self.gamma, self.m_max)?;
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.m0.unsigned_abs() as usize > self.m_max {
            return Err(Error::InvalidArgument(format!("m0 = {} lies outside m_max = {}", self.m0, self.m_max)));
        }
        if self.times.is_empty() || self.times.windows(2).any(|w| w[1] < w[0]) || self.times[0] < 0.0 {
            return Err(Error::InvalidArgument("times must be non-empty, sorted, and non-negative".into()));
        }
        Ok(())
    }

    pub fn angle_points(&self) -> usize {
        self.n_alpha.unwrap_or(4 * self.m_max + 1)
    }
}

/// State and Wigner field at one output time.
#[derive(Clone, Debug)]
pub struct Fig3Snapshot {
    pub time: f64,
    pub state: DensityMatrix,
    pub field: WignerField,
    /// `p_m` for `m = -m_max..=m_max`.
    pub marginal: Vec<f64>,
    /// Fringe amplitude of the `m = 0` row.
    pub fringe: f64,
    /// Probability of `m > 0` and of `m < 0`.
    pub blob_weights: (f64, f64),
    pub boundary_mass: f64,
}

#[derive(Clone, Debug)]
pub struct Fig3Result {
    pub config: Fig3Config,
    pub snapshots: Vec<Fig3Snapshot>,
    /// Closed-form stationary state of the chosen variant.
    pub stationary: DensityMatrix,
    /// Trace distance of the last marginal to the stationary weights.
    pub final_distance: f64,
    pub max_boundary_mass: f64,
    pub warnings: Vec<String>,
}

impl Fig3Result {
    pub fn truncation_flagged(&self) -> bool {
        self.max_boundary_mass > BOUNDARY_LIMIT
    }
}

/// Momentum amplitudes of `psi(alpha) = f(alpha)` on `|m| <= m_max`, normalized.
pub fn expand_wave_function(f: impl Fn(f64) -> C64, m_max: usize) -> Result<Vec<C64>> {
    let n = INITIAL_GRID.max(4 * m_max + 4);
    let mut buf: Vec<C64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let basis = PlanarBasis::new(m_max);
    let amps: Vec<C64> = basis
        .momenta()
        .map(|m| buf[m.rem_euclid(n as i64) as usize] / n as f64)
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidState("wave function has no weight on the basis".into()));
    }
    Ok(amps.into_iter().map(|z| z / norm).collect())
}

/// Superposition of envelopes at momenta `+m0` and `-m0`.
pub fn two_blob_state(m0: i64, sigma: f64, m_max: usize) -> Result<DensityMatrix> {
    let s = 1.0 / (4.0 * sigma * sigma);
    let psi = expand_wave_function(
        |a| C64::new(2.0 * (m0 as f64 * a).cos() * (s * (a.cos() - 1.0)).exp(), 0.0),
        m_max,
    )?;
    DensityMatrix::pure(PlanarBasis::new(m_max).into(), &psi)
}

fn half_weights(marginal: &[f64]) -> (f64, f64) {
    let c = marginal.len() / 2;
    (marginal[c + 1..].iter().sum(), marginal[..c].iter().sum())
}

/// Run the two-blob experiment.
pub fn fig3_experiment(config: &Fig3Config) -> Result<Fig3Result> {
    config.validate()?;
    let params = PlanarRotorParams::new(config.xi, config.gamma, config.m_max)?
        .with_variant(config.variant)
        .with_inversion_symmetry(config.inversion_symmetric);
    let gen = build_planar_generator(&params)?;
    let rho0 = two_blob_state(config.m0, config.sigma, config.m_max)?;
    let opts = PropagationOptions {
        rtol: config.rtol,
        atol: config.atol,
        ..PropagationOptions::default()
    };
    let t_final = *config.times.last().expect("validated");
    let states = propagate_with(&gen, &rho0, t_final, &config.times, opts)?;
    let n_alpha = config.angle_points();
    let mut snapshots = Vec::with_capacity(states.len());
    for (&time, state) in config.times.iter().zip(states) {
        let field = wigner_transform(&state, n_alpha)?;
        let marginal = state.populations();
        snapshots.push(Fig3Snapshot {
            time,
            fringe: field.fringe_amplitude(0),
            blob_weights: half_weights(&marginal),
            boundary_mass: boundary_mass(&marginal),
            marginal,
            field,
            state,
        });
    }
    let stationary = stationary_planar(config.xi, config.m_max, config.variant)?;
    let last = snapshots.last().expect("non-empty times");
    let final_distance = 0.5
        * last
            .marginal
            .iter()
            .zip(stationary.populations())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    let max_boundary_mass = snapshots.iter().map(|s| s.boundary_mass).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if max_boundary_mass > BOUNDARY_LIMIT {
        warnings.push(format!(
            "boundary mass {max_boundary_mass:.3e} exceeds {BOUNDARY_LIMIT:e}; increase m_max"
        ));
    }
    if last.state.min_eigenvalue() < -1e-9 {
        warnings.push(format!("final state has eigenvalue {:.3e}", last.state.min_eigenvalue()));
    }
    Ok(Fig3Result {
        config: config.clone(),
        snapshots,
        stationary,
        final_distance,
        max_boundary_mass,
        warnings,
    })
}

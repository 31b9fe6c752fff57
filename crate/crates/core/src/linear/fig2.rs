//! Thermalization of an up/down orientation superposition.

use serde::Serialize;

use super::grid::OrientationGrid;
use super::{build_linear_generator, stationary_closed_form, LinearRotorParams};
use crate::angular::LinearBasis;
use crate::error::{Error, Result};
use crate::lindblad::{
    observables_at, propagate_with, stationary_nullspace, trace_distance, DensityMatrix, ObservableSeries, PropagationOptions,
};
use crate::operator::C64;
use crate::Variant;

/// Relative change of the quadrature norm tolerated under grid refinement.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Config {
    pub xi: f64,
    pub gamma: f64,
    /// Angular width of each orientation lobe.
    pub sigma: f64,
    pub l_max: usize,
    pub variant: Variant,
    pub inversion_symmetric: bool,
    pub t_final: f64,
    /// Spacing of the observable series.
    pub dt_output: f64,
    pub snapshot_times: Vec<f64>,
    /// Polar nodes of the quadrature used for the initial state.
    pub quadrature_nodes: usize,
    /// Polar nodes of the density grid written with each snapshot.
    pub density_nodes: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            xi: 5.0,
            gamma: 1.0,
            sigma: 0.4,
            l_max: 14,
            variant: Variant::Full,
            inversion_symmetric: false,
            t_final: 5.0,
            dt_output: 0.05,
            snapshot_times: vec![0.0, 0.5, 5.0],
            quadrature_nodes: 96,
            density_nodes: 32,
            rtol: 1e-8,
            atol: 1e-12,
        }
    }
}

impl Fig2Config {
    pub fn params(&self) -> Result<LinearRotorParams> {
        let p = LinearRotorParams::new(self.xi, self.gamma, self.l_max)?
            .with_variant(self.variant)
            .with_inversion_symmetry(self.inversion_symmetric);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.l_max < 12 {
            return Err(Error::InvalidArgument(format!("l_max must be at least 12, got {}", self.l_max)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.t_final >= 0.0) || !(self.dt_output > 0.0) {
            return Err(Error::InvalidArgument("need t_final >= 0 and dt_output > 0".into()));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.t_final).contains(&t)) {
            return Err(Error::InvalidArgument(format!("snapshot times must lie in [0, {}]", self.t_final)));
        }
        if self.quadrature_nodes <= self.l_max || self.density_nodes == 0 {
            return Err(Error::InvalidArgument("quadrature needs more than l_max polar nodes".into()));
        }
        Ok(())
    }

    /// Series grid merged with the snapshot times, sorted without duplicates.
    pub fn output_times(&self) -> Vec<f64> {
        let n = (self.t_final / self.dt_output).round() as usize;
        let mut t: Vec<f64> = (0..=n).map(|k| (k as f64 * self.dt_output).min(self.t_final)).collect();
        t.extend(&self.snapshot_times);
        t.push(self.t_final);
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        t
    }
}

#[derive(Clone, Debug)]
pub struct Fig2Snapshot {
    pub time: f64,
    pub state: DensityMatrix,
    /// `p_l` for `l = 0..=l_max`.
    pub shell_populations: Vec<f64>,
    /// `(theta, phi, <Omega|rho|Omega>)` on the density grid.
    pub density: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Fig2Result {
    pub config: Fig2Config,
    pub series: ObservableSeries,
    pub snapshots: Vec<Fig2Snapshot>,
    /// Reference state for the relative entropy: the closed form for the
    /// full generator, the generator kernel otherwise.
    pub stationary: DensityMatrix,
    pub stationary_shells: Vec<f64>,
    pub final_state: DensityMatrix,
    pub final_distance: f64,
    pub warnings: Vec<String>,
}

/// Shell populations `p_l = sum_m rho_{lm,lm}`.
pub fn shell_populations(rho: &DensityMatrix, basis: LinearBasis) -> Vec<f64> {
    let diag = rho.populations();
    let mut p = vec![0.0; basis.l_max + 1];
    for (i, (l, _)) in basis.states().enumerate() {
        p[l] += diag[i];
    }
    p
}

/// `psi(Omega) ~ exp(-|e_z x m|^2 / (2 sigma^2))`, expanded in `|l m>` by
/// quadrature and normalized on the basis. Only even `l` and `m = 0`
/// components survive; a violation, or a quadrature norm that moves by more
/// than [`QUADRATURE_TOL`] when the grid is doubled, is an error.
pub fn initial_superposition(basis: LinearBasis, sigma: f64, nodes: usize) -> Result<DensityMatrix> {
    let f = |t: f64| (-(t.sin().powi(2)) / (2.0 * sigma * sigma)).exp();
    let coarse = OrientationGrid::new(nodes, 2 * basis.l_max + 2)?;
    let fine = OrientationGrid::new(2 * nodes, 2 * basis.l_max + 2)?;
    let n1 = coarse.integrate(|t, _| f(t).powi(2));
    let n2 = fine.integrate(|t, _| f(t).powi(2));
    let deviation = (n1 - n2).abs() / n2;
    if deviation > QUADRATURE_TOL {
        return Err(Error::GridTooCoarse { deviation });
    }
    let c = coarse.project(basis, |t, _| C64::new(f(t), 0.0));
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for (z, (l, m)) in c.iter().zip(basis.states()) {
        if (l % 2 == 1 || m != 0) && z.norm() > 1e-10 * norm {
            return Err(Error::InvalidState(format!(
                "initial state has a forbidden component at l = {l}, m = {m}: {:.3e}",
                z.norm()
            )));
        }
    }
    DensityMatrix::pure(basis.into(), &c)
}

/// Propagate the superposition and collect observables and snapshots.
pub fn fig2_experiment(config: &Fig2Config) -> Result<Fig2Result> {
    config.validate()?;
    let p = config.params()?;
    let basis = p.basis();
    let gen = build_linear_generator(&p)?;
    let rho0 = initial_superposition(basis, config.sigma, config.quadrature_nodes)?;
    let stationary = if p.variant == Variant::Full && !p.inversion_symmetric {
        stationary_closed_form(&p)?
    } else {
        stationary_nullspace(&gen)?
    };
    let times = config.output_times();
    let opts = PropagationOptions {
        rtol: config.rtol,
        atol: config.atol,
        ..PropagationOptions::default()
    };
    let states = propagate_with(&gen, &rho0, config.t_final, &times, opts)?;
    let h = gen.hamiltonian_matrix();
    let mut series = ObservableSeries::default();
    let mut warnings = Vec::new();
    let mut worst = 0.0f64;
    for (&t, s) in times.iter().zip(&states) {
        worst = worst.min(s.min_eigenvalue());
        series.push(observables_at(t, &s.clipped(), &h, Some(&stationary))?);
    }
    if worst < -1e-9 {
        warnings.push(format!("raw minimum eigenvalue {worst:.3e} along the trajectory"));
    }
    let grid = OrientationGrid::new(config.density_nodes, 2 * config.density_nodes)?;
    let mut snapshots = Vec::new();
    for &ts in &config.snapshot_times {
        let k = times
            .iter()
            .position(|t| (t - ts).abs() < 1e-12)
            .expect("snapshot times are part of the output grid");
        let state = states[k].clone();
        let values = grid.density(&state)?;
        let density = grid.points().zip(values).map(|((t, p), v)| (t, p, v)).collect();
        snapshots.push(Fig2Snapshot {
            time: ts,
            shell_populations: shell_populations(&state, basis),
            state,
            density,
        });
    }
    let final_state = states.last().expect("output grid is non-empty").clone();
    let final_distance = trace_distance(&final_state, &stationary)?;
    Ok(Fig2Result {
        config: config.clone(),
        series,
        snapshots,
        stationary_shells: shell_populations(&stationary, basis),
        stationary,
        final_state,
        final_distance,
        warnings,
    })
}

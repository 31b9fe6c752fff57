//! Classical rotational Brownian motion.
//!
//! Angular momentum follows `dJ = -Gamma(Omega) J dt + sqrt(2 D(Omega)) dW`,
//! and the orientation turns with `omega = I^+(Omega) J`. Lab-frame tensors
//! are the body tensors rotated by the current orientation. The update is
//! Euler-Maruyama in `J` and an exact rotation for the orientation.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::io::fmt;
use crate::tensors::{rotation_matrix, tensors_from_geometry, Orientation, RotorGeometry, TensorTriple};

/// Orientation tolerance of a classical state.
pub const ORIENTATION_TOL: f64 = 1e-10;
/// Tolerance of the fluctuation-dissipation check.
pub const FD_TOL: f64 = 1e-10;

/// Orientation of a rigid body, or of the axis of a linear rotor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Pose {
    Full(Orientation),
    /// Unit vector along the body axis of zero inertia.
    Linear(Vector3<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalState {
    pub pose: Pose,
    pub j: Vector3<f64>,
}

impl ClassicalState {
    pub fn full(orientation: Orientation, j: Vector3<f64>) -> Self {
        Self {
            pose: Pose::Full(orientation),
            j,
        }
    }

    /// Linear rotor along `m`; `J` must be perpendicular to `m`.
    pub fn linear(m: Vector3<f64>, j: Vector3<f64>) -> Result<Self> {
        if (m.norm() - 1.0).abs() > ORIENTATION_TOL {
            return Err(Error::InvalidArgument(format!("axis {m:?} is not a unit vector")));
        }
        if j.dot(&m).abs() > ORIENTATION_TOL * j.norm().max(1.0) {
            return Err(Error::InvalidArgument("J must be perpendicular to the axis".into()));
        }
        Ok(Self {
            pose: Pose::Linear(m),
            j,
        })
    }

    /// Rotation taking body coordinates to the lab for `tensors`.
    pub fn rotation(&self, tensors: &TensorTriple) -> Matrix3<f64> {
        match &self.pose {
            Pose::Full(o) => *o.matrix(),
            Pose::Linear(m) => align(&tensors.inertia_axes.column(0).into_owned(), m),
        }
    }

    /// `J^T I^+(Omega) J / 2`.
    pub fn energy(&self, tensors: &TensorTriple) -> f64 {
        let r = self.rotation(tensors);
        let omega = r * inertia_pinv(tensors) * r.transpose() * self.j;
        0.5 * self.j.dot(&omega)
    }
}

/// Smallest rotation taking unit vector `a` onto unit vector `b`.
fn align(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    let axis = a.cross(b);
    let s = axis.norm();
    let c = a.dot(b);
    if s < 1e-15 {
        if c > 0.0 {
            return Matrix3::identity();
        }
        // Half turn about any axis perpendicular to a.
        let p = if a.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let n = a.cross(&p).normalize();
        return 2.0 * n * n.transpose() - Matrix3::identity();
    }
    rotation_matrix(axis / s * s.atan2(c))
}

fn inertia_pinv(t: &TensorTriple) -> Matrix3<f64> {
    let tol = 1e-10 * t.inertia.abs().max();
    let mut inv = Matrix3::zeros();
    for k in 0..3 {
        if t.inertia[k] > tol {
            let v = t.inertia_axes.column(k);
            inv += v * v.transpose() / t.inertia[k];
        }
    }
    inv
}

/// `sqrt(2 D)` of the body diffusion tensor, built from its eigenframe.
fn noise_amplitude(t: &TensorTriple) -> Matrix3<f64> {
    let mut s = Matrix3::zeros();
    for k in 0..3 {
        let v = t.axes.column(k);
        s += v * v.transpose() * (2.0 * t.diffusion[k].max(0.0)).sqrt();
    }
    s
}

/// Body-frame quantities reused across steps.
#[derive(Clone, Debug)]
pub struct StepKernel {
    friction: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
    noise: Matrix3<f64>,
    tensors: TensorTriple,
}

impl StepKernel {
    pub fn new(tensors: &TensorTriple) -> Result<Self> {
        if tensors.diffusion.iter().any(|&d| d < -1e-12 * tensors.diffusion.abs().max().max(1.0)) {
            return Err(Error::InvalidArgument("diffusion tensor has a negative eigenvalue".into()));
        }
        Ok(Self {
            friction: tensors.friction_tensor,
            inertia_inv: inertia_pinv(tensors),
            noise: noise_amplitude(tensors),
            tensors: tensors.clone(),
        })
    }

    /// One Euler-Maruyama step with standard normal draw `g`.
    pub fn step(&self, s: &ClassicalState, dt: f64, g: &Vector3<f64>) -> ClassicalState {
        let r = s.rotation(&self.tensors);
        let rt = r.transpose();
        let omega = r * self.inertia_inv * rt * s.j;
        let friction = r * self.friction * rt;
        let noise = r * self.noise * rt * g;
        let mut j = s.j - friction * s.j * dt + noise * dt.sqrt();
        let pose = match &s.pose {
            Pose::Full(o) => Pose::Full(o.rotate_by(omega * dt)),
            Pose::Linear(m) => {
                let m_new = (rotation_matrix(omega * dt) * m).normalize();
                j -= m_new * j.dot(&m_new);
                Pose::Linear(m_new)
            }
        };
        ClassicalState { pose, j }
    }
}

/// One Euler-Maruyama step; see [`StepKernel::step`].
pub fn sde_step(s: &ClassicalState, tensors: &TensorTriple, dt: f64, g: &Vector3<f64>) -> Result<ClassicalState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(StepKernel::new(tensors)?.step(s, dt, g))
}

/// Tensors of a particle cluster, with the fluctuation-dissipation relation
/// `D = kT Gamma I` checked on the range of `I`.
pub fn diffusion_from_particles(geom: &RotorGeometry, kt: f64) -> Result<TensorTriple> {
    let t = tensors_from_geometry(geom, kt)?;
    let scale = t.diffusion_tensor.abs().max().max(f64::MIN_POSITIVE);
    let defect = t.fluctuation_dissipation_defect();
    if defect > FD_TOL * scale.max(1.0) {
        return Err(Error::InvalidState(format!(
            "fluctuation-dissipation relation violated by {defect:.3e}"
        )));
    }
    Ok(t)
}

/// Trajectories sharing one set of tensors, each with its own random stream.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub states: Vec<ClassicalState>,
    pub seed: u64,
    pub time: f64,
    rngs: Vec<ChaCha8Rng>,
}

impl Ensemble {
    /// Trajectory `k` draws from stream `k` of a generator seeded with `seed`.
    pub fn new(states: Vec<ClassicalState>, seed: u64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("ensemble must hold at least one state".into()));
        }
        let rngs = (0..states.len())
            .map(|k| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(k as u64);
                r
            })
            .collect();
        Ok(Self {
            states,
            seed,
            time: 0.0,
            rngs,
        })
    }

    /// `n` copies of one state.
    pub fn replicate(state: ClassicalState, n: usize, seed: u64) -> Result<Self> {
        Self::new(vec![state; n], seed)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Advance every trajectory by `steps` steps of length `dt`.
    pub fn advance(&mut self, kernel: &StepKernel, dt: f64, steps: usize) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        self.states.par_iter_mut().zip(self.rngs.par_iter_mut()).for_each(|(s, rng)| {
            for _ in 0..steps {
                let g = Vector3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
                *s = kernel.step(s, dt, &g);
            }
        });
        self.time += dt * steps as f64;
        Ok(())
    }
}

/// Sample moments of an ensemble with standard errors of the mean.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleMoments {
    pub time: f64,
    pub samples: usize,
    pub j_mean: Vector3<f64>,
    pub j_mean_se: Vector3<f64>,
    pub j_squared: f64,
    pub j_squared_se: f64,
    pub j_outer: Matrix3<f64>,
    pub j_outer_se: Matrix3<f64>,
    pub energy: f64,
    pub energy_se: f64,
}

fn mean_se(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Moments of `<J>`, `<J^2>`, `<J J^T>`, and `<H>`.
pub fn ensemble_moments(e: &Ensemble, tensors: &TensorTriple) -> Result<EnsembleMoments> {
    if e.states.is_empty() {
        return Err(Error::InvalidArgument("ensemble is empty".into()));
    }
    let n = e.states.len() as f64;
    let js = || e.states.iter().map(|s| s.j);
    let mut j_mean = Vector3::zeros();
    let mut j_mean_se = Vector3::zeros();
    let mut j_outer = Matrix3::zeros();
    let mut j_outer_se = Matrix3::zeros();
    for a in 0..3 {
        (j_mean[a], j_mean_se[a]) = mean_se(js().map(move |j| j[a]), n);
        for b in 0..3 {
            (j_outer[(a, b)], j_outer_se[(a, b)]) = mean_se(js().map(move |j| j[a] * j[b]), n);
        }
    }
    let (j_squared, j_squared_se) = mean_se(js().map(|j| j.norm_squared()), n);
    let energies: Vec<f64> = e.states.iter().map(|s| s.energy(tensors)).collect();
    let (energy, energy_se) = mean_se(energies.iter().copied(), n);
    Ok(EnsembleMoments {
        time: e.time,
        samples: e.states.len(),
        j_mean,
        j_mean_se,
        j_squared,
        j_squared_se,
        j_outer,
        j_outer_se,
        energy,
        energy_se,
    })
}

/// Settings of a linear-rotor ensemble run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearEnsembleConfig {
    pub xi: f64,
    pub gamma: f64,
    pub trajectories: usize,
    /// Step length; `1e-3 / gamma` when `None`.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub dt_output: f64,
    pub seed: u64,
    /// Initial `|J|`, perpendicular to the initial axis `e_z`.
    pub j0: f64,
}

impl Default for LinearEnsembleConfig {
    fn default() -> Self {
        Self {
            xi: 40.0,
            gamma: 1.0,
            trajectories: 10_000,
            dt: None,
            t_final: 3.0,
            dt_output: 0.25,
            seed: 1,
            j0: 6f64.sqrt(),
        }
    }
}

impl LinearEnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument("need xi > 0 and gamma > 0".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidArgument("need at least one trajectory".into()));
        }
        if !(self.t_final >= 0.0) || !(self.dt_output > 0.0) || !(self.step() > 0.0) {
            return Err(Error::InvalidArgument("times must be positive".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.dt.unwrap_or(1e-3 / self.gamma)
    }

    pub fn tensors(&self) -> Result<TensorTriple> {
        TensorTriple::linear(1.0, self.gamma, self.xi / 2.0)
    }
}

/// Moment series of a linear-rotor ensemble started at axis `e_z` with
/// `J = j0 e_x`.
pub fn run_linear_ensemble(c: &LinearEnsembleConfig) -> Result<Vec<EnsembleMoments>> {
    c.validate()?;
    let tensors = c.tensors()?;
    let kernel = StepKernel::new(&tensors)?;
    let start = ClassicalState::linear(Vector3::z(), Vector3::x() * c.j0)?;
    let mut e = Ensemble::replicate(start, c.trajectories, c.seed)?;
    let dt = c.step();
    let per_output = (c.dt_output / dt).round().max(1.0) as usize;
    let outputs = (c.t_final / (per_output as f64 * dt)).round() as usize;
    let mut series = vec![ensemble_moments(&e, &tensors)?];
    for _ in 0..outputs {
        e.advance(&kernel, dt, per_output)?;
        series.push(ensemble_moments(&e, &tensors)?);
    }
    Ok(series)
}

/// Moment series as CSV: `time, j1, j2, j3, j1_se, j2_se, j3_se, j_squared,
/// j_squared_se, energy, energy_se`.
pub fn write_moments_csv<W: Write>(mut w: W, series: &[EnsembleMoments]) -> Result<()> {
    writeln!(w, "time,j1,j2,j3,j1_se,j2_se,j3_se,j_squared,j_squared_se,energy,energy_se")?;
    for m in series {
        let row = [
            m.time,
            m.j_mean[0],
            m.j_mean[1],
            m.j_mean[2],
            m.j_mean_se[0],
            m.j_mean_se[1],
            m.j_mean_se[2],
            m.j_squared,
            m.j_squared_se,
            m.energy,
            m.energy_se,
        ];
        writeln!(w, "{}", row.map(fmt).join(","))?;
    }
    Ok(())
}

//! Adaptive Dormand-Prince 5(4) integration of `d rho / dt = L[rho]`.
//!
//! When the Hamiltonian is diagonal the state is carried in the interaction
//! picture, `sigma_ab = rho_ab exp(i (E_a - E_b) t)`, which removes the free
//! rotation from the step-size control.

use nalgebra::DMatrix;

use super::{DensityMatrix, GeneratorMap};
use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, C64};

/// Step-size control settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Use the interaction picture when `H` is diagonal.
    pub interaction_picture: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            initial_step: None,
            max_steps: 10_000_000,
            interaction_picture: true,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

/// Rotating frame applied around the right-hand side: the integrated
/// variable is `y_ij = x_ij exp(i w_ij t)`.
#[derive(Clone, Debug)]
pub(crate) enum Frame {
    Lab,
    /// `w_ij = e_i - e_j`.
    Separable(Vec<f64>),
    /// Arbitrary `w_ij`.
    General(DMatrix<f64>),
}

impl Frame {
    /// Multiply entry `(i, j)` by `exp(sign * i w_ij t)`.
    fn rotate(&self, m: &mut DMatrix<C64>, t: f64, sign: f64) {
        match self {
            Frame::Lab => {}
            Frame::Separable(e) => {
                let u: Vec<C64> = e.iter().map(|&ea| C64::from_polar(1.0, sign * ea * t)).collect();
                for b in 0..m.ncols() {
                    let ub = u[b].conj();
                    for a in 0..m.nrows() {
                        m[(a, b)] *= u[a] * ub;
                    }
                }
            }
            Frame::General(w) => {
                m.zip_apply(w, |z, wij| {
                    if wij != 0.0 {
                        *z *= C64::from_polar(1.0, sign * wij * t)
                    }
                });
            }
        }
    }
}

/// Dormand-Prince 5(4) integrator for `dx/dt = F(x)` with `F` linear and
/// time independent, optionally in a rotating frame whose free part is
/// removed from `F`.
pub(crate) struct Dopri<F> {
    rhs: F,
    frame: Frame,
    opts: PropagationOptions,
    steps: usize,
}

impl<F: Fn(&DMatrix<C64>, &mut DMatrix<C64>)> Dopri<F> {
    pub(crate) fn new(rhs: F, frame: Frame, opts: PropagationOptions) -> Self {
        Self {
            rhs,
            frame,
            opts,
            steps: 0,
        }
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }

    fn eval(&self, t: f64, y: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        if matches!(self.frame, Frame::Lab) {
            (self.rhs)(y, out);
        } else {
            let mut x = y.clone();
            self.frame.rotate(&mut x, t, -1.0);
            (self.rhs)(&x, out);
            self.frame.rotate(out, t, 1.0);
        }
    }

    /// Evolve `x` from `t = 0` and return it at each of `times`.
    pub(crate) fn evolve(&mut self, x: &DMatrix<C64>, times: &[f64]) -> Result<Vec<DMatrix<C64>>> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument(
                "output times must be finite, non-negative, and sorted".into(),
            ));
        }
        let (r, c) = x.shape();
        let mut y = x.clone();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        let mut k1 = DMatrix::zeros(r, c);
        self.eval(t, &y, &mut k1);
        let mut h = self.opts.initial_step.unwrap_or_else(|| {
            let yn = y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            let fn_ = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if fn_ > 0.0 {
                (0.01 * yn / fn_).min(1.0)
            } else {
                1.0
            }
        });
        let mut stages: Vec<DMatrix<C64>> = (0..6).map(|_| DMatrix::zeros(r, c)).collect();
        let mut tmp = DMatrix::zeros(r, c);
        for &target in times {
            while t < target {
                if self.steps >= self.opts.max_steps {
                    return Err(Error::NotConverged { residual: target - t });
                }
                let last = h >= target - t;
                let step = if last { target - t } else { h };
                if step < 1e-14 * t.abs().max(1.0) && !last {
                    return Err(Error::StepSizeUnderflow { time: t });
                }
                self.steps += 1;
                let (err, y_new) = self.trial(t, step, &y, &k1, &mut stages, &mut tmp);
                if err <= 1.0 {
                    t = if last { target } else { t + step };
                    y = y_new;
                    std::mem::swap(&mut k1, &mut stages[5]);
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !(last && err <= 1.0) || factor < 1.0 {
                    h = step * factor;
                }
            }
            let mut snap = y.clone();
            self.frame.rotate(&mut snap, t, -1.0);
            out.push(snap);
        }
        Ok(out)
    }

    /// One trial step. Returns the scaled error norm and the 5th-order result.
    /// On return `stages[5]` holds the derivative at the new point.
    fn trial(
        &self,
        t: f64,
        h: f64,
        y: &DMatrix<C64>,
        k1: &DMatrix<C64>,
        stages: &mut [DMatrix<C64>],
        tmp: &mut DMatrix<C64>,
    ) -> (f64, DMatrix<C64>) {
        let combo = |tmp: &mut DMatrix<C64>, parts: &[(f64, &DMatrix<C64>)]| {
            tmp.copy_from(y);
            for (c, k) in parts {
                tmp.zip_apply(*k, |a, b| *a += b * (h * c));
            }
        };
        let [k2, k3, k4, k5, k6, k7] = stages else {
            unreachable!("six stage buffers")
        };
        combo(tmp, &[(A21, k1)]);
        self.eval(t + C2 * h, tmp, k2);
        combo(tmp, &[(A31, k1), (A32, &*k2)]);
        self.eval(t + C3 * h, tmp, k3);
        combo(tmp, &[(A41, k1), (A42, &*k2), (A43, &*k3)]);
        self.eval(t + C4 * h, tmp, k4);
        combo(tmp, &[(A51, k1), (A52, &*k2), (A53, &*k3), (A54, &*k4)]);
        self.eval(t + C5 * h, tmp, k5);
        combo(tmp, &[(A61, k1), (A62, &*k2), (A63, &*k3), (A64, &*k4), (A65, &*k5)]);
        self.eval(t + h, tmp, k6);
        let mut y_new = y.clone();
        for (c, k) in [(B1, k1), (B3, &*k3), (B4, &*k4), (B5, &*k5), (B6, &*k6)] {
            y_new.zip_apply(k, |a, b| *a += b * (h * c));
        }
        self.eval(t + h, &y_new, k7);
        let mut acc = 0.0;
        for idx in 0..y.len() {
            let e = (k1[idx] * E1 + k3[idx] * E3 + k4[idx] * E4 + k5[idx] * E5 + k6[idx] * E6 + k7[idx] * E7) * h;
            let scale = self.opts.atol + self.opts.rtol * y[idx].norm().max(y_new[idx].norm());
            acc += (e.norm() / scale).powi(2);
        }
        let err = (acc / y.len() as f64).sqrt();
        if err.is_finite() {
            (err, y_new)
        } else {
            (f64::INFINITY, y_new)
        }
    }
}

/// Time integrator bound to one generator.
pub struct Propagator<'g> {
    gen: &'g GeneratorMap,
    opts: PropagationOptions,
    steps: usize,
}

impl<'g> Propagator<'g> {
    pub fn new(gen: &'g GeneratorMap, opts: PropagationOptions) -> Self {
        Self { gen, opts, steps: 0 }
    }

    /// Accepted plus rejected steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Evolve `x` (any operator) from `t = 0` and return it at each of
    /// `times`, which must be sorted and non-negative.
    pub fn evolve(&mut self, x: &DMatrix<C64>, times: &[f64]) -> Result<Vec<DMatrix<C64>>> {
        let gen = self.gen;
        let energies = if self.opts.interaction_picture {
            gen.diagonal_energies()
        } else {
            None
        };
        match energies {
            Some(e) => {
                let mut dp = Dopri::new(|x: &DMatrix<C64>, out: &mut DMatrix<C64>| gen.apply_into(x, out, false), Frame::Separable(e), self.opts);
                let r = dp.evolve(x, times);
                self.steps += dp.steps();
                r
            }
            None => {
                let mut dp = Dopri::new(|x: &DMatrix<C64>, out: &mut DMatrix<C64>| gen.apply_into(x, out, true), Frame::Lab, self.opts);
                let r = dp.evolve(x, times);
                self.steps += dp.steps();
                r
            }
        }
    }
}

/// Propagate `rho0` and return snapshots at `output_times` (sorted, inside
/// `[0, t_final]`) with default tolerances.
pub fn propagate(gen: &GeneratorMap, rho0: &DensityMatrix, t_final: f64, output_times: &[f64]) -> Result<Vec<DensityMatrix>> {
    propagate_with(gen, rho0, t_final, output_times, PropagationOptions::default())
}

/// [`propagate`] with explicit tolerances. Snapshots are made exactly
/// Hermitian but are otherwise the raw integrator state.
pub fn propagate_with(
    gen: &GeneratorMap,
    rho0: &DensityMatrix,
    t_final: f64,
    output_times: &[f64],
    opts: PropagationOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    if !(t_final >= 0.0) || output_times.iter().any(|&t| t > t_final) {
        return Err(Error::InvalidArgument(format!(
            "output times must lie in [0, {t_final}]"
        )));
    }
    let mut p = Propagator::new(gen, opts);
    let raw = p.evolve(rho0.matrix(), output_times)?;
    raw.into_iter()
        .map(|m| {
            let op = OperatorMatrix::new(gen.basis(), m)?;
            Ok(DensityMatrix::from_trusted(op))
        })
        .collect()
}

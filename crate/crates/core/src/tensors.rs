//! Inertia, diffusion, and friction tensors of a rigid rotor, and the Lindblad
//! weights derived from the diffusion eigenvalues.
//!
//! A rotor is modelled as a rigid cluster of damped point particles. With
//! isotropic particle damping the diffusion tensor is
//! `kT sum_n m_n gamma_n (r_n^2 1 - r_n r_n)`; a particle that diffuses only
//! along a direction `n_n` contributes `kT m_n gamma_n (n_n x r_n)(n_n x r_n)`.

use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;

/// A point particle rigidly attached to the rotor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub mass: f64,
    pub gamma: f64,
    pub position: Vector3<f64>,
    /// Unit vector along which the particle's momentum diffuses, if directed.
    pub direction: Option<Vector3<f64>>,
}

impl Particle {
    pub fn new(mass: f64, gamma: f64, position: Vector3<f64>) -> Self {
        Self {
            mass,
            gamma,
            position,
            direction: None,
        }
    }

    pub fn directed(mut self, direction: Vector3<f64>) -> Self {
        self.direction = Some(direction);
        self
    }
}

/// Particle cluster with its center of mass at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorGeometry {
    particles: Vec<Particle>,
}

impl RotorGeometry {
    /// Validates masses, damping rates, directions, and the center of mass.
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidArgument("geometry has no particles".into()));
        }
        for (i, p) in particles.iter().enumerate() {
            if !(p.mass > 0.0) || !(p.gamma > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "particle {i}: mass and gamma must be positive"
                )));
            }
            if let Some(n) = p.direction {
                if (n.norm() - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "particle {i}: direction must be a unit vector"
                    )));
                }
            }
        }
        let total: f64 = particles.iter().map(|p| p.mass).sum();
        let com: Vector3<f64> = particles.iter().map(|p| p.position * p.mass).sum::<Vector3<f64>>() / total;
        let scale = particles
            .iter()
            .map(|p| p.position.norm())
            .fold(1.0, f64::max);
        if com.norm() > COM_TOL * scale {
            return Err(Error::InvalidArgument(format!(
                "center of mass {:.3e} away from the origin",
                com.norm()
            )));
        }
        Ok(Self { particles })
    }

    /// Shift positions so the center of mass is at the origin, then validate.
    pub fn centered(mut particles: Vec<Particle>) -> Result<Self> {
        let total: f64 = particles.iter().map(|p| p.mass).sum();
        if particles.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidArgument("geometry has no mass".into()));
        }
        let com: Vector3<f64> = particles.iter().map(|p| p.position * p.mass).sum::<Vector3<f64>>() / total;
        for p in &mut particles {
            p.position -= com;
        }
        Self::new(particles)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// `sum_n m_n (r_n^2 1 - r_n r_n)`.
    pub fn inertia_tensor(&self) -> Matrix3<f64> {
        self.particles
            .iter()
            .map(|p| {
                let r = p.position;
                (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * p.mass
            })
            .sum()
    }

    /// Diffusion tensor in the body frame at temperature `kt`.
    pub fn diffusion_tensor(&self, kt: f64) -> Matrix3<f64> {
        self.particles
            .iter()
            .map(|p| {
                let r = p.position;
                let shape = match p.direction {
                    None => Matrix3::identity() * r.norm_squared() - r * r.transpose(),
                    Some(n) => {
                        let c = n.cross(&r);
                        c * c.transpose()
                    }
                };
                shape * (kt * p.mass * p.gamma)
            })
            .sum()
    }

    /// `kT sum_n m_n gamma_n r_n r_n`, whose trace complement is the
    /// isotropic-damping diffusion tensor.
    pub fn lindblad_tensor(&self, kt: f64) -> Matrix3<f64> {
        self.particles
            .iter()
            .map(|p| p.position * p.position.transpose() * (kt * p.mass * p.gamma))
            .sum()
    }
}

impl FromStr for RotorGeometry {
    type Err = Error;

    /// One particle per line: `mass gamma x y z [nx ny nz]`, separated by
    /// whitespace or commas. Blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut particles = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: cannot parse {t:?}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            let p = match fields.as_slice() {
                [m, g, x, y, z] => Particle::new(*m, *g, Vector3::new(*x, *y, *z)),
                [m, g, x, y, z, nx, ny, nz] => {
                    Particle::new(*m, *g, Vector3::new(*x, *y, *z)).directed(Vector3::new(*nx, *ny, *nz))
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: expected 5 or 8 fields, found {}",
                        lineno + 1,
                        other.len()
                    )))
                }
            };
            particles.push(p);
        }
        RotorGeometry::new(particles)
    }
}

/// A negative Lindblad weight, which makes the generator fail complete positivity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpViolation {
    pub index: usize,
    pub weight: f64,
}

/// Lindblad weights `D~_k = (D_i + D_j - D_k) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladWeights {
    pub weights: [f64; 3],
    pub violation: Option<CpViolation>,
}

impl LindbladWeights {
    pub fn is_completely_positive(&self) -> bool {
        self.violation.is_none()
    }
}

/// Lindblad weights from diffusion eigenvalues. Weights within `1e-12` of the
/// eigenvalue sum are set to zero. A negative weight is reported
/// through [`LindbladWeights::violation`] (the most negative one), not as an error.
pub fn lindblad_weights(d1: f64, d2: f64, d3: f64) -> Result<LindbladWeights> {
    let d = [d1, d2, d3];
    if d.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "diffusion eigenvalues must be non-negative, got {d:?}"
        )));
    }
    let sum: f64 = d.iter().sum();
    let tol = 1e-12 * sum;
    let weights = d.map(|dk| {
        let w = (sum - 2.0 * dk) / 2.0;
        if w.abs() <= tol {
            0.0
        } else {
            w
        }
    });
    let violation = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w < 0.0)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(index, &weight)| CpViolation { index, weight });
    Ok(LindbladWeights { weights, violation })
}

/// Proper rotation matrix `R(Omega)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    rotation: Matrix3<f64>,
}

impl Orientation {
    pub fn new(rotation: Matrix3<f64>) -> Result<Self> {
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if defect > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidArgument(format!(
                "not a proper rotation: orthogonality defect {defect:.3e}, det {det:.6}"
            )));
        }
        Ok(Self { rotation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
        }
    }

    /// Rotation by `angle` about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        Self {
            rotation: rotation_matrix(axis * (angle / axis.norm())),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    /// Left-multiply by `exp([omega]_x)`, then restore orthonormality.
    pub fn rotate_by(&self, omega: Vector3<f64>) -> Self {
        let mut o = Self {
            rotation: rotation_matrix(omega) * self.rotation,
        };
        o.renormalize();
        o
    }

    /// Nearest rotation via Gram-Schmidt on the columns.
    pub fn renormalize(&mut self) {
        let c0 = self.rotation.column(0).normalize();
        let c1 = (self.rotation.column(1) - c0 * c0.dot(&self.rotation.column(1))).normalize();
        let c2 = c0.cross(&c1);
        self.rotation = Matrix3::from_columns(&[c0, c1, c2]);
    }
}

/// `exp([w]_x)` by the Rodrigues formula.
pub fn rotation_matrix(w: Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = w.cross_matrix();
    if theta < 1e-8 {
        return Matrix3::identity() + k + k * k * 0.5;
    }
    Matrix3::identity() + k * (theta.sin() / theta) + k * k * ((1.0 - theta.cos()) / (theta * theta))
}

/// `R T R^T`.
pub fn rotate_tensor(t: &Matrix3<f64>, r: &Orientation) -> Result<Matrix3<f64>> {
    if (t - t.transpose()).abs().max() > 1e-12 * t.abs().max().max(1.0) {
        return Err(Error::InvalidArgument("tensor is not symmetric".into()));
    }
    Ok(r.rotation * t * r.rotation.transpose())
}

/// Eigen-decomposition with ascending eigenvalues and a reproducible basis:
/// inside each (near-)degenerate eigenspace the vectors are the Gram-Schmidt
/// images of `e_x, e_y, e_z` in that order, and every vector has its first
/// significant component positive.
pub fn sorted_eigen(t: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let sym = (t + t.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Vector3::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let scale = vals.abs().max().max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;

    let mut vecs: Vec<Vector3<f64>> = Vec::with_capacity(3);
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (vals[j] - vals[i]).abs() <= tol {
            j += 1;
        }
        let group: Vec<Vector3<f64>> = (i..j).map(|k| eig.eigenvectors.column(order[k]).into_owned()).collect();
        let projector: Matrix3<f64> = group.iter().map(|v| v * v.transpose()).sum();
        let mut chosen: Vec<Vector3<f64>> = Vec::new();
        for e in [Vector3::x(), Vector3::y(), Vector3::z()] {
            if chosen.len() == group.len() {
                break;
            }
            let mut v = projector * e;
            for c in &chosen {
                v -= c * c.dot(&v);
            }
            if v.norm() > 1e-6 {
                chosen.push(v.normalize());
            }
        }
        vecs.extend(chosen);
        i = j;
    }
    for v in &mut vecs {
        if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-12) {
            if first < 0.0 {
                *v = -*v;
            }
        }
    }
    (vals, Matrix3::from_columns(&vecs))
}

/// Body-frame tensors of a rotor and the derived Lindblad weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTriple {
    pub kt: f64,
    pub inertia_tensor: Matrix3<f64>,
    pub diffusion_tensor: Matrix3<f64>,
    /// `D I^+ / kT`, with the pseudo-inverse taken on the range of `I`.
    pub friction_tensor: Matrix3<f64>,
    /// Inertia eigenvalues, ascending, with eigenvectors as columns of `inertia_axes`.
    pub inertia: Vector3<f64>,
    pub inertia_axes: Matrix3<f64>,
    /// Diffusion eigenvalues, ascending, with eigenvectors as columns of `axes`.
    pub diffusion: Vector3<f64>,
    pub axes: Matrix3<f64>,
    /// Eigenvalues of `I^{-1/2} D I^{-1/2} / kT`, i.e. the friction rates.
    pub friction: Vector3<f64>,
    pub weights: LindbladWeights,
    /// Number of rotational degrees of freedom, `rank(I)`.
    pub rank: usize,
}

impl TensorTriple {
    /// Assemble from explicit inertia and diffusion tensors.
    pub fn from_tensors(inertia_tensor: Matrix3<f64>, diffusion_tensor: Matrix3<f64>, kt: f64) -> Result<Self> {
        if !(kt > 0.0) {
            return Err(Error::InvalidArgument("kT must be positive".into()));
        }
        let (inertia, inertia_axes) = sorted_eigen(&inertia_tensor);
        let (diffusion, axes) = sorted_eigen(&diffusion_tensor);
        let scale = inertia.abs().max();
        let rank_tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
        let rank = inertia.iter().filter(|&&v| v > rank_tol).count();

        let mut inv = Matrix3::zeros();
        let mut inv_sqrt = Matrix3::zeros();
        for k in 0..3 {
            if inertia[k] > rank_tol {
                let v = inertia_axes.column(k);
                inv += v * v.transpose() / inertia[k];
                inv_sqrt += v * v.transpose() / inertia[k].sqrt();
            }
        }
        let friction_tensor = diffusion_tensor * inv / kt;
        let (friction, _) = sorted_eigen(&(inv_sqrt * diffusion_tensor * inv_sqrt / kt));
        let clamp = |x: f64| if x.abs() < 1e-14 * diffusion.abs().max().max(1.0) { 0.0 } else { x };
        let weights = lindblad_weights(clamp(diffusion[0]).max(0.0), diffusion[1].max(0.0), diffusion[2].max(0.0))?;
        Ok(Self {
            kt,
            inertia_tensor,
            diffusion_tensor,
            friction_tensor,
            inertia,
            inertia_axes,
            diffusion,
            axes,
            friction,
            weights,
            rank,
        })
    }

    /// Isotropic rotor with inertia `i0` and friction rate `gamma` on `rank` axes.
    pub fn isotropic(i0: f64, gamma: f64, kt: f64) -> Result<Self> {
        let i = Matrix3::identity() * i0;
        Self::from_tensors(i, i * (gamma * kt), kt)
    }

    /// Linear rotor with symmetry axis `e_z`, inertia `i0`, and friction `gamma`.
    pub fn linear(i0: f64, gamma: f64, kt: f64) -> Result<Self> {
        let i = Matrix3::from_diagonal(&Vector3::new(i0, i0, 0.0));
        Self::from_tensors(i, i * (gamma * kt), kt)
    }

    /// `|D - kT Gamma I|` on the range of `I`: how far the fluctuation-dissipation
    /// relation is from holding there.
    pub fn fluctuation_dissipation_defect(&self) -> f64 {
        let mut p = Matrix3::zeros();
        let rank_tol = 1e-10 * self.inertia.abs().max();
        for k in 0..3 {
            if self.inertia[k] > rank_tol {
                let v = self.inertia_axes.column(k);
                p += v * v.transpose();
            }
        }
        let lhs = p * self.diffusion_tensor * p;
        let rhs = p * (self.friction_tensor * self.inertia_tensor * self.kt) * p;
        (lhs - rhs).abs().max()
    }
}

/// Tensors of a particle cluster at temperature `kt`.
pub fn tensors_from_geometry(geom: &RotorGeometry, kt: f64) -> Result<TensorTriple> {
    TensorTriple::from_tensors(geom.inertia_tensor(), geom.diffusion_tensor(kt), kt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let w = lindblad_weights(2.0, 2.0, 2.0).unwrap();
        assert_eq!(w.weights, [1.0, 1.0, 1.0]);
        assert!(w.is_completely_positive());
        let w = lindblad_weights(1.0, 1.0, 2.0).unwrap();
        assert_eq!(w.weights, [1.0, 1.0, 0.0]);
        let w = lindblad_weights(1.0, 1.0, 3.0).unwrap();
        assert_eq!(w.weights, [1.5, 1.5, -0.5]);
        assert_eq!(w.violation, Some(CpViolation { index: 2, weight: -0.5 }));
        assert!(lindblad_weights(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dumbbell() {
        let g = RotorGeometry::new(vec![
            Particle::new(1.0, 1.0, Vector3::z()),
            Particle::new(1.0, 1.0, -Vector3::z()),
        ])
        .unwrap();
        let t = tensors_from_geometry(&g, 1.0).unwrap();
        assert_eq!(t.rank, 2);
        assert!(t.diffusion[0].abs() < 1e-15);
        assert!((t.axes.column(0) - Vector3::z()).norm() < 1e-12);
        assert!((t.diffusion[1] - 2.0).abs() < 1e-12 && (t.diffusion[2] - 2.0).abs() < 1e-12);
        assert!(t.fluctuation_dissipation_defect() < 1e-12);
    }

    #[test]
    fn off_center_geometry_is_rejected() {
        assert!(RotorGeometry::new(vec![Particle::new(1.0, 1.0, Vector3::x())]).is_err());
        assert!(RotorGeometry::centered(vec![Particle::new(1.0, 1.0, Vector3::x())]).is_ok());
    }

    #[test]
    fn parse_records() {
        let g: RotorGeometry = "# dumbbell\n1 1 0 0 1\n1, 1, 0, 0, -1, 1, 0, 0\n".parse().unwrap();
        assert_eq!(g.particles().len(), 2);
        assert!(g.particles()[1].direction.is_some());
        assert!("1 1 0 0".parse::<RotorGeometry>().is_err());
        assert!("1 1 0 0 x".parse::<RotorGeometry>().is_err());
    }

    #[test]
    fn rotation_moves_zero_axis() {
        let d = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0));
        let r = Orientation::from_axis_angle(Vector3::x(), std::f64::consts::FRAC_PI_2);
        let dr = rotate_tensor(&d, &r).unwrap();
        assert!((dr * Vector3::y()).norm() < 1e-15);
        assert!(Orientation::new(Matrix3::identity() * 2.0).is_err());
    }
}

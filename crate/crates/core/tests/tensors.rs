use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use proptest::test_runner::Config;
use rotorbath::tensors::{
    lindblad_weights, rotate_tensor, sorted_eigen, tensors_from_geometry, CpViolation, Orientation, Particle,
    RotorGeometry, TensorTriple,
};

/// Diffusion tensor by direct summation of `kT m gamma (r x e_i).(r x e_j)`
/// over the particles, or `(n x r)(n x r)` for directed particles.
fn brute_force_diffusion(particles: &[Particle], kt: f64) -> Matrix3<f64> {
    let mut d = Matrix3::zeros();
    for p in particles {
        let r = p.position;
        for i in 0..3 {
            for j in 0..3 {
                let v = match p.direction {
                    None => {
                        let ri = r.cross(&Vector3::ith(i, 1.0));
                        let rj = r.cross(&Vector3::ith(j, 1.0));
                        ri.dot(&rj)
                    }
                    Some(n) => {
                        let c = n.cross(&r);
                        c[i] * c[j]
                    }
                };
                d[(i, j)] += kt * p.mass * p.gamma * v;
            }
        }
    }
    d
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.abs().max()
}

#[test]
fn symmetric_and_degenerate_weights() {
    assert_eq!(lindblad_weights(2.0, 2.0, 2.0).unwrap().weights, [1.0, 1.0, 1.0]);
    let w = lindblad_weights(1.0, 1.0, 2.0).unwrap();
    assert_eq!(w.weights, [1.0, 1.0, 0.0]);
    assert!(w.is_completely_positive());
    let w = lindblad_weights(1.0, 1.0, 3.0).unwrap();
    assert_eq!(w.weights, [1.5, 1.5, -0.5]);
    assert_eq!(w.violation, Some(CpViolation { index: 2, weight: -0.5 }));
}

#[test]
fn identity_rotation_leaves_tensor_unchanged() {
    let t = Matrix3::new(2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 3.0);
    assert_eq!(rotate_tensor(&t, &Orientation::identity()).unwrap(), t);
    assert!(Orientation::new(Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)).is_err());
}

#[test]
fn rotated_dumbbell_moves_its_zero_axis() {
    let g = RotorGeometry::new(vec![
        Particle::new(1.0, 1.0, Vector3::z()),
        Particle::new(1.0, 1.0, -Vector3::z()),
    ])
    .unwrap();
    let d = g.diffusion_tensor(1.0);
    assert!((d * Vector3::z()).norm() < 1e-15);
    let r = Orientation::from_axis_angle(Vector3::x(), FRAC_PI_2);
    let dr = rotate_tensor(&d, &r).unwrap();
    let (vals, vecs) = sorted_eigen(&dr);
    assert!(vals[0].abs() < 1e-14);
    assert!((vecs.column(0).into_owned() - Vector3::y()).norm() < 1e-12 || (vecs.column(0).into_owned() + Vector3::y()).norm() < 1e-12);
    assert!((dr * Vector3::y()).norm() < 1e-14);
}

#[test]
fn dumbbell_diffusion_is_transverse_projector() {
    let m = Vector3::new(1.0, 2.0, 2.0) / 3.0;
    let g = RotorGeometry::new(vec![Particle::new(1.0, 0.5, m), Particle::new(1.0, 0.5, -m)]).unwrap();
    let d = g.diffusion_tensor(2.0);
    let expected = (Matrix3::identity() - m * m.transpose()) * (2.0 * 2.0 * 0.5);
    assert!(max_abs(&(d - expected)) < 1e-14);
    let t = tensors_from_geometry(&g, 2.0).unwrap();
    assert_eq!(t.rank, 2);
}

#[test]
fn unequal_masses_on_axes_match_direct_sum() {
    let particles = vec![
        Particle::new(1.0, 0.7, Vector3::new(2.0, 0.0, 0.0)),
        Particle::new(1.0, 0.7, Vector3::new(-2.0, 0.0, 0.0)),
        Particle::new(2.0, 1.3, Vector3::new(0.0, 1.5, 0.0)),
        Particle::new(2.0, 1.3, Vector3::new(0.0, -1.5, 0.0)),
        Particle::new(3.0, 0.4, Vector3::new(0.0, 0.0, 0.5)),
        Particle::new(3.0, 0.4, Vector3::new(0.0, 0.0, -0.5)),
    ];
    let kt = 1.7;
    let g = RotorGeometry::new(particles.clone()).unwrap();
    let t = tensors_from_geometry(&g, kt).unwrap();
    let oracle = brute_force_diffusion(&particles, kt);
    assert!(max_abs(&(t.diffusion_tensor - oracle)) < 1e-12);
    // Axis-aligned: the tensor is diagonal and D_k = D~_i + D~_j with
    // D~_k = kT sum m gamma r_k^2.
    let tilde = |k: usize| particles.iter().map(|p| kt * p.mass * p.gamma * p.position[k].powi(2)).sum::<f64>();
    let mut expected = [tilde(1) + tilde(2), tilde(0) + tilde(2), tilde(0) + tilde(1)];
    expected.sort_by(f64::total_cmp);
    for (d, e) in t.diffusion.iter().zip(expected) {
        assert!((d - e).abs() < 1e-12);
    }
    let mut w = t.weights.weights;
    w.sort_by(f64::total_cmp);
    let mut tildes = [tilde(0), tilde(1), tilde(2)];
    tildes.sort_by(f64::total_cmp);
    for k in 0..3 {
        assert!((w[k] - tildes[k]).abs() < 1e-12);
    }
}

#[test]
fn collinear_particles_flag_reduced_rank() {
    let g = RotorGeometry::new(vec![
        Particle::new(1.0, 1.0, Vector3::new(0.0, 0.0, 1.0)),
        Particle::new(2.0, 1.0, Vector3::new(0.0, 0.0, -0.5)),
    ])
    .unwrap();
    let t = tensors_from_geometry(&g, 1.0).unwrap();
    assert_eq!(t.rank, 2);
    assert!(t.inertia[0].abs() < 1e-14);
}

#[test]
fn directed_particle_along_its_radius_does_not_diffuse() {
    let r = Vector3::new(0.3, -0.4, 1.2);
    let p = Particle::new(1.0, 1.0, r).directed(r.normalize());
    assert!(max_abs(&brute_force_diffusion(std::slice::from_ref(&p), 1.0)) < 1e-15);
    let q = Particle::new(1.0, 1.0, -r).directed(r.normalize());
    let g = RotorGeometry::new(vec![p, q]).unwrap();
    assert!(max_abs(&g.diffusion_tensor(1.0)) < 1e-15);
}

#[test]
fn off_center_geometry_is_rejected_and_can_be_centered() {
    let ps = vec![Particle::new(1.0, 1.0, Vector3::new(1.0, 0.0, 0.0)), Particle::new(1.0, 1.0, Vector3::new(0.0, 1.0, 0.0))];
    assert!(RotorGeometry::new(ps.clone()).is_err());
    let g = RotorGeometry::centered(ps).unwrap();
    let com: Vector3<f64> = g.particles().iter().map(|p| p.position * p.mass).sum();
    assert!(com.norm() < 1e-15);
}

#[test]
fn isotropic_and_linear_presets() {
    let t = TensorTriple::isotropic(1.0, 0.5, 2.0).unwrap();
    assert_eq!(t.rank, 3);
    assert!(t.friction.iter().all(|&g| (g - 0.5).abs() < 1e-14));
    assert!(t.fluctuation_dissipation_defect() < 1e-14);
    let t = TensorTriple::linear(1.0, 0.5, 2.0).unwrap();
    assert_eq!(t.rank, 2);
    assert!((t.inertia_axes.column(0).into_owned() - Vector3::z()).norm() < 1e-14);
}

fn particle() -> impl Strategy<Value = (f64, f64, [f64; 3], Option<[f64; 3]>)> {
    (
        0.1f64..5.0,
        0.05f64..3.0,
        prop::array::uniform3(-2.0f64..2.0),
        prop::option::weighted(0.3, prop::array::uniform3(-1.0f64..1.0)),
    )
}

fn geometry() -> impl Strategy<Value = Vec<Particle>> {
    prop::collection::vec(particle(), 1..7).prop_filter_map("degenerate direction", |raw| {
        let mut ps = Vec::new();
        for (m, g, r, n) in raw {
            let mut p = Particle::new(m, g, Vector3::from(r));
            if let Some(n) = n {
                let n = Vector3::from(n);
                if n.norm() < 1e-3 {
                    return None;
                }
                p = p.directed(n.normalize());
            }
            ps.push(p);
        }
        Some(ps)
    })
}

fn random_rotation() -> impl Strategy<Value = Orientation> {
    (prop::array::uniform3(-1.0f64..1.0), 0.0f64..std::f64::consts::PI)
        .prop_filter("axis", |(a, _)| Vector3::from(*a).norm() > 1e-3)
        .prop_map(|(a, angle)| Orientation::from_axis_angle(Vector3::from(a).normalize(), angle))
}

proptest! {
    #![proptest_config(Config::with_cases(1000))]

    #[test]
    fn tensor_property_suite(raw in geometry(), kt in 0.1f64..10.0, rot in random_rotation()) {
        let geom = RotorGeometry::centered(raw).unwrap();
        let particles = geom.particles().to_vec();
        let isotropic = particles.iter().all(|p| p.direction.is_none());
        let t = tensors_from_geometry(&geom, kt).unwrap();
        let scale = t.diffusion_tensor.abs().max().max(1e-300);

        // Tensor equals the direct sum over particles.
        let oracle = brute_force_diffusion(&particles, kt);
        prop_assert!(max_abs(&(t.diffusion_tensor - oracle)) <= 1e-12 * scale.max(1.0));

        // Weights and eigenvalues: D_k = w_i + w_j.
        let w = t.weights.weights;
        let d = t.diffusion;
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            prop_assert!((d[k] - (w[i] + w[j])).abs() <= 1e-12 * scale.max(1.0));
        }

        // Complete-positivity flag is set exactly when the inequality fails.
        let slack = (0..3).map(|k| d[(k + 1) % 3] + d[(k + 2) % 3] - d[k]).fold(f64::INFINITY, f64::min);
        if slack < -1e-12 * scale {
            prop_assert!(!t.weights.is_completely_positive());
        }
        if slack > 1e-12 * scale {
            prop_assert!(t.weights.is_completely_positive());
        }
        if let Some(v) = t.weights.violation {
            prop_assert!(v.weight < 0.0);
            prop_assert!((v.weight - w.iter().copied().fold(f64::INFINITY, f64::min)).abs() < 1e-15);
        }

        if isotropic {
            // Isotropic particle damping always yields a CP generator, and the
            // weights are the eigenvalues of kT sum m gamma r r.
            prop_assert!(slack >= -1e-12 * scale);
            prop_assert!(t.weights.is_completely_positive());
            let (lt, _) = sorted_eigen(&geom.lindblad_tensor(kt));
            let mut ws = w;
            ws.sort_by(f64::total_cmp);
            for k in 0..3 {
                prop_assert!((ws[k] - lt[k]).abs() <= 1e-10 * scale.max(1.0));
            }
        }

        // Fluctuation-dissipation identity on the rotational subspace.
        let ref_scale = t.diffusion_tensor.abs().max().max(t.inertia_tensor.abs().max() * kt).max(1e-300);
        prop_assert!(t.fluctuation_dissipation_defect() <= 1e-10 * ref_scale);

        // Rotating every particle rotates the tensor.
        let rotated: Vec<Particle> = particles
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.position = rot.matrix() * p.position;
                q.direction = p.direction.map(|n| rot.matrix() * n);
                q
            })
            .collect();
        let g2 = RotorGeometry::centered(rotated).unwrap();
        let lhs = g2.diffusion_tensor(kt);
        let rhs = rotate_tensor(&geom.diffusion_tensor(kt), &rot).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-11 * scale.max(1.0));
    }
}

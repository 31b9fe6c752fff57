use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rotorbath::lindblad::{propagate, propagate_with, PropagationOptions};
use rotorbath::planar::{
    build_planar_generator, circle_operators, evolve_wigner_fp, evolve_wigner_series, inverse_wigner_transform,
    planar_hamiltonian, stationary_planar, two_blob_state, wigner_transform, PlanarBasis, PlanarRotorParams,
};
use rotorbath::{DensityMatrix, Error, GeneratorMap, Variant, C64};

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ket(b: PlanarBasis, m: i64) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); b.dim()];
    v[b.index(m).unwrap()] = C64::new(1.0, 0.0);
    v
}

fn tight() -> PropagationOptions {
    PropagationOptions {
        rtol: 1e-11,
        atol: 1e-14,
        ..PropagationOptions::default()
    }
}

fn binomial(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return 0.0;
    }
    (0..k as usize).fold(1.0, |acc, i| acc * (n - i as f64) / (i as f64 + 1.0))
}

#[test]
fn shift_operators_and_free_limit() {
    let b = PlanarBasis::new(5);
    let [cos, sin, p] = circle_operators(b);
    let (c, s, p) = (cos.to_dense(), sin.to_dense(), p.to_dense());
    for m in -5..5 {
        let (i, j) = (b.index(m + 1).unwrap(), b.index(m).unwrap());
        assert_eq!(c[(i, j)], C64::new(0.5, 0.0));
        assert_eq!(s[(i, j)], C64::new(0.0, -0.5));
        assert_eq!(p[(j, j)].re, m as f64);
    }
    let params = PlanarRotorParams::new(2.0, 0.0, 5).unwrap();
    let g = build_planar_generator(&params).unwrap();
    let free = GeneratorMap::unitary(b.into(), planar_hamiltonian(b)).unwrap();
    let x = DMatrix::from_fn(b.dim(), b.dim(), |i, j| C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
    assert!(max_abs(&(g.apply_matrix(&x) - free.apply_matrix(&x))) < 1e-14);
    assert!(PlanarRotorParams::new(2.0, 1.0, 3).is_err());
}

#[test]
fn momentum_eigenstate_is_uniform_in_angle() {
    let b = PlanarBasis::new(6);
    let rho = DensityMatrix::pure(b.into(), &ket(b, 0)).unwrap();
    let w = wigner_transform(&rho, 24).unwrap();
    for (m, _, v) in w.integer_grid() {
        let expected = if m == 0 { 1.0 / (2.0 * PI) } else { 0.0 };
        assert!((v - expected).abs() < 1e-15);
    }
    assert!(wigner_transform(&rho, 23).is_err());
}

#[test]
fn mixture_has_ridges_and_no_fringes() {
    let b = PlanarBasis::new(30);
    let mut p = vec![0.0; b.dim()];
    p[b.index(25).unwrap()] = 0.5;
    p[b.index(-25).unwrap()] = 0.5;
    let rho = DensityMatrix::diagonal(b.into(), &p).unwrap();
    let w = wigner_transform(&rho, 121).unwrap();
    for m in -30..=30 {
        assert!(w.fringe_amplitude(m) < 1e-15);
    }
    for &v in &w.integer_row(25) {
        assert!((v - 0.25 / PI).abs() < 1e-15);
    }
    assert!(w.integer_row(0).iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn superposition_fringes_oscillate_at_twice_the_momentum() {
    let b = PlanarBasis::new(30);
    let s = 0.5f64.sqrt();
    let mut psi = vec![C64::new(0.0, 0.0); b.dim()];
    psi[b.index(25).unwrap()] = C64::new(s, 0.0);
    psi[b.index(-25).unwrap()] = C64::new(s, 0.0);
    let rho = DensityMatrix::pure(b.into(), &psi).unwrap();
    let w = wigner_transform(&rho, 121).unwrap();
    for (j, v) in w.integer_row(0).iter().enumerate() {
        let expected = (50.0 * w.alpha(j)).cos() / (2.0 * PI);
        assert!((v - expected).abs() < 1e-14);
    }
    assert!(w.integer_row(0).iter().any(|&v| v < -0.15));
    assert!((w.fringe_amplitude(0) - 1.0 / (2.0 * PI)).abs() < 1e-3);
}

/// Angular density of a pure state by direct summation over momenta.
fn angle_density(b: PlanarBasis, psi: &[C64], alpha: f64) -> f64 {
    let amp: C64 = b
        .momenta()
        .zip(psi)
        .map(|(m, c)| c * C64::from_polar(1.0, m as f64 * alpha))
        .sum();
    amp.norm_sqr() / (2.0 * PI)
}

proptest! {
    #[test]
    fn marginals_and_inversion(raw in prop::collection::vec(-1.0f64..1.0, 22)) {
        let b = PlanarBasis::new(5);
        let psi: Vec<C64> = (0..b.dim()).map(|k| C64::new(raw[2 * k], raw[2 * k + 1])).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let rho = DensityMatrix::pure(b.into(), &psi).unwrap();
        let w = wigner_transform(&rho, 21).unwrap();
        prop_assert!((w.total() - 1.0).abs() < 1e-12);
        for (p, q) in w.momentum_marginal().iter().zip(rho.populations()) {
            prop_assert!((p - q).abs() < 1e-13);
        }
        for (j, v) in w.angle_marginal().iter().enumerate() {
            prop_assert!((v - angle_density(b, &psi, w.alpha(j))).abs() < 1e-13);
        }
        let back = inverse_wigner_transform(&w).unwrap();
        prop_assert!(max_abs(&(back.entries() - rho.matrix())) < 1e-13);
    }
}

#[test]
fn free_streaming_keeps_the_momentum_marginal() {
    let rho = two_blob_state(4, 0.5, 16).unwrap();
    let w = wigner_transform(&rho, 65).unwrap();
    let out = evolve_wigner_fp(&w, 0.0, 3.0, 2.5, false, tight()).unwrap();
    for (p, q) in out.field.momentum_marginal().iter().zip(w.momentum_marginal()) {
        assert!((p - q).abs() < 1e-12);
    }
    let moved = out.field.angle_marginal().iter().zip(w.angle_marginal()).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
    assert!(moved > 1e-3);
}

#[test]
fn wigner_dynamics_matches_the_high_temperature_generator() {
    let (xi, gamma, m_max) = (4.0, 0.3, 32);
    for inversion in [false, true] {
        let params = PlanarRotorParams::new(xi, gamma, m_max)
            .unwrap()
            .with_variant(Variant::HighT)
            .with_inversion_symmetry(inversion);
        let g = build_planar_generator(&params).unwrap();
        let rho0 = two_blob_state(3, 0.6, m_max).unwrap();
        let times = [0.5, 1.5];
        let states = propagate_with(&g, &rho0, 1.5, &times, tight()).unwrap();
        let w0 = wigner_transform(&rho0, 129).unwrap();
        let fields = evolve_wigner_series(&w0, gamma, xi, &times, inversion, tight()).unwrap();
        for (s, f) in states.iter().zip(&fields) {
            assert!(f.boundary_mass < 1e-8, "{}", f.boundary_mass);
            let reference = wigner_transform(s, 129).unwrap();
            for (p, q) in f.field.momentum_marginal().iter().zip(reference.momentum_marginal()) {
                assert!((p - q).abs() < 1e-8, "inversion {inversion}: {p} vs {q}");
            }
            for (p, q) in f.field.angle_marginal().iter().zip(reference.angle_marginal()) {
                assert!((p - q).abs() < 1e-8, "inversion {inversion}");
            }
        }
    }
}

#[test]
fn thermal_weights_solve_the_fokker_planck_equation() {
    let (xi, gamma) = (6.0, 0.8);
    let d = xi * gamma / 2.0;
    let w = |m: f64| binomial(2.0 * xi, xi + m) / 2f64.powf(2.0 * xi);
    let norm: f64 = (-8..=8).map(|m| w(m as f64)).sum();
    assert!((norm - 1.0).abs() < 1e-14);
    for m in -6..=6 {
        let m = m as f64;
        let rhs = gamma / 2.0 * ((m + 1.0) * w(m + 1.0) - (m - 1.0) * w(m - 1.0))
            + d * (w(m + 1.0) - 2.0 * w(m) + w(m - 1.0));
        assert!(rhs.abs() <= 1e-10 * w(0.0), "m {m}: {rhs}");
    }

    let rho = stationary_planar(xi, 12, Variant::HighT).unwrap();
    let field = wigner_transform(&rho, 49).unwrap();
    let out = evolve_wigner_fp(&field, gamma, xi, 2.0, false, tight()).unwrap();
    assert!((out.field.values() - field.values()).abs().max() <= 1e-10);
}

#[test]
fn friction_stencil_moves_weight_from_a_single_momentum() {
    let (xi, gamma) = (3.0, 0.4);
    let d = xi * gamma / 2.0;
    let b = PlanarBasis::new(12);
    let rho = DensityMatrix::pure(b.into(), &ket(b, 5)).unwrap();
    let field = wigner_transform(&rho, 49).unwrap();
    let dt = 1e-6;
    let out = evolve_wigner_fp(&field, gamma, xi, dt, false, tight()).unwrap();
    let rate = |m: i64| (out.field.value(2 * m, 7) - field.value(2 * m, 7)) / dt;
    let w5 = 1.0 / (2.0 * PI);
    let expected = [
        (4, (gamma / 2.0 * 5.0 + d) * w5),
        (5, -2.0 * d * w5),
        (6, (-gamma / 2.0 * 5.0 + d) * w5),
        (3, 0.0),
        (7, 0.0),
    ];
    for (m, e) in expected {
        assert!((rate(m) - e).abs() < 1e-4, "m {m}: {} vs {e}", rate(m));
    }
}

#[test]
fn mean_momentum_decays_at_the_friction_rate() {
    let (xi, gamma) = (4.0, 0.5);
    let b = PlanarBasis::new(30);
    let rho = DensityMatrix::pure(b.into(), &ket(b, 5)).unwrap();
    let field = wigner_transform(&rho, 121).unwrap();
    let out = evolve_wigner_fp(&field, gamma, xi, 1.0, false, tight()).unwrap();
    let p = out.field.momentum_marginal();
    let mean: f64 = b.momenta().zip(&p).map(|(m, q)| m as f64 * q).sum();
    assert!((mean - 5.0 * (-gamma).exp()).abs() < 1e-8);
    assert!(!out.truncation_flagged);
}

#[test]
fn inversion_symmetric_dynamics_keeps_momentum_parity() {
    let b = PlanarBasis::new(10);
    let params = PlanarRotorParams::new(3.0, 0.7, 10).unwrap().with_inversion_symmetry(true);
    let g = build_planar_generator(&params).unwrap();
    let rho0 = DensityMatrix::pure(b.into(), &ket(b, 1)).unwrap();
    let out = propagate(&g, &rho0, 3.0, &[3.0]).unwrap();
    let p = out[0].populations();
    let even: f64 = b.momenta().zip(&p).filter(|(m, _)| m % 2 == 0).map(|(_, q)| q).sum();
    assert!(even.abs() < 1e-12);
    assert!(p[b.index(1).unwrap()] < 0.999);
}

#[test]
fn closed_forms_at_unit_xi() {
    let b = PlanarBasis::new(6);
    let at = |r: &DensityMatrix, m: i64| r.populations()[b.index(m).unwrap()];
    let high = stationary_planar(1.0, 6, Variant::HighT).unwrap();
    assert!((at(&high, 0) - 0.5).abs() < 1e-15);
    assert!((at(&high, 1) - 0.25).abs() < 1e-15);
    assert!((at(&high, -1) - 0.25).abs() < 1e-15);
    assert_eq!(at(&high, 2), 0.0);

    // Unnormalized weights 1, 4/9, 1/36 for |m| = 0, 1, 2.
    let full = stationary_planar(1.0, 6, Variant::Full).unwrap();
    assert!((at(&full, 0) - 18.0 / 35.0).abs() < 1e-15);
    assert!((at(&full, 1) - 8.0 / 35.0).abs() < 1e-15);
    assert!((at(&full, 2) - 1.0 / 70.0).abs() < 1e-15);
    assert_eq!(at(&full, 3), 0.0);

    assert!(stationary_planar(1.5, 6, Variant::HighT).is_err());
    assert!(stationary_planar(0.0, 6, Variant::Full).is_err());
    assert!(matches!(
        stationary_planar(20.0, 8, Variant::Full),
        Err(Error::CutoffTooSmall { .. })
    ));
}

#[test]
fn closed_forms_approach_the_gibbs_state() {
    let xi = 200.0;
    let m_max = 120;
    let b = PlanarBasis::new(m_max);
    let gibbs: Vec<f64> = b.momenta().map(|m| (-(m * m) as f64 / xi).exp()).collect();
    let z: f64 = gibbs.iter().sum();
    for variant in [Variant::Full, Variant::HighT] {
        let p = stationary_planar(xi, m_max, variant).unwrap().populations();
        for m in -10..=10 {
            let i = b.index(m).unwrap();
            let rel = (p[i] - gibbs[i] / z).abs() / (gibbs[i] / z);
            assert!(rel <= 0.02, "{variant:?} m {m}: {rel}");
        }
    }
}

#[test]
fn two_blob_state_is_centered_on_both_momenta() {
    let rho = two_blob_state(25, 0.2, 60).unwrap();
    let b = PlanarBasis::new(60);
    let p = rho.populations();
    assert!((rho.purity() - 1.0).abs() < 1e-12);
    let pos: f64 = b.momenta().zip(&p).filter(|(m, _)| *m > 0).map(|(_, q)| q).sum();
    assert!((pos - 0.5).abs() < 1e-10);
    let peak = b.momenta().zip(&p).max_by(|a, c| a.1.total_cmp(c.1)).unwrap().0;
    assert_eq!(peak.abs(), 25);
    let w = wigner_transform(&rho, 241).unwrap();
    assert!(w.fringe_amplitude(0) > 0.05);
}

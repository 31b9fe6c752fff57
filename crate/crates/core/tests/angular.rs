use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rotorbath::angular::{
    j_component_matrices, ladder_coefficients, orientation_vector_matrices, wigner3j_values, LinearBasis,
};
use rotorbath::special::{gauss_legendre, spherical_harmonic};
use rotorbath::{Error, C64};

/// Clebsch-Gordan coefficients `<j1 m1 j2 m2 | J M>` for all `m1, m2, M`,
/// built by diagonalizing `J^2` in the top weight space and lowering with `J-`.
/// Returned as `cg[(m1 + j1) * (2 j2 + 1) + (m2 + j2)]` per `M`.
fn clebsch_gordan(j1: i64, j2: i64, big_j: i64) -> Vec<Vec<f64>> {
    let d1 = (2 * j1 + 1) as usize;
    let d2 = (2 * j2 + 1) as usize;
    let n = d1 * d2;
    let idx = |m1: i64, m2: i64| ((m1 + j1) as usize) * d2 + (m2 + j2) as usize;
    let lower = |j: i64, m: i64| ((j * (j + 1) - m * (m - 1)) as f64).sqrt();
    let mut jm = DMatrix::<f64>::zeros(n, n);
    let mut jz = DMatrix::<f64>::zeros(n, n);
    for m1 in -j1..=j1 {
        for m2 in -j2..=j2 {
            let c = idx(m1, m2);
            jz[(c, c)] = (m1 + m2) as f64;
            if m1 > -j1 {
                jm[(idx(m1 - 1, m2), c)] += lower(j1, m1);
            }
            if m2 > -j2 {
                jm[(idx(m1, m2 - 1), c)] += lower(j2, m2);
            }
        }
    }
    let jp = jm.transpose();
    let j2mat = &jp * &jm + &jz * &jz - &jz;

    let top: Vec<usize> = (-j1..=j1)
        .flat_map(|m1| (-j2..=j2).map(move |m2| (m1, m2)))
        .filter(|(m1, m2)| m1 + m2 == big_j)
        .map(|(m1, m2)| idx(m1, m2))
        .collect();
    let k = top.len();
    let sub = DMatrix::from_fn(k, k, |a, b| j2mat[(top[a], top[b])]);
    let eig = sub.symmetric_eigen();
    let target = (big_j * (big_j + 1)) as f64;
    let col = (0..k)
        .min_by(|&a, &b| (eig.eigenvalues[a] - target).abs().total_cmp(&(eig.eigenvalues[b] - target).abs()))
        .unwrap();
    assert!((eig.eigenvalues[col] - target).abs() < 1e-9);
    let mut v = DVector::<f64>::zeros(n);
    for (a, &row) in top.iter().enumerate() {
        v[row] = eig.eigenvectors[(a, col)];
    }
    // Condon-Shortley: <j1 j1, j2 (J - j1) | J J> > 0.
    if big_j - j1 >= -j2 && v[idx(j1, big_j - j1)] < 0.0 {
        v = -v;
    }
    let mut out = vec![v.iter().copied().collect::<Vec<_>>()];
    let mut m = big_j;
    while m > -big_j {
        v = &jm * &v / lower(big_j, m);
        out.push(v.iter().copied().collect());
        m -= 1;
    }
    out.reverse();
    out
}

fn threej_oracle(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || l3 < (l1 - l2).abs() || l3 > l1 + l2 || m1.abs() > l1 || m2.abs() > l2 || m3.abs() > l3 {
        return 0.0;
    }
    let cg = clebsch_gordan(l1, l2, l3);
    let d2 = (2 * l2 + 1) as usize;
    let c = cg[(-m3 + l3) as usize][((m1 + l1) as usize) * d2 + (m2 + l2) as usize];
    let sign = if (l1 - l2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * c / ((2 * l3 + 1) as f64).sqrt()
}

#[test]
fn threej_matches_clebsch_gordan_oracle() {
    for l1 in 0..=4i64 {
        for l2 in 0..=4 {
            for l3 in (l1 - l2).abs()..=(l1 + l2) {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let m3 = -m1 - m2;
                        if m3.abs() > l3 {
                            continue;
                        }
                        let got = wigner3j_values(l1, l2, l3, m1, m2, m3).unwrap();
                        let want = threej_oracle(l1, l2, l3, m1, m2, m3);
                        assert!(
                            (got - want).abs() < 1e-12,
                            "({l1} {l2} {l3}; {m1} {m2} {m3}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn threej_reference_values() {
    let v = wigner3j_values(1, 1, 0, 0, 0, 0).unwrap();
    assert!((v + 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(wigner3j_values(1, 1, 1, 0, 0, 0).unwrap(), 0.0);
    let v = wigner3j_values(2, 1, 1, -1, 1, 0).unwrap();
    assert!((v - threej_oracle(2, 1, 1, -1, 1, 0)).abs() < 1e-14);
    assert!(v != 0.0);
}

#[test]
fn threej_rejects_negative_l() {
    assert!(matches!(wigner3j_values(-1, 1, 1, 0, 0, 0), Err(Error::InvalidArgument(_))));
}

fn sign(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn threej_symmetries_exhaustive_up_to_six() {
    for l1 in 0..=6i64 {
        for l2 in 0..=6 {
            for l3 in (l1 - l2).abs()..=(l1 + l2).min(6) {
                let s = sign(l1 + l2 + l3);
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let m3 = -m1 - m2;
                        if m3.abs() > l3 {
                            continue;
                        }
                        let w = |a: [i64; 6]| wigner3j_values(a[0], a[1], a[2], a[3], a[4], a[5]).unwrap();
                        let v = w([l1, l2, l3, m1, m2, m3]);
                        assert_eq!(v, w([l2, l3, l1, m2, m3, m1]));
                        assert_eq!(v, w([l3, l1, l2, m3, m1, m2]));
                        assert!((w([l2, l1, l3, m2, m1, m3]) - s * v).abs() < 1e-15);
                        assert!((w([l1, l3, l2, m1, m3, m2]) - s * v).abs() < 1e-15);
                        assert!((w([l1, l2, l3, -m1, -m2, -m3]) - s * v).abs() < 1e-15);
                    }
                }
            }
        }
    }
}

fn triangle() -> impl Strategy<Value = (i64, i64, i64, i64, i64)> {
    (0i64..=25, 0i64..=25)
        .prop_flat_map(|(l1, l2)| (Just(l1), Just(l2), (l1 - l2).abs()..=(l1 + l2)))
        .prop_flat_map(|(l1, l2, l3)| (Just(l1), Just(l2), Just(l3), -l1..=l1, -l2..=l2))
        .prop_filter("m3 in range", |(_, _, l3, m1, m2)| (m1 + m2).abs() <= *l3)
}

proptest! {
    #[test]
    fn threej_symmetries_hold_for_large_arguments((l1, l2, l3, m1, m2) in triangle()) {
        let m3 = -m1 - m2;
        let v = wigner3j_values(l1, l2, l3, m1, m2, m3).unwrap();
        let s = sign(l1 + l2 + l3);
        let tol = 1e-14;
        prop_assert!((wigner3j_values(l2, l3, l1, m2, m3, m1).unwrap() - v).abs() < tol);
        prop_assert!((wigner3j_values(l2, l1, l3, m2, m1, m3).unwrap() - s * v).abs() < tol);
        prop_assert!((wigner3j_values(l1, l2, l3, -m1, -m2, -m3).unwrap() - s * v).abs() < tol);
        prop_assert!(v.is_finite() && v.abs() <= 1.0);
    }

    #[test]
    fn threej_columns_are_orthonormal(l1 in 0i64..=8, l2 in 0i64..=8, m1 in -8i64..=8, m2 in -8i64..=8) {
        prop_assume!(m1.abs() <= l1 && m2.abs() <= l2);
        let total: f64 = ((l1 - l2).abs()..=(l1 + l2))
            .map(|l3| (2 * l3 + 1) as f64 * wigner3j_values(l1, l2, l3, m1, m2, -m1 - m2).unwrap().powi(2))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ladder_coefficient_values() {
    let (p, m) = ladder_coefficients(1, 0).unwrap();
    assert!((p - 2f64.sqrt()).abs() < 1e-15 && (m - 2f64.sqrt()).abs() < 1e-15);
    for l in 0..10i64 {
        let (p, m) = ladder_coefficients(l, l).unwrap();
        assert_eq!(p, 0.0);
        assert!((m - ((2 * l) as f64).sqrt()).abs() < 1e-14);
    }
    assert!(ladder_coefficients(2, 3).is_err());
    assert!(ladder_coefficients(-1, 0).is_err());
}

/// `L± Y_lm = e^{±i phi} (± d/dtheta + i cot(theta) d/dphi) Y_lm` by finite differences.
fn ladder_by_differentiation(l: usize, m: i64, up: bool, theta: f64, phi: f64) -> C64 {
    let h = 1e-5;
    let y = |t: f64, p: f64| spherical_harmonic(l, m, t, p);
    let dt = (y(theta + h, phi) - y(theta - h, phi)) / (2.0 * h);
    let dp = C64::new(0.0, m as f64) * y(theta, phi);
    let s = if up { 1.0 } else { -1.0 };
    let cot = theta.cos() / theta.sin();
    C64::from_polar(1.0, s * phi) * (dt * s + C64::i() * cot * dp)
}

#[test]
fn ladder_coefficients_match_differential_operators() {
    let (theta, phi) = (0.83, 1.27);
    for (l, m) in [(5usize, -3i64), (3, 1), (4, 0), (6, -6)] {
        let (cp, cm) = ladder_coefficients(l as i64, m).unwrap();
        if m < l as i64 {
            let got = ladder_by_differentiation(l, m, true, theta, phi) / spherical_harmonic(l, m + 1, theta, phi);
            assert!((got - cp).norm() < 1e-6, "L+ on ({l},{m}): {got} vs {cp}");
        }
        if m > -(l as i64) {
            let got = ladder_by_differentiation(l, m, false, theta, phi) / spherical_harmonic(l, m - 1, theta, phi);
            assert!((got - cm).norm() < 1e-6, "L- on ({l},{m}): {got} vs {cm}");
        }
    }
    let (cp, cm) = ladder_coefficients(5, -3).unwrap();
    assert!((cp - 24f64.sqrt()).abs() < 1e-14);
    assert!((cm - 18f64.sqrt()).abs() < 1e-14);
}

fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn angular_momentum_matrix_elements_and_algebra() {
    let b = LinearBasis::new(8);
    let [j1, j2, j3] = j_component_matrices(b).map(|m| m.into_entries());
    let i11 = b.index(1, 1).unwrap();
    let i10 = b.index(1, 0).unwrap();
    assert!((j3[(i11, i11)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert!((j1[(i11, i10)] - C64::new(2f64.sqrt() / 2.0, 0.0)).norm() < 1e-15);
    let i = C64::i();
    assert!(max_abs(&(commutator(&j1, &j2) - &j3 * i)) < 1e-12);
    assert!(max_abs(&(commutator(&j2, &j3) - &j1 * i)) < 1e-12);
    assert!(max_abs(&(commutator(&j3, &j1) - &j2 * i)) < 1e-12);
    let jsq = &j1 * &j1 + &j2 * &j2 + &j3 * &j3;
    for (k, (l, _)) in b.states().enumerate() {
        assert!((jsq[(k, k)].re - (l * (l + 1)) as f64).abs() < 1e-12);
    }
    for m in [&j1, &j2, &j3] {
        assert!(max_abs(&(m - m.adjoint())) < 1e-15);
    }
}

fn low_shell_projector(b: LinearBasis, l_cut: usize) -> DMatrix<C64> {
    DMatrix::from_fn(b.dim(), b.dim(), |r, c| {
        if r == c && b.state(r).unwrap().0 <= l_cut {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[test]
fn orientation_matrices_elements_and_identities() {
    let l_max = 8;
    let b = LinearBasis::new(l_max);
    let m = orientation_vector_matrices(b).map(|x| x.into_entries());
    let j = j_component_matrices(b).map(|x| x.into_entries());
    let i00 = b.index(0, 0).unwrap();
    let i10 = b.index(1, 0).unwrap();
    assert!((m[2][(i00, i10)].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    for k in 0..b.dim() {
        for c in &m {
            assert_eq!(c[(k, k)], C64::new(0.0, 0.0));
        }
    }
    for c in &m {
        assert!(max_abs(&(c - c.adjoint())) < 1e-15);
    }
    let p = low_shell_projector(b, l_max - 1);
    let id = DMatrix::<C64>::identity(b.dim(), b.dim());
    let unit = &m[0] * &m[0] + &m[1] * &m[1] + &m[2] * &m[2] - id;
    assert!(max_abs(&(&unit * &p)) < 1e-12);

    let i = C64::i();
    for (k, jk) in j.iter().enumerate() {
        for jj in 0..3 {
            let mut rhs = DMatrix::<C64>::zeros(b.dim(), b.dim());
            for (l, ml) in m.iter().enumerate() {
                let eps = levi_civita(k, jj, l);
                if eps != 0.0 {
                    rhs += ml * (i * eps);
                }
            }
            let defect = (commutator(jk, &m[jj]) - rhs) * &p;
            assert!(max_abs(&defect) < 1e-12, "[J{k}, M{jj}]");
        }
    }
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[test]
fn orientation_matrices_match_sphere_quadrature() {
    let b = LinearBasis::new(4);
    let m = orientation_vector_matrices(b).map(|x| x.into_entries());
    let (x, w) = gauss_legendre(12);
    let n_phi = 16;
    for (r, (l, mm)) in b.states().enumerate() {
        for (c, (lp, mp)) in b.states().enumerate() {
            let mut acc = [C64::new(0.0, 0.0); 3];
            for (&ct, &wt) in x.iter().zip(&w) {
                let theta = ct.acos();
                for k in 0..n_phi {
                    let phi = 2.0 * PI * k as f64 / n_phi as f64;
                    let f = spherical_harmonic(l, mm, theta, phi).conj() * spherical_harmonic(lp, mp, theta, phi);
                    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), ct];
                    for a in 0..3 {
                        acc[a] += f * n[a] * wt * 2.0 * PI / n_phi as f64;
                    }
                }
            }
            for a in 0..3 {
                assert!((acc[a] - m[a][(r, c)]).norm() < 1e-12, "M{a} at ({l},{mm}),({lp},{mp})");
            }
        }
    }
}

proptest! {
    #[test]
    fn basis_index_roundtrip(l_max in 0usize..30, k in 0usize..10_000) {
        let b = LinearBasis::new(l_max);
        let k = k % b.dim();
        let (l, m) = b.state(k).unwrap();
        prop_assert_eq!(b.index(l, m), Some(k));
        prop_assert_eq!(k as i64, (l * l + l) as i64 + m);
    }
}

use nalgebra::{DMatrix, Vector3};
use rotorbath::angular::{free_rotor_hamiltonian, j_sparse, m_sparse, LinearBasis};
use rotorbath::lindblad::trace_distance;
use rotorbath::linear::{
    build_linear_generator, ehrenfest_defect, gibbs_residual, gibbs_residual_scaling, initial_superposition,
    localization_rate, rotating_packet, shell_populations, stationary_closed_form, stationary_iterative,
    stationary_weight, LinearRotorParams, OrientationGrid,
};
use rotorbath::{Error, GeneratorMap, Variant, C64};

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn binomial(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a - i as f64) / (i as f64 + 1.0))
}

#[test]
fn closed_form_weights_are_binomial_ratios() {
    for xi in [1.0, 2.5, 5.0, 7.3] {
        let a = 2.0 * xi;
        for l in 0..12 {
            let expected = (binomial(a, l) / binomial(a + l as f64 + 1.0, l)).powi(2);
            let got = stationary_weight(xi, l);
            assert!((got - expected).abs() <= 1e-13 * expected.abs() + 1e-300, "xi {xi}, l {l}");
        }
    }
    assert_eq!(stationary_weight(1.0, 3), 0.0);
    let p = LinearRotorParams::new(5.0, 1.0, 4).unwrap();
    assert!(matches!(stationary_closed_form(&p), Err(Error::CutoffTooSmall { .. })));
}

#[test]
fn iterative_construction_matches_closed_form() {
    for xi in [1.0, 2.0, 5.0] {
        let p = LinearRotorParams::new(xi, 0.8, 14).unwrap();
        let a = stationary_closed_form(&p).unwrap();
        let b = stationary_iterative(&p).unwrap();
        assert!(trace_distance(&a, &b).unwrap() <= 1e-10, "xi {xi}");
        let g = build_linear_generator(&p).unwrap();
        let r = g.dissipator_matrix(a.matrix());
        let off = (0..r.nrows())
            .flat_map(|i| (0..r.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| r[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off <= 1e-10);
    }
    let p = LinearRotorParams::new(5.0, 1.0, 14).unwrap().with_inversion_symmetry(true);
    assert!(stationary_iterative(&p).is_err());
}

#[test]
fn zero_friction_gives_the_free_rotor() {
    let p = LinearRotorParams::new(5.0, 0.0, 6).unwrap();
    let g = build_linear_generator(&p).unwrap();
    let b = p.basis();
    let free = GeneratorMap::unitary(b.into(), free_rotor_hamiltonian(b)).unwrap();
    let x = DMatrix::from_fn(b.dim(), b.dim(), |i, j| C64::new((i as f64 - j as f64).sin(), (i * j) as f64 * 0.01));
    assert!(max_abs(&(g.apply_matrix(&x) - free.apply_matrix(&x))) < 1e-14);
}

/// The generator truncated after the friction term: `-i[H, .]`, the
/// orientation dephasing `2D (M . M - {M.M, .}/2)`, and the first-order
/// cross terms in `M x J`.
fn friction_truncation(basis: LinearBasis, d: f64, xi: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let ext = basis.extended(2);
    let n = basis.dim();
    let dense = |ops: [rotorbath::SparseOperator; 3]| ops.map(|o| o.to_dense());
    let m_ext = dense(m_sparse(ext));
    let j_ext = dense(j_sparse(ext));
    let k_ext = [
        &m_ext[1] * &j_ext[2] - &m_ext[2] * &j_ext[1],
        &m_ext[2] * &j_ext[0] - &m_ext[0] * &j_ext[2],
        &m_ext[0] * &j_ext[1] - &m_ext[1] * &j_ext[0],
    ];
    let cut = |x: &DMatrix<C64>| x.view((0, 0), (n, n)).into_owned();
    let m: Vec<_> = m_ext.iter().map(cut).collect();
    let k: Vec<_> = k_ext.iter().map(cut).collect();
    let h = free_rotor_hamiltonian(basis).to_dense();
    let i = C64::i();
    let eps = 1.0 / (2.0 * xi);
    let w = C64::new(2.0 * d, 0.0);
    let half = C64::new(0.5, 0.0);
    let mut out = (&h * rho - rho * &h) * (-i);
    for c in 0..3 {
        let (mc, kc) = (&m[c], &k[c]);
        let mm = mc * mc;
        out += (mc * rho * mc - (&mm * rho + rho * &mm) * half) * w;
        let cross_jump = (mc * rho * kc.adjoint() - kc * rho * mc) * i;
        let cross_anti = mc * kc * (-i) + kc.adjoint() * mc * i;
        out += (cross_jump - (&cross_anti * rho + rho * &cross_anti) * half) * (w * eps);
    }
    out
}

#[test]
fn high_temperature_limit_at_fixed_diffusion() {
    let d = 1.5;
    let basis = LinearBasis::new(6);
    let rho = DMatrix::from_fn(basis.dim(), basis.dim(), |a, b| {
        let v = C64::new(((a + 2 * b) as f64).cos(), ((3 * a + b) as f64).sin() * 0.3);
        if a == b {
            C64::new(v.re.abs() + 1.0, 0.0)
        } else {
            v
        }
    });
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let mut previous: Option<f64> = None;
    for xi in [1e3, 2e3] {
        let p = LinearRotorParams::new(xi, 2.0 * d / xi, 6).unwrap();
        let full = build_linear_generator(&p).unwrap().apply_matrix(&rho);
        let reference = friction_truncation(basis, d, xi, &rho);
        let diff = max_abs(&(full - &reference));
        assert!(diff <= 1e-4 * max_abs(&reference), "xi {xi}: {diff}");
        if let Some(prev) = previous {
            let ratio = diff / prev;
            assert!((ratio - 0.25).abs() < 0.02, "ratio {ratio}");
        }
        previous = Some(diff);
    }
}

#[test]
fn localization_rate_limits() {
    let p = LinearRotorParams::new(5.0, 1.0, 4).unwrap();
    let z = Vector3::z();
    let x = Vector3::x();
    let d = p.diffusion();
    assert_eq!(localization_rate(&z, &z, &p).unwrap(), 0.0);
    assert!((localization_rate(&z, &-z, &p).unwrap() - 4.0 * d).abs() < 1e-14);
    assert!((localization_rate(&z, &x, &p).unwrap() - 2.0 * d).abs() < 1e-14);
    let q = p.with_inversion_symmetry(true);
    assert_eq!(localization_rate(&z, &-z, &q).unwrap(), 0.0);
    assert!((localization_rate(&z, &x, &q).unwrap() - d).abs() < 1e-14);
    assert!(localization_rate(&(z * 2.0), &x, &p).is_err());
}

#[test]
fn gibbs_residual_scaling_and_limits() {
    assert_eq!(gibbs_residual(0.0, 10.0, 20).unwrap(), 0.0);
    let s = gibbs_residual_scaling(1.0, &[10.0, 20.0]).unwrap();
    let ratio = s.residuals[1] / s.residuals[0];
    assert!((ratio - 0.5).abs() <= 0.15 * 0.5, "ratio {ratio}");
    assert!(s.convergence.iter().all(|&c| c <= 1e-6));
    assert!(gibbs_residual_scaling(1.0, &[]).is_err());
    assert!(gibbs_residual_scaling(1.0, &[20.0, 10.0]).is_err());
}

#[test]
fn rotating_packet_feels_friction() {
    let b = LinearBasis::new(20);
    let rho = rotating_packet(b, 8.0, 1.0).unwrap();
    let mut last = f64::INFINITY;
    for xi in [20.0, 40.0] {
        let p = LinearRotorParams::new(xi, 1.0, 20).unwrap();
        let g = build_linear_generator(&p).unwrap();
        let defect = ehrenfest_defect(&g, &rho, 1.0).unwrap();
        assert!(defect < last);
        last = defect;
    }
}

#[test]
fn quadrature_integrates_harmonic_products_exactly() {
    let l_max = 6;
    let b = LinearBasis::new(l_max);
    let grid = OrientationGrid::for_band_limit(2 * l_max);
    let y = grid.harmonics(b);
    let w = &grid.weights;
    let mut gram = DMatrix::<C64>::zeros(b.dim(), b.dim());
    for r in 0..grid.len() {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                gram[(i, j)] += y[(r, i)].conj() * y[(r, j)] * w[r];
            }
        }
    }
    assert!(max_abs(&(gram - DMatrix::identity(b.dim(), b.dim()))) < 1e-12);
}

#[test]
fn superposition_is_even_and_detects_coarse_grids() {
    let b = LinearBasis::new(14);
    let rho = initial_superposition(b, 0.4, 96).unwrap();
    let p = shell_populations(&rho, b);
    assert!(p.iter().skip(1).step_by(2).all(|&x| x < 1e-20));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for (i, (l, m)) in b.states().enumerate() {
        if m != 0 || l % 2 == 1 {
            assert!(rho.matrix()[(i, i)].re < 1e-20);
        }
    }
    assert!(matches!(initial_superposition(b, 0.05, 16), Err(Error::GridTooCoarse { .. })));
}

#[test]
fn stationary_scalars_converge_in_the_cutoff() {
    for l_max in [12, 14] {
        let p = LinearRotorParams::new(5.0, 1.0, l_max).unwrap();
        let q = LinearRotorParams::new(5.0, 1.0, l_max + 2).unwrap();
        let a = shell_populations(&stationary_closed_form(&p).unwrap(), p.basis());
        let b = shell_populations(&stationary_closed_form(&q).unwrap(), q.basis());
        for l in 0..=l_max {
            assert!((a[l] - b[l]).abs() < 1e-6);
        }
    }
}

#[test]
fn high_temperature_variant_has_a_unique_stationary_state() {
    let p = LinearRotorParams::new(5.0, 1.0, 14).unwrap().with_variant(Variant::HighT);
    let g = build_linear_generator(&p).unwrap();
    assert!(g.has_negative_weights());
    let ns = rotorbath::lindblad::stationary_nullspace(&g).unwrap();
    let full = stationary_closed_form(&p.with_variant(Variant::Full)).unwrap();
    let d = trace_distance(&ns, &full).unwrap();
    assert!(d < 0.1);
}

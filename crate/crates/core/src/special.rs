//! Special functions: binomial ratios, Gauss-Legendre nodes, spherical harmonics.

use std::f64::consts::PI;

use crate::operator::C64;

/// Generalized binomial coefficient `C(a, k)` for real `a` and integer `k >= 0`,
/// via the finite product `prod_{j<k} (a - j) / (j + 1)`. This equals the
/// Gamma-function continuation and is zero whenever `a` is an integer below `k`.
pub fn binomial(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a - j as f64) / (j as f64 + 1.0))
}

/// `C(a, k) / C(b, k)` evaluated factor by factor, which stays finite where the
/// two binomials individually overflow.
pub fn binomial_ratio(a: f64, b: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a - j as f64) / (b - j as f64))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root, then Newton.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Orthonormal associated Legendre values `N_lm P_l^m(cos theta)` for
/// `0 <= m <= l <= l_max`, Condon-Shortley phase included. Entry `(l, m)`
/// sits at `l * (l + 1) / 2 + m`.
pub fn normalized_legendre(l_max: usize, cos_theta: f64) -> Vec<f64> {
    let x = cos_theta;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut out = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    out[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        out[idx(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * out[idx(m - 1, m - 1)];
    }
    for m in 0..l_max {
        let mf = m as f64;
        out[idx(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * out[idx(m, m)];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[idx(l, m)] = a * (x * out[idx(l - 1, m)] - b * out[idx(l - 2, m)]);
        }
    }
    out
}

/// Spherical harmonic `Y_lm(theta, phi)` with the Condon-Shortley phase.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return C64::new(0.0, 0.0);
    }
    let table = normalized_legendre(l, theta.cos());
    let p = table[l * (l + 1) / 2 + am];
    let y = C64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am.is_multiple_of(2) {
        y.conj()
    } else {
        -y.conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_vanish_above_integer_top() {
        assert_eq!(binomial(2.0, 3), 0.0);
        assert_eq!(binomial(5.0, 2), 10.0);
        assert!((binomial(0.5, 2) + 0.125).abs() < 1e-15);
        assert!((binomial_ratio(2.0, 4.0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 22 is exact for 12 nodes
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((i - 2.0 / 23.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn low_order_harmonics() {
        let (t, p) = (0.7, 1.3);
        let y10 = spherical_harmonic(1, 0, t, p);
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
        let y11 = spherical_harmonic(1, 1, t, p);
        let expect = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - expect).norm() < 1e-15);
        let y1m1 = spherical_harmonic(1, -1, t, p);
        assert!((y1m1 + y11.conj()).norm() < 1e-15);
    }
}

//! Wigner 3-j symbols for integer arguments.
//!
//! Values come from the Racah single-sum formula evaluated in exact big-integer
//! arithmetic; only the final square root is taken in floating point. Results
//! are memoized in a process-wide cache.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arguments `(l1 l2 l3; m1 m2 m3)` of a 3-j symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThreeJArgs {
    pub l: [i64; 3],
    pub m: [i64; 3],
}

impl ThreeJArgs {
    pub fn new(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> Self {
        Self {
            l: [l1, l2, l3],
            m: [m1, m2, m3],
        }
    }

    /// Whether every selection rule holds, so the symbol can be nonzero.
    pub fn satisfies_selection_rules(&self) -> bool {
        let [l1, l2, l3] = self.l;
        let [m1, m2, m3] = self.m;
        m1 + m2 + m3 == 0
            && (0..3).all(|i| self.m[i].abs() <= self.l[i])
            && (l1 - l2).abs() <= l3
            && l3 <= l1 + l2
            && !(m1 == 0 && m2 == 0 && m3 == 0 && (l1 + l2 + l3) % 2 == 1)
    }
}

fn cache() -> &'static RwLock<HashMap<ThreeJArgs, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<ThreeJArgs, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Evaluate the 3-j symbol. Returns `0` when a selection rule fails and an
/// error for negative `l`.
pub fn wigner3j(args: ThreeJArgs) -> Result<f64> {
    if let Some(&neg) = args.l.iter().find(|&&l| l < 0) {
        return Err(Error::InvalidArgument(format!(
            "angular momentum must be non-negative, got {neg}"
        )));
    }
    if !args.satisfies_selection_rules() {
        return Ok(0.0);
    }
    if let Some(v) = cache().read().ok().and_then(|c| c.get(&args).copied()) {
        return Ok(v);
    }
    let v = racah(args);
    if let Ok(mut c) = cache().write() {
        c.insert(args, v);
    }
    Ok(v)
}

/// Convenience form of [`wigner3j`] taking the six integers directly.
pub fn wigner3j_values(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> Result<f64> {
    wigner3j(ThreeJArgs::new(l1, l2, l3, m1, m2, m3))
}

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn racah(args: ThreeJArgs) -> f64 {
    let [j1, j2, j3] = args.l;
    let [m1, m2, m3] = args.m;

    // Squared prefactor as an exact fraction.
    let pre_num = factorial(j1 + j2 - j3)
        * factorial(j1 - j2 + j3)
        * factorial(-j1 + j2 + j3)
        * factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);
    let pre_den = factorial(j1 + j2 + j3 + 1);

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);

    let mut sum_num = BigInt::zero();
    let mut sum_den = BigInt::one();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(j3 - j2 + k + m1)
            * factorial(j3 - j1 + k - m2)
            * factorial(j1 + j2 - j3 - k)
            * factorial(j1 - k - m1)
            * factorial(j2 - k + m2);
        let term = if k % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        sum_num = sum_num * &den + term * &sum_den;
        sum_den *= den;
    }
    if sum_num.is_zero() {
        return 0.0;
    }
    let negative = sum_num.is_negative();
    let sq_num = pre_num * &sum_num * &sum_num;
    let sq_den = pre_den * &sum_den * &sum_den;
    let magnitude = ratio_to_f64(&sq_num, &sq_den).sqrt();

    let phase_odd = (j1 - j2 - m3).rem_euclid(2) == 1;
    if phase_odd != negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Positive big-integer ratio to `f64` without intermediate overflow.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = 64i64 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mantissa = q.to_f64().unwrap_or(f64::NAN);
    mantissa * 2f64.powi(-(shift as i32))
}

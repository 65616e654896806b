//! Wigner 3j symbols from the Racah sum in exact arithmetic.
//!
//! Angular momenta are passed doubled (`tj = 2j`), so half-integers are
//! plain integers.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn factorials() -> &'static Vec<BigInt> {
    static F: OnceLock<Vec<BigInt>> = OnceLock::new();
    F.get_or_init(|| {
        let mut v = vec![BigInt::one()];
        for n in 1..=400u32 {
            let next = &v[n as usize - 1] * BigInt::from(n);
            v.push(next);
        }
        v
    })
}

fn fact(n: i32) -> &'static BigInt {
    &factorials()[n as usize]
}

/// `s·√q` with `q ≥ 0` rational.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSqrt {
    pub negative: bool,
    pub square: BigRational,
}

impl SignedSqrt {
    pub fn zero() -> Self {
        SignedSqrt { negative: false, square: BigRational::zero() }
    }

    pub fn to_f64(&self) -> f64 {
        let v = self.square.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.negative { -v } else { v }
    }
}

/// Exact `(j1 j2 j3; m1 m2 m3)` with doubled arguments; zero when a selection rule fails.
pub fn wigner3j_exact(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> SignedSqrt {
    let ok = tm1 + tm2 + tm3 == 0
        && [(tj1, tm1), (tj2, tm2), (tj3, tm3)].iter().all(|&(j, m)| j >= 0 && m.abs() <= j && (j + m) % 2 == 0)
        && (tj1 + tj2 + tj3) % 2 == 0
        && tj3 <= tj1 + tj2
        && tj3 >= (tj1 - tj2).abs();
    if !ok {
        return SignedSqrt::zero();
    }
    // all quantities below are integers
    let h = |x: i32| x / 2;
    let a = h(tj1 + tj2 - tj3);
    let b = h(tj1 - tj2 + tj3);
    let c = h(-tj1 + tj2 + tj3);
    let total = h(tj1 + tj2 + tj3) + 1;
    let delta = BigRational::new(fact(a) * fact(b) * fact(c), fact(total).clone());
    let pre = fact(h(tj1 + tm1))
        * fact(h(tj1 - tm1))
        * fact(h(tj2 + tm2))
        * fact(h(tj2 - tm2))
        * fact(h(tj3 + tm3))
        * fact(h(tj3 - tm3));
    let d1 = h(tj3 - tj2 + tm1);
    let d2 = h(tj3 - tj1 - tm2);
    let d3 = h(tj1 + tj2 - tj3);
    let d4 = h(tj1 - tm1);
    let d5 = h(tj2 + tm2);
    let kmin = 0.max(-d1).max(-d2);
    let kmax = d3.min(d4).min(d5);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact(k) * fact(d1 + k) * fact(d2 + k) * fact(d3 - k) * fact(d4 - k) * fact(d5 - k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return SignedSqrt::zero();
    }
    let phase_odd = (h(tj1 - tj2 - tm3)).rem_euclid(2) == 1;
    let negative = phase_odd ^ sum.is_negative();
    let square = delta * BigRational::from_integer(pre) * &sum * &sum;
    SignedSqrt { negative, square }
}

/// `(j1 j2 j3; m1 m2 m3)` with doubled arguments.
pub fn wigner3j(tj1: i32, tj2: i32, tj3: i32, tm1: i32, tm2: i32, tm3: i32) -> f64 {
    wigner3j_exact(tj1, tj2, tj3, tm1, tm2, tm3).to_f64()
}

fn doubled(x: f64) -> Result<i32> {
    let t = 2.0 * x;
    if (t - t.round()).abs() > 1e-12 {
        return Err(Error::HalfInteger(x.to_string()));
    }
    Ok(t.round() as i32)
}

/// `(j1 j2 j3; m1 m2 m3)` for real arguments that must be half-integers.
pub fn wigner3j_f64(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    Ok(wigner3j(doubled(j1)?, doubled(j2)?, doubled(j3)?, doubled(m1)?, doubled(m2)?, doubled(m3)?))
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Truncated power series `Σ_{r≤R} c_r t^r` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        RationalSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![BigRational::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// The monomial `t^k`, truncated at `order`.
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = BigRational::one();
        }
        s
    }

    /// `e^{−a t}` for rational `a`.
    pub fn exp_neg(a: &BigRational, order: usize) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut term = BigRational::one();
        for n in 0..=order {
            c.push(term.clone());
            term = -term * a / BigRational::from_integer(BigInt::from(n + 1));
        }
        Self::new(c)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> BigRational {
        self.coeffs.get(r).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|r| &self.coeffs[r] + &other.coeffs[r]).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|r| &self.coeffs[r] - &other.coeffs[r]).collect())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let c = (0..=n)
            .map(|r| (0..=r).map(|s| &self.coeffs[s] * &other.coeffs[r - s]).sum())
            .collect();
        Self::new(c)
    }

    /// Multiplies by `t^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.order();
        Self::new((0..=n).map(|r| if r >= k { self.coeffs[r - k].clone() } else { BigRational::zero() }).collect())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = self.coeffs[0].recip();
        let mut out: Vec<BigRational> = vec![inv0.clone()];
        for r in 1..=self.order() {
            let s: BigRational = (1..=r).map(|k| &self.coeffs[k] * &out[r - k]).sum();
            out.push(-s * &inv0);
        }
        Ok(Self::new(out))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }
}

/// `(1 − e^{−t})/t = Σ (−1)^n t^n/(n+1)!`.
fn one_minus_exp_over_t(order: usize) -> RationalSeries {
    let mut c = Vec::with_capacity(order + 1);
    let mut fact = BigInt::one();
    for n in 0..=order {
        fact *= BigInt::from(n + 1);
        let sign = if n % 2 == 0 { 1 } else { -1 };
        c.push(BigRational::new(BigInt::from(sign), fact.clone()));
    }
    RationalSeries::new(c)
}

/// Coefficients `n_r` of `t·Tr(e^{−tN}) = t/(1−e^{−t}) = Σ n_r t^r`.
pub fn n_coefficients(order: usize) -> RationalSeries {
    one_minus_exp_over_t(order).recip().expect("constant term is 1")
}

//! Exact closed-form cochains on monomials `U^αV^β ⊗ c` of the suspended torus.
//!
//! Scalars are Laurent polynomials with rational coefficients in
//! `ω = e^{−2πiθ}`, so that `V^β U^α = ω^{αβ} U^α V^β` and cocycle identities
//! can be checked with exact zeros.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::bicomplex::{Algebra, CocycleFunctional, FunctionalSource, Parity};

/// `Σ_e q_e ω^e` with `q_e ∈ ℚ`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly(BTreeMap<i64, BigRational>);

impl LaurentPoly {
    pub fn monomial(e: i64, q: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(e, q);
        }
        LaurentPoly(m)
    }

    pub fn constant(q: BigRational) -> Self {
        Self::monomial(0, q)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.0.iter().map(|(e, q)| (*e, q))
    }

    /// Value at `ω = e^{−2πiθ}`.
    pub fn eval(&self, theta: f64) -> C64 {
        self.0
            .iter()
            .map(|(e, q)| C64::from_polar(q.to_f64().unwrap_or(f64::NAN), -2.0 * PI * theta * *e as f64))
            .sum()
    }

    fn insert(&mut self, e: i64, q: BigRational) {
        let entry = self.0.entry(e).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.0.remove(&e);
        }
    }
}

impl Zero for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly(BTreeMap::new())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl Add for LaurentPoly {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, q) in rhs.0 {
            self.insert(e, q);
        }
        self
    }
}

impl Neg for LaurentPoly {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentPoly(self.0.into_iter().map(|(e, q)| (e, -q)).collect())
    }
}

impl Sub for LaurentPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e, q) in &self.0 {
            for (f, r) in &rhs.0 {
                out.insert(e + f, q * r);
            }
        }
        out
    }
}

/// Square rational matrix standing for an operator supported on `span{e_0, …, e_{K−1}}` in ℓ²(ℕ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    k: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zero(k: usize) -> Self {
        RatMatrix { k, data: vec![BigRational::zero(); k * k] }
    }

    /// The projection onto the first `k` basis vectors.
    pub fn identity(k: usize) -> Self {
        let mut m = Self::zero(k);
        for i in 0..k {
            m.data[i * k + i] = BigRational::one();
        }
        m
    }

    /// `|e_i⟩⟨e_j|`.
    pub fn unit(k: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(k);
        m.data[i * k + j] = BigRational::one();
        m
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        RatMatrix { k, data: (0..k * k).map(|x| f(x / k, x % k)).collect() }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.k + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "matrix sizes differ");
        let k = self.k;
        let mut out = Self::zero(k);
        for i in 0..k {
            for l in 0..k {
                let a = &self.data[i * k + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..k {
                    let b = &other.data[l * k + j];
                    if !b.is_zero() {
                        out.data[i * k + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> BigRational {
        (0..self.k).map(|i| self.data[i * self.k + i].clone()).sum()
    }
}

/// `coef · U^α V^β ⊗ c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusElem {
    pub coef: LaurentPoly,
    pub alpha: i64,
    pub beta: i64,
    pub c: RatMatrix,
}

impl TorusElem {
    pub fn monomial(alpha: i64, beta: i64, c: RatMatrix) -> Self {
        TorusElem { coef: LaurentPoly::constant(BigRational::one()), alpha, beta, c }
    }
}

impl Algebra for TorusElem {
    fn product(&self, other: &Self) -> Self {
        let phase = LaurentPoly::monomial(self.beta * other.alpha, BigRational::one());
        TorusElem {
            coef: &(&self.coef * &other.coef) * &phase,
            alpha: self.alpha + other.alpha,
            beta: self.beta + other.beta,
            c: self.c.mul(&other.c),
        }
    }

    fn unit(&self) -> Self {
        TorusElem::monomial(0, 0, RatMatrix::identity(self.c.size()))
    }
}

/// The scalar `2√2π i^{3/2}` carried by `Σ²φ_2` on monomials.
pub fn phi2_unit() -> C64 {
    C64::from_polar(2.0 * 2f64.sqrt() * PI, 0.75 * PI)
}

/// `Σ²φ_2 / (2√2π i^{3/2})` on monomial tensors: zero unless balanced, else
/// `(α_1β_2 − α_2β_1) ω^{α_1β_0+α_2β_0+α_2β_1} Tr(c_0c_1c_2)` times the coefficients.
pub fn closed_sigma2_phi2() -> CocycleFunctional<TorusElem, LaurentPoly> {
    CocycleFunctional::new(Parity::Even, 2, FunctionalSource::ClosedForm, |a: &[TorusElem]| {
        let (x, y, z) = (&a[0], &a[1], &a[2]);
        if x.alpha + y.alpha + z.alpha != 0 || x.beta + y.beta + z.beta != 0 {
            return Ok(LaurentPoly::zero());
        }
        let det = y.alpha * z.beta - z.alpha * y.beta;
        let tr = x.c.mul(&y.c).mul(&z.c).trace();
        let e = y.alpha * x.beta + z.alpha * x.beta + z.alpha * y.beta;
        let scalar = LaurentPoly::monomial(e, tr * BigRational::from_integer(det.into()));
        Ok(&(&(&x.coef * &y.coef) * &z.coef) * &scalar)
    })
}

/// `Σ²φ_0` on the suspended torus, which vanishes identically.
pub fn closed_sigma2_phi0() -> CocycleFunctional<TorusElem, LaurentPoly> {
    CocycleFunctional::new(Parity::Even, 0, FunctionalSource::ClosedForm, |_: &[TorusElem]| Ok(LaurentPoly::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{connes_b, hochschild_b};
    use crate::models::{nctorus_closed_values, ClosedKind, DEFAULT_THETA};
    use crate::series::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_elem(rng: &mut ChaCha8Rng, k: usize) -> TorusElem {
        let c = RatMatrix::from_fn(k, |_, _| rat(rng.gen_range(-3..=3), rng.gen_range(1..=4)));
        let mut e = TorusElem::monomial(rng.gen_range(-2..=2), rng.gen_range(-2..=2), c);
        e.coef = LaurentPoly::monomial(rng.gen_range(-2..=2), rat(rng.gen_range(1..=5), 1));
        e
    }

    #[test]
    fn commutation_in_the_table() {
        let u = TorusElem::monomial(1, 0, RatMatrix::identity(1));
        let v = TorusElem::monomial(0, 1, RatMatrix::identity(1));
        // vu = ω uv
        assert_eq!(v.product(&u).coef, LaurentPoly::monomial(1, rat(1, 1)));
        assert!(u.product(&v).coef == LaurentPoly::constant(rat(1, 1)));
    }

    #[test]
    fn matches_numeric_closed_values() {
        let phi = closed_sigma2_phi2();
        let (al, be) = ([-1i64, 1, 0], [-1i64, 0, 1]);
        let args: Vec<TorusElem> = (0..3).map(|i| TorusElem::monomial(al[i], be[i], RatMatrix::unit(1, 0, 0))).collect();
        let v = phi.eval(&args).unwrap().eval(DEFAULT_THETA) * phi2_unit();
        let expect = nctorus_closed_values(ClosedKind::Phi2, [-1, 1, 0], [-1, 0, 1], DEFAULT_THETA);
        assert!((v - expect).norm() < 1e-12);
    }

    fn balanced(rng: &mut ChaCha8Rng, n: usize) -> Vec<TorusElem> {
        let mut v: Vec<TorusElem> = (0..n).map(|_| random_elem(rng, 2)).collect();
        let (sa, sb) = v[..n - 1].iter().fold((0, 0), |(a, b), e| (a + e.alpha, b + e.beta));
        v[n - 1].alpha = -sa;
        v[n - 1].beta = -sb;
        v
    }

    #[test]
    fn exact_cocycle_identities() {
        let phi = closed_sigma2_phi2();
        let b = hochschild_b(&phi);
        let bb = connes_b(&phi).unwrap();
        let b0 = hochschild_b(&closed_sigma2_phi0());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let four = balanced(&mut rng, 4);
            assert!(b.eval(&four).unwrap().is_zero());
            let two = balanced(&mut rng, 2);
            assert!((b0.eval(&two).unwrap() + bb.eval(&two).unwrap()).is_zero());
        }
    }
}

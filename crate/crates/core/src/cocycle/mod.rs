//! Exact coefficients of the residue cocycle, its assembly from `ψ_x`
//! functionals, and the `(b, B)` coboundaries.

mod bicomplex;
mod table;

pub use bicomplex::{connes_b, hochschild_b, Algebra, CocycleFunctional, FunctionalSource, Parity};
pub use table::{closed_sigma2_phi0, closed_sigma2_phi2, phi2_unit, LaurentPoly, RatMatrix, TorusElem};

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `q · (√π)^e · (√(2i))^f`, exact in `q`, with `√(2i) = 1 + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoeff {
    pub q: BigRational,
    pub sqrt_pi_power: i32,
    pub sqrt2i_power: i32,
}

impl ExactCoeff {
    pub fn rational(q: BigRational) -> Self {
        ExactCoeff { q, sqrt_pi_power: 0, sqrt2i_power: 0 }
    }

    pub fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn carries_sqrt2i(&self) -> bool {
        self.sqrt2i_power != 0
    }

    pub fn mul(&self, other: &Self) -> Self {
        ExactCoeff {
            q: &self.q * &other.q,
            sqrt_pi_power: self.sqrt_pi_power + other.sqrt_pi_power,
            sqrt2i_power: self.sqrt2i_power + other.sqrt2i_power,
        }
    }

    /// Sum of two coefficients with the same transcendental part; zero adapts to the other side.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if (self.sqrt_pi_power, self.sqrt2i_power) != (other.sqrt_pi_power, other.sqrt2i_power) {
            return Err(Error::Arity(format!("cannot add {self} and {other} exactly")));
        }
        Ok(ExactCoeff { q: &self.q + &other.q, ..self.clone() })
    }

    pub fn to_c64(&self) -> C64 {
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let pi = std::f64::consts::PI.sqrt().powi(self.sqrt_pi_power);
        C64::new(1.0, 1.0).powi(self.sqrt2i_power) * (q * pi)
    }
}

impl fmt::Display for ExactCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)?;
        if self.sqrt_pi_power != 0 {
            write!(f, "·√π^{}", self.sqrt_pi_power)?;
        }
        if self.sqrt2i_power != 0 {
            write!(f, "·√(2i)^{}", self.sqrt2i_power)?;
        }
        Ok(())
    }
}

fn fact(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    fact(n as u64) / (fact(k as u64) * fact((n - k) as u64))
}

/// `Γ(h/2)` for `h ≥ 1` as `q · (√π)^{h mod 2}`.
fn gamma_half_exact(h: u64) -> ExactCoeff {
    if h % 2 == 0 {
        ExactCoeff::rational(BigRational::from_integer(fact(h / 2 - 1)))
    } else {
        let k = (h - 1) / 2;
        let q = BigRational::new(fact(2 * k), BigInt::from(4).pow(k as u32) * fact(k));
        ExactCoeff { q, sqrt_pi_power: 1, sqrt2i_power: 0 }
    }
}

fn c_core(k: &[u32]) -> BigRational {
    let mut den = BigInt::one();
    let mut partial = 0u64;
    for (j, &kj) in k.iter().enumerate() {
        partial += u64::from(kj);
        den *= fact(u64::from(kj)) * BigInt::from(partial + j as u64 + 1);
    }
    let total: u32 = k.iter().sum();
    let sign = if total % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    BigRational::new(sign, den)
}

/// `c_{n,k} = (−1)^{|k|} √(2i) (Π k_j! Π (k_1+…+k_j+j))^{−1} Γ(|k| + n/2)`.
pub fn c_coeff(n: usize, k: &[u32]) -> Result<ExactCoeff> {
    if n == 0 || k.len() != n {
        return Err(Error::Arity(format!("c_{{n,k}} needs n ≥ 1 and |k| = n, got n = {n}, k = {k:?}")));
    }
    let total: u64 = k.iter().map(|&x| u64::from(x)).sum();
    let g = gamma_half_exact(2 * total + n as u64);
    Ok(ExactCoeff { q: c_core(k) * g.q, sqrt_pi_power: g.sqrt_pi_power, sqrt2i_power: 1 })
}

/// `c_{n,k}` without the `Γ(|k| + n/2)` factor.
pub fn c_coeff_bare(n: usize, k: &[u32]) -> Result<ExactCoeff> {
    if n == 0 || k.len() != n {
        return Err(Error::Arity(format!("c_{{n,k}} needs n ≥ 1 and |k| = n, got n = {n}, k = {k:?}")));
    }
    Ok(ExactCoeff { q: c_core(k), sqrt_pi_power: 0, sqrt2i_power: 1 })
}

struct BState<'a> {
    x: &'a [u32],
    k: Vec<u32>,
    total: ExactCoeff,
}

impl BState<'_> {
    /// Level `i` (0-based) given `s_{i−1}`, `S_{i−1}`, `|s|` so far and the binomial product.
    fn walk(&mut self, i: usize, s_prev: i64, big_s_prev: i64, s_sum: i64, weight: BigInt) -> Result<()> {
        let n = self.x.len();
        if i == n {
            let c = c_coeff(n, &self.k)?;
            let ksum: i64 = self.k.iter().map(|&v| i64::from(v)).sum();
            let xsum: i64 = self.x.iter().map(|&v| i64::from(v)).sum();
            let e = 2 * ksum - xsum + s_sum;
            let two = if e >= 0 {
                BigRational::from_integer(BigInt::from(2).pow(e as u32))
            } else {
                BigRational::new(BigInt::one(), BigInt::from(2).pow((-e) as u32))
            };
            let term = c.mul(&ExactCoeff::rational(two * BigRational::from_integer(weight)));
            self.total = self.total.add(&term)?;
            return Ok(());
        }
        let xi = i64::from(self.x[i]);
        let lo = (xi - s_prev + 1).div_euclid(2).max(0);
        for ki in lo..=xi {
            let b1 = binom(ki, xi - ki - s_prev);
            if b1.is_zero() {
                continue;
            }
            let big_s = big_s_prev + 2 * ki - xi;
            if big_s < 0 {
                continue;
            }
            self.k.push(ki as u32);
            let s_max = if i + 1 < n { big_s } else { 0 };
            for si in 0..=s_max {
                let b2 = binom(big_s, si);
                self.walk(i + 1, si, big_s, s_sum + si, &weight * &b1 * b2)?;
            }
            self.k.pop();
        }
        Ok(())
    }
}

/// `B_x^n`: the coefficient of `ψ_x^0(a_0, da_1, …, da_n)` in `φ_n`.
pub fn b_coeff(n: usize, x: &[u32]) -> Result<ExactCoeff> {
    if n == 0 || x.len() != n {
        return Err(Error::Arity(format!("B_x^n needs n ≥ 1 and |x| = n, got n = {n}, x = {x:?}")));
    }
    let mut st = BState { x, k: Vec::with_capacity(n), total: ExactCoeff::zero() };
    st.walk(0, 0, 0, 0, BigInt::one())?;
    let mut total = st.total;
    if total.is_zero() {
        // keep the transcendental part of the family for uniform tables
        let g = gamma_half_exact(n as u64 + 2 * x.iter().map(|&v| u64::from(v)).sum::<u64>());
        total.sqrt_pi_power = g.sqrt_pi_power;
        total.sqrt2i_power = 1;
    }
    Ok(total)
}

/// All `x ∈ ℕⁿ` with `|x| ≤ max_weight`, in lexicographic order.
pub fn multi_indices(n: usize, max_weight: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(n, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_weight, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `Σ_{n+|x| ≤ max_total} B_x^n ψ_x(…)`; `psi` receives `x`.
pub fn assemble_phi_to(
    n: usize,
    parity: Parity,
    max_total: u32,
    psi: impl Fn(&[u32]) -> Result<C64>,
) -> Result<C64> {
    if n == 0 {
        return Err(Error::Arity("φ_0 is not a B_x^n sum".into()));
    }
    let odd = n % 2 == 1;
    if odd != (parity == Parity::Odd) {
        return Err(Error::Arity(format!("n = {n} does not match {parity:?} parity")));
    }
    let Some(budget) = max_total.checked_sub(n as u32) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let mut acc = C64::new(0.0, 0.0);
    for x in multi_indices(n, budget) {
        let b = b_coeff(n, &x)?;
        if b.is_zero() {
            continue;
        }
        acc += b.to_c64() * psi(&x)?;
    }
    Ok(acc)
}

/// `φ_n = Σ_x B_x^n ψ_x^0(…)` with the sum cut at `n + |x| ≤ p`.
pub fn assemble_phi(n: usize, parity: Parity, p: u32, psi: impl Fn(&[u32]) -> Result<C64>) -> Result<C64> {
    assemble_phi_to(n, parity, p, psi)
}

/// CSV rows `n,x,q_num,q_den,sqrt_pi_power` of `B_x^n` for `n ≤ n_max`, `|x| ≤ weight`.
pub fn b_table_csv(n_max: usize, weight: u32) -> Result<String> {
    let mut s = String::from("n,x,q_num,q_den,sqrt_pi_power\n");
    for n in 1..=n_max {
        for x in multi_indices(n, weight) {
            let b = b_coeff(n, &x)?;
            s.push_str(&csv_row(n, &x, &b));
        }
    }
    Ok(s)
}

/// CSV rows `n,k,q_num,q_den,sqrt_pi_power` of `c_{n,k}`.
pub fn c_table_csv(n_max: usize, weight: u32) -> Result<String> {
    let mut s = String::from("n,k,q_num,q_den,sqrt_pi_power\n");
    for n in 1..=n_max {
        for k in multi_indices(n, weight) {
            s.push_str(&csv_row(n, &k, &c_coeff(n, &k)?));
        }
    }
    Ok(s)
}

fn csv_row(n: usize, v: &[u32], c: &ExactCoeff) -> String {
    let idx: Vec<String> = v.iter().map(u32::to_string).collect();
    let (num, den) = (c.q.numer(), c.q.denom());
    let num = if c.q.is_negative() { format!("-{}", num.abs()) } else { num.to_string() };
    format!("{n},{},{num},{den},{}\n", idx.join(";"), c.sqrt_pi_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn q(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn c_values() {
        let c1 = c_coeff(1, &[0]).unwrap();
        assert_eq!(c1, ExactCoeff { q: q(1, 1), sqrt_pi_power: 1, sqrt2i_power: 1 });
        let c2 = c_coeff(2, &[0, 0]).unwrap();
        assert_eq!(c2, ExactCoeff { q: q(1, 2), sqrt_pi_power: 0, sqrt2i_power: 1 });
        assert_eq!(c_coeff(2, &[1, 0]).unwrap().q, q(-1, 6));
        assert!(c_coeff(0, &[]).is_err());
        assert!(c_coeff(2, &[0]).is_err());
    }

    #[test]
    fn b_values() {
        assert_eq!(b_coeff(2, &[0, 0]).unwrap().q, q(1, 2));
        assert_eq!(b_coeff(2, &[1, 0]).unwrap().q, q(-1, 3));
        assert_eq!(b_coeff(2, &[0, 1]).unwrap().q, q(-2, 3));
        let b1 = b_coeff(1, &[0]).unwrap();
        assert_eq!(b1, c_coeff(1, &[0]).unwrap());
    }

    #[test]
    fn b1_is_single_sum() {
        // B^1_x = Σ_k c_{1,k} 2^{2k−x} C(k, x−k)
        for x in 0..6u32 {
            let mut expect = ExactCoeff::zero();
            for k in 0..=x {
                let w = binom(i64::from(k), i64::from(x - k));
                let two = BigRational::new(BigInt::from(2).pow(2 * k), BigInt::from(2).pow(x));
                let term = c_coeff(1, &[k]).unwrap().mul(&ExactCoeff::rational(two * BigRational::from_integer(w)));
                expect = expect.add(&term).unwrap();
            }
            assert_eq!(b_coeff(1, &[x]).unwrap().q, expect.q, "x = {x}");
        }
    }

    #[test]
    fn gamma_parity() {
        for n in 1..5usize {
            for k in multi_indices(n, 3) {
                let c = c_coeff(n, &k).unwrap();
                assert_eq!(c.sqrt_pi_power, (n % 2) as i32);
                assert!(c.carries_sqrt2i());
            }
        }
    }

    #[test]
    fn embedding() {
        let c = ExactCoeff { q: q(1, 2), sqrt_pi_power: 0, sqrt2i_power: 1 };
        assert_eq!(c.to_c64(), C64::new(0.5, 0.5));
        let z = C64::new(1.0, 1.0);
        assert!((z * z - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn csv_export() {
        let s = b_table_csv(2, 1).unwrap();
        assert!(s.starts_with("n,x,q_num,q_den,sqrt_pi_power\n"));
        assert!(s.contains("2,0;0,1,2,0\n"));
        assert!(s.contains("2,1;0,-1,3,0\n"));
    }

    #[test]
    fn parity_mismatch() {
        assert!(assemble_phi(2, Parity::Odd, 3, |_| Ok(C64::new(1.0, 0.0))).is_err());
        assert!(assemble_phi(0, Parity::Even, 3, |_| Ok(C64::new(1.0, 0.0))).is_err());
    }
}

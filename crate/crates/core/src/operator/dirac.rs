use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{Op, Truncation};
use crate::error::{Error, Result};

/// Self-adjoint D, diagonal in the basis of its truncation.
///
/// `|D|` replaces zero eigenvalues by `kernel_shift`; the sign `F` is `+1`
/// on the kernel.
#[derive(Debug, Clone)]
pub struct DiracData {
    trunc: Arc<Truncation>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    sign: Vec<f64>,
    kernel_shift: f64,
    p: u32,
}

impl DiracData {
    pub fn new(trunc: &Arc<Truncation>, lambda: Vec<f64>, p: u32) -> Result<Self> {
        Self::with_kernel_shift(trunc, lambda, p, 1.0)
    }

    pub fn with_kernel_shift(
        trunc: &Arc<Truncation>,
        lambda: Vec<f64>,
        p: u32,
        kernel_shift: f64,
    ) -> Result<Self> {
        if lambda.len() != trunc.dim() {
            return Err(Error::IndexOutOfRange { index: lambda.len(), dim: trunc.dim() });
        }
        let mu = lambda.iter().map(|&l| if l == 0.0 { kernel_shift } else { l.abs() }).collect();
        let sign = lambda.iter().map(|&l| if l < 0.0 { -1.0 } else { 1.0 }).collect();
        Ok(DiracData { trunc: trunc.clone(), lambda, mu, sign, kernel_shift, p })
    }

    /// Builds from signs and moduli directly (`D = F|D|`), for operators such
    /// as `(F⊗1)(|D|⊗1 + 1⊗N)` whose modulus never vanishes.
    pub fn from_sign_and_modulus(
        trunc: &Arc<Truncation>,
        sign: Vec<f64>,
        mu: Vec<f64>,
        p: u32,
    ) -> Result<Self> {
        if sign.len() != trunc.dim() || mu.len() != trunc.dim() {
            return Err(Error::IndexOutOfRange { index: sign.len().max(mu.len()), dim: trunc.dim() });
        }
        let lambda = sign.iter().zip(&mu).map(|(s, m)| s * m).collect();
        Ok(DiracData { trunc: trunc.clone(), lambda, mu, sign, kernel_shift: 1.0, p })
    }

    pub fn trunc(&self) -> &Arc<Truncation> {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kernel_shift(&self) -> f64 {
        self.kernel_shift
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn modulus(&self) -> &[f64] {
        &self.mu
    }

    pub fn signs(&self) -> &[f64] {
        &self.sign
    }

    pub fn mu_max(&self) -> f64 {
        self.mu.iter().cloned().fold(0.0, f64::max)
    }

    fn check(&self, a: &Op) -> Result<()> {
        if self.trunc.same_as(a.trunc()) {
            Ok(())
        } else {
            Err(Error::TruncationMismatch(self.trunc.name().into(), a.trunc().name().into()))
        }
    }

    /// `da = [D, a]`.
    pub fn commutator(&self, a: &Op) -> Result<Op> {
        self.check(a)?;
        let l = &self.lambda;
        Ok(a.map_entries(|i, j, v| v * (l[i] - l[j])))
    }

    /// `δ^x(a)` with `δ = [|D|, ·]`.
    pub fn delta_pow(&self, a: &Op, x: u32) -> Result<Op> {
        self.check(a)?;
        if x == 0 {
            return Ok(a.clone());
        }
        let m = &self.mu;
        Ok(a.map_entries(|i, j, v| v * (m[i] - m[j]).powi(x as i32)))
    }

    /// `∇^k(a)` with `∇ = [|D|², ·]`.
    pub fn nabla_pow(&self, a: &Op, k: u32) -> Result<Op> {
        self.check(a)?;
        if k == 0 {
            return Ok(a.clone());
        }
        let m = &self.mu;
        Ok(a.map_entries(|i, j, v| v * (m[i] * m[i] - m[j] * m[j]).powi(k as i32)))
    }

    pub fn dirac_op(&self) -> Op {
        Op::from_real_diagonal(&self.trunc, &self.lambda)
    }

    pub fn sign_op(&self) -> Op {
        Op::from_real_diagonal(&self.trunc, &self.sign)
    }

    pub fn abs_op(&self) -> Op {
        Op::from_real_diagonal(&self.trunc, &self.mu)
    }

    pub fn abs_pow(&self, s: f64) -> Op {
        let d: Vec<f64> = self.mu.iter().map(|m| m.powf(s)).collect();
        Op::from_real_diagonal(&self.trunc, &d)
    }

    /// `a ↦ F a` without forming the product.
    pub fn sign_left(&self, a: &Op) -> Op {
        let s = &self.sign;
        a.map_entries(|i, _, v| v * s[i])
    }

    /// `a ↦ a F`.
    pub fn sign_right(&self, a: &Op) -> Op {
        let s = &self.sign;
        a.map_entries(|_, j, v| v * s[j])
    }
}

/// Grading as an involutive permutation of the D-eigenbasis pairing `λ` with `−λ`.
#[derive(Debug, Clone)]
pub struct Grading {
    trunc: Arc<Truncation>,
    partner: Vec<usize>,
}

impl Grading {
    pub fn new(dirac: &DiracData, partner: Vec<usize>) -> Result<Self> {
        let n = dirac.dim();
        if partner.len() != n {
            return Err(Error::InvalidGrading(format!("length {} != {n}", partner.len())));
        }
        let l = dirac.eigenvalues();
        for (i, &j) in partner.iter().enumerate() {
            if j >= n || partner[j] != i || j == i {
                return Err(Error::InvalidGrading(format!("not a fixed-point-free involution at {i}")));
            }
            if (l[i] + l[j]).abs() > 1e-12 * (1.0 + l[i].abs()) {
                return Err(Error::InvalidGrading(format!("λ[{i}] = {} is not paired with −λ", l[i])));
            }
        }
        Ok(Grading { trunc: dirac.trunc().clone(), partner })
    }

    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    pub fn op(&self) -> Op {
        Op::from_triplets(&self.trunc, self.partner.iter().enumerate().map(|(i, &j)| (j, i, C64::new(1.0, 0.0))))
            .expect("partner indices are in range")
    }

    /// `γ a` as a row permutation.
    pub fn apply_left(&self, a: &Op) -> Result<Op> {
        if !self.trunc.same_as(a.trunc()) {
            return Err(Error::TruncationMismatch(self.trunc.name().into(), a.trunc().name().into()));
        }
        Op::from_triplets(&self.trunc, a.triplets().map(|(i, j, v)| (self.partner[i], j, v)))
    }

    /// `γ ⊗ 1` on a product truncation whose left factor is this grading's space.
    pub fn tensor_identity(&self, product: &Arc<Truncation>) -> Result<Grading> {
        let (left, right) = product.factors().ok_or(Error::UnregisteredProduct)?;
        if !left.same_as(&self.trunc) {
            return Err(Error::UnregisteredProduct);
        }
        let m = right.dim();
        let partner = (0..product.dim()).map(|idx| self.partner[idx / m] * m + idx % m).collect();
        Ok(Grading { trunc: product.clone(), partner })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Label;

    fn toy() -> DiracData {
        let t = Truncation::labeled("toy", (0..4).map(Label::Index).collect()).unwrap();
        DiracData::new(&t, vec![-2.0, 0.0, 1.0, 3.0], 1).unwrap()
    }

    #[test]
    fn kernel_shift_and_sign() {
        let d = toy();
        assert_eq!(d.modulus(), &[2.0, 1.0, 1.0, 3.0]);
        assert_eq!(d.signs(), &[-1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn commutator_is_entrywise() {
        let d = toy();
        let a = Op::from_triplets(d.trunc(), [(0, 3, C64::new(1.0, 0.0))]).unwrap();
        assert_eq!(d.commutator(&a).unwrap().get(0, 3), C64::new(-5.0, 0.0));
        assert_eq!(d.delta_pow(&a, 2).unwrap().get(0, 3), C64::new(1.0, 0.0));
        assert_eq!(d.nabla_pow(&a, 1).unwrap().get(0, 3), C64::new(-5.0, 0.0));
    }

    #[test]
    fn grading_requires_pairing() {
        let t = Truncation::labeled("g", (0..2).map(Label::Index).collect()).unwrap();
        let d = DiracData::new(&t, vec![1.0, -1.0], 1).unwrap();
        assert!(Grading::new(&d, vec![1, 0]).is_ok());
        let d2 = DiracData::new(&t, vec![1.0, 2.0], 1).unwrap();
        assert!(Grading::new(&d2, vec![1, 0]).is_err());
    }
}

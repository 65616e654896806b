use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalSource {
    Numeric,
    ClosedForm,
}

/// A unital algebra in which cochains take their arguments.
pub trait Algebra: Clone + Send + Sync + 'static {
    fn product(&self, other: &Self) -> Self;
    /// The unit of the algebra containing `self`.
    fn unit(&self) -> Self;
}

/// Values of cochains: an abelian group.
pub trait CochainValue:
    Clone + Send + Sync + 'static + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
}

impl<V> CochainValue for V where
    V: Clone + Send + Sync + 'static + Zero + Add<Output = V> + Sub<Output = V> + Neg<Output = V>
{
}

type Eval<A, V> = Arc<dyn Fn(&[A]) -> Result<V> + Send + Sync>;

/// An `(n+1)`-linear functional `φ(a_0, …, a_n)`.
pub struct CocycleFunctional<A, V> {
    pub parity: Parity,
    pub n: usize,
    pub source: FunctionalSource,
    eval: Eval<A, V>,
}

impl<A, V> Clone for CocycleFunctional<A, V> {
    fn clone(&self) -> Self {
        CocycleFunctional { parity: self.parity, n: self.n, source: self.source, eval: self.eval.clone() }
    }
}

impl<A, V> fmt::Debug for CocycleFunctional<A, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CocycleFunctional")
            .field("parity", &self.parity)
            .field("n", &self.n)
            .field("source", &self.source)
            .finish()
    }
}

impl<A, V> CocycleFunctional<A, V> {
    pub fn new(
        parity: Parity,
        n: usize,
        source: FunctionalSource,
        eval: impl Fn(&[A]) -> Result<V> + Send + Sync + 'static,
    ) -> Self {
        CocycleFunctional { parity, n, source, eval: Arc::new(eval) }
    }

    pub fn arity(&self) -> usize {
        self.n + 1
    }

    pub fn eval(&self, args: &[A]) -> Result<V> {
        if args.len() != self.arity() {
            return Err(Error::Arity(format!("φ_{} takes {} arguments, got {}", self.n, self.arity(), args.len())));
        }
        (self.eval)(args)
    }
}

/// `(bφ)(a_0, …, a_{n+1}) = Σ_{j=0}^{n} (−1)^j φ(…, a_j a_{j+1}, …) + (−1)^{n+1} φ(a_{n+1}a_0, a_1, …, a_n)`.
pub fn hochschild_b<A: Algebra, V: CochainValue>(phi: &CocycleFunctional<A, V>) -> CocycleFunctional<A, V> {
    let inner = phi.clone();
    let n = phi.n;
    CocycleFunctional::new(phi.parity.flip(), n + 1, phi.source, move |a: &[A]| {
        let mut acc = V::zero();
        for j in 0..=n {
            let mut args: Vec<A> = Vec::with_capacity(n + 1);
            args.extend_from_slice(&a[..j]);
            args.push(a[j].product(&a[j + 1]));
            args.extend_from_slice(&a[j + 2..]);
            let v = inner.eval(&args)?;
            acc = if j % 2 == 0 { acc + v } else { acc - v };
        }
        let mut args = Vec::with_capacity(n + 1);
        args.push(a[n + 1].product(&a[0]));
        args.extend_from_slice(&a[1..=n]);
        let v = inner.eval(&args)?;
        Ok(if (n + 1) % 2 == 0 { acc + v } else { acc - v })
    })
}

/// `B = A ∘ B_0` with `(B_0φ)(a_0, …, a_{n−1}) = φ(1, a_0, …, a_{n−1})` and
/// `(Aψ)(a_0, …, a_{n−1}) = Σ_j (−1)^{(n−1)j} ψ(a_j, …, a_{j−1})`.
pub fn connes_b<A: Algebra, V: CochainValue>(phi: &CocycleFunctional<A, V>) -> Result<CocycleFunctional<A, V>> {
    if phi.n == 0 {
        return Err(Error::Arity("B is undefined on 0-cochains".into()));
    }
    let inner = phi.clone();
    let n = phi.n;
    Ok(CocycleFunctional::new(phi.parity.flip(), n - 1, phi.source, move |a: &[A]| {
        let mut acc = V::zero();
        for j in 0..n {
            let mut args = Vec::with_capacity(n + 1);
            args.push(a[0].unit());
            args.extend((0..n).map(|i| a[(j + i) % n].clone()));
            let v = inner.eval(&args)?;
            acc = if ((n - 1) * j) % 2 == 0 { acc + v } else { acc - v };
        }
        Ok(acc)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[derive(Clone, Debug)]
    struct Mat(DMatrix<C64>);

    impl Algebra for Mat {
        fn product(&self, other: &Self) -> Self {
            Mat(&self.0 * &other.0)
        }
        fn unit(&self) -> Self {
            Mat(DMatrix::identity(self.0.nrows(), self.0.ncols()))
        }
    }

    fn random(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn trace_is_a_hochschild_cocycle() {
        let tau: CocycleFunctional<Mat, C64> =
            CocycleFunctional::new(Parity::Even, 0, FunctionalSource::Numeric, |a: &[Mat]| Ok(a[0].0.trace()));
        let btau = hochschild_b(&tau);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let args = [Mat(random(&mut rng, 3)), Mat(random(&mut rng, 3))];
            assert!(btau.eval(&args).unwrap().norm() < 1e-12);
        }
        assert!(connes_b(&tau).is_err());
    }

    #[test]
    fn b_squares_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (x, y, z) = (random(&mut rng, 3), random(&mut rng, 3), random(&mut rng, 3));
        let phi: CocycleFunctional<Mat, C64> =
            CocycleFunctional::new(Parity::Even, 2, FunctionalSource::Numeric, move |a: &[Mat]| {
                Ok((&a[0].0 * &x * &a[1].0 * &y * &a[2].0 * &z).trace())
            });
        let bb = hochschild_b(&hochschild_b(&phi));
        assert_eq!(bb.n, 4);
        for _ in 0..3 {
            let args: Vec<Mat> = (0..5).map(|_| Mat(random(&mut rng, 3))).collect();
            assert!(bb.eval(&args).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn arity_is_checked() {
        let tau: CocycleFunctional<Mat, C64> =
            CocycleFunctional::new(Parity::Even, 0, FunctionalSource::Numeric, |a: &[Mat]| Ok(a[0].0.trace()));
        let m = Mat(DMatrix::identity(2, 2));
        assert!(tau.eval(&[m.clone(), m]).is_err());
    }

    #[test]
    fn connes_b_cyclic_signs() {
        // φ(a0, a1) = Tr(a0) Tr(a1): B φ(a) = φ(1, a) = n Tr(a)
        let phi: CocycleFunctional<Mat, C64> =
            CocycleFunctional::new(Parity::Odd, 1, FunctionalSource::Numeric, |a: &[Mat]| Ok(a[0].0.trace() * a[1].0.trace()));
        let bphi = connes_b(&phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Mat(random(&mut rng, 3));
        let got = bphi.eval(&[a.clone()]).unwrap();
        assert!((got - a.0.trace() * 3.0).norm() < 1e-12);
    }
}

use std::str::FromStr;

use num_complex::Complex64 as C64;

use super::fit::AsymptoticSeries;
use super::rational::{n_coefficients, rat, RationalSeries};
use crate::error::{Error, Result};

/// Spectra whose heat traces have closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumDescriptor {
    /// `N` on ℓ²(ℕ): `t/(1 − e^{−t})`.
    Naturals,
    /// `|D|` on ℓ²(ℤ) with `|D| = 1` on the kernel.
    CircleAbs,
    /// `|D|` on spinors of S²: `4t²e^{−t}/(1 − e^{−t})²`.
    SphereAbs,
    /// `t² Tr(e^{−t²Δ})` on `L²(T²) ⊕ L²(T²)`.
    TorusGaussian,
}

impl SpectrumDescriptor {
    pub fn natural_p(self) -> u32 {
        match self {
            Self::Naturals | Self::CircleAbs => 1,
            Self::SphereAbs | Self::TorusGaussian => 2,
        }
    }

    /// Rational coefficients of `t^p Tr(...)` when they exist.
    pub fn rational(self, order: usize) -> Option<RationalSeries> {
        let g = || n_coefficients(order);
        let e = || RationalSeries::exp_neg(&rat(1, 1), order);
        match self {
            Self::Naturals => Some(g()),
            Self::CircleAbs => {
                let t_e = e().shift_up(1);
                Some(t_e.add(&e().mul(&g()).scale(&rat(2, 1))))
            }
            Self::SphereAbs => Some(e().mul(&g()).mul(&g()).scale(&rat(4, 1))),
            Self::TorusGaussian => None,
        }
    }
}

impl FromStr for SpectrumDescriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naturals" => Ok(Self::Naturals),
            "circle-abs" => Ok(Self::CircleAbs),
            "sphere-abs" => Ok(Self::SphereAbs),
            "torus-gaussian" => Ok(Self::TorusGaussian),
            other => Err(Error::UnknownDescriptor(other.into())),
        }
    }
}

/// Exact `b_0..b_R` of `t^p Tr(...)`; `p` above the natural one shifts the series.
pub fn exact_expansion(desc: SpectrumDescriptor, p: u32, order: usize) -> Result<AsymptoticSeries> {
    let p0 = desc.natural_p();
    if p < p0 {
        return Err(Error::Arity(format!("p = {p} below natural dimension {p0}")));
    }
    let shift = (p - p0) as usize;
    let base: Vec<f64> = match desc.rational(order) {
        Some(s) => s.shift_up(shift).to_f64(),
        None => (0..=order).map(|r| if r == shift { 2.0 * std::f64::consts::PI } else { 0.0 }).collect(),
    };
    Ok(AsymptoticSeries::exact(p, base.into_iter().map(|x| C64::new(x, 0.0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_coefficients() {
        let s = SpectrumDescriptor::SphereAbs.rational(4).unwrap();
        assert_eq!(s.coeffs()[..4], [rat(4, 1), rat(0, 1), rat(-1, 3), rat(0, 1)]);
    }

    #[test]
    fn circle_coefficients() {
        // t(e^{−t} + 2e^{−t}/(1 − e^{−t})) = 2 + t·0 + ...
        let s = SpectrumDescriptor::CircleAbs.rational(3).unwrap();
        assert_eq!(s.coeff(0), rat(2, 1));
        // t e^{-t} contributes 1 and 2e^{-t}g contributes 2(1/2 − 1) = −1
        assert_eq!(s.coeff(1), rat(0, 1));
    }

    #[test]
    fn torus_gaussian_is_constant() {
        let s = exact_expansion(SpectrumDescriptor::TorusGaussian, 2, 3).unwrap();
        assert!((s.coeff(0).re - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(s.coeff(1), C64::new(0.0, 0.0));
    }

    #[test]
    fn unknown_descriptor() {
        assert!(matches!("klein".parse::<SpectrumDescriptor>(), Err(Error::UnknownDescriptor(_))));
    }
}

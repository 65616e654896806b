//! Spinor Dirac operator on S².
//!
//! The eigenspinor with eigenvalue `εk` is `(₋½Y_{jm}, ε·₊½Y_{jm})/√2` with
//! `j = k − ½`, and the grading flips `ε`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::quadrature::{spin_harmonic, SphereGrid, SpherePoly};
use super::wigner::wigner3j;
use super::{ModelInstance, Provenance};
use crate::error::{Error, Result};
use crate::operator::{DiracData, Grading, Label, Op, Truncation};
use crate::series::{Growth, SpectrumDescriptor};

#[derive(Debug, Clone)]
pub struct SphereModel {
    pub instance: ModelInstance,
    lmax: u32,
}

fn level_base(k: u32) -> usize {
    2 * (k as usize) * (k as usize - 1)
}

/// Index of `(k, 2m, ε)`.
fn index(k: u32, two_m: i32, eps: i8) -> usize {
    let off = ((two_m + 2 * k as i32 - 1) / 2) as usize;
    level_base(k) + 2 * off + usize::from(eps < 0)
}

/// `⟨sY_{jm}| Y_{lμ} |sY_{j'm'}⟩`, all angular arguments doubled.
fn gaunt(ts: i32, tj: i32, tm: i32, l: i32, mu: i32, tj2: i32, tm2: i32, cache: &mut HashMap<[i32; 6], f64>) -> f64 {
    let mut w = |a: [i32; 6]| *cache.entry(a).or_insert_with(|| wigner3j(a[0], a[1], a[2], a[3], a[4], a[5]));
    let a = w([tj, 2 * l, tj2, -tm, 2 * mu, tm2]);
    if a == 0.0 {
        return 0.0;
    }
    let b = w([tj, 2 * l, tj2, ts, 0, -ts]);
    let sign = if ((tm + ts) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * (((tj + 1) * (2 * l + 1) * (tj2 + 1)) as f64 / (4.0 * PI)).sqrt() * a * b
}

impl SphereModel {
    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn dirac(&self) -> &DiracData {
        &self.instance.dirac
    }

    /// Basis index of the eigenspinor `(k, 2m, ε)`.
    pub fn index_of(&self, k: u32, two_m: i32, eps: i8) -> Option<usize> {
        (k >= 1 && k <= self.lmax && two_m.abs() < 2 * k as i32 && two_m % 2 != 0).then(|| index(k, two_m, eps))
    }

    /// Compression of multiplication by `Σ_{lμ} f_{lμ} Y_{lμ}` to the truncation.
    pub fn harmonic_multiplication(&self, coeffs: &[(i32, i32, C64)]) -> Result<Op> {
        let trunc = self.instance.dirac.trunc().clone();
        let mut cache = HashMap::new();
        let mut entries = Vec::new();
        for k in 1..=self.lmax {
            let tj = 2 * k as i32 - 1;
            for tm in (-tj..=tj).step_by(2) {
                for &(l, mu, f) in coeffs {
                    let tm2 = tm - 2 * mu;
                    let lo = (k as i32 - l).max(1) as u32;
                    let hi = (k as i32 + l).min(self.lmax as i32) as u32;
                    for k2 in lo..=hi {
                        let tj2 = 2 * k2 as i32 - 1;
                        if tm2.abs() > tj2 {
                            continue;
                        }
                        let down = gaunt(-1, tj, tm, l, mu, tj2, tm2, &mut cache);
                        let up = gaunt(1, tj, tm, l, mu, tj2, tm2, &mut cache);
                        if down == 0.0 && up == 0.0 {
                            continue;
                        }
                        for e in [1i8, -1] {
                            for e2 in [1i8, -1] {
                                let v = 0.5 * (down + f64::from(e * e2) * up);
                                if v != 0.0 {
                                    entries.push((index(k, tm, e), index(k2, tm2, e2), f * v));
                                }
                            }
                        }
                    }
                }
            }
        }
        Op::from_triplets(&trunc, entries)
    }

    /// Compression of multiplication by a polynomial in `x, y, z`.
    pub fn multiplication(&self, f: &SpherePoly) -> Result<Op> {
        let deg = f.degree() as i32;
        let grid = SphereGrid::new(deg as usize + 2, 2 * deg as usize + 3);
        let mut coeffs = Vec::new();
        for l in 0..=deg {
            for mu in -l..=l {
                let c = grid.integrate(|t, p| {
                    let pt = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                    spin_harmonic(0, 2 * l, 2 * mu, t, p).conj() * f.eval(pt)
                });
                if c.norm() > 1e-14 {
                    coeffs.push((l, mu, c));
                }
            }
        }
        self.harmonic_multiplication(&coeffs)
    }
}

/// Coefficients of `x`, `y`, `z` in the degree-one harmonics.
pub(crate) fn coordinate_harmonics(axis: usize) -> Vec<(i32, i32, C64)> {
    let a = (2.0 * PI / 3.0).sqrt();
    match axis {
        0 => vec![(1, -1, C64::new(a, 0.0)), (1, 1, C64::new(-a, 0.0))],
        1 => vec![(1, -1, C64::new(0.0, a)), (1, 1, C64::new(0.0, a))],
        _ => vec![(1, 0, C64::new((4.0 * PI / 3.0).sqrt(), 0.0))],
    }
}

/// Spinor Dirac operator on S² with levels `k = 1..=lmax`.
pub fn sphere_model(lmax: u32) -> Result<SphereModel> {
    if lmax < 3 {
        return Err(Error::Config(format!("sphere needs Lmax ≥ 3, got {lmax}")));
    }
    let mut labels = Vec::new();
    let mut eig = Vec::new();
    for k in 1..=lmax {
        let tj = 2 * k as i32 - 1;
        for tm in (-tj..=tj).step_by(2) {
            for sign in [1i8, -1] {
                labels.push(Label::Spinor { k, two_m: tm, sign });
                eig.push(f64::from(sign) * k as f64);
            }
        }
    }
    let trunc = Truncation::labeled(format!("sphere[{lmax}]"), labels)?;
    let dirac = DiracData::new(&trunc, eig, 2)?;
    let partner = (0..trunc.dim()).map(|i| i ^ 1).collect();
    let grading = Grading::new(&dirac, partner)?;
    let instance = ModelInstance {
        name: "sphere".into(),
        dirac,
        grading: Some(grading),
        generators: BTreeMap::new(),
        growth: Growth { c: 4.0, q: 2, guard: 4.0 },
        expectations: Vec::new(),
        spectrum: Some(SpectrumDescriptor::SphereAbs),
        log_terms: 2,
    };
    let mut model = SphereModel { instance, lmax };
    let coords: Vec<Op> =
        (0..3).map(|a| model.harmonic_multiplication(&coordinate_harmonics(a))).collect::<Result<_>>()?;
    model.instance.add_generator("1", Op::identity(&trunc), 2);
    for (name, op) in ["x", "y", "z"].into_iter().zip(coords) {
        model.instance.add_generator(name, op, 2);
    }
    let one = Op::identity(&trunc);
    model.instance.expect(
        "sphere.zeta2.identity",
        "ζ^(2)(1) = b_0/2 with b_0 = 4",
        C64::new(2.0, 0.0),
        1e-6,
        Provenance::Oracle,
        move |ctx| Ok(ctx.zeta_residue(&one, 2)?.value),
    );
    let g = model.instance.grading.as_ref().expect("even").op();
    model.instance.expect(
        "sphere.zeta_at_zero.gamma",
        "all heat coefficients of γ vanish",
        C64::new(0.0, 0.0),
        1e-6,
        Provenance::ClosedForm,
        move |ctx| Ok(ctx.zeta_at_zero(&g)?.0),
    );
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::quadrature::spinor_matrix_element;

    #[test]
    fn matrix_elements_match_quadrature() {
        let m = sphere_model(4).unwrap();
        let polys = [SpherePoly::x(), SpherePoly::y(), SpherePoly::z()];
        let names = ["x", "y", "z"];
        for (p, n) in polys.iter().zip(names) {
            let op = m.instance.generator(n).unwrap();
            for (k, tm, e) in [(1u32, 1i32, 1i8), (2, -1, -1), (3, 3, 1), (2, 3, -1)] {
                for (k2, tm2, e2) in [(1u32, -1i32, 1i8), (2, 1, 1), (3, 1, -1), (2, 3, -1), (3, 5, 1)] {
                    let q = spinor_matrix_element(p, (k, tm, e), (k2, tm2, e2));
                    let v = op.get(index(k, tm, e), index(k2, tm2, e2));
                    assert!((q - v).norm() < 1e-10, "{n} ({k},{tm},{e}) ({k2},{tm2},{e2}): {q} vs {v}");
                }
            }
        }
    }

    #[test]
    fn polynomial_multiplication_matches_products_in_the_interior() {
        let m = sphere_model(6).unwrap();
        let x = m.instance.generator("x").unwrap();
        let z = m.instance.generator("z").unwrap();
        let xz = m.multiplication(&SpherePoly::parse("x*z").unwrap()).unwrap();
        let prod = x * z;
        for k in 1..=4u32 {
            let i = index(k, 1, 1);
            for j in 0..level_base(5) {
                assert!((xz.get(i, j) - prod.get(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn grading_flips_sign() {
        let m = sphere_model(3).unwrap();
        let g = m.instance.grading.as_ref().unwrap();
        let l = m.dirac().eigenvalues();
        for (i, &j) in g.partner().iter().enumerate() {
            assert_eq!(l[i], -l[j]);
        }
    }
}

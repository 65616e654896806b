use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use qdsindex::models::nctorus_model;
use qdsindex::operator::{tensor, DiracData, Op, Truncation};
use qdsindex::qds::suspended_dirac;
use qdsindex::series::{fit_asymptotics, heat_trace, n_coefficients, rat, FitConfig, RationalSeries, Window};
use qdsindex::zeta::SpectralContext;
use qdsindex::C64;

fn series(c: &[i64]) -> RationalSeries {
    RationalSeries::new(c.iter().map(|&n| rat(n, 1 + n.unsigned_abs() as i64 % 5)).collect())
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..20, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heat_trace_factorizes(mu in prop::collection::vec(0.2..3.0f64, 3),
                             a in prop::collection::vec(-1.0..1.0f64, 9),
                             c in prop::collection::vec(-1.0..1.0f64, 25),
                             t in 0.05..2.0f64) {
        // Tr((a⊗c) e^{−t|D_0|}) = Tr(a e^{−t|D|}) · Σ_k c_kk e^{−tk}
        let base = Truncation::ell2(3);
        let ell = Truncation::ell2(5);
        let prod = Truncation::product(&base, &ell);
        let d = DiracData::new(&base, mu, 1).unwrap();
        let d0 = suspended_dirac(&d, &prod).unwrap();
        let a = Op::from_triplets(&base, a.iter().enumerate().map(|(i, &v)| (i / 3, i % 3, C64::new(v, 0.5 * v)))).unwrap();
        let c = Op::from_triplets(&ell, c.iter().enumerate().map(|(i, &v)| (i / 5, i % 5, C64::new(v, 0.0)))).unwrap();
        let lhs = heat_trace(&tensor(&a, &c, &prod).unwrap(), &d0, t);
        let right: C64 = (0..5).map(|k| c.get(k, k) * (-t * k as f64).exp()).sum();
        let rhs = heat_trace(&a, &d, t) * right;
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }

    #[test]
    fn reciprocal_inverts(mut c in coeffs()) {
        if c[0] == 0 {
            c[0] = 3;
        }
        let s = series(&c);
        let prod = s.mul(&s.recip().unwrap());
        prop_assert_eq!(prod.coeffs().to_vec(), RationalSeries::one(6).coeffs().to_vec());
    }

    #[test]
    fn multiplication_commutes_and_associates(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        prop_assert_eq!(a.mul(&b).coeffs().to_vec(), b.mul(&a).coeffs().to_vec());
        prop_assert_eq!(a.mul(&b).mul(&c).coeffs().to_vec(), a.mul(&b.mul(&c)).coeffs().to_vec());
        prop_assert_eq!(a.add(&b).mul(&c).coeffs().to_vec(), a.mul(&c).add(&b.mul(&c)).coeffs().to_vec());
    }

    #[test]
    fn fit_recovers_polynomials(c in prop::collection::vec(-2.0..2.0f64, 5), t0 in 0.01..0.2f64) {
        let f = |t: f64| C64::new(c.iter().rev().fold(0.0, |s, &x| s * t + x), 0.0);
        let w = Window { t_min: t0, t_max: 4.0 * t0 };
        let s = fit_asymptotics(&f, 1, 3, &w, &FitConfig::default()).unwrap();
        for (r, &cr) in c.iter().take(4).enumerate() {
            prop_assert!((s.coeff(r).re - cr).abs() < 1e-7 * 10f64.powi(r as i32) / t0.powi(r as i32),
                "r = {} fitted {} exact {}", r, s.coeff(r).re, cr);
        }
    }
}

#[test]
fn naturals_series_is_bernoulli() {
    // t/(1 − e^{−t}) = Σ (−1)^r B_r t^r / r!
    let expected = [rat(1, 1), rat(1, 2), rat(1, 12), rat(0, 1), rat(-1, 720), rat(0, 1), rat(1, 30240)];
    let n = n_coefficients(6);
    assert_eq!(n.coeffs().to_vec(), &expected[..]);
    assert_eq!(n.coeff(0), BigRational::one());
}

#[test]
fn refitting_with_a_longer_report_is_stable() {
    let f = |t: f64| C64::new(t / (1.0 - (-t).exp()), 0.0);
    let w = Window { t_min: 0.05, t_max: 0.2 };
    let cfg = FitConfig::default();
    let a = fit_asymptotics(&f, 1, 3, &w, &cfg).unwrap();
    let b = fit_asymptotics(&f, 1, 4, &w, &cfg).unwrap();
    for r in 0..=3 {
        let tol = 10.0 * (a.error(r) + b.error(r)) + 1e-12;
        assert!((a.coeff(r) - b.coeff(r)).norm() <= tol, "r = {r}");
    }
    let n = n_coefficients(4).to_f64();
    for r in 0..=3 {
        assert!((a.coeff(r).re - n[r]).abs() <= a.error(r).max(1e-9), "r = {r}");
    }
}

fn torus_ctx() -> SpectralContext {
    let m = nctorus_model(0.3, 60).unwrap();
    m.instance.context(1e-12, FitConfig::default()).unwrap()
}

#[test]
fn inverse_modulus_on_the_torus() {
    // t² Tr(|D|^{−1} e^{−t|D|}) = 4πt + O(t²): ζ^(1) = 2π, ζ^(2) = 0
    let ctx = torus_ctx();
    let b = ctx.dirac().abs_pow(-1.0);
    let r1 = ctx.zeta_residue(&b, 1).unwrap();
    let r2 = ctx.zeta_residue(&b, 2).unwrap();
    assert!((r1.value - C64::new(2.0 * PI, 0.0)).norm() < 1e-4, "{:?}", r1);
    assert!(r2.value.norm() < 1e-4, "{:?}", r2);
}

#[test]
fn residues_follow_the_pole_normalization() {
    // ζ^(m) = b_{p−m} / (2Γ(m))
    let ctx = torus_ctx();
    let one = Op::identity(ctx.dirac().trunc());
    let s = ctx.expansion(&one).unwrap();
    for (m, gamma) in [(1u32, 1.0), (2, 1.0)] {
        let r = ctx.zeta_residue(&one, m).unwrap();
        assert_eq!(r.value, s.coeff((2 - m) as usize) / (2.0 * gamma));
    }
    let r2 = ctx.zeta_residue(&one, 2).unwrap();
    assert!((r2.value.re - 2.0 * PI).abs() < 1e-6);
}

#[test]
fn psi_is_multilinear_and_vanishes_above_p() {
    let m = nctorus_model(0.3, 40).unwrap();
    let ctx = m.instance.context(1e-12, FitConfig::default()).unwrap();
    let (u, v) = (m.instance.generator("u").unwrap(), m.instance.generator("v").unwrap());
    let (us, vs) = (m.instance.generator("u*").unwrap(), m.instance.generator("v*").unwrap());
    let du = ctx.dirac().commutator(u).unwrap();
    let dv = ctx.dirac().commutator(v).unwrap();
    let c = C64::new(0.7, -1.3);
    let psi = |b0: &Op, ops: &[Op]| ctx.psi(&[0, 0], 0, b0, ops, false).unwrap().value;
    let lhs = psi(&us.checked_mul(vs).unwrap().scale(c), &[du.clone(), dv.clone()]);
    let rhs = psi(&us.checked_mul(vs).unwrap(), &[du.clone(), dv.clone()]) * c;
    assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    let sum = du.checked_add(&dv).unwrap();
    let b0 = Op::identity(ctx.dirac().trunc());
    let l = psi(&b0, &[sum.clone(), dv.clone()]);
    let r = psi(&b0, &[du.clone(), dv.clone()]) + psi(&b0, &[dv.clone(), dv.clone()]);
    assert!((l - r).norm() < 1e-9 * (1.0 + r.norm()));
    let beyond = ctx.psi(&[1, 0], 0, &b0, &[du, dv], false).unwrap();
    assert!(beyond.beyond_spectrum);
    assert_eq!(beyond.value, C64::new(0.0, 0.0));
}

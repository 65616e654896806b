use std::sync::Arc;

use proptest::prelude::*;
use qdsindex::operator::{number_op, product, shift_power, tensor, DiracData, Op, Truncation};
use qdsindex::qds::suspended_dirac;
use qdsindex::C64;

const N: usize = 6;

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
}

fn dense(t: &Arc<Truncation>, e: &[(f64, f64)]) -> Op {
    let n = t.dim();
    Op::from_triplets(t, e.iter().enumerate().map(|(k, &(re, im))| (k / n, k % n, C64::new(re, im)))).unwrap()
}

fn eigenvalues() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.5..4.0f64, -4.0..-0.5f64], N)
}

fn rel(a: &Op, b: &Op) -> f64 {
    a.max_diff(b).unwrap() / (1.0 + a.max_abs().max(b.max_abs()))
}

fn binom(n: u32, k: u32) -> f64 {
    (1..=k).map(|i| f64::from(n + 1 - i) / f64::from(i)).product()
}

fn mul(a: &Op, b: &Op) -> Op {
    a.checked_mul(b).unwrap()
}

fn add(a: &Op, b: &Op) -> Op {
    a.checked_add(b).unwrap()
}

fn sub(a: &Op, b: &Op) -> Op {
    a.checked_sub(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutators_are_derivations(lam in eigenvalues(), a in entries(N), b in entries(N)) {
        let t = Truncation::ell2(N);
        let d = DiracData::new(&t, lam, 1).unwrap();
        let (a, b) = (dense(&t, &a), dense(&t, &b));
        let ab = mul(&a, &b);
        let ops: [&dyn Fn(&Op) -> Op; 3] = [
            &|x| d.commutator(x).unwrap(),
            &|x| d.delta_pow(x, 1).unwrap(),
            &|x| d.nabla_pow(x, 1).unwrap(),
        ];
        for f in ops {
            let leibniz = add(&mul(&f(&a), &b), &mul(&a, &f(&b)));
            prop_assert!(rel(&f(&ab), &leibniz) < 1e-12);
        }
    }

    #[test]
    fn commutators_match_dense_products(lam in eigenvalues(), a in entries(N)) {
        let t = Truncation::ell2(N);
        let d = DiracData::new(&t, lam, 1).unwrap();
        let a = dense(&t, &a);
        let (dd, abs) = (d.dirac_op(), d.abs_op());
        let abs2 = mul(&abs, &abs);
        prop_assert!(rel(&d.commutator(&a).unwrap(), &sub(&mul(&dd, &a), &mul(&a, &dd))) < 1e-13);
        prop_assert!(rel(&d.delta_pow(&a, 1).unwrap(), &sub(&mul(&abs, &a), &mul(&a, &abs))) < 1e-13);
        let mut nab = a.clone();
        for _ in 0..3 {
            nab = sub(&mul(&abs2, &nab), &mul(&nab, &abs2));
        }
        prop_assert!(rel(&d.nabla_pow(&a, 3).unwrap(), &nab) < 1e-12);
    }

    #[test]
    fn nabla_expands_in_delta(lam in eigenvalues(), a in entries(N), n in 1u32..5) {
        // ∇^n(T) = Σ_j C(n,j) 2^{n−j} δ^{n+j}(T) |D|^{n−j}
        let t = Truncation::ell2(N);
        let d = DiracData::new(&t, lam, 1).unwrap();
        let a = dense(&t, &a);
        let mut sum = Op::zero(&t);
        for j in 0..=n {
            let c = binom(n, j) * 2f64.powi((n - j) as i32);
            let term = mul(&d.delta_pow(&a, n + j).unwrap(), &d.abs_pow(f64::from(n - j)));
            sum = add(&sum, &term.scale(C64::new(c, 0.0)));
        }
        prop_assert!(rel(&d.nabla_pow(&a, n).unwrap(), &sum) < 1e-11);
    }

    #[test]
    fn abs_power_moves_right(lam in eigenvalues(), a in entries(N), n in 0u32..6) {
        // |D|^n T = Σ_j C(n,j) δ^j(T) |D|^{n−j}
        let t = Truncation::ell2(N);
        let d = DiracData::new(&t, lam, 1).unwrap();
        let a = dense(&t, &a);
        let mut sum = Op::zero(&t);
        for j in 0..=n {
            let term = mul(&d.delta_pow(&a, j).unwrap(), &d.abs_pow(f64::from(n - j)));
            sum = add(&sum, &term.scale(C64::new(binom(n, j), 0.0)));
        }
        prop_assert!(rel(&mul(&d.abs_pow(f64::from(n)), &a), &sum) < 1e-11);
    }

    #[test]
    fn adjoint_is_an_involution(a in entries(N), b in entries(N)) {
        let t = Truncation::ell2(N);
        let (a, b) = (dense(&t, &a), dense(&t, &b));
        prop_assert_eq!(a.adjoint().adjoint().max_diff(&a).unwrap(), 0.0);
        prop_assert!(rel(&mul(&a, &b).adjoint(), &mul(&b.adjoint(), &a.adjoint())) < 1e-14);
    }

    #[test]
    fn modulus_and_sign(lam in prop::collection::vec(-5i32..=5, N)) {
        let t = Truncation::ell2(N);
        let lam: Vec<f64> = lam.into_iter().map(f64::from).collect();
        let d = DiracData::new(&t, lam.clone(), 1).unwrap();
        prop_assert!(d.modulus().iter().all(|&m| m > 0.0));
        prop_assert!(d.signs().iter().all(|&s| s * s == 1.0));
        for i in 0..N {
            if lam[i] != 0.0 {
                prop_assert_eq!(d.signs()[i] * d.modulus()[i], lam[i]);
            }
        }
        let f = d.sign_op();
        prop_assert_eq!(mul(&f, &f).max_diff(&Op::identity(&t)).unwrap(), 0.0);
    }

    #[test]
    fn suspended_commutators_split(lam in prop::collection::vec(prop_oneof![0.5..3.0f64, -3.0..-0.5f64], 3),
                                   a in entries(3), c in entries(4)) {
        // d_0(a⊗c) = da⊗c + Fa⊗Nc − aF⊗cN and δ_0(a⊗c) = δa⊗c + a⊗[N,c]
        let base = Truncation::ell2(3);
        let ell = Truncation::ell2(4);
        let prod = Truncation::product(&base, &ell);
        let d = DiracData::new(&base, lam, 1).unwrap();
        let d0 = suspended_dirac(&d, &prod).unwrap();
        let (a, c) = (dense(&base, &a), dense(&ell, &c));
        let nn = number_op(&ell);
        let ac = tensor(&a, &c, &prod).unwrap();
        let f = d.sign_op();
        let split = [
            tensor(&d.commutator(&a).unwrap(), &c, &prod).unwrap(),
            tensor(&mul(&f, &a), &mul(&nn, &c), &prod).unwrap(),
            tensor(&mul(&a, &f), &mul(&c, &nn), &prod).unwrap().scale(C64::new(-1.0, 0.0)),
        ];
        let rhs = split.iter().fold(Op::zero(&prod), |s, x| add(&s, x));
        prop_assert!(rel(&d0.commutator(&ac).unwrap(), &rhs) < 1e-12);
        let nc = sub(&mul(&nn, &c), &mul(&c, &nn));
        let rhs = add(&tensor(&d.delta_pow(&a, 1).unwrap(), &c, &prod).unwrap(), &tensor(&a, &nc, &prod).unwrap());
        prop_assert!(rel(&d0.delta_pow(&ac, 1).unwrap(), &rhs) < 1e-12);
    }
}

#[test]
fn suspended_modulus_is_a_sum() {
    let base = Truncation::ell2(3);
    let ell = Truncation::ell2(5);
    let prod = Truncation::product(&base, &ell);
    let d = DiracData::new(&base, vec![-2.0, 0.0, 1.5], 1).unwrap();
    let d0 = suspended_dirac(&d, &prod).unwrap();
    assert_eq!(d0.p(), 2);
    for i in 0..3 {
        for n in 0..5 {
            assert_eq!(d0.modulus()[i * 5 + n], d.modulus()[i] + n as f64);
            assert_eq!(d0.signs()[i * 5 + n], d.signs()[i]);
        }
    }
}

#[test]
fn shifts_compose_up_to_the_edge() {
    let t = Truncation::ell2(7);
    let s = shift_power(&t, 1);
    let s_star = shift_power(&t, -1);
    // S S* = 1 away from the truncation edge, S* S = 1 − |0⟩⟨0|
    let ss = product(&[&s, &s_star]).unwrap();
    let s_s = product(&[&s_star, &s]).unwrap();
    for k in 0..7 {
        assert_eq!(ss.get(k, k).re, if k < 6 { 1.0 } else { 0.0 });
        assert_eq!(s_s.get(k, k).re, if k == 0 { 0.0 } else { 1.0 });
    }
    assert_eq!(product(&[&s, &s, &s]).unwrap().max_diff(&shift_power(&t, 3)).unwrap(), 0.0);
}

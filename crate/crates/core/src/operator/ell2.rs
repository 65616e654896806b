use std::sync::Arc;

use num_complex::Complex64 as C64;
use sprs::CsMat;

use super::{Op, Truncation};
use crate::error::{Error, Result};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `S^n` on ℓ²(ℕ) with `S e_k = e_{k−1}`, `S e_0 = 0` and `S^{−n} = (S*)^n`.
pub fn shift_power(trunc: &Arc<Truncation>, n: i64) -> Op {
    let m = trunc.dim() as i64;
    let entries = (0..m).filter_map(|k| {
        let target = k - n;
        (0..m).contains(&target).then_some((target as usize, k as usize, ONE))
    });
    Op::from_triplets(trunc, entries).expect("shift indices are in range")
}

/// `N e_k = k e_k`.
pub fn number_op(trunc: &Arc<Truncation>) -> Op {
    let d: Vec<f64> = (0..trunc.dim()).map(|k| k as f64).collect();
    Op::from_real_diagonal(trunc, &d)
}

/// `|e_i⟩⟨e_j|`.
pub fn rank_one(trunc: &Arc<Truncation>, i: usize, j: usize) -> Result<Op> {
    Op::from_triplets(trunc, [(i, j, ONE)])
}

/// `φ_r(k) = (−1)^r / r! · Σ_i k_ii i^r`, with `0⁰ = 1`.
pub fn schwartz_phi(k: &Op, r: u32) -> C64 {
    let fact: f64 = (1..=r).map(f64::from).product();
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let s: C64 = k
        .diag_entries()
        .into_iter()
        .map(|(i, v)| v * (i as f64).powi(r as i32))
        .sum();
    s * (sign / fact)
}

/// `a ⊗ c` on a registered product truncation.
pub fn tensor(a: &Op, c: &Op, product: &Arc<Truncation>) -> Result<Op> {
    let (left, right) = product.factors().ok_or(Error::UnregisteredProduct)?;
    if !left.same_as(a.trunc()) || !right.same_as(c.trunc()) {
        return Err(Error::UnregisteredProduct);
    }
    let m = right.dim();
    let n = product.dim();
    let (ac, cc) = (a.csr(), c.csr());
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    let mut data = Vec::new();
    indptr.push(0);
    for arow in ac.outer_iterator() {
        for crow in cc.outer_iterator() {
            for (j, av) in arow.iter() {
                for (q, cv) in crow.iter() {
                    indices.push(j * m + q);
                    data.push(av * cv);
                }
            }
            indptr.push(indices.len());
        }
    }
    Ok(Op::from_csr(product, CsMat::new((n, n), indptr, indices, data)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_relations() {
        let t = Truncation::ell2(6);
        let s = shift_power(&t, 1);
        let sstar = shift_power(&t, -1);
        assert_eq!(s.get(0, 1), ONE);
        assert!(s.adjoint().max_diff(&sstar).unwrap() == 0.0);
        // S S* = 1 − p away from the truncation edge
        let ss = &s * &sstar;
        assert_eq!(ss.get(0, 0), ONE);
        let sss = &sstar * &s;
        assert_eq!(sss.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(sss.get(3, 3), ONE);
    }

    #[test]
    fn phi_of_projection() {
        let t = Truncation::ell2(5);
        let p = rank_one(&t, 0, 0).unwrap();
        assert_eq!(schwartz_phi(&p, 0), ONE);
        assert_eq!(schwartz_phi(&p, 1), C64::new(0.0, 0.0));
        let e2 = rank_one(&t, 2, 2).unwrap();
        assert_eq!(schwartz_phi(&e2, 3), C64::new(-8.0 / 6.0, 0.0));
    }

    #[test]
    fn tensor_entries() {
        let a_t = Truncation::ell2(2);
        let c_t = Truncation::ell2(3);
        let prod = Truncation::product(&a_t, &c_t);
        let a = Op::from_triplets(&a_t, [(0, 1, C64::new(2.0, 0.0)), (1, 1, ONE)]).unwrap();
        let c = shift_power(&c_t, 1);
        let t = tensor(&a, &c, &prod).unwrap();
        assert_eq!(t.get(0, 4), C64::new(2.0, 0.0));
        assert_eq!(t.get(4, 5), ONE);
        assert_eq!(t.nnz(), 4);
        assert!(tensor(&c, &a, &prod).is_err());
    }
}

//! Sparse operators on labelled finite truncations of Hilbert spaces.

mod dirac;
mod ell2;

pub use dirac::{DiracData, Grading};
pub use ell2::{number_op, rank_one, schwartz_phi, shift_power, tensor};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};

/// Basis label of a truncated Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// `e_n` in ℓ²(ℤ) or ℓ²(ℕ).
    Index(i64),
    /// Dirac eigenspinor on S²: level `k`, `2m`, sign of the eigenvalue.
    Spinor { k: u32, two_m: i32, sign: i8 },
    /// Torus mode `(m, n)` with the sign of the D-eigenvalue.
    Lattice { m: i32, n: i32, sign: i8 },
    /// Pair of factor indices in a product truncation.
    Pair(usize, usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Index(n) => write!(f, "{n}"),
            Label::Spinor { k, two_m, sign } => write!(f, "(k={k},2m={two_m},{sign:+})"),
            Label::Lattice { m, n, sign } => write!(f, "({m},{n},{sign:+})"),
            Label::Pair(i, j) => write!(f, "({i},{j})"),
        }
    }
}

#[derive(Debug)]
enum Kind {
    Labeled { labels: Vec<Label>, index: HashMap<Label, usize> },
    Product { left: Arc<Truncation>, right: Arc<Truncation> },
}

/// A finite ordered basis. Products use Kronecker ordering `i * dim(right) + n`.
#[derive(Debug)]
pub struct Truncation {
    name: String,
    kind: Kind,
}

impl Truncation {
    pub fn labeled(name: impl Into<String>, labels: Vec<Label>) -> Result<Arc<Self>> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        Ok(Arc::new(Truncation { name: name.into(), kind: Kind::Labeled { labels, index } }))
    }

    /// The truncation `{e_0, …, e_{M−1}}` of ℓ²(ℕ).
    pub fn ell2(m: usize) -> Arc<Self> {
        Self::labeled(format!("ell2[{m}]"), (0..m as i64).map(Label::Index).collect())
            .expect("indices are distinct")
    }

    pub fn product(left: &Arc<Truncation>, right: &Arc<Truncation>) -> Arc<Self> {
        Arc::new(Truncation {
            name: format!("{}*{}", left.name, right.name),
            kind: Kind::Product { left: left.clone(), right: right.clone() },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Labeled { labels, .. } => labels.len(),
            Kind::Product { left, right } => left.dim() * right.dim(),
        }
    }

    pub fn label(&self, i: usize) -> Label {
        match &self.kind {
            Kind::Labeled { labels, .. } => labels[i].clone(),
            Kind::Product { right, .. } => Label::Pair(i / right.dim(), i % right.dim()),
        }
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        match (&self.kind, label) {
            (Kind::Labeled { index, .. }, l) => index.get(l).copied(),
            (Kind::Product { left, right }, Label::Pair(i, n)) => {
                (*i < left.dim() && *n < right.dim()).then(|| i * right.dim() + n)
            }
            _ => None,
        }
    }

    pub fn factors(&self) -> Option<(&Arc<Truncation>, &Arc<Truncation>)> {
        match &self.kind {
            Kind::Product { left, right } => Some((left, right)),
            Kind::Labeled { .. } => None,
        }
    }

    pub fn same_as(&self, other: &Truncation) -> bool {
        std::ptr::eq(self, other) || (self.name == other.name && self.dim() == other.dim())
    }
}

/// Sparse complex matrix on a truncation, stored in compressed rows.
#[derive(Clone)]
pub struct Op {
    trunc: Arc<Truncation>,
    mat: CsMat<C64>,
}

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Op({}, dim={}, nnz={})", self.trunc.name, self.dim(), self.nnz())
    }
}

impl Op {
    pub fn zero(trunc: &Arc<Truncation>) -> Self {
        let n = trunc.dim();
        Op { trunc: trunc.clone(), mat: CsMat::zero((n, n)) }
    }

    pub fn identity(trunc: &Arc<Truncation>) -> Self {
        Op { trunc: trunc.clone(), mat: CsMat::eye(trunc.dim()) }
    }

    pub fn diagonal(trunc: &Arc<Truncation>, diag: &[C64]) -> Self {
        assert_eq!(diag.len(), trunc.dim(), "diagonal length");
        Self::from_triplets(trunc, diag.iter().enumerate().map(|(i, v)| (i, i, *v)))
            .expect("diagonal indices are in range")
    }

    pub fn from_real_diagonal(trunc: &Arc<Truncation>, diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(trunc, &d)
    }

    /// Builds from `(row, col, value)`; repeated positions are summed.
    pub fn from_triplets(
        trunc: &Arc<Truncation>,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let n = trunc.dim();
        let mut tri = TriMat::new((n, n));
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), dim: n });
            }
            if v != C64::new(0.0, 0.0) {
                tri.add_triplet(i, j, v);
            }
        }
        Ok(Op { trunc: trunc.clone(), mat: tri.to_csr() })
    }

    pub(crate) fn from_csr(trunc: &Arc<Truncation>, mat: CsMat<C64>) -> Self {
        let mat = if mat.is_csr() { mat } else { mat.to_csr() };
        Op { trunc: trunc.clone(), mat }
    }

    pub fn trunc(&self) -> &Arc<Truncation> {
        &self.trunc
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat.get(i, j).copied().unwrap_or_default()
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.mat
            .outer_iterator()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, j, *v)).collect::<Vec<_>>())
    }

    fn check(&self, other: &Op) -> Result<()> {
        if self.trunc.same_as(&other.trunc) {
            Ok(())
        } else {
            Err(Error::TruncationMismatch(self.trunc.name.clone(), other.trunc.name.clone()))
        }
    }

    pub fn checked_mul(&self, other: &Op) -> Result<Op> {
        self.check(other)?;
        Ok(Op { trunc: self.trunc.clone(), mat: &self.mat * &other.mat })
    }

    pub fn checked_add(&self, other: &Op) -> Result<Op> {
        self.check(other)?;
        Ok(Op { trunc: self.trunc.clone(), mat: &self.mat + &other.mat })
    }

    pub fn checked_sub(&self, other: &Op) -> Result<Op> {
        self.check(other)?;
        Ok(Op { trunc: self.trunc.clone(), mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, c: C64) -> Op {
        Op { trunc: self.trunc.clone(), mat: self.mat.map(|v| v * c) }
    }

    pub fn adjoint(&self) -> Op {
        let t = self.mat.transpose_view().to_csr();
        Op { trunc: self.trunc.clone(), mat: t.map(|v| v.conj()) }
    }

    /// Replaces each stored entry `a_ij` with `f(i, j, a_ij)`.
    pub fn map_entries(&self, f: impl Fn(usize, usize, C64) -> C64) -> Op {
        let mut mat = self.mat.clone();
        for (i, mut row) in mat.outer_iterator_mut().enumerate() {
            for (j, v) in row.iter_mut() {
                *v = f(i, j, *v);
            }
        }
        Op { trunc: self.trunc.clone(), mat }
    }

    /// Multiplies row `i` by `l[i]` and column `j` by `r[j]`.
    pub fn diag_sandwich(&self, l: &[f64], r: &[f64]) -> Op {
        self.map_entries(|i, j, v| v * (l[i] * r[j]))
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// Stored diagonal entries as `(index, value)`, skipping zeros.
    pub fn diag_entries(&self) -> Vec<(usize, C64)> {
        self.mat
            .outer_iterator()
            .enumerate()
            .filter_map(|(i, row)| row.get(i).copied().filter(|v| v.norm() > 0.0).map(|v| (i, v)))
            .collect()
    }

    pub fn trace(&self) -> C64 {
        self.diag_entries().into_iter().map(|(_, v)| v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.data().iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Drops stored entries with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Op {
        let n = self.dim();
        let mut tri = TriMat::new((n, n));
        for (i, j, v) in self.triplets() {
            if v.norm() > tol {
                tri.add_triplet(i, j, v);
            }
        }
        Op { trunc: self.trunc.clone(), mat: tri.to_csr() }
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &Op) -> Result<f64> {
        Ok(self.checked_sub(other)?.max_abs())
    }

    /// Whether all stored nonzero entries lie on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.mat.iter().all(|(v, (i, j))| i == j || v.norm() == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.data().iter().all(|v| v.norm() == 0.0)
    }

    pub(crate) fn csr(&self) -> &CsMat<C64> {
        &self.mat
    }
}

impl std::ops::Mul for &Op {
    type Output = Op;
    /// # Panics
    /// On truncation mismatch; use [`Op::checked_mul`] to get an error instead.
    fn mul(self, rhs: &Op) -> Op {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl std::ops::Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl std::ops::Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        self.checked_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl std::ops::Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Product of a nonempty list of operators, left to right.
pub fn product(ops: &[&Op]) -> Result<Op> {
    let (first, rest) = ops.split_first().ok_or_else(|| Error::Arity("empty product".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, o| acc.checked_mul(o))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = Truncation::labeled("t", vec![Label::Index(0), Label::Index(0)]);
        assert!(matches!(r, Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn product_labels_are_kronecker() {
        let a = Truncation::ell2(3);
        let b = Truncation::ell2(4);
        let p = Truncation::product(&a, &b);
        assert_eq!(p.dim(), 12);
        assert_eq!(p.label(7), Label::Pair(1, 3));
        assert_eq!(p.index_of(&Label::Pair(2, 1)), Some(9));
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = Op::identity(&Truncation::ell2(3));
        let b = Op::identity(&Truncation::ell2(4));
        assert!(matches!(a.checked_mul(&b), Err(Error::TruncationMismatch(..))));
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let t = Truncation::ell2(2);
        let a = Op::from_triplets(&t, [(0, 1, c(1.0, 2.0))]).unwrap();
        let s = a.adjoint();
        assert_eq!(s.get(1, 0), c(1.0, -2.0));
        assert_eq!(s.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet() {
        let t = Truncation::ell2(2);
        assert!(Op::from_triplets(&t, [(2, 0, c(1.0, 0.0))]).is_err());
    }
}

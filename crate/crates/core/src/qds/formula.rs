//! Transfer formulas expressing suspension residues through base residues,
//! `n_y` and the functionals `φ_y` on ℓ²(ℕ).

use std::borrow::Cow;
use std::cell::RefCell;

use num_complex::Complex64 as C64;

use super::{ElemKind, Estimate, SuspElem, SuspendedTriple, UnitKind};
use crate::cocycle::{assemble_phi, b_coeff, Parity};
use crate::error::{Error, Result};
use crate::operator::{number_op, schwartz_phi, Op};
use crate::series::AsymptoticSeries;
use crate::zeta::{factorial, residue_from_series};

fn gamma(n: u32) -> f64 {
    factorial(n - 1)
}

fn binom(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `δ_N^r(c) = [N, ·]^r(c)` on ℓ²(ℕ).
pub fn delta_n(c: &Op, r: u32) -> Op {
    if r == 0 {
        return c.clone();
    }
    c.map_entries(|i, j, v| v * (i as f64 - j as f64).powi(r as i32))
}

/// `ζ^{(m)}` read from a base series, zero outside `1..=p`.
fn series_zeta(s: &AsymptoticSeries, m: u32) -> Result<Estimate> {
    if m == 0 || m > s.p {
        return Ok(Estimate::zero());
    }
    Ok(residue_from_series(s, m)?.into())
}

fn coeff(s: &AsymptoticSeries, r: usize) -> Estimate {
    Estimate { value: s.coeff(r), error_budget: s.error(r) }
}

/// Which unit-type element `X ⊗ S^n` an element of non-compact kind is.
enum UnitShape {
    Known(UnitKind),
    /// `γF`, not among the cached constants.
    GammaF,
}

fn unit_shape(kind: &ElemKind) -> Option<(UnitShape, i64)> {
    match kind {
        ElemKind::Shift(n) => Some((UnitShape::Known(UnitKind::Unit), *n)),
        ElemKind::FUnit => Some((UnitShape::Known(UnitKind::F), 0)),
        ElemKind::GammaUnit => Some((UnitShape::Known(UnitKind::Gamma), 0)),
        ElemKind::Twisted(inner) => match &**inner {
            ElemKind::Shift(n) => Some((UnitShape::Known(UnitKind::Gamma), *n)),
            ElemKind::FUnit => Some((UnitShape::GammaF, 0)),
            ElemKind::GammaUnit => Some((UnitShape::Known(UnitKind::Unit), 0)),
            _ => None,
        },
        ElemKind::Ak { .. } => None,
    }
}

impl SuspendedTriple {
    fn shape_series(&self, shape: &UnitShape) -> Result<Cow<'_, AsymptoticSeries>> {
        match shape {
            UnitShape::Known(k) => Ok(Cow::Borrowed(self.constants.series(*k)?)),
            UnitShape::GammaF => {
                let g = self.base.grading.as_ref().ok_or_else(|| Error::Unsupported("odd base".into()))?;
                let gf = g.apply_left(&self.base.dirac.sign_op())?;
                Ok(Cow::Owned(self.base_ctx.expansion(&gf)?))
            }
        }
    }

    fn base_residues(&self, b: &Op) -> Result<AsymptoticSeries> {
        self.base_ctx.expansion(b)
    }

    /// `ζ_{D_0}^{(s)}(b ⊗ k) = (1/Γ(s)) Σ_{y=0}^{m−s} Γ(s+y) ζ_D^{(s+y)}(b) φ_y(k)` for `b ∈ I_m`.
    pub fn zeta0_bk(&self, s: u32, b: &Op, degree: u32, k: &Op) -> Result<Estimate> {
        if s == 0 || s > self.p() + 1 {
            return Err(Error::ResidueOutOfRange { m: s, p: self.p() + 1 });
        }
        if s > degree {
            return Ok(Estimate::zero());
        }
        let series = self.base_residues(b)?;
        self.l1_sum(s, &series, degree, k)
    }

    fn l1_sum(&self, s: u32, series: &AsymptoticSeries, degree: u32, k: &Op) -> Result<Estimate> {
        let mut acc = Estimate::zero();
        for y in 0..=degree.min(self.p()).saturating_sub(s) {
            let phi = schwartz_phi(k, y);
            if phi.norm() == 0.0 {
                continue;
            }
            let z = series_zeta(series, s + y)?;
            acc.add_scaled(phi * (gamma(s + y) / gamma(s)), z);
        }
        Ok(acc)
    }

    /// `ζ_{D_0}^{(s)}(X ⊗ 1)` for `s ≥ 2`:
    /// `(1/Γ(s)) Σ_{y=0}^{p+1−s} Γ(s+y−1) ζ_D^{(s+y−1)}(X) n_y`.
    fn l2_sum(&self, s: u32, series: &AsymptoticSeries) -> Result<Estimate> {
        let mut acc = Estimate::zero();
        for y in 0..=(self.p() + 1 - s) {
            let z = series_zeta(series, s + y - 1)?;
            acc.add_scaled(C64::new(gamma(s + y - 1) / gamma(s) * self.constants.n[y as usize], 0.0), z);
        }
        Ok(acc)
    }

    /// `ζ_{D_0}^{(1)}(X ⊗ 1) = ½ n_0 x_p + Σ_{y=1}^{p} Γ(y) ζ_D^{(y)}(X) n_y`.
    fn l3_sum(&self, series: &AsymptoticSeries) -> Result<Estimate> {
        let p = self.p();
        let n = &self.constants.n;
        let mut acc = Estimate::zero();
        acc.add_scaled(C64::new(0.5 * n[0], 0.0), coeff(series, p as usize));
        for y in 1..=p {
            acc.add_scaled(C64::new(gamma(y) * n[y as usize], 0.0), series_zeta(series, y)?);
        }
        Ok(acc)
    }

    fn zeta0_unit_series(&self, s: u32, series: &AsymptoticSeries) -> Result<Estimate> {
        match s {
            0 => Err(Error::ResidueOutOfRange { m: 0, p: self.p() + 1 }),
            1 => self.l3_sum(series),
            s if s <= self.p() + 1 => self.l2_sum(s, series),
            s => Err(Error::ResidueOutOfRange { m: s, p: self.p() + 1 }),
        }
    }

    fn check_l2_range(&self, s: u32) -> Result<()> {
        if s < 2 || s > self.p() + 1 {
            return Err(Error::ResidueOutOfRange { m: s, p: self.p() + 1 });
        }
        Ok(())
    }

    /// `ζ_{D_0}^{(s)}(1)` for `2 ≤ s ≤ p+1`.
    pub fn zeta0_unit(&self, s: u32) -> Result<Estimate> {
        self.check_l2_range(s)?;
        self.l2_sum(s, &self.constants.u)
    }

    /// `ζ_{D_0}^{(s)}(F ⊗ 1)` for `2 ≤ s ≤ p+1`.
    pub fn zeta0_f(&self, s: u32) -> Result<Estimate> {
        self.check_l2_range(s)?;
        self.l2_sum(s, &self.constants.v)
    }

    /// `ζ_{D_0}^{(s)}(γ ⊗ 1)` for `2 ≤ s ≤ p+1`.
    pub fn zeta0_gamma(&self, s: u32) -> Result<Estimate> {
        self.check_l2_range(s)?;
        self.l2_sum(s, self.constants.series(UnitKind::Gamma)?)
    }

    /// `ζ_{D_0}^{(1)}` of `1`, `F ⊗ 1` or `γ ⊗ 1`.
    pub fn zeta0_s1(&self, which: UnitKind) -> Result<Estimate> {
        self.l3_sum(self.constants.series(which)?)
    }

    /// `ζ_{D_0}^{(s)}` of any element, by the transfer formula matching its kind.
    pub fn zeta0(&self, e: &SuspElem, s: u32) -> Result<Estimate> {
        if s == 0 || s > self.p() + 1 {
            return Err(Error::ResidueOutOfRange { m: s, p: self.p() + 1 });
        }
        match unit_shape(&e.kind) {
            Some((_, n)) if n != 0 => Ok(Estimate::zero()),
            Some((shape, _)) => self.zeta0_unit_series(s, &*self.shape_series(&shape)?),
            None => self.zeta0_bk(s, &e.left, self.p(), &e.right),
        }
    }

    /// `Σ²φ_0(e)`, the value at `z = 0` of `Tr(e|D_0|^{−2z})`.
    ///
    /// On `X ⊗ 1`: `n_0 x_{p+1} + n_1 x_p + 2 Σ_{y=1}^{p} Γ(y) ζ_D^{(y)}(X) n_{y+1}`.
    /// On `b ⊗ k`: `b_p φ_0(k) + 2 Σ_{y=1}^{p} Γ(y) ζ_D^{(y)}(b) φ_y(k)`.
    pub fn sigma2_phi0(&self, e: &SuspElem) -> Result<Estimate> {
        if !self.is_even() {
            return Err(Error::Unsupported("Σ²φ_0 is defined for even bases".into()));
        }
        let p = self.p();
        let n = &self.constants.n;
        let mut acc = Estimate::zero();
        match unit_shape(&e.kind) {
            Some((_, shift)) if shift != 0 => {}
            Some((shape, _)) => {
                let x = self.shape_series(&shape)?;
                acc.add_scaled(C64::new(n[0], 0.0), coeff(&x, p as usize + 1));
                acc.add_scaled(C64::new(n[1], 0.0), coeff(&x, p as usize));
                for y in 1..=p {
                    acc.add_scaled(C64::new(2.0 * gamma(y) * n[y as usize + 1], 0.0), series_zeta(&x, y)?);
                }
            }
            None => {
                let b = self.base_residues(&e.left)?;
                acc.add_scaled(schwartz_phi(&e.right, 0), coeff(&b, p as usize));
                for y in 1..=p {
                    let phi = schwartz_phi(&e.right, y);
                    if phi.norm() > 0.0 {
                        acc.add_scaled(phi * (2.0 * gamma(y)), series_zeta(&b, y)?);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `Σ²ψ_x^0(a_0⊗c_0, d_0(a_1⊗c_1), …, d_0(a_n⊗c_n))` with at least one
    /// compact factor, as
    /// `Σ_{j,r,y} Π C(x_i,r_i) Γ(n+|x|+y)/Γ(n+|x|) ψ_r^{(y+|x|−|r|)}((γ)a_0, a_1^{(j_1)}, …)
    /// φ_y(c_0 Π δ_N^{x_i−r_i}(c_i^{(j_i)}))` with
    /// `(a^{(j)}, c^{(j)}) ∈ {(da, c), (Fa, Nc), (aF, −cN)}`.
    pub fn sigma2_psi_mixed(&self, x: &[u32], elems: &[SuspElem]) -> Result<Estimate> {
        let n = elems.len().checked_sub(1).ok_or_else(|| Error::Arity("ψ needs at least a_0".into()))?;
        if x.len() != n {
            return Err(Error::Arity(format!("{} exponents for {n} derivatives", x.len())));
        }
        if !elems.iter().any(SuspElem::is_compact) {
            return Err(Error::Unsupported("no compact factor; use the shift formula".into()));
        }
        let xs: u32 = x.iter().sum();
        let s = n as u32 + xs;
        let p = self.p();
        if s > p {
            return Ok(Estimate::zero());
        }
        let dirac = &self.base.dirac;
        let num = number_op(&self.ell2);
        let mut tables: Vec<[(Op, Op); 3]> = Vec::with_capacity(n);
        for e in &elems[1..] {
            let (a, c) = (&e.left, &e.right);
            tables.push([
                (dirac.commutator(a)?, c.clone()),
                (dirac.sign_left(a), num.checked_mul(c)?),
                (dirac.sign_right(a), c.checked_mul(&num)?.scale(C64::new(-1.0, 0.0))),
            ]);
        }
        let twisted = self.is_even();
        let mut acc = Estimate::zero();
        let mut j = vec![0usize; n];
        let mut r = vec![0u32; n];
        loop {
            loop {
                let mut kprod = elems[0].right.clone();
                let mut weight = 1.0;
                for i in 0..n {
                    kprod = kprod.checked_mul(&delta_n(&tables[i][j[i]].1, x[i] - r[i]))?;
                    weight *= binom(x[i], r[i]);
                }
                if !kprod.is_zero() {
                    let ops: Vec<Op> = (0..n).map(|i| tables[i][j[i]].0.clone()).collect();
                    let rs: u32 = r.iter().sum();
                    for y in 0..=(p - s) {
                        let phi = schwartz_phi(&kprod, y);
                        if phi.norm() == 0.0 {
                            continue;
                        }
                        let psi = self.base_ctx.psi(&r, y + xs - rs, &elems[0].left, &ops, twisted)?;
                        let c = phi * (weight * gamma(s + y) / gamma(s));
                        acc.add_scaled(c, Estimate { value: psi.value, error_budget: psi.error_budget });
                    }
                }
                if !advance(&mut r, |i| x[i]) {
                    break;
                }
            }
            if !advance(&mut j, |_| 2) {
                break;
            }
        }
        Ok(acc)
    }

    /// `Σ²ψ_x^0(1⊗S^{m_0}, d_0(1⊗S^{m_1}), …, d_0(1⊗S^{m_n}))`.
    ///
    /// Zero unless `Σ m_i = 0`; then `Π_{i≥1} (−m_i)^{x_i+1} ζ_{D_0}^{(n+|x|)}((γ)F^n ⊗ C)`
    /// with `C = S^{m_0}⋯S^{m_n}`, a diagonal projection `1 − P` of finite corank.
    pub fn sigma2_psi_shifts(&self, x: &[u32], ms: &[i64]) -> Result<Estimate> {
        let n = ms.len().checked_sub(1).ok_or_else(|| Error::Arity("ψ needs at least a_0".into()))?;
        if x.len() != n {
            return Err(Error::Arity(format!("{} exponents for {n} derivatives", x.len())));
        }
        if ms.iter().sum::<i64>() != 0 {
            return Ok(Estimate::zero());
        }
        let s = n as u32 + x.iter().sum::<u32>();
        if s > self.p() + 1 {
            return Ok(Estimate::zero());
        }
        let c: f64 = ms[1..].iter().zip(x).map(|(&m, &xi)| (-m as f64).powi(xi as i32 + 1)).product();
        if c == 0.0 {
            return Ok(Estimate::zero());
        }
        let shape = match (self.is_even(), n % 2) {
            (false, 1) => UnitShape::Known(UnitKind::F),
            (false, _) => UnitShape::Known(UnitKind::Unit),
            (true, 0) => UnitShape::Known(UnitKind::Gamma),
            (true, _) => UnitShape::GammaF,
        };
        let series = self.shape_series(&shape)?;
        let main = self.zeta0_unit_series(s, &series)?;
        // e_k is killed by C exactly for the k in P
        let reach: i64 = ms.iter().map(|m| m.abs()).sum();
        let killed: Vec<usize> = (0..=reach)
            .filter(|&k| {
                let mut idx = k;
                for &m in ms.iter().rev() {
                    idx -= m;
                    if idx < 0 {
                        return true;
                    }
                }
                false
            })
            .map(|k| k as usize)
            .collect();
        let mut value = main;
        if !killed.is_empty() {
            let max = *killed.iter().max().expect("nonempty");
            if max >= self.m {
                return Err(Error::IndexOutOfRange { index: max, dim: self.m });
            }
            let proj = Op::from_triplets(&self.ell2, killed.iter().map(|&k| (k, k, C64::new(1.0, 0.0))))?;
            let defect = self.l1_sum(s, &series, self.p(), &proj)?;
            value.add_scaled(C64::new(-1.0, 0.0), defect);
        }
        Ok(Estimate { value: value.value * c, error_budget: value.error_budget * c.abs() })
    }

    /// `Σ²ψ_x^0` dispatched on element kinds.
    pub fn sigma2_psi(&self, x: &[u32], elems: &[SuspElem]) -> Result<Estimate> {
        if elems.iter().any(SuspElem::is_compact) {
            return self.sigma2_psi_mixed(x, elems);
        }
        let ms: Option<Vec<i64>> = elems.iter().map(SuspElem::shift).collect();
        match ms {
            Some(ms) => self.sigma2_psi_shifts(x, &ms),
            None => Err(Error::Unsupported("ψ on this combination of element kinds".into())),
        }
    }

    /// `Σ²φ_n(e_0, …, e_n) = Σ_{n+|x| ≤ p+1} B_x^n Σ²ψ_x^0((γ)e_0, d_0e_1, …)`;
    /// for `n = 0` on an even base, `Σ²φ_0((γ⊗1)e_0)`.
    pub fn sigma2_phi(&self, elems: &[SuspElem]) -> Result<Estimate> {
        let n = elems.len().checked_sub(1).ok_or_else(|| Error::Arity("φ needs at least a_0".into()))?;
        let parity = if self.is_even() { Parity::Even } else { Parity::Odd };
        if n == 0 {
            if parity == Parity::Odd {
                return Err(Error::Arity("odd cocycles have no φ_0".into()));
            }
            return self.sigma2_phi0(&self.twisted(&elems[0])?);
        }
        let budget = RefCell::new(0.0);
        let value = assemble_phi(n, parity, self.p() + 1, |x| {
            let e = self.sigma2_psi(x, elems)?;
            *budget.borrow_mut() += b_coeff(n, x)?.to_c64().norm() * e.error_budget;
            Ok(e.value)
        })?;
        Ok(Estimate { value, error_budget: budget.into_inner() })
    }
}

/// Next multi-index with `v_i ≤ max(i)` in lexicographic order; false after the last one.
fn advance<T>(v: &mut [T], max: impl Fn(usize) -> T) -> bool
where
    T: Copy + PartialOrd + std::ops::AddAssign + From<u8>,
{
    for i in (0..v.len()).rev() {
        if v[i] < max(i) {
            v[i] += T::from(1);
            return true;
        }
        v[i] = T::from(0);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::circle_model;
    use crate::series::FitConfig;

    fn circle() -> SuspendedTriple {
        SuspendedTriple::new(&circle_model(60).unwrap(), 40, 1e-12, FitConfig::default()).unwrap()
    }

    fn agree(f: Estimate, d: Estimate) {
        let err = (f.value - d.value).norm();
        assert!(err <= f.error_budget + d.error_budget, "formula {} direct {} err {err:e}", f.value, d.value);
    }

    fn k(q: &SuspendedTriple, entries: &[(usize, usize)]) -> Op {
        let ones = entries.iter().map(|&(i, j)| (i, j, C64::new(1.0, 0.0)));
        Op::from_triplets(q.ell2(), ones).unwrap()
    }

    #[test]
    fn delta_n_weights_by_index_gap() {
        let q = circle();
        let c = k(&q, &[(0, 2), (3, 1)]);
        let d = delta_n(&c, 2);
        assert_eq!(d.get(0, 2), C64::new(4.0, 0.0));
        assert_eq!(d.get(3, 1), C64::new(4.0, 0.0));
        let n = number_op(q.ell2());
        let comm = n.checked_mul(&c).unwrap().checked_sub(&c.checked_mul(&n).unwrap()).unwrap();
        assert!(delta_n(&c, 1).max_diff(&comm).unwrap() < 1e-15);
    }

    #[test]
    fn residues_of_compact_elements() {
        let q = circle();
        let base = q.base().clone();
        let one_k = q.elem_ak(&base.identity(), &k(&q, &[(0, 0), (2, 1)])).unwrap();
        for s in 1..=2 {
            agree(q.zeta0(&one_k, s).unwrap(), q.direct_zeta0(&one_k, s).unwrap());
        }
        // ζ^{(1)}(1) Tr(k) with ζ^{(1)}(1) = 1 on the circle
        assert!((q.zeta0(&one_k, 1).unwrap().value - C64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(q.zeta0_bk(3, &base.identity(), 1, &one_k.right).is_err());
    }

    #[test]
    fn residues_of_units() {
        let q = circle();
        let one = q.elem_shift(0).unwrap();
        let f = q.elem_f_unit().unwrap();
        for s in 1..=2 {
            agree(q.zeta0(&one, s).unwrap(), q.direct_zeta0(&one, s).unwrap());
            agree(q.zeta0(&f, s).unwrap(), q.direct_zeta0(&f, s).unwrap());
        }
        assert!((q.zeta0_unit(2).unwrap().value - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(q.zeta0_unit(1).is_err());
        assert!(q.zeta0_gamma(2).is_err());
        let shifted = q.elem_shift(3).unwrap();
        assert_eq!(q.zeta0(&shifted, 1).unwrap(), Estimate::zero());
    }

    #[test]
    fn mixed_psi_matches_direct() {
        let q = circle();
        let base = q.base().clone();
        let a = q.elem_ak(base.generator("z").unwrap(), &k(&q, &[(0, 0), (1, 2)])).unwrap();
        let b = q.elem_ak(base.generator("z*").unwrap(), &k(&q, &[(2, 1), (0, 0)])).unwrap();
        for x in [0, 1] {
            agree(q.sigma2_psi(&[x], &[a.clone(), b.clone()]).unwrap(), q.direct_psi(&[x], &[a.clone(), b.clone()]).unwrap());
        }
        let mixed = [a.clone(), q.elem_shift(1).unwrap()];
        agree(q.sigma2_psi(&[0], &mixed).unwrap(), q.direct_psi(&[0], &mixed).unwrap());
    }

    #[test]
    fn shift_psi_includes_the_finite_defect() {
        let q = circle();
        for ms in [[-3i64, 1, 2], [2, -1, -1], [1, 1, -2]] {
            let es: Vec<SuspElem> = ms.iter().map(|&m| q.elem_shift(m).unwrap()).collect();
            agree(q.sigma2_psi(&[0, 0], &es).unwrap(), q.direct_psi(&[0, 0], &es).unwrap());
        }
        // unbalanced shifts vanish identically
        let es: Vec<SuspElem> = [1i64, 1].iter().map(|&m| q.elem_shift(m).unwrap()).collect();
        assert_eq!(q.sigma2_psi(&[0], &es).unwrap(), Estimate::zero());
    }

    #[test]
    fn odd_phi_pipelines_agree() {
        let q = circle();
        let base = q.base().clone();
        let a = q.elem_ak(base.generator("z").unwrap(), &k(&q, &[(0, 0), (1, 0)])).unwrap();
        let b = q.elem_ak(base.generator("z*").unwrap(), &k(&q, &[(0, 0), (0, 1)])).unwrap();
        agree(q.sigma2_phi(&[a.clone(), b.clone()]).unwrap(), q.direct_phi(&[a.clone(), b]).unwrap());
        assert!(q.sigma2_phi(&[a.clone()]).is_err());
        assert!(q.sigma2_phi0(&a).is_err());
    }
}

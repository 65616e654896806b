//! Quantum double suspension `Σ²` of a spectral triple.
//!
//! The suspended operator is `D_0 = (F⊗1)(|D|⊗1 + 1⊗N)` on `ℋ ⊗ ℓ²(ℕ)`.
//! Residues on the suspension are computed twice: from closed transfer
//! formulas over base residues (`formula`), and by fitting heat traces of the
//! realized operators on the product truncation (methods prefixed `direct_`).

mod formula;

pub use formula::delta_n;

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::cocycle::{assemble_phi, b_coeff, Parity};
use crate::error::{Error, Result};
use crate::models::ModelInstance;
use crate::operator::{shift_power, tensor, DiracData, Grading, Op, Truncation};
use crate::series::{
    exact_expansion, n_coefficients, tail_t_min, AsymptoticSeries, FitConfig, Growth, SpectrumDescriptor, Window,
    T_MIN_CAP,
};
use crate::zeta::{ResidueReport, SpectralContext};

/// A value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: C64,
    pub error_budget: f64,
}

impl Estimate {
    pub fn exact(value: C64) -> Self {
        Estimate { value, error_budget: 0.0 }
    }

    pub fn zero() -> Self {
        Self::exact(C64::new(0.0, 0.0))
    }

    fn add_scaled(&mut self, c: C64, other: Estimate) {
        self.value += c * other.value;
        self.error_budget += c.norm() * other.error_budget;
    }
}

impl From<ResidueReport> for Estimate {
    fn from(r: ResidueReport) -> Self {
        Estimate { value: r.value, error_budget: r.error_budget }
    }
}

/// Operators `X ⊗ 1` for which the suspension constants are cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    /// `1 ⊗ 1`, coefficients `u_r`.
    Unit,
    /// `F ⊗ 1`, coefficients `v_r`.
    F,
    /// `γ ⊗ 1`, coefficients `w_r`.
    Gamma,
}

/// Kinds of elements of the suspended algebra and of its companion `Σ²ℬ`.
#[derive(Debug, Clone)]
pub enum ElemKind {
    /// `a ⊗ k` with `k` of finite rank.
    Ak { a: Op, k: Op },
    /// `1 ⊗ S^n`.
    Shift(i64),
    /// `F ⊗ 1`.
    FUnit,
    /// `γ ⊗ 1`.
    GammaUnit,
    /// `(γ ⊗ 1) e`.
    Twisted(Box<ElemKind>),
}

/// An element together with its base and ℓ²(ℕ) factors and its realization.
#[derive(Debug, Clone)]
pub struct SuspElem {
    pub kind: ElemKind,
    /// Left factor on the base truncation.
    pub left: Op,
    /// Right factor on the ℓ²(ℕ) truncation.
    pub right: Op,
    /// `left ⊗ right` on the product truncation.
    pub realized: Op,
}

impl SuspElem {
    /// Whether the ℓ²(ℕ) factor is a finite-rank (Schwartz) operator rather than a shift.
    pub fn is_compact(&self) -> bool {
        match &self.kind {
            ElemKind::Ak { .. } => true,
            ElemKind::Twisted(inner) => matches!(**inner, ElemKind::Ak { .. }),
            _ => false,
        }
    }

    /// Whether the base factor is diagonal in the eigenbasis of `D`.
    pub fn base_is_spectral(&self) -> bool {
        fn spectral(kind: &ElemKind) -> bool {
            match kind {
                ElemKind::Ak { a, .. } => a.is_diagonal(),
                ElemKind::Twisted(inner) => spectral(inner),
                _ => true,
            }
        }
        spectral(&self.kind)
    }

    /// Shift power of a shift-type element.
    pub fn shift(&self) -> Option<i64> {
        match &self.kind {
            ElemKind::Shift(n) => Some(*n),
            _ => None,
        }
    }
}

/// Base coefficient series cached for the transfer formulas.
#[derive(Debug, Clone, Serialize)]
pub struct SuspensionConstants {
    pub u: AsymptoticSeries,
    pub v: AsymptoticSeries,
    pub w: Option<AsymptoticSeries>,
    /// `n_y` of `t Tr(e^{−tN}) ∼ Σ n_y t^y`.
    pub n: Vec<f64>,
}

impl SuspensionConstants {
    pub fn series(&self, kind: UnitKind) -> Result<&AsymptoticSeries> {
        match kind {
            UnitKind::Unit => Ok(&self.u),
            UnitKind::F => Ok(&self.v),
            UnitKind::Gamma => {
                self.w.as_ref().ok_or_else(|| Error::MissingConstant("w_r requires an even base".into()))
            }
        }
    }
}

/// `D_0 = (F⊗1)(|D|⊗1 + 1⊗N)` on a product truncation `base ⊗ ℓ²(ℕ)`.
pub fn suspended_dirac(base: &DiracData, product: &Arc<Truncation>) -> Result<DiracData> {
    let (left, right) = product.factors().ok_or(Error::UnregisteredProduct)?;
    if !left.same_as(base.trunc()) {
        return Err(Error::TruncationMismatch(left.name().into(), base.trunc().name().into()));
    }
    let m = right.dim();
    let (sign, mu) = (base.signs(), base.modulus());
    let mut s0 = Vec::with_capacity(product.dim());
    let mut mu0 = Vec::with_capacity(product.dim());
    for i in 0..base.dim() {
        for n in 0..m {
            s0.push(sign[i]);
            mu0.push(mu[i] + n as f64);
        }
    }
    DiracData::from_sign_and_modulus(product, s0, mu0, base.p() + 1)
}

#[derive(Debug, Clone)]
pub struct SuspendedTriple {
    base: ModelInstance,
    base_ctx: SpectralContext,
    m: usize,
    ell2: Arc<Truncation>,
    product: Arc<Truncation>,
    ctx: SpectralContext,
    /// Same operator, windowed for products whose ℓ²(ℕ) factors are finite rank,
    /// on which the cutoff at `M` is exact.
    ctx_compact: SpectralContext,
    /// `ctx` and `ctx_compact` without `t^r log t` terms, for spectral base factors.
    ctx_spectral: [SpectralContext; 2],
    constants: SuspensionConstants,
}

impl SuspendedTriple {
    /// `Σ²` of `base` with ℓ²(ℕ) truncated to `{e_0, …, e_{M−1}}`.
    pub fn new(base: &ModelInstance, m: usize, eps_tail: f64, fit: FitConfig) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("suspension size must be at least 2, got {m}")));
        }
        let base_ctx = base.context(eps_tail, fit)?;
        let fit = base.fit_config(fit);
        let ell2 = Truncation::ell2(m);
        let product = Truncation::product(base.dirac.trunc(), &ell2);
        let d0 = suspended_dirac(&base.dirac, &product)?;
        let gamma0 = base.grading.as_ref().map(|g| g.tensor_identity(&product)).transpose()?;

        // the spectrum of |D_0| is complete below the base cut and below M
        let base_cut = base.dirac.mu_max() - base.growth.guard;
        let ctx = Self::windowed(&d0, gamma0.clone(), base, base_cut.min(m as f64), eps_tail, fit)?;
        let ctx_compact = Self::windowed(&d0, gamma0, base, base_cut, eps_tail, fit)?;

        let no_logs = FitConfig { log_terms: 0, ..fit };
        let order = base.p() as usize + 2;
        let u = match base.spectrum.filter(|d| *d != SpectrumDescriptor::TorusGaussian) {
            Some(desc) => exact_expansion(desc, base.p(), order)?,
            None => base_ctx.expansion(&base.identity())?,
        };
        let v = base_ctx.expansion(&base.dirac.sign_op())?;
        let w = match &base.grading {
            Some(g) => Some(base_ctx.expansion(&g.op())?),
            None => None,
        };
        let n = n_coefficients(order + 1).to_f64();
        Ok(SuspendedTriple {
            base: base.clone(),
            base_ctx,
            m,
            ell2,
            product,
            ctx_spectral: [ctx.with_fit(no_logs), ctx_compact.with_fit(no_logs)],
            ctx,
            ctx_compact,
            constants: SuspensionConstants { u, v, w, n },
        })
    }

    fn windowed(
        d0: &DiracData,
        gamma0: Option<Grading>,
        base: &ModelInstance,
        cut: f64,
        eps_tail: f64,
        fit: FitConfig,
    ) -> Result<SpectralContext> {
        let growth0 = Growth { c: base.growth.c, q: base.growth.q + 1, guard: d0.mu_max() - cut };
        let t_min = tail_t_min(cut.max(0.0), &growth0, eps_tail)
            .ok_or(Error::WindowEmpty { t_min: f64::INFINITY, t_max: f64::INFINITY })?;
        let window = Window { t_min, t_max: fit.span * t_min.max(f64::MIN_POSITIVE) };
        if t_min > T_MIN_CAP || cut <= 0.0 {
            return Err(Error::WindowEmpty { t_min, t_max: window.t_max });
        }
        Ok(SpectralContext::new_with_window(d0.clone(), gamma0, growth0, eps_tail, fit, window))
    }

    pub fn base(&self) -> &ModelInstance {
        &self.base
    }

    pub fn base_ctx(&self) -> &SpectralContext {
        &self.base_ctx
    }

    /// Spectral data of `D_0`.
    pub fn ctx(&self) -> &SpectralContext {
        &self.ctx
    }

    /// Spectral data of `D_0` windowed for finite-rank ℓ²(ℕ) factors.
    pub fn ctx_compact(&self) -> &SpectralContext {
        &self.ctx_compact
    }

    fn ctx_for(&self, elems: &[&SuspElem]) -> &SpectralContext {
        let compact = elems.iter().all(|e| e.is_compact());
        match (elems.iter().all(|e| e.base_is_spectral()), compact) {
            (true, c) => &self.ctx_spectral[usize::from(c)],
            (false, true) => &self.ctx_compact,
            (false, false) => &self.ctx,
        }
    }

    pub fn d0(&self) -> &DiracData {
        self.ctx.dirac()
    }

    pub fn gamma0(&self) -> Option<&Grading> {
        self.ctx.grading()
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn ell2(&self) -> &Arc<Truncation> {
        &self.ell2
    }

    pub fn product(&self) -> &Arc<Truncation> {
        &self.product
    }

    pub fn constants(&self) -> &SuspensionConstants {
        &self.constants
    }

    /// Summability degree of the base.
    pub fn p(&self) -> u32 {
        self.base.p()
    }

    pub fn is_even(&self) -> bool {
        self.base.is_even()
    }

    fn make(&self, kind: ElemKind, left: Op, right: Op) -> Result<SuspElem> {
        let realized = tensor(&left, &right, &self.product)?;
        Ok(SuspElem { kind, left, right, realized })
    }

    /// `a ⊗ k`.
    pub fn elem_ak(&self, a: &Op, k: &Op) -> Result<SuspElem> {
        self.make(ElemKind::Ak { a: a.clone(), k: k.clone() }, a.clone(), k.clone())
    }

    /// `1 ⊗ S^n`.
    pub fn elem_shift(&self, n: i64) -> Result<SuspElem> {
        if n.unsigned_abs() as usize >= self.m {
            return Err(Error::IndexOutOfRange { index: n.unsigned_abs() as usize, dim: self.m });
        }
        self.make(ElemKind::Shift(n), self.base.identity(), shift_power(&self.ell2, n))
    }

    pub fn elem_f_unit(&self) -> Result<SuspElem> {
        self.make(ElemKind::FUnit, self.base.dirac.sign_op(), Op::identity(&self.ell2))
    }

    pub fn elem_gamma_unit(&self) -> Result<SuspElem> {
        let g = self.base.grading.as_ref().ok_or_else(|| Error::Unsupported("odd base has no grading".into()))?;
        self.make(ElemKind::GammaUnit, g.op(), Op::identity(&self.ell2))
    }

    /// `(γ ⊗ 1) e`.
    pub fn twisted(&self, e: &SuspElem) -> Result<SuspElem> {
        let g = self.base.grading.as_ref().ok_or_else(|| Error::Unsupported("odd base has no grading".into()))?;
        self.make(ElemKind::Twisted(Box::new(e.kind.clone())), g.apply_left(&e.left)?, e.right.clone())
    }

    /// `ζ_{D_0}^{(s)}` of the realized element, fitted on the product truncation.
    pub fn direct_zeta0(&self, e: &SuspElem, s: u32) -> Result<Estimate> {
        Ok(self.ctx_for(&[e]).zeta_residue(&e.realized, s)?.into())
    }

    /// `Σ²φ_0(e)`: the value at `z = 0` of `Tr(e|D_0|^{−2z})`, fitted directly.
    pub fn direct_phi0(&self, e: &SuspElem) -> Result<Estimate> {
        let (value, error_budget) = self.ctx_for(&[e]).zeta_at_zero(&e.realized)?;
        Ok(Estimate { value, error_budget })
    }

    /// `d_0 = [D_0, ·]` of an element.
    pub fn d0_of(&self, e: &SuspElem) -> Result<Op> {
        self.d0().commutator(&e.realized)
    }

    /// `Σ²ψ_x^0(e_0, d_0e_1, …, d_0e_n)` from operator products on the product truncation,
    /// with `e_0` twisted by `γ ⊗ 1` when the base is even.
    pub fn direct_psi(&self, x: &[u32], elems: &[SuspElem]) -> Result<Estimate> {
        let (first, rest) = elems.split_first().ok_or_else(|| Error::Arity("ψ needs at least a_0".into()))?;
        let ops: Vec<Op> = rest.iter().map(|e| self.d0_of(e)).collect::<Result<_>>()?;
        let all: Vec<&SuspElem> = elems.iter().collect();
        let v = self.ctx_for(&all).psi(x, 0, &first.realized, &ops, self.is_even())?;
        Ok(Estimate { value: v.value, error_budget: v.error_budget })
    }

    /// `Σ²φ_n(e_0, …, e_n)` assembled from [`Self::direct_psi`]; for `n = 0`
    /// on an even base, [`Self::direct_phi0`] of `(γ⊗1)e_0`.
    pub fn direct_phi(&self, elems: &[SuspElem]) -> Result<Estimate> {
        let n = elems.len().checked_sub(1).ok_or_else(|| Error::Arity("φ needs at least a_0".into()))?;
        let parity = if self.is_even() { Parity::Even } else { Parity::Odd };
        if n == 0 {
            if parity == Parity::Odd {
                return Err(Error::Arity("odd cocycles have no φ_0".into()));
            }
            return self.direct_phi0(&self.twisted(&elems[0])?);
        }
        let budget = RefCell::new(0.0);
        let value = assemble_phi(n, parity, self.p() + 1, |x| {
            let e = self.direct_psi(x, elems)?;
            *budget.borrow_mut() += b_coeff(n, x)?.to_c64().norm() * e.error_budget;
            Ok(e.value)
        })?;
        Ok(Estimate { value, error_budget: budget.into_inner() })
    }

    /// `Tr(e e^{−t|D_0|})` on the product truncation.
    pub fn heat_trace(&self, e: &SuspElem, t: f64) -> C64 {
        crate::series::heat_trace(&e.realized, self.d0(), t)
    }
}

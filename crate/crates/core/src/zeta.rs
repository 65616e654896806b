//! Residue functionals `ζ_D^{(m)}`, values at zero and the `ψ_x^k` functionals,
//! all read off heat-trace asymptotics.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DiracData, Grading, Op};
use crate::series::{
    fit_asymptotics, gaussian_window, truncation_window, AsymptoticSeries, FitConfig, Growth, HeatProfile, Source,
    Window,
};

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n > 0, "Γ has a pole at 0");
    if n % 2 == 0 {
        factorial(n / 2 - 1)
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let k = (n - 1) / 2;
        factorial(2 * k) * std::f64::consts::PI.sqrt() / (4f64.powi(k as i32) * factorial(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueReport {
    pub m: u32,
    pub value: C64,
    pub source: Source,
    pub error_budget: f64,
}

#[derive(Serialize, Deserialize)]
struct ResidueWire {
    m: u32,
    re: f64,
    im: f64,
    source: Source,
    error_budget: f64,
}

impl Serialize for ResidueReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ResidueWire { m: self.m, re: self.value.re, im: self.value.im, source: self.source, error_budget: self.error_budget }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResidueReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ResidueWire::deserialize(d)?;
        Ok(ResidueReport { m: w.m, value: C64::new(w.re, w.im), source: w.source, error_budget: w.error_budget })
    }
}

/// `ζ^{(m)} = b_{p−m} / (2Γ(m))`.
pub fn residue_from_series(s: &AsymptoticSeries, m: u32) -> Result<ResidueReport> {
    if m == 0 || m > s.p {
        return Err(Error::ResidueOutOfRange { m, p: s.p });
    }
    let r = (s.p - m) as usize;
    let norm = 2.0 * factorial(m - 1);
    Ok(ResidueReport { m, value: s.coeff(r) / norm, source: s.source, error_budget: s.error(r) / norm })
}

/// Rescales `t^p Tr(b e^{−t²D²})` coefficients to those of `t^p Tr(b e^{−t|D|})`.
pub fn convert_d2_to_abs(s: &AsymptoticSeries) -> AsymptoticSeries {
    let p = s.p;
    let factor = |r: usize| -> f64 {
        let k = p as i64 - r as i64;
        if k < 0 {
            return 0.0;
        }
        2f64.powi(k as i32) * gamma_half((k + 1) as u32) / std::f64::consts::PI.sqrt()
    };
    let n = s.order().min(p as usize);
    AsymptoticSeries {
        p,
        coeffs: (0..=n).map(|r| s.coeff(r) * factor(r)).collect(),
        residual: s.residual,
        spread: (0..=n).map(|r| s.spread.get(r).copied().unwrap_or(0.0) * factor(r)).collect(),
        truncation_bound: s.truncation_bound,
        source: s.source,
        window: s.window,
        log_coeffs: Vec::new(),
    }
}

/// Value of `ψ_x^k`, with a flag for indices beyond the dimension spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValue {
    pub value: C64,
    pub error_budget: f64,
    pub beyond_spectrum: bool,
}

/// D, optional grading and fit settings of one spectral triple.
#[derive(Debug, Clone)]
pub struct SpectralContext {
    dirac: Arc<DiracData>,
    grading: Option<Arc<Grading>>,
    growth: Growth,
    window: Window,
    fit: FitConfig,
    eps_tail: f64,
}

impl SpectralContext {
    pub fn new(dirac: DiracData, grading: Option<Grading>, growth: Growth, eps_tail: f64, fit: FitConfig) -> Result<Self> {
        let window = truncation_window(&dirac, &growth, eps_tail, fit.span)?;
        Ok(Self::new_with_window(dirac, grading, growth, eps_tail, fit, window))
    }

    /// Context with a prescribed fit window.
    pub fn new_with_window(
        dirac: DiracData,
        grading: Option<Grading>,
        growth: Growth,
        eps_tail: f64,
        fit: FitConfig,
        window: Window,
    ) -> Self {
        SpectralContext { dirac: Arc::new(dirac), grading: grading.map(Arc::new), growth, window, fit, eps_tail }
    }

    /// The same triple and window with other fit settings.
    pub fn with_fit(&self, fit: FitConfig) -> Self {
        SpectralContext { fit, ..self.clone() }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn dirac(&self) -> &DiracData {
        &self.dirac
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_deref()
    }

    pub fn growth(&self) -> &Growth {
        &self.growth
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn fit_config(&self) -> &FitConfig {
        &self.fit
    }

    pub fn eps_tail(&self) -> f64 {
        self.eps_tail
    }

    pub fn p(&self) -> u32 {
        self.dirac.p()
    }

    /// Default reported order `R = p + 2`.
    pub fn default_order(&self) -> usize {
        self.p() as usize + 2
    }

    pub fn profile(&self, b: &Op) -> HeatProfile {
        HeatProfile::from_op(b, self.dirac.modulus())
    }

    /// Fit settings for the trace of `b`: operators diagonal in the eigenbasis
    /// of `D` have no `t^r log t` terms.
    fn fit_for(&self, b: &Op) -> FitConfig {
        if b.is_diagonal() {
            FitConfig { log_terms: 0, ..self.fit }
        } else {
            self.fit
        }
    }

    /// `t^p Tr(b e^{−t|D|}) ∼ Σ b_r t^r`.
    pub fn expansion(&self, b: &Op) -> Result<AsymptoticSeries> {
        self.expansion_with(&self.profile(b), self.default_order(), &self.fit_for(b))
    }

    pub fn expansion_of_profile(&self, prof: &HeatProfile, order: usize) -> Result<AsymptoticSeries> {
        self.expansion_with(prof, order, &self.fit)
    }

    fn expansion_with(&self, prof: &HeatProfile, order: usize, fit: &FitConfig) -> Result<AsymptoticSeries> {
        let p = self.p();
        if prof.is_empty() {
            return Ok(AsymptoticSeries::exact(p, vec![C64::new(0.0, 0.0); order + 1]));
        }
        let f = |t: f64| prof.eval(t) * t.powi(p as i32);
        let mut s = fit_asymptotics(&f, p, order, &self.window, fit)?;
        let mu_cut = (self.dirac.mu_max() - self.growth.guard).max(0.0);
        s.truncation_bound =
            self.growth.tail(mu_cut, self.window.t_min) * prof.max_weight() * self.window.t_min.powi(p as i32);
        Ok(s)
    }

    /// `t^p Tr(b e^{−t²D²})` with the unshifted `D`.
    pub fn gaussian_expansion(&self, b: &Op) -> Result<AsymptoticSeries> {
        let p = self.p();
        let sq: Vec<f64> = self.dirac.eigenvalues().iter().map(|l| l * l).collect();
        let prof = HeatProfile::from_op(b, &sq);
        let order = self.default_order();
        if prof.is_empty() {
            return Ok(AsymptoticSeries::exact(p, vec![C64::new(0.0, 0.0); order + 1]));
        }
        let w = gaussian_window(&self.dirac, &self.growth, self.eps_tail, self.fit.span)?;
        let f = |t: f64| prof.eval(t * t) * t.powi(p as i32);
        fit_asymptotics(&f, p, order, &w, &self.fit_for(b))
    }

    pub fn zeta_residue(&self, b: &Op, m: u32) -> Result<ResidueReport> {
        if m == 0 || m > self.p() {
            return Err(Error::ResidueOutOfRange { m, p: self.p() });
        }
        residue_from_series(&self.expansion(b)?, m)
    }

    /// `ζ^{(m)}(b)` for `m = 1..p` from a single fit.
    pub fn residues(&self, b: &Op) -> Result<Vec<ResidueReport>> {
        let s = self.expansion(b)?;
        (1..=self.p()).map(|m| residue_from_series(&s, m)).collect()
    }

    /// `Tr(b|D|^{−2z})` at `z = 0`, which is `b_p`, with its error budget.
    pub fn zeta_at_zero(&self, b: &Op) -> Result<(C64, f64)> {
        let s = self.expansion(b)?;
        let p = self.p() as usize;
        Ok((s.coeff(p), s.error(p)))
    }

    /// `ψ_x^k(b_0, ops…) = ζ^{(n+|x|+k)}((γ) b_0 Π δ^{x_i}(ops_i))`.
    pub fn psi(&self, x: &[u32], k: u32, b0: &Op, ops: &[Op], twisted: bool) -> Result<PsiValue> {
        if x.len() != ops.len() {
            return Err(Error::Arity(format!("{} exponents for {} operators", x.len(), ops.len())));
        }
        let m = ops.len() as u32 + x.iter().sum::<u32>() + k;
        if m > self.p() {
            return Ok(PsiValue { value: C64::new(0.0, 0.0), error_budget: 0.0, beyond_spectrum: true });
        }
        let mut prod = if twisted {
            let g = self.grading.as_ref().ok_or_else(|| Error::Unsupported("odd triple has no grading".into()))?;
            g.apply_left(b0)?
        } else {
            b0.clone()
        };
        for (op, &xi) in ops.iter().zip(x) {
            prod = prod.checked_mul(&self.dirac.delta_pow(op, xi)?)?;
        }
        let r = self.zeta_residue(&prod, m)?;
        Ok(PsiValue { value: r.value, error_budget: r.error_budget, beyond_spectrum: false })
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DiracData, Op};

/// `t ↦ Σ_i w_i e^{−t e_i}` with equal exponents merged, in increasing order.
#[derive(Debug, Clone, Default)]
pub struct HeatProfile {
    exps: Vec<f64>,
    weights: Vec<C64>,
}

impl HeatProfile {
    pub fn new(pairs: impl IntoIterator<Item = (f64, C64)>) -> Self {
        let mut groups: BTreeMap<u64, C64> = BTreeMap::new();
        for (e, w) in pairs {
            assert!(e >= 0.0, "heat exponent must be nonnegative");
            *groups.entry(e.to_bits()).or_default() += w;
        }
        let (exps, weights) = groups
            .into_iter()
            .filter(|(_, w)| w.norm() > 0.0)
            .map(|(k, w)| (f64::from_bits(k), w))
            .unzip();
        HeatProfile { exps, weights }
    }

    /// Diagonal of `b` against the exponents `e_i`.
    pub fn from_op(b: &Op, exps: &[f64]) -> Self {
        Self::new(b.diag_entries().into_iter().map(|(i, v)| (exps[i], v)))
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.exps.iter().zip(&self.weights).map(|(e, w)| w * (-t * e).exp()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.norm()))
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }
}

/// `Tr(b e^{−t|D|})` over the truncation.
pub fn heat_trace(b: &Op, d: &DiracData, t: f64) -> C64 {
    HeatProfile::from_op(b, d.modulus()).eval(t)
}

/// Eigenvalue-counting bound `N(λ) ≤ C λ^q`, with `guard` levels near the
/// truncation edge treated as unreliable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub c: f64,
    pub q: u32,
    pub guard: f64,
}

impl Growth {
    /// `C q ∫_μ^∞ λ^{q−1} e^{−tλ} dλ`.
    pub fn tail(&self, mu: f64, t: f64) -> f64 {
        let q = self.q.max(1);
        let mut s = 0.0;
        let mut fact_ratio = 1.0; // (q−1)!/k!
        for k in (0..q).rev() {
            s += fact_ratio * mu.powi(k as i32) / t.powi((q - k) as i32);
            fact_ratio *= k.max(1) as f64;
        }
        self.c * q as f64 * (-t * mu).exp() * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
}

/// Smallest `t` with `growth.tail(mu_cut, t) ≤ eps_tail`; `0` when `eps_tail` is infinite.
pub fn tail_t_min(mu_cut: f64, growth: &Growth, eps_tail: f64) -> Option<f64> {
    if eps_tail.is_infinite() {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (1e-8_f64, 60.0_f64);
    if growth.tail(mu_cut, hi) > eps_tail {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if growth.tail(mu_cut, mid) > eps_tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Above this `t_min` the truncation is too small for the small-`t` regime.
pub const T_MIN_CAP: f64 = 2.0;

/// Fit window `[t_min, span·t_min]` for `D` with the given tail model.
pub fn truncation_window(d: &DiracData, growth: &Growth, eps_tail: f64, span: f64) -> Result<Window> {
    let mu_cut = d.mu_max() - growth.guard;
    let t_min = tail_t_min(mu_cut.max(0.0), growth, eps_tail)
        .ok_or(Error::WindowEmpty { t_min: f64::INFINITY, t_max: f64::INFINITY })?;
    let t_max = if t_min > 0.0 { span * t_min } else { span };
    if t_min > T_MIN_CAP || mu_cut <= 0.0 {
        return Err(Error::WindowEmpty { t_min, t_max });
    }
    Ok(Window { t_min, t_max })
}

/// Gaussian analogue: smallest `t` with the `e^{−t²λ²}` tail below `eps_tail`.
pub fn gaussian_window(d: &DiracData, growth: &Growth, eps_tail: f64, span: f64) -> Result<Window> {
    let mu = (d.mu_max() - growth.guard).max(0.0);
    let tail = |t: f64| {
        let s = t * t;
        growth.c * growth.q as f64 * mu.powi(growth.q as i32 - 1) * (-s * mu * mu).exp() / (2.0 * s * mu)
    };
    let (mut lo, mut hi) = (1e-6_f64, 10.0_f64);
    if mu <= 0.0 || tail(hi) > eps_tail {
        return Err(Error::WindowEmpty { t_min: hi, t_max: hi });
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if tail(mid) > eps_tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Window { t_min: hi, t_max: span * hi })
}

//! Noncommutative torus on `L²(T²) ⊕ L²(T²)`.
//!
//! `U e_{m,n} = e_{m+1,n}`, `V e_{m,n} = e^{−2πimθ} e_{m,n+1}`, so that
//! `UV = e^{2πiθ} VU`. The Dirac eigenvectors on mode `(m,n)` are
//! `(e_{mn}, ±e^{iφ}e_{mn})/√2` with `m + in = r e^{iφ}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ModelInstance, Provenance};
use crate::error::{Error, Result};
use crate::operator::{DiracData, Grading, Label, Op, Truncation};
use crate::series::{Growth, SpectrumDescriptor};

pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_1_SQRT_2 - 0.5;

#[derive(Debug, Clone)]
pub struct TorusModel {
    pub instance: ModelInstance,
    theta: f64,
    lambda: i32,
    phases: Vec<C64>,
}

impl TorusModel {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> i32 {
        self.lambda
    }

    pub fn dirac(&self) -> &DiracData {
        &self.instance.dirac
    }

    fn side(&self) -> usize {
        (2 * self.lambda + 1) as usize
    }

    fn mode(&self, m: i32, n: i32) -> Option<usize> {
        let l = self.lambda;
        (m.abs() <= l && n.abs() <= l).then(|| (m + l) as usize * self.side() + (n + l) as usize)
    }

    fn mode_coords(&self, k: usize) -> (i32, i32) {
        ((k / self.side()) as i32 - self.lambda, (k % self.side()) as i32 - self.lambda)
    }

    /// Eigenbasis index of `(m, n, ±)`.
    pub fn index_of(&self, m: i32, n: i32, sign: i8) -> Option<usize> {
        self.mode(m, n).map(|k| 2 * k + usize::from(sign < 0))
    }

    /// Transports a mode operator, given as `(target, source, value)`, acting
    /// identically on both summands.
    fn transport(&self, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Op> {
        let mut out = Vec::new();
        for (k, k2, c) in entries {
            let (ph, ph2) = (self.phases[k], self.phases[k2]);
            let cross = ph.conj() * ph2;
            for (e, de) in [(1.0, 0usize), (-1.0, 1)] {
                for (e2, de2) in [(1.0, 0usize), (-1.0, 1)] {
                    let v = c * 0.5 * (C64::new(1.0, 0.0) + cross * (e * e2));
                    if v.norm() > 1e-15 {
                        out.push((2 * k + de, 2 * k2 + de2, v));
                    }
                }
            }
        }
        Op::from_triplets(self.instance.dirac.trunc(), out)
    }

    /// Compression of `U^α V^β` with `U^αV^β e_{m,n} = e^{−2πiθmβ} e_{m+α,n+β}`.
    pub fn monomial(&self, alpha: i32, beta: i32) -> Result<Op> {
        let dim_modes = self.side() * self.side();
        let entries = (0..dim_modes).filter_map(|k| {
            let (m, n) = self.mode_coords(k);
            let target = self.mode(m + alpha, n + beta)?;
            let phase = C64::from_polar(1.0, -2.0 * PI * self.theta * (m as f64) * beta as f64);
            Some((target, k, phase))
        });
        self.transport(entries.collect::<Vec<_>>())
    }

    /// `T_f ⊕ T_f` with `T_f e_{m,n} = f(m,n) e_{m,n}`.
    pub fn multiplier(&self, f: impl Fn(i32, i32) -> C64) -> Result<Op> {
        let entries: Vec<_> = (0..self.side() * self.side())
            .map(|k| {
                let (m, n) = self.mode_coords(k);
                (k, k, f(m, n))
            })
            .collect();
        self.transport(entries)
    }

    /// `T_{m+in} ⊕ T_{m+in}`.
    pub fn t_m_plus_in(&self) -> Result<Op> {
        self.multiplier(|m, n| C64::new(m as f64, n as f64))
    }

    /// `Δ ⊕ Δ` with `Δ = T_{m²+n²}`.
    pub fn laplacian(&self) -> Result<Op> {
        self.multiplier(|m, n| C64::new((m * m + n * n) as f64, 0.0))
    }

    /// Modes at distance at least `margin` from the edge of the square.
    pub fn is_interior(&self, index: usize, margin: i32) -> bool {
        let (m, n) = self.mode_coords(index / 2);
        m.abs() + margin <= self.lambda && n.abs() + margin <= self.lambda
    }
}

/// Noncommutative torus at angle `θ` with modes `|m|, |n| ≤ Λ`.
pub fn nctorus_model(theta: f64, lambda: usize) -> Result<TorusModel> {
    if lambda < 4 {
        return Err(Error::Config(format!("torus needs Λ ≥ 4, got {lambda}")));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Config(format!("θ must lie in (0, 1), got {theta}")));
    }
    if (1..=64).any(|q| ((theta * q as f64).round() - theta * q as f64).abs() < 1e-9) {
        log_rational_theta(theta);
    }
    let l = lambda as i32;
    let mut labels = Vec::new();
    let mut eig = Vec::new();
    let mut phases = Vec::new();
    for m in -l..=l {
        for n in -l..=l {
            let r = f64::from(m * m + n * n).sqrt();
            phases.push(if r == 0.0 { C64::new(1.0, 0.0) } else { C64::new(m as f64 / r, n as f64 / r) });
            for sign in [1i8, -1] {
                labels.push(Label::Lattice { m, n, sign });
                eig.push(f64::from(sign) * r);
            }
        }
    }
    let trunc = Truncation::labeled(format!("nctorus[{lambda}]"), labels)?;
    let dirac = DiracData::new(&trunc, eig, 2)?;
    let partner = (0..trunc.dim()).map(|i| i ^ 1).collect();
    let grading = Grading::new(&dirac, partner)?;
    let mu_max = dirac.mu_max();
    let instance = ModelInstance {
        name: "nctorus".into(),
        dirac,
        grading: Some(grading),
        generators: BTreeMap::new(),
        // spectrum complete only up to Λ, the inscribed disk
        growth: Growth { c: 8.0, q: 2, guard: mu_max - lambda as f64 + 4.0 },
        expectations: Vec::new(),
        spectrum: Some(SpectrumDescriptor::TorusGaussian),
        log_terms: 2,
    };
    let mut model = TorusModel { instance, theta, lambda: l, phases };
    for (name, a, b) in [("u", 1, 0), ("u*", -1, 0), ("v", 0, 1), ("v*", 0, -1)] {
        let op = model.monomial(a, b)?;
        model.instance.add_generator(name, op, 2);
    }
    model.instance.add_generator("1", Op::identity(&trunc), 2);
    let one = Op::identity(&trunc);
    model.instance.expect(
        "nctorus.zeta2.identity",
        "ζ^(2)(1) = b_0/2 with t²Tr(e^{−t|D|}) → 4π",
        C64::new(2.0 * PI, 0.0),
        1e-5,
        Provenance::Oracle,
        move |ctx| Ok(ctx.zeta_residue(&one, 2)?.value),
    );
    let g = model.instance.grading.as_ref().expect("even").op();
    model.instance.expect(
        "nctorus.zeta2.gamma",
        "ζ^(2)(γ) = 0",
        C64::new(0.0, 0.0),
        1e-6,
        Provenance::ClosedForm,
        move |ctx| Ok(ctx.zeta_residue(&g, 2)?.value),
    );
    Ok(model)
}

fn log_rational_theta(theta: f64) {
    eprintln!("warning: θ = {theta} is rational to within 1e-9 with denominator ≤ 64");
}

/// Closed-form torus residues and cocycle values on monomials `U^{α_i}V^{β_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedKind {
    /// `Res Tr(γ a_0 d(a_1) F a_2 |D|^{−2z})` at `z = 1`.
    PropV,
    /// `Res Tr(γ a_0 F a_1 F a_2 |D|^{−2z})` at `z = 1`.
    PropX,
    /// `Res Tr(γ a_0 da_1 da_2 |D|^{−2z})` at `z = 1`.
    PropW,
    /// `Σ²φ_2` on `(a_i ⊗ c_i)` divided by `Tr(c_0c_1c_2)`.
    Phi2,
}

/// `e^{−2πiθ(α_1β_0 + α_2β_0 + α_2β_1)}`.
pub fn monomial_phase(alpha: [i32; 3], beta: [i32; 3], theta: f64) -> C64 {
    let e = alpha[1] * beta[0] + alpha[2] * beta[0] + alpha[2] * beta[1];
    C64::from_polar(1.0, -2.0 * PI * theta * f64::from(e))
}

pub fn nctorus_closed_values(kind: ClosedKind, alpha: [i32; 3], beta: [i32; 3], theta: f64) -> C64 {
    let balanced = alpha.iter().sum::<i32>() == 0 && beta.iter().sum::<i32>() == 0;
    let det = f64::from(alpha[1] * beta[2] - alpha[2] * beta[1]);
    let zero = C64::new(0.0, 0.0);
    match kind {
        ClosedKind::PropV | ClosedKind::PropX => zero,
        _ if !balanced => zero,
        ClosedKind::PropW => C64::new(0.0, 4.0 * PI * det) * monomial_phase(alpha, beta, theta),
        ClosedKind::Phi2 => {
            let i32 = C64::from_polar(1.0, 0.75 * PI);
            i32 * (2.0 * 2f64.sqrt() * PI * det) * monomial_phase(alpha, beta, theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TorusModel {
        nctorus_model(DEFAULT_THETA, 8).unwrap()
    }

    #[test]
    fn commutation_relation_in_the_interior() {
        let t = model();
        let u = t.monomial(1, 0).unwrap();
        let v = t.monomial(0, 1).unwrap();
        let uv = &u * &v;
        let vu = &v * &u;
        let w = C64::from_polar(1.0, 2.0 * PI * t.theta());
        for (i, j, x) in uv.triplets() {
            if t.is_interior(i, 2) && t.is_interior(j, 2) {
                assert!((x - w * vu.get(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn t_commutator_acts_by_alpha_plus_i_beta() {
        let t = model();
        let tm = t.t_m_plus_in().unwrap();
        for (a, b) in [(1, 0), (0, 1), (2, -1), (-1, -3)] {
            let mono = t.monomial(a, b).unwrap();
            let c = &(&tm * &mono) - &(&mono * &tm);
            let expect = mono.scale(C64::new(a as f64, b as f64));
            assert!(c.max_diff(&expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dirac_squares_to_laplacian() {
        let t = model();
        let d = t.dirac().dirac_op();
        let lap = t.laplacian().unwrap();
        assert!((&d * &d).max_diff(&lap).unwrap() < 1e-12);
    }

    #[test]
    fn closed_values() {
        let th = DEFAULT_THETA;
        let v = nctorus_closed_values(ClosedKind::PropW, [-1, 1, 0], [-1, 0, 1], th);
        let expect = C64::new(0.0, 4.0 * PI) * C64::from_polar(1.0, 2.0 * PI * th);
        assert!((v - expect).norm() < 1e-12);
        assert_eq!(nctorus_closed_values(ClosedKind::PropW, [1, 0, 0], [0, 0, 0], th), C64::new(0.0, 0.0));
        assert_eq!(nctorus_closed_values(ClosedKind::PropV, [-1, 1, 0], [-1, 0, 1], th), C64::new(0.0, 0.0));
    }
}

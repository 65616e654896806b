//! Product quadrature on S²: spin-weighted harmonics from Wigner's small d
//! (Jacobi form), and the surface integral `∫ a0 da1∧da2`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn ln_fact(n: i32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Jacobi `P_n^{(a,b)}(x)` by the three-term recurrence.
fn jacobi(n: i32, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + a + b;
        let lhs = 2.0 * k * (k + a + b) * (c - 2.0);
        let p2 = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1 - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * p0) / lhs;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Wigner `d^j_{m'm}(β)` with doubled arguments.
pub fn wigner_small_d(tj: i32, tmp: i32, tm: i32, beta: f64) -> f64 {
    if tmp.abs() > tj || tm.abs() > tj || (tj + tm) % 2 != 0 || (tj + tmp) % 2 != 0 {
        return 0.0;
    }
    let mu = (tm - tmp).abs() / 2;
    let nu = (tm + tmp).abs() / 2;
    let s = (tj - tm.abs().max(tmp.abs())) / 2;
    let xi = if tm >= tmp || ((tmp - tm) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let norm = 0.5 * (ln_fact(s) + ln_fact(s + mu + nu) - ln_fact(s + mu) - ln_fact(s + nu));
    let (sh, ch) = ((beta / 2.0).sin(), (beta / 2.0).cos());
    xi * norm.exp() * sh.powi(mu) * ch.powi(nu) * jacobi(s, mu as f64, nu as f64, beta.cos())
}

/// `sY_{jm}(θ, φ) = √((2j+1)/4π) e^{imφ} d^j_{m,−s}(θ)`, doubled `s, j, m`.
pub fn spin_harmonic(ts: i32, tj: i32, tm: i32, theta: f64, phi: f64) -> C64 {
    let norm = ((tj + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt();
    C64::from_polar(norm * wigner_small_d(tj, tm, -ts, theta), 0.5 * tm as f64 * phi)
}

/// Gauss–Legendre in `cos θ` times a uniform grid in `φ`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub nodes: Vec<(f64, f64, f64)>,
}

impl SphereGrid {
    /// Exact for polynomials of degree `< 2·n_theta` in `cos θ` and trigonometric degree `< n_phi` in `φ`.
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n_theta.max(1)).expect("positive"));
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in gl.iter() {
            let theta = x.clamp(-1.0, 1.0).acos();
            for k in 0..n_phi {
                nodes.push((theta, k as f64 * dphi, w * dphi));
            }
        }
        SphereGrid { nodes }
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> C64) -> C64 {
        self.nodes.iter().map(|&(t, p, w)| f(t, p) * w).sum()
    }
}

/// Polynomial `Σ c · x^a y^b z^c` restricted to the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoly {
    pub terms: Vec<(f64, [u32; 3])>,
}

impl SpherePoly {
    pub fn constant(c: f64) -> Self {
        SpherePoly { terms: vec![(c, [0, 0, 0])] }
    }

    pub fn x() -> Self {
        SpherePoly { terms: vec![(1.0, [1, 0, 0])] }
    }

    pub fn y() -> Self {
        SpherePoly { terms: vec![(1.0, [0, 1, 0])] }
    }

    pub fn z() -> Self {
        SpherePoly { terms: vec![(1.0, [0, 0, 1])] }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms.iter().map(|(c, e)| c * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)).sum()
    }

    /// Ambient gradient.
    pub fn grad(&self, p: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (c, e) in &self.terms {
            for (axis, gi) in g.iter_mut().enumerate() {
                if e[axis] == 0 {
                    continue;
                }
                let mut term = c * e[axis] as f64;
                for (k, pk) in p.iter().enumerate() {
                    let pow = if k == axis { e[k] - 1 } else { e[k] };
                    term *= pk.powi(pow as i32);
                }
                *gi += term;
            }
        }
        g
    }

    /// Parses `x`, `y*z`, `2*x^2`, `1`, and sums like `x + y`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let cleaned = s.replace(' ', "").replace('-', "+-");
        for term in cleaned.split('+').filter(|t| !t.is_empty()) {
            let (mut coef, body) = match term.strip_prefix('-') {
                Some(rest) => (-1.0, rest),
                None => (1.0, term),
            };
            let mut e = [0u32; 3];
            for factor in body.split('*') {
                let (base, pow) = match factor.split_once('^') {
                    Some((b, p)) => (b, p.parse::<u32>().map_err(|_| Error::Parse(format!("bad power in `{s}`")))?),
                    None => (factor, 1),
                };
                match base {
                    "x" => e[0] += pow,
                    "y" => e[1] += pow,
                    "z" => e[2] += pow,
                    num => {
                        let v: f64 = num.parse().map_err(|_| Error::Parse(format!("bad factor `{num}` in `{s}`")))?;
                        coef *= v.powi(pow as i32);
                    }
                }
            }
            terms.push((coef, e));
        }
        if terms.is_empty() {
            return Err(Error::Parse(format!("empty polynomial `{s}`")));
        }
        Ok(SpherePoly { terms })
    }
}

fn point(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// `∫_{S²} a0 da1∧da2` for the outward orientation, via `n·(∇a1 × ∇a2)`.
pub fn sphere_form_integral(a0: &SpherePoly, a1: &SpherePoly, a2: &SpherePoly) -> f64 {
    let deg = (a0.degree() + a1.degree() + a2.degree() + 1) as usize;
    let grid = SphereGrid::new(deg / 2 + 2, deg + 2);
    grid.integrate(|t, p| {
        let n = point(t, p);
        let g1 = a1.grad(n);
        let g2 = a2.grad(n);
        let cross = [g1[1] * g2[2] - g1[2] * g2[1], g1[2] * g2[0] - g1[0] * g2[2], g1[0] * g2[1] - g1[1] * g2[0]];
        let triple = n[0] * cross[0] + n[1] * cross[1] + n[2] * cross[2];
        C64::new(a0.eval(n) * triple, 0.0)
    })
    .re
}

/// `⟨ψ^ε_{k,m}| f |ψ^{ε'}_{k',m'}⟩` by quadrature, where
/// `ψ^ε = (₋½Y, ε·₊½Y)/√2`.
pub fn spinor_matrix_element(
    f: &SpherePoly,
    (k, tm, eps): (u32, i32, i8),
    (k2, tm2, eps2): (u32, i32, i8),
) -> C64 {
    let (tj, tj2) = (2 * k as i32 - 1, 2 * k2 as i32 - 1);
    let deg = (tj + tj2) as usize / 2 + f.degree() as usize + 2;
    let grid = SphereGrid::new(deg / 2 + 2, (tm.abs() + tm2.abs()) as usize / 2 + f.degree() as usize + 3);
    let sgn = (eps * eps2) as f64;
    grid.integrate(|t, p| {
        let fv = f.eval(point(t, p));
        let top = spin_harmonic(-1, tj, tm, t, p).conj() * spin_harmonic(-1, tj2, tm2, t, p);
        let bot = spin_harmonic(1, tj, tm, t, p).conj() * spin_harmonic(1, tj2, tm2, t, p);
        (top + bot * sgn) * (0.5 * fv)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Wigner's explicit sum, fine for small j.
    fn small_d_sum(tj: i32, tmp: i32, tm: i32, beta: f64) -> f64 {
        let (j, mp, m) = (tj as f64 / 2.0, tmp as f64 / 2.0, tm as f64 / 2.0);
        let f = |x: f64| (ln_fact(x.round() as i32)).exp();
        let pre = (f(j + mp) * f(j - mp) * f(j + m) * f(j - m)).sqrt();
        let mut s = 0.0;
        for k in 0..=tj {
            let k = k as f64;
            let args = [j + m - k, k, mp - m + k, j - mp - k];
            if args.iter().any(|a| *a < -1e-9) {
                continue;
            }
            let sign = if ((mp - m + k).round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let den: f64 = args.iter().map(|a| f(*a)).product();
            s += sign * (beta / 2.0).cos().powf(2.0 * j + m - mp - 2.0 * k) * (beta / 2.0).sin().powf(mp - m + 2.0 * k) / den;
        }
        pre * s
    }

    #[test]
    fn jacobi_form_matches_explicit_sum() {
        for tj in 0..7 {
            for tmp in (-tj..=tj).step_by(2) {
                for tm in (-tj..=tj).step_by(2) {
                    for beta in [0.3, 1.1, 2.5] {
                        let a = wigner_small_d(tj, tmp, tm, beta);
                        let b = small_d_sum(tj, tmp, tm, beta);
                        assert!((a - b).abs() < 1e-12, "tj={tj} tmp={tmp} tm={tm}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn spin_harmonics_are_orthonormal() {
        let grid = SphereGrid::new(20, 24);
        for ts in [-1, 1] {
            for (tj, tm, tj2, tm2) in [(1, 1, 1, 1), (3, -1, 3, -1), (5, 3, 5, 3), (3, 1, 5, 1), (7, -5, 3, -1)] {
                let v = grid.integrate(|t, p| spin_harmonic(ts, tj, tm, t, p).conj() * spin_harmonic(ts, tj2, tm2, t, p));
                let expect = if (tj, tm) == (tj2, tm2) { 1.0 } else { 0.0 };
                assert!((v - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn form_integrals() {
        let (x, y, z) = (SpherePoly::x(), SpherePoly::y(), SpherePoly::z());
        assert!((sphere_form_integral(&z, &x, &y) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(sphere_form_integral(&SpherePoly::constant(1.0), &x, &y).abs() < 1e-13);
        let a = sphere_form_integral(&x, &y, &SpherePoly::parse("z^2+x").unwrap());
        let b = sphere_form_integral(&x, &SpherePoly::parse("z^2+x").unwrap(), &y);
        assert!((a + b).abs() < 1e-13);
    }

    #[test]
    fn poly_parse() {
        let p = SpherePoly::parse("2*x^2 - y*z + 1").unwrap();
        assert_eq!(p.terms, vec![(2.0, [2, 0, 0]), (-1.0, [0, 1, 1]), (1.0, [0, 0, 0])]);
        assert!(SpherePoly::parse("w").is_err());
    }
}

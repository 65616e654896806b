use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::heat::Window;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    /// Chebyshev least squares on a geometric grid.
    Lsq,
    /// Successive Neville extrapolation to `t = 0`.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub points: usize,
    /// `t_max / t_min`.
    pub span: f64,
    /// Polynomial degree of the fitted approximant (at least the reported order).
    pub degree: usize,
    pub cond_max: f64,
    pub method: FitMethod,
    /// Number of `t^r log t` terms, `r = p, p+1, …`, fitted alongside the powers.
    #[serde(default)]
    pub log_terms: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { points: 64, span: 4.0, degree: 16, cond_max: 1e8, method: FitMethod::Lsq, log_terms: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Fit,
    Exact,
}

/// Coefficients of `t^p Tr(...) ∼ Σ_r b_r t^r` with error estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticSeries {
    pub p: u32,
    pub coeffs: Vec<C64>,
    /// Largest absolute deviation of the fitted polynomial on the grid.
    pub residual: f64,
    /// Per-coefficient change between fits of degree `n` and `n − 2`.
    pub spread: Vec<f64>,
    pub truncation_bound: f64,
    pub source: Source,
    pub window: Option<Window>,
    /// Coefficients of `t^r log t`, `r = p, p+1, …`, when fitted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_coeffs: Vec<C64>,
}

impl AsymptoticSeries {
    pub fn exact(p: u32, coeffs: Vec<C64>) -> Self {
        let n = coeffs.len();
        AsymptoticSeries {
            p,
            coeffs,
            residual: 0.0,
            spread: vec![0.0; n],
            truncation_bound: 0.0,
            source: Source::Exact,
            window: None,
            log_coeffs: Vec::new(),
        }
    }

    pub fn coeff(&self, r: usize) -> C64 {
        self.coeffs.get(r).copied().unwrap_or_default()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Error budget of `b_r`.
    pub fn error(&self, r: usize) -> f64 {
        self.spread.get(r).copied().unwrap_or(0.0) + self.residual + self.truncation_bound
    }
}

fn grid(window: &Window, points: usize) -> Vec<f64> {
    let ratio = window.t_max / window.t_min;
    (0..points)
        .map(|j| window.t_min * ratio.powf(j as f64 / (points - 1) as f64))
        .collect()
}

/// Taylor coefficients at `x0` of `Σ c_k T_k(x)`, up to order `r_max`.
fn chebyshev_taylor(c: &[f64], x0: f64, r_max: usize) -> Vec<f64> {
    let n = c.len();
    // d[j][k] = T_k^{(j)}(x0)
    let mut d = vec![vec![0.0; n]; r_max + 1];
    for j in 0..=r_max {
        for k in 0..n {
            d[j][k] = match (j, k) {
                (0, 0) => 1.0,
                (0, 1) => x0,
                (1, 1) => 1.0,
                (_, 0) | (_, 1) => 0.0,
                _ => {
                    let prev = if j > 0 { 2.0 * j as f64 * d[j - 1][k - 1] } else { 0.0 };
                    2.0 * x0 * d[j][k - 1] + prev - d[j][k - 2]
                }
            };
        }
    }
    let mut fact = 1.0;
    (0..=r_max)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            d[j].iter().zip(c).map(|(t, ck)| t * ck).sum::<f64>() / fact
        })
        .collect()
}

struct Lsq {
    coeffs: Vec<C64>,
    /// Coefficients of `t^r log t` for the basis log powers.
    logs: Vec<C64>,
    residual: f64,
}

struct Basis {
    degree: usize,
    /// Powers `r` of the `t^r log t` columns.
    log_powers: Vec<i32>,
}

fn lsq(ts: &[f64], ys: &[C64], window: &Window, basis: &Basis, r_max: usize, cond_max: f64) -> Result<Lsq> {
    let (a, b) = (window.t_min, window.t_max);
    let h = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let m = ts.len();
    let degree = basis.degree;
    let design = DMatrix::from_fn(m, degree + 1 + basis.log_powers.len(), |j, k| {
        if k > degree {
            let u = ts[j] / b;
            return u.powi(basis.log_powers[k - degree - 1]) * u.ln();
        }
        let x = (ts[j] - mid) / h;
        (k as f64 * x.clamp(-1.0, 1.0).acos()).cos()
    });
    // log columns are nearly collinear with the polynomials on the window;
    // conditioning is judged on the polynomial block
    let poly = design.columns(0, degree + 1).into_owned().singular_values();
    let cond = poly.max() / poly.min();
    if !cond.is_finite() || cond > cond_max {
        return Err(Error::IllConditioned { cond });
    }
    let svd = design.clone().svd(true, true);
    let re = DVector::from_iterator(m, ys.iter().map(|y| y.re));
    let im = DVector::from_iterator(m, ys.iter().map(|y| y.im));
    let cre = svd.solve(&re, 0.0).map_err(|e| Error::Parse(e.to_string()))?;
    let cim = svd.solve(&im, 0.0).map_err(|e| Error::Parse(e.to_string()))?;
    let fre = &design * &cre;
    let fim = &design * &cim;
    let residual = (0..m)
        .map(|j| C64::new(re[j] - fre[j], im[j] - fim[j]).norm())
        .fold(0.0, f64::max);
    let x0 = -mid / h;
    let tr = chebyshev_taylor(&cre.as_slice()[..=degree], x0, r_max);
    let ti = chebyshev_taylor(&cim.as_slice()[..=degree], x0, r_max);
    let mut coeffs: Vec<C64> = (0..=r_max)
        .map(|r| C64::new(tr[r], ti[r]) / h.powi(r as i32))
        .collect();
    // (t/b)^r log(t/b) = b^{−r} t^r (log t − log b)
    let mut logs = Vec::with_capacity(basis.log_powers.len());
    for (i, &r) in basis.log_powers.iter().enumerate() {
        let c = C64::new(cre[degree + 1 + i], cim[degree + 1 + i]) / b.powi(r);
        if (r as usize) <= r_max {
            coeffs[r as usize] -= c * b.ln();
        }
        logs.push(c);
    }
    Ok(Lsq { coeffs, logs, residual })
}

/// Neville value at `0` of the interpolant through `(ts, ys)`.
fn neville_at_zero(ts: &[f64], ys: &[C64]) -> C64 {
    let mut p = ys.to_vec();
    let n = ts.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * ts[i] - p[i] * ts[i + k]) / (ts[i] - ts[i + k]);
        }
    }
    p[0]
}

fn richardson(f: &dyn Fn(f64) -> C64, window: &Window, degree: usize, r_max: usize) -> Vec<C64> {
    let (a, b) = (window.t_min, window.t_max);
    let n = degree + 1;
    let ts: Vec<f64> = (0..n)
        .map(|j| {
            let x = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect();
    let mut ys: Vec<C64> = ts.iter().map(|&t| f(t)).collect();
    let mut out = Vec::with_capacity(r_max + 1);
    for _ in 0..=r_max {
        let br = neville_at_zero(&ts, &ys);
        out.push(br);
        for (y, t) in ys.iter_mut().zip(&ts) {
            *y = (*y - br) / *t;
        }
    }
    out
}

/// Fits `f(t) = t^p Tr(...)` on `window` and reports `b_0..b_R`.
pub fn fit_asymptotics(
    f: &dyn Fn(f64) -> C64,
    p: u32,
    r_report: usize,
    window: &Window,
    cfg: &FitConfig,
) -> Result<AsymptoticSeries> {
    if !(window.t_min > 0.0 && window.t_max > window.t_min) {
        return Err(Error::WindowEmpty { t_min: window.t_min, t_max: window.t_max });
    }
    let degree = cfg.degree.max(r_report + 2);
    let need = (3 * (r_report + 1)).max(degree + 1);
    if cfg.points < need {
        return Err(Error::TooFewSamples { got: cfg.points, need });
    }
    let ts = grid(window, cfg.points);
    let ys: Vec<C64> = ts.iter().map(|&t| f(t)).collect();
    // same degree on a shortened window, which moves the extrapolation point
    let short = Window { t_min: window.t_min, t_max: window.t_min * (window.t_max / window.t_min).powf(0.75) };
    let ts_short = grid(&short, cfg.points);
    let ys_short: Vec<C64> = ts_short.iter().map(|&t| f(t)).collect();
    let family = |log_powers: Vec<i32>| -> Result<[Lsq; 3]> {
        let basis = |degree| Basis { degree, log_powers: log_powers.clone() };
        Ok([
            lsq(&ts, &ys, window, &basis(degree), r_report, cfg.cond_max)?,
            lsq(&ts, &ys, window, &basis(degree - 2), r_report, cfg.cond_max)?,
            lsq(&ts_short, &ys_short, &short, &basis(degree), r_report, cfg.cond_max)?,
        ])
    };
    let deviation = |fits: &[Lsq; 3], get: &dyn Fn(&Lsq) -> C64| -> f64 {
        (get(&fits[0]) - get(&fits[1])).norm().max((get(&fits[0]) - get(&fits[2])).norm())
    };
    let fits = family((0..cfg.log_terms).map(|i| (p as usize + i) as i32).collect())?;
    let spread: Vec<f64> = (0..=r_report).map(|r| deviation(&fits, &|l: &Lsq| l.coeffs[r])).collect();
    let [main, ..] = fits;
    let coeffs = match cfg.method {
        FitMethod::Lsq => main.coeffs,
        FitMethod::Richardson => richardson(f, window, degree, r_report),
    };
    Ok(AsymptoticSeries {
        p,
        coeffs,
        residual: main.residual,
        spread,
        truncation_bound: 0.0,
        source: Source::Fit,
        window: Some(*window),
        log_coeffs: main.logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: Window = Window { t_min: 0.5, t_max: 2.5 };

    #[test]
    fn affine_is_exact() {
        let f = |t: f64| C64::new(3.0 + 2.0 * t, 0.0);
        let s = fit_asymptotics(&f, 0, 2, &W, &FitConfig::default()).unwrap();
        assert!((s.coeff(0).re - 3.0).abs() < 1e-7);
        assert!((s.coeff(1).re - 2.0).abs() < 1e-6);
        assert!(s.coeff(2).norm() < 1e-5);
        assert!(s.residual < 1e-13);
    }

    #[test]
    fn taylor_of_exponential() {
        let f = |t: f64| C64::new((-t).exp(), t.sin());
        let s = fit_asymptotics(&f, 0, 4, &W, &FitConfig::default()).unwrap();
        let expect = [C64::new(1.0, 0.0), C64::new(-1.0, 1.0), C64::new(0.5, 0.0), C64::new(-1.0 / 6.0, -1.0 / 6.0)];
        for (r, e) in expect.iter().enumerate() {
            assert!((s.coeff(r) - e).norm() < 1e-7, "b_{r} = {}", s.coeff(r));
        }
    }

    #[test]
    fn richardson_agrees_with_lsq() {
        let f = |t: f64| C64::new(t / (1.0 - (-t).exp()), 0.0);
        let cfg = FitConfig { method: FitMethod::Richardson, ..FitConfig::default() };
        let r = fit_asymptotics(&f, 1, 2, &W, &cfg).unwrap();
        let l = fit_asymptotics(&f, 1, 2, &W, &FitConfig::default()).unwrap();
        for k in 0..3 {
            assert!((r.coeff(k) - l.coeff(k)).norm() < 1e-6);
        }
        assert!((r.coeff(2).re - 1.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_samples() {
        let f = |_t: f64| C64::new(1.0, 0.0);
        let cfg = FitConfig { points: 8, ..FitConfig::default() };
        assert!(matches!(fit_asymptotics(&f, 0, 2, &W, &cfg), Err(Error::TooFewSamples { .. })));
    }
}

//! Check lists for the `residues`, `suspend` and `cocycle` commands.

use num_complex::Complex64 as C64;

use super::verify::{base_p, is_even, model_checks, sphere_phi2_constant, transfer_checks};
use super::{Check, Lab, ModelName, Outcome, Tol};
use crate::error::{Error, Result};
use crate::models::quadrature::SpherePoly;
use crate::models::{nctorus_closed_values, ClosedKind, Provenance};
use crate::operator::{product, rank_one, Op};
use crate::qds::{Estimate, SuspElem, SuspendedTriple};

const ZERO: C64 = C64::new(0.0, 0.0);

fn generator_names(model: ModelName) -> &'static [&'static str] {
    match model {
        ModelName::Circle => &["1", "z", "z*"],
        ModelName::Sphere => &["1", "x", "y", "z"],
        ModelName::Nctorus => &["1", "u", "u*", "v", "v*"],
    }
}

/// `ζ^{(m)}` and the value at zero of every generator, `γ` rows on even
/// models, and the model's registered closed forms. An explicit generator
/// list restricts the table to those rows.
pub fn residue_checks(model: ModelName, generators: Option<&[String]>) -> Vec<Check> {
    let mut out = Vec::new();
    let p = base_p(model);
    let names: Vec<String> = match generators {
        Some(list) => list.to_vec(),
        None => generator_names(model).iter().map(|g| g.to_string()).collect(),
    };
    for g in names {
        for m in 1..=p {
            let g = g.clone();
            out.push(Check::new(format!("residues.{model}.{g}.m{m}"), move |lab| {
                let op = lab.instance(model)?.generator(&g)?.clone();
                let r: Estimate = lab.context(model)?.zeta_residue(&op, m)?.into();
                Ok(Outcome::new(None, r.value, Tol::Abs(1e-3), Provenance::Oracle).budget(r.error_budget))
            }));
        }
        out.push(Check::new(format!("residues.{model}.{g}.at_zero"), move |lab| {
            let op = lab.instance(model)?.generator(&g)?.clone();
            let (v, budget) = lab.context(model)?.zeta_at_zero(&op)?;
            Ok(Outcome::new(None, v, Tol::Abs(1e-3), Provenance::Oracle).budget(budget))
        }));
    }
    if generators.is_some() {
        return out;
    }
    if is_even(model) {
        for m in 1..=p {
            out.push(Check::new(format!("residues.{model}.gamma.m{m}"), move |lab| {
                let g = super::verify::base_op(lab, model, "gamma")?;
                let r: Estimate = lab.context(model)?.zeta_residue(&g, m)?.into();
                Ok(Outcome::new(ZERO, r.value, Tol::Abs(1e-6), Provenance::Identity).budget(r.error_budget))
            }));
        }
    }
    out.extend(model_checks(model));
    out
}

/// Transfer formulas against direct suspension traces, and the exact zeros
/// `ζ_{D_0}^{(s)}(1 ⊗ S^n) = 0` for `n ≠ 0`.
pub fn suspend_checks(model: ModelName) -> Vec<Check> {
    let mut out = transfer_checks("suspend", model);
    for n in [1i64, -1, 2, -3] {
        for s in 1..=base_p(model) + 1 {
            for direct in [false, true] {
                let route = if direct { "pipeline" } else { "formula" };
                out.push(Check::new(format!("suspend.{model}.shift_zero.n{n}.s{s}.{route}"), move |lab| {
                    let q = lab.suspension(model)?;
                    let e = q.elem_shift(n)?;
                    let v = if direct { q.direct_zeta0(&e, s)? } else { q.zeta0(&e, s)? };
                    Ok(Outcome::new(ZERO, v.value, Tol::Abs(1e-12), Provenance::Identity).budget(v.error_budget))
                }));
            }
        }
    }
    out
}

/// A finite-rank operator on ℓ²(ℕ) as a sum of matrix units `e_{ij}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSpec(pub Vec<(usize, usize)>);

impl KSpec {
    fn op(&self, q: &SuspendedTriple) -> Result<Op> {
        let mut acc = Op::zero(q.ell2());
        for &(i, j) in &self.0 {
            if i.max(j) >= q.size() {
                return Err(Error::IndexOutOfRange { index: i.max(j), dim: q.size() });
            }
            acc = acc.checked_add(&rank_one(q.ell2(), i, j)?)?;
        }
        Ok(acc)
    }
}

/// One tensor factor of a cochain argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElemSpec {
    /// `1 ⊗ S^n`.
    Shift(i64),
    /// `a ⊗ k` with `a` written in the model's generators.
    Tensor { base: String, k: KSpec },
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_k(s: &str) -> Result<KSpec> {
    let mut units = Vec::new();
    for term in s.split('+').map(str::trim) {
        if term == "p" {
            units.push((0, 0));
            continue;
        }
        let (i, j) = term
            .strip_prefix('e')
            .and_then(|r| r.split_once('.'))
            .ok_or_else(|| parse_err(format!("`{term}` is neither `p` nor `e<i>.<j>`")))?;
        let idx = |x: &str| x.trim().parse::<usize>().map_err(|_| parse_err(format!("bad index `{x}` in `{term}`")));
        units.push((idx(i)?, idx(j)?));
    }
    Ok(KSpec(units))
}

/// Parses a comma-separated tuple such as `z@e0.1, x@e1.2, y@e2.0` or
/// `S^1, S^-1`. An element is `S^<n>` or `<base>@<k>`, where `k` is a sum of
/// `p` (the projection onto `e_0`) and matrix units `e<i>.<j>`.
pub fn parse_tuple(s: &str) -> Result<Vec<ElemSpec>> {
    if s.trim().is_empty() {
        return Err(parse_err("empty tuple"));
    }
    s.split(',')
        .map(str::trim)
        .map(|item| {
            if let Some(n) = item.strip_prefix("S^") {
                return n.trim().parse().map(ElemSpec::Shift).map_err(|_| parse_err(format!("bad shift power in `{item}`")));
            }
            let (base, k) = item
                .split_once('@')
                .ok_or_else(|| parse_err(format!("`{item}` is neither `S^n` nor `<base>@<k>`")))?;
            if base.trim().is_empty() {
                return Err(parse_err(format!("missing base in `{item}`")));
            }
            Ok(ElemSpec::Tensor { base: base.trim().to_string(), k: parse_k(k)? })
        })
        .collect()
}

/// Base factor together with what is known about it in closed form.
enum Base {
    Monomial(i32, i32),
    Poly(SpherePoly),
    Other,
}

fn parse_power(s: &str, letter: char) -> Result<i32> {
    let rest = s.strip_prefix(letter).ok_or_else(|| parse_err(format!("expected `{letter}` in `{s}`")))?;
    match rest.strip_prefix('^') {
        None if rest.is_empty() => Ok(1),
        Some(n) => n.parse().map_err(|_| parse_err(format!("bad exponent in `{s}`"))),
        None => Err(parse_err(format!("unexpected `{rest}` after `{letter}`"))),
    }
}

/// Torus monomials are normal ordered: `u^a*v^b`, `u^a`, `v^b` or `1`.
fn parse_monomial(s: &str) -> Result<(i32, i32)> {
    let factors: Vec<&str> = s.split('*').map(str::trim).collect();
    match factors.as_slice() {
        ["1"] => Ok((0, 0)),
        [f] if f.starts_with('u') => Ok((parse_power(f, 'u')?, 0)),
        [f] => Ok((0, parse_power(f, 'v')?)),
        [fu, fv] => Ok((parse_power(fu, 'u')?, parse_power(fv, 'v')?)),
        _ => Err(parse_err(format!("`{s}` is not of the form u^a*v^b"))),
    }
}

fn base_factor(lab: &Lab, model: ModelName, s: &str) -> Result<(Op, Base)> {
    match model {
        ModelName::Nctorus => {
            let (a, b) = parse_monomial(s)?;
            Ok((lab.torus()?.monomial(a, b)?, Base::Monomial(a, b)))
        }
        ModelName::Sphere => {
            let f = SpherePoly::parse(s)?;
            Ok((lab.sphere()?.multiplication(&f)?, Base::Poly(f)))
        }
        ModelName::Circle => {
            let c = lab.circle()?;
            let n = match s {
                "1" => 0,
                "z*" => -1,
                _ => parse_power(s, 'z')?,
            };
            let g = c.generator(if n < 0 { "z*" } else { "z" })?;
            let op = if n == 0 { c.identity() } else { product(&vec![g; n.unsigned_abs() as usize])? };
            Ok((op, Base::Other))
        }
    }
}

fn closed_form(model: ModelName, lab: &Lab, bases: &[Base], ks: &[Op], all_shifts: bool) -> Result<Option<C64>> {
    let n = bases.len().max(1) - 1;
    if is_even(model) && (all_shifts || n == 0) {
        return Ok(Some(ZERO));
    }
    if n != 2 || ks.len() != 3 {
        return Ok(None);
    }
    let tr = product(&[&ks[0], &ks[1], &ks[2]])?.trace();
    Ok(match bases {
        [Base::Monomial(a0, b0), Base::Monomial(a1, b1), Base::Monomial(a2, b2)] => {
            let theta = lab.torus()?.theta();
            Some(nctorus_closed_values(ClosedKind::Phi2, [*a0, *a1, *a2], [*b0, *b1, *b2], theta) * tr)
        }
        [Base::Poly(f0), Base::Poly(f1), Base::Poly(f2)] => {
            Some(sphere_phi2_constant(&[f0.clone(), f1.clone(), f2.clone()]) * tr)
        }
        _ => None,
    })
}

/// `Σ²φ_n` on one tuple by both routes, their agreement, and the closed
/// form when one is known.
pub fn cocycle_checks(model: ModelName, tuple: Vec<ElemSpec>) -> Vec<Check> {
    let n = tuple.len().saturating_sub(1);
    let build = move |lab: &Lab| -> Result<(std::sync::Arc<SuspendedTriple>, Vec<SuspElem>, Option<C64>)> {
        let q = lab.suspension(model)?;
        let mut elems = Vec::new();
        let mut bases = Vec::new();
        let mut ks = Vec::new();
        for e in &tuple {
            match e {
                ElemSpec::Shift(m) => elems.push(q.elem_shift(*m)?),
                ElemSpec::Tensor { base, k } => {
                    let (a, kind) = base_factor(lab, model, base)?;
                    let k = k.op(&q)?;
                    elems.push(q.elem_ak(&a, &k)?);
                    bases.push(kind);
                    ks.push(k);
                }
            }
        }
        let all_shifts = ks.is_empty();
        let expected = if all_shifts || ks.len() == elems.len() {
            closed_form(model, lab, &bases, &ks, all_shifts)?
        } else {
            None
        };
        Ok((q, elems, expected))
    };
    let build = std::sync::Arc::new(build);
    let tol = |e: Option<C64>| match e {
        Some(v) if v.norm() > 0.0 => Tol::Rel(0.02),
        _ => Tol::Abs(1e-3),
    };
    let b1 = build.clone();
    let b2 = build.clone();
    vec![
        Check::new(format!("cocycle.{model}.phi{n}.formula"), move |lab| {
            let (q, elems, expected) = b1(lab)?;
            let v = q.sigma2_phi(&elems)?;
            Ok(Outcome::new(expected, v.value, tol(expected), Provenance::ClosedForm).budget(v.error_budget))
        }),
        Check::new(format!("cocycle.{model}.phi{n}.pipeline"), move |lab| {
            let (q, elems, expected) = b2(lab)?;
            let v = q.direct_phi(&elems)?;
            Ok(Outcome::new(expected, v.value, tol(expected), Provenance::ClosedForm).budget(v.error_budget))
        }),
        Check::new(format!("cocycle.{model}.phi{n}.agreement"), move |lab| {
            let (q, elems, _) = build(lab)?;
            let (f, d) = (q.sigma2_phi(&elems)?, q.direct_phi(&elems)?);
            Ok(Outcome::new(f.value, d.value, Tol::Budget { rel: 0.01 }, Provenance::Oracle)
                .budget(f.error_budget + d.error_budget))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tuples() {
        let t = parse_tuple("z@e0.1, x@p+e1.2, S^-3").unwrap();
        assert_eq!(t[0], ElemSpec::Tensor { base: "z".into(), k: KSpec(vec![(0, 1)]) });
        assert_eq!(t[1], ElemSpec::Tensor { base: "x".into(), k: KSpec(vec![(0, 0), (1, 2)]) });
        assert_eq!(t[2], ElemSpec::Shift(-3));
    }

    #[test]
    fn rejects_malformed_tuples() {
        for bad in ["", "z", "S^x", "@p", "z@q", "z@e1", "z@e1.b", "z@p,,y@p"] {
            assert!(matches!(parse_tuple(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn torus_monomials() {
        assert_eq!(parse_monomial("1").unwrap(), (0, 0));
        assert_eq!(parse_monomial("u").unwrap(), (1, 0));
        assert_eq!(parse_monomial("u^-2*v^3").unwrap(), (-2, 3));
        assert_eq!(parse_monomial("v^-1").unwrap(), (0, -1));
        assert!(parse_monomial("v*u").is_err());
        assert!(parse_monomial("w").is_err());
    }
}

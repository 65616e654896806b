use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::{ModelInstance, Provenance};
use crate::error::{Error, Result};
use crate::operator::{DiracData, Label, Op, Truncation};
use crate::series::{Growth, SpectrumDescriptor};

/// `D e_n = n e_n` on ℓ²(ℤ), `n ∈ [−Λ, Λ]`, with the bilateral shift `z e_n = e_{n+1}`.
pub fn circle_model(lambda: usize) -> Result<ModelInstance> {
    if lambda < 4 {
        return Err(Error::Config(format!("circle needs Λ ≥ 4, got {lambda}")));
    }
    let l = lambda as i64;
    let trunc = Truncation::labeled(format!("circle[{lambda}]"), (-l..=l).map(Label::Index).collect())?;
    let eig: Vec<f64> = (-l..=l).map(|n| n as f64).collect();
    let dirac = DiracData::new(&trunc, eig, 1)?;
    let dim = trunc.dim();
    let z = Op::from_triplets(&trunc, (0..dim - 1).map(|i| (i + 1, i, C64::new(1.0, 0.0))))?;
    let mut m = ModelInstance {
        name: "circle".into(),
        dirac,
        grading: None,
        generators: BTreeMap::new(),
        growth: Growth { c: 3.0, q: 1, guard: 4.0 },
        expectations: Vec::new(),
        spectrum: Some(SpectrumDescriptor::CircleAbs),
        log_terms: 0,
    };
    m.add_generator("1", Op::identity(&trunc), 1);
    m.add_generator("z*", z.adjoint(), 1);
    m.add_generator("z", z, 1);
    let one = Op::identity(&trunc);
    m.expect(
        "circle.zeta1.identity",
        "ζ^(1)(1) = b_0/2 with t·Tr(e^{−t|D|}) → 2",
        C64::new(1.0, 0.0),
        1e-6,
        Provenance::Oracle,
        move |ctx| Ok(ctx.zeta_residue(&one, 1)?.value),
    );
    let f = m.dirac.sign_op();
    m.expect(
        "circle.zeta1.sign",
        "ζ^(1)(F) = 0 for the symmetric spectrum",
        C64::new(0.0, 0.0),
        1e-6,
        Provenance::Oracle,
        move |ctx| Ok(ctx.zeta_residue(&f, 1)?.value),
    );
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::heat_trace;

    #[test]
    fn delta_of_z_is_z_on_positive_modes() {
        let m = circle_model(10).unwrap();
        let z = m.generator("z").unwrap();
        let dz = m.dirac.delta_pow(z, 1).unwrap();
        // columns n ≥ 1: |n+1| − |n| = 1; n = 0 sits on the shifted kernel
        for n in 1..10usize {
            let col = 10 + n;
            assert_eq!(dz.get(col + 1, col), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn heat_trace_matches_geometric_series() {
        let m = circle_model(200).unwrap();
        let t = 0.3f64;
        let exact = (-t).exp() + 2.0 * (-t).exp() / (1.0 - (-t).exp());
        let got = heat_trace(&m.identity(), &m.dirac, t).re;
        assert!((got - exact).abs() < 1e-9);
    }

    #[test]
    fn small_lambda_rejected() {
        assert!(circle_model(3).is_err());
    }
}

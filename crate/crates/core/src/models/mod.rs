//! Concrete spectral triples in the eigenbasis of their Dirac operators.

mod circle;
pub mod quadrature;
mod sphere;
mod torus;
pub mod wigner;

pub use circle::circle_model;
pub use sphere::{sphere_model, SphereModel};
pub use torus::{nctorus_closed_values, nctorus_model, ClosedKind, TorusModel, DEFAULT_THETA};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DiracData, Grading, Op};
use crate::series::{FitConfig, Growth, SpectrumDescriptor};
use crate::zeta::SpectralContext;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// A published closed form.
    ClosedForm,
    /// An independent numerical or exact oracle.
    Oracle,
    /// Follows immediately from a definition.
    Identity,
}

/// A named algebra element with its filtration index: the smallest `ℓ`
/// with the element in `I_ℓ`.
#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub op: Op,
    pub degree: u32,
}

type Evaluator = Arc<dyn Fn(&SpectralContext) -> Result<C64> + Send + Sync>;

/// A closed-form value paired with the computation that should reproduce it.
#[derive(Clone)]
pub struct Expectation {
    pub name: String,
    pub description: String,
    pub expected: C64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub compute: Evaluator,
}

impl fmt::Debug for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expectation")
            .field("name", &self.name)
            .field("expected", &self.expected)
            .field("tolerance", &self.tolerance)
            .field("provenance", &self.provenance)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub name: String,
    pub dirac: DiracData,
    pub grading: Option<Grading>,
    pub generators: BTreeMap<String, Generator>,
    pub growth: Growth,
    pub expectations: Vec<Expectation>,
    /// Closed-form heat trace of the identity, when registered.
    pub spectrum: Option<SpectrumDescriptor>,
    /// `t^r log t` terms, `r ≥ p`, present in heat traces of algebra elements.
    pub log_terms: usize,
}

impl ModelInstance {
    pub fn p(&self) -> u32 {
        self.dirac.p()
    }

    pub fn is_even(&self) -> bool {
        self.grading.is_some()
    }

    pub fn generator(&self, name: &str) -> Result<&Op> {
        self.generators
            .get(name)
            .map(|g| &g.op)
            .ok_or_else(|| Error::Config(format!("model {} has no generator `{name}`", self.name)))
    }

    pub fn identity(&self) -> Op {
        Op::identity(self.dirac.trunc())
    }

    pub fn context(&self, eps_tail: f64, fit: FitConfig) -> Result<SpectralContext> {
        SpectralContext::new(self.dirac.clone(), self.grading.clone(), self.growth, eps_tail, self.fit_config(fit))
    }

    /// `fit` with at least the model's log terms.
    pub fn fit_config(&self, fit: FitConfig) -> FitConfig {
        FitConfig { log_terms: fit.log_terms.max(self.log_terms), ..fit }
    }

    fn add_generator(&mut self, name: &str, op: Op, degree: u32) {
        self.generators.insert(name.to_string(), Generator { name: name.to_string(), op, degree });
    }

    fn expect(
        &mut self,
        name: &str,
        description: &str,
        expected: C64,
        tolerance: f64,
        provenance: Provenance,
        compute: impl Fn(&SpectralContext) -> Result<C64> + Send + Sync + 'static,
    ) {
        self.expectations.push(Expectation {
            name: name.to_string(),
            description: description.to_string(),
            expected,
            tolerance,
            provenance,
            compute: Arc::new(compute),
        });
    }
}

use std::sync::{Arc, OnceLock};

use super::{ModelName, RunConfig};
use crate::error::{Error, Result};
use crate::models::{circle_model, nctorus_model, sphere_model, ModelInstance, SphereModel, TorusModel};
use crate::qds::SuspendedTriple;
use crate::series::FitConfig;
use crate::zeta::SpectralContext;

type Slot<T> = OnceLock<std::result::Result<Arc<T>, String>>;

fn get<T>(slot: &Slot<T>, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
    slot.get_or_init(|| build().map(Arc::new).map_err(|e| e.to_string())).clone().map_err(Error::Upstream)
}

/// Models, contexts and suspensions of one run, built on first use and shared
/// between checks.
pub struct Lab {
    cfg: RunConfig,
    circle: Slot<ModelInstance>,
    sphere: Slot<SphereModel>,
    torus: Slot<TorusModel>,
    contexts: [Slot<SpectralContext>; 3],
    suspensions: [Slot<SuspendedTriple>; 3],
}

impl Lab {
    pub fn new(cfg: RunConfig) -> Self {
        Lab {
            cfg,
            circle: OnceLock::new(),
            sphere: OnceLock::new(),
            torus: OnceLock::new(),
            contexts: Default::default(),
            suspensions: Default::default(),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn fit(&self) -> FitConfig {
        self.cfg.fit.fit_config()
    }

    pub fn eps_tail(&self) -> f64 {
        self.cfg.fit.eps_tail
    }

    pub fn circle(&self) -> Result<Arc<ModelInstance>> {
        get(&self.circle, || circle_model(self.cfg.model.lambda))
    }

    pub fn sphere(&self) -> Result<Arc<SphereModel>> {
        get(&self.sphere, || sphere_model(self.cfg.model.lmax))
    }

    pub fn torus(&self) -> Result<Arc<TorusModel>> {
        get(&self.torus, || nctorus_model(self.cfg.model.theta, self.cfg.model.lambda))
    }

    pub fn instance(&self, model: ModelName) -> Result<ModelInstance> {
        Ok(match model {
            ModelName::Circle => (*self.circle()?).clone(),
            ModelName::Sphere => self.sphere()?.instance.clone(),
            ModelName::Nctorus => self.torus()?.instance.clone(),
        })
    }

    fn with_instance<T>(&self, model: ModelName, f: impl FnOnce(&ModelInstance) -> Result<T>) -> Result<T> {
        match model {
            ModelName::Circle => f(&*self.circle()?),
            ModelName::Sphere => f(&self.sphere()?.instance),
            ModelName::Nctorus => f(&self.torus()?.instance),
        }
    }

    /// Heat-trace context of a base model.
    pub fn context(&self, model: ModelName) -> Result<Arc<SpectralContext>> {
        get(&self.contexts[model as usize], || {
            self.with_instance(model, |m| m.context(self.eps_tail(), self.fit()))
        })
    }

    pub fn suspension(&self, model: ModelName) -> Result<Arc<SuspendedTriple>> {
        get(&self.suspensions[model as usize], || {
            self.with_instance(model, |m| {
                SuspendedTriple::new(m, self.cfg.model.suspension_size, self.eps_tail(), self.fit())
            })
        })
    }
}

//! Heat-trace asymptotics: exact rational series, truncated traces and fits.

mod exact;
mod fit;
mod heat;
mod rational;

pub use exact::{exact_expansion, SpectrumDescriptor};
pub use fit::{fit_asymptotics, AsymptoticSeries, FitConfig, FitMethod, Source};
pub use heat::{
    gaussian_window, heat_trace, tail_t_min, truncation_window, Growth, HeatProfile, Window, T_MIN_CAP,
};
pub use rational::{n_coefficients, rat, RationalSeries};

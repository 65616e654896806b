//! Residue cocycles of quantum double suspensions.
//!
//! The crate computes Connes–Moscovici residue functionals for finite
//! truncations of spectral triples (circle, round two-sphere, noncommutative
//! two-torus) and for their quantum double suspensions, through heat-trace
//! asymptotics. Every transfer formula is available twice: in closed form
//! over base residues, and directly on the suspended truncation.

pub mod campaign;
pub mod cocycle;
pub mod error;
pub mod models;
pub mod operator;
pub mod qds;
pub mod series;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

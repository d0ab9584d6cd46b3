//! Explicit stationary-phase expansions for oscillatory integrals
//! `∫ U(p) e^{iωψ(p)} dp` whose amplitude has algebraic endpoint singularities,
//! together with certified remainder bounds, a high-accuracy quadrature oracle,
//! and an application to the decay of the 1-D free Schrödinger equation.

pub mod catalog;
pub mod error;
pub mod expansion;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod quadratic;
pub mod schrodinger;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

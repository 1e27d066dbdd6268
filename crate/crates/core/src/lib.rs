//! Numerical inverse scattering for the Gaussian reflection coefficient
//! `R(k) = -sqrt(gamma) e^{-k^2/4}` and the resulting law of the largest
//! real eigenvalue of the real Ginibre ensemble.

pub mod acceptance;
pub mod asymptotics;
pub mod conserved;
pub mod distribution;
pub mod error;
pub mod ginibre_mc;
pub mod glm;
pub mod param;
pub mod mat2;
pub mod numerics;
pub mod quadrature;
pub mod rhp;
pub mod scattering;
pub mod special;

pub use error::{Error, Result};
pub use param::GammaParam;

/// Double-precision Gauss–Legendre rule.
pub type GaussLegendre64 = quadrature::GaussLegendre<f64>;
/// Single-precision Gauss–Legendre rule.
pub type GaussLegendre32 = quadrature::GaussLegendre<f32>;

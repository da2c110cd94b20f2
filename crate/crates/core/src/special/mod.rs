//! Overflow-safe special functions: scaled modified Bessel evaluation, the
//! interface ratio bundle, the coil integral psi, and elliptic integrals.

pub mod bessel;
pub mod elliptic;
pub mod psi;

pub use bessel::{ratio_bundle, scaled_bessel_i, scaled_bessel_k, RatioBundle, ScaledBessel};
pub use psi::psi;

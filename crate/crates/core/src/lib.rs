//! Forward solver for the transient eddy-current response of a
//! transmitter–receiver coil pair inside a multilayer cylindrical conductor
//! stack.
//!
//! The frequency/Laplace-domain voltage is assembled from a truncated-domain
//! eigenvalue sum over an overflow-safe transfer-matrix reflection
//! coefficient; the step response is recovered by Stehfest summation,
//! FFT-based numerical inversion with epsilon acceleration, or real-axis
//! pole extraction, with a principled short/long-time hybrid switching at
//! the diffusion transition time.

mod dd;
pub mod error;
pub mod laplace;
pub mod medium;
pub mod model;
mod quad;
pub mod special;
pub mod transient;

pub use error::{Error, Result};

/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

pub use medium::{
    layer_wavenumber, reflection, transfer_matrix_legacy, transfer_matrix_scaled, ChainMethod,
    Layer, LayerStack, Matrix2, ReflectionValue,
};
pub use model::{
    air_inductance, coupling, eigenvalues, place_coils, voltage_integral, voltage_sum, CoilSpec,
    ProbeAssembly, TruncatedDomain,
};
pub use laplace::{
    find_poles, nilt_fft, residues, stehfest_invert, stehfest_weights, wynn_epsilon, NiltPlan,
    PoleSet, StehfestWeights,
};
pub use special::{psi, ratio_bundle, scaled_bessel_i, scaled_bessel_k, RatioBundle, ScaledBessel};
pub use transient::{
    dominant_mode, pole_scan_step, pole_table, thinning_scenarios, transient_voltage,
    transition_time, DominantMode, InversionMethod, TransientMetadata, TransientOptions,
    TransientResult,
};

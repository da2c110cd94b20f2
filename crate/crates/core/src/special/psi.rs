//! The coil radial integral psi(x1, x2) = ∫ x·I_1(x) dx.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::bessel::scaled_bessel_i;

/// Largest argument for which x·I_1(x) still fits in a double.
const PSI_MAX_ARG: f64 = 705.0;

/// ∫_{x1}^{x2} x I_1(x) dx by adaptive Gauss–Kronrod to 1e-12 relative.
pub fn psi(x1: f64, x2: f64) -> Result<f64> {
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::Domain(format!("non-finite psi bounds ({x1}, {x2})")));
    }
    if x1 < 0.0 || x2 < x1 {
        return Err(Error::Domain(format!(
            "psi bounds must satisfy 0 <= x1 <= x2, got ({x1}, {x2})"
        )));
    }
    if x2 > PSI_MAX_ARG {
        return Err(Error::Overflow(format!(
            "x I_1(x) exceeds the double range beyond x = {PSI_MAX_ARG}, got {x2}"
        )));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    let integrand = |x: f64| {
        let i1 = scaled_bessel_i(1, Complex64::new(x, 0.0))
            .expect("finite nonnegative argument")
            .value()
            .re;
        Complex64::new(x * i1, 0.0)
    };
    let v = integrate(integrand, x1, x2, 1e-12, 1e-300, 10_000)?;
    Ok(v.re)
}

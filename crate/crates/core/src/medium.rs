//! Layered cylindrical medium: per-layer wavenumbers, interface transfer
//! matrices (plain and overflow-safe), and the reflection coefficient.
//!
//! Regions are numbered from the outside in: layer 1 extends to infinity
//! beyond radius b_1, layer n occupies b_n < r < b_{n-1}, and the innermost
//! region N+1 (inside b_N, where the coils sit) is air. Interface n at
//! radius b_n separates layer n from layer n+1. The boundary condition at
//! infinity keeps only the decaying K solution in layer 1, and the
//! reflection coefficient is read off in the coil region.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::bessel::{interface_mantissas, ratio_bundle};
use crate::MU0;

/// One homogeneous cylindrical layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    /// Electrical conductivity in S/m (0 for air).
    pub sigma: f64,
    /// Relative magnetic permeability.
    pub mu_r: f64,
}

impl Layer {
    pub const AIR: Layer = Layer { sigma: 0.0, mu_r: 1.0 };

    pub fn new(sigma: f64, mu_r: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("conductivity must be >= 0, got {sigma}")));
        }
        if !(mu_r > 0.0 && mu_r.is_finite()) {
            return Err(Error::Domain(format!("relative permeability must be > 0, got {mu_r}")));
        }
        Ok(Layer { sigma, mu_r })
    }

    pub fn is_air(&self) -> bool {
        self.sigma == 0.0 && self.mu_r == 1.0
    }

    pub fn is_conductive(&self) -> bool {
        self.sigma > 0.0
    }
}

/// Ordered stack of concentric layers, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
    radii: Vec<f64>,
}

impl LayerStack {
    /// `layers[0]` is the outermost (semi-infinite) region; `radii[n]` is the
    /// interface below layer n, strictly decreasing and positive.
    pub fn new(layers: Vec<Layer>, radii: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Domain("a stack needs at least one layer".into()));
        }
        if layers.len() != radii.len() {
            return Err(Error::Domain(format!(
                "layer/radius count mismatch: {} layers, {} radii",
                layers.len(),
                radii.len()
            )));
        }
        for (i, &r) in radii.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("radii must be positive, radii[{i}] = {r}")));
            }
            if i > 0 && r >= radii[i - 1] {
                return Err(Error::Domain(format!(
                    "radii must be strictly decreasing, radii[{}] = {} >= radii[{}] = {}",
                    i,
                    r,
                    i - 1,
                    radii[i - 1]
                )));
            }
        }
        Ok(LayerStack { layers, radii })
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Radius of the innermost interface b_N (bore of the coil region).
    pub fn bore_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn is_all_air(&self) -> bool {
        self.layers.iter().all(Layer::is_air)
    }

    /// Replace one layer, preserving the radii.
    pub fn with_layer(&self, index: usize, layer: Layer) -> Result<Self> {
        let mut layers = self.layers.clone();
        layers[index] = layer;
        LayerStack::new(layers, self.radii.clone())
    }

    /// Replace one interface radius (revalidating the ordering).
    pub fn with_radius(&self, index: usize, radius: f64) -> Result<Self> {
        let mut radii = self.radii.clone();
        radii[index] = radius;
        LayerStack::new(self.layers.clone(), radii)
    }
}

/// Radial wavenumber a = sqrt(q^2 + s mu0 mu_r sigma), principal root.
pub fn layer_wavenumber(q: f64, s: Complex64, layer: &Layer) -> Complex64 {
    (Complex64::new(q * q, 0.0) + s * (MU0 * layer.mu_r * layer.sigma)).sqrt()
}

/// A 2x2 complex matrix acting on the (C, D) potential coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

impl Matrix2 {
    pub fn identity() -> Self {
        Matrix2([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ])
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        let a = &self.0;
        let b = &rhs.0;
        Matrix2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Which chain formulation evaluates the reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMethod {
    /// Plain Bessel values; overflows by design for large |a·b|.
    Legacy,
    /// Scaled-ratio formulation; finite for any physical stack.
    Scaled,
}

/// Reflection coefficient with its numerator/denominator split for the
/// real-axis pole search. `r = numerator / denominator` always holds; for
/// the scaled method the pair carries a common positive rescaling, which
/// cancels in `r` and leaves the denominator's zeros (the poles) intact.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionValue {
    pub r: Complex64,
    pub numerator: Complex64,
    pub denominator: Complex64,
}

/// Wavenumbers of the regions either side of interface n (1-based).
fn interface_wavenumbers(q: f64, s: Complex64, stack: &LayerStack, n: usize) -> (Complex64, Complex64, f64, f64) {
    let outer = &stack.layers()[n - 1];
    let inner = if n < stack.n_layers() {
        stack.layers()[n]
    } else {
        Layer::AIR
    };
    let a_out = layer_wavenumber(q, s, outer);
    let a_in = layer_wavenumber(q, s, &inner);
    (a_out, a_in, outer.mu_r, inner.mu_r)
}

fn check_interface_index(stack: &LayerStack, n: usize) -> Result<()> {
    if n == 0 || n > stack.n_layers() {
        return Err(Error::Domain(format!(
            "interface index {n} out of range 1..={}",
            stack.n_layers()
        )));
    }
    Ok(())
}

/// Interface transfer matrix from plain (unscaled) Bessel values. The
/// prefactor a_in·b/beta_in is included. Raises an overflow error as soon
/// as any unscaled value leaves the double range.
pub fn transfer_matrix_legacy(q: f64, s: Complex64, stack: &LayerStack, n: usize) -> Result<Matrix2> {
    check_interface_index(stack, n)?;
    let b = stack.radii()[n - 1];
    let (a_out, a_in, mu_out, mu_in) = interface_wavenumbers(q, s, stack, n);
    let beta_out = a_out / mu_out;
    let beta_in = a_in / mu_in;
    let zo = a_out * b;
    let zi = a_in * b;

    let i0_o = crate::special::scaled_bessel_i(0, zo)?.value();
    let i1_o = crate::special::scaled_bessel_i(1, zo)?.value();
    let k0_o = crate::special::scaled_bessel_k(0, zo)?.value();
    let k1_o = crate::special::scaled_bessel_k(1, zo)?.value();
    let i0_i = crate::special::scaled_bessel_i(0, zi)?.value();
    let i1_i = crate::special::scaled_bessel_i(1, zi)?.value();
    let k0_i = crate::special::scaled_bessel_k(0, zi)?.value();
    let k1_i = crate::special::scaled_bessel_k(1, zi)?.value();

    for v in [i0_o, i1_o, k0_o, k1_o, i0_i, i1_i, k0_i, k1_i] {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "unscaled Bessel value overflows at interface {n} (|a·b| ~ {:.3e})",
                zo.norm().max(zi.norm())
            )));
        }
    }

    let pref = a_in * b / beta_in;
    let m = Matrix2([
        [
            pref * (beta_in * k0_i * i1_o + beta_out * i0_o * k1_i),
            pref * (beta_in * k0_i * k1_o - beta_out * k0_o * k1_i),
        ],
        [
            pref * (beta_in * i0_i * i1_o - beta_out * i0_o * i1_i),
            pref * (beta_in * i0_i * k1_o + beta_out * k0_o * i1_i),
        ],
    ]);
    if !m.is_finite() {
        return Err(Error::Overflow(format!(
            "transfer matrix overflows at interface {n}"
        )));
    }
    Ok(m)
}

/// Normalized interface transfer matrix built from the ratio bundle. Every
/// entry is a product of bounded ratios, so the matrix stays finite for
/// arbitrarily large conductivity–frequency products. It equals the plain
/// matrix up to the per-interface normalization (a scalar multiple), which
/// cancels in the reflection coefficient.
pub fn transfer_matrix_scaled(q: f64, s: Complex64, stack: &LayerStack, n: usize) -> Result<Matrix2> {
    check_interface_index(stack, n)?;
    let radii = stack.radii();
    let b = radii[n - 1];
    let b_prev = if n >= 2 { radii[n - 2] } else { radii[0] };
    let b_next = if n < stack.n_layers() { radii[n] } else { radii[n - 1] };
    let (a_out, a_in, mu_out, mu_in) = interface_wavenumbers(q, s, stack, n);
    let beta_out = a_out / mu_out;
    let beta_in = a_in / mu_in;

    let rb = ratio_bundle(a_out, a_in, b_prev, b, b_next)?;
    let ip_out = beta_out * rb.i_slope_outer;
    let kp_out = beta_out * rb.k_slope_outer;
    let ip_in = beta_in * rb.i_slope_inner;
    let kp_in = beta_in * rb.k_slope_inner;
    let den = ip_in + kp_in;

    Ok(Matrix2([
        [
            (ip_out + kp_in) * rb.i_ratio * rb.k_ratio / den,
            (kp_in - kp_out) * rb.k_ratio / den,
        ],
        [
            (ip_in - ip_out) * rb.i_ratio / den,
            (ip_in + kp_out) / den,
        ],
    ]))
}

/// Reflection coefficient R(q, s) of the full stack.
///
/// The chain starts at the outermost interface with the decaying-only
/// boundary vector and is multiplied inward in a fixed serial order. The
/// scaled method propagates mantissa matrices with per-region exponential
/// decay factors; every extracted scale is real positive, so the
/// denominator stays real on the real s-axis (the pole-search requirement)
/// and nothing overflows.
pub fn reflection(q: f64, s: Complex64, stack: &LayerStack, method: ChainMethod) -> Result<ReflectionValue> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("q must be positive and finite, got {q}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite Laplace variable {s}")));
    }
    match method {
        ChainMethod::Legacy => reflection_legacy(q, s, stack),
        ChainMethod::Scaled => reflection_scaled(q, s, stack),
    }
}

fn reflection_legacy(q: f64, s: Complex64, stack: &LayerStack) -> Result<ReflectionValue> {
    let mut u = Matrix2::identity();
    for n in 1..=stack.n_layers() {
        let t = transfer_matrix_legacy(q, s, stack, n)?;
        u = t.mul(&u);
        if !u.is_finite() {
            return Err(Error::Overflow(format!(
                "chain product overflows after interface {n}"
            )));
        }
    }
    let num = u.0[0][1];
    let den = u.0[1][1];
    if den.norm() == 0.0 {
        return Err(Error::PoleHit { s: s.re });
    }
    Ok(ReflectionValue { r: num / den, numerator: num, denominator: den })
}

fn reflection_scaled(q: f64, s: Complex64, stack: &LayerStack) -> Result<ReflectionValue> {
    let radii = stack.radii();
    let n_layers = stack.n_layers();
    let mut v0 = Complex64::new(0.0, 0.0);
    let mut v1 = Complex64::new(1.0, 0.0);
    for n in 1..=n_layers {
        let b = radii[n - 1];
        let (a_out, a_in, mu_out, mu_in) = interface_wavenumbers(q, s, stack, n);
        if n >= 2 {
            // decay of the I component across layer n (thickness b_{n-1} - b_n)
            let x = a_out.re * (radii[n - 2] - b);
            v0 *= (-2.0 * x).exp();
        }
        let beta_out = a_out / mu_out;
        let beta_in = a_in / mu_in;
        let m = interface_mantissas(a_out * b, a_in * b)?;
        let t00 = beta_out * m.i0_o * m.k1_i + beta_in * m.k0_i * m.i1_o;
        let t01 = beta_in * m.k0_i * m.k1_o - beta_out * m.k0_o * m.k1_i;
        let t10 = beta_in * m.i0_i * m.i1_o - beta_out * m.i0_o * m.i1_i;
        let t11 = beta_in * m.i0_i * m.k1_o + beta_out * m.k0_o * m.i1_i;
        let w0 = t00 * v0 + t01 * v1;
        let w1 = t10 * v0 + t11 * v1;
        let scale = w0.norm().max(w1.norm());
        if scale > 0.0 && scale.is_finite() {
            v0 = w0 / scale;
            v1 = w1 / scale;
        } else {
            v0 = w0;
            v1 = w1;
        }
    }
    if !(v0.is_finite() && v1.is_finite()) {
        return Err(Error::NonFinite(format!("reflection chain at q={q}, s={s}")));
    }
    // innermost region is air: a_{N+1} = q, and U12/U22 carries e^{-2 q b_N}
    let tail = (-2.0 * q * stack.bore_radius()).exp();
    let num = v0 * tail;
    let den = v1;
    if den.norm() == 0.0 {
        return Err(Error::PoleHit { s: s.re });
    }
    Ok(ReflectionValue { r: num / den, numerator: num, denominator: den })
}

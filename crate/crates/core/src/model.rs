//! Coil geometry, truncated-domain eigenvalues, coupling factors and the
//! frequency/Laplace-domain voltage assembly.
//!
//! The induced receiver voltage is assembled from the eigenvalue sum over
//! the truncated axial domain; the semi-infinite spectral integral is kept
//! as an independent validation path. Only the eddy-current (reflected)
//! part of the voltage is computed; the direct air coupling is excluded,
//! so an all-air stack gives exactly zero.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{reflection, ChainMethod, LayerStack};
use crate::quad::integrate;
use crate::special::elliptic::{ellipe, ellipk};
use crate::special::psi;
use crate::MU0;

/// Rectangular-cross-section coaxial coil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilSpec {
    /// Inner winding radius (m).
    pub r1: f64,
    /// Outer winding radius (m).
    pub r2: f64,
    /// Bottom height (m).
    pub z1: f64,
    /// Top height (m).
    pub z2: f64,
    /// Number of turns.
    pub turns: f64,
}

impl CoilSpec {
    pub fn new(r1: f64, r2: f64, z1: f64, z2: f64, turns: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > r1 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::Domain(format!("coil radii must satisfy 0 < r1 < r2, got ({r1}, {r2})")));
        }
        if !(z1 < z2 && z1.is_finite() && z2.is_finite()) {
            return Err(Error::Domain(format!("coil heights must satisfy z1 < z2, got ({z1}, {z2})")));
        }
        if !(turns > 0.0 && turns.is_finite()) {
            return Err(Error::Domain(format!("turn count must be positive, got {turns}")));
        }
        Ok(CoilSpec { r1, r2, z1, z2, turns })
    }

    pub fn length(&self) -> f64 {
        self.z2 - self.z1
    }
}

/// Axial truncation (0, h) with Dirichlet walls and the mode count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedDomain {
    pub h: f64,
    pub n_modes: usize,
}

impl TruncatedDomain {
    pub fn new(h: f64, n_modes: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("domain length must be positive, got {h}")));
        }
        if n_modes == 0 {
            return Err(Error::Domain("mode count must be at least 1".into()));
        }
        Ok(TruncatedDomain { h, n_modes })
    }
}

/// Transmitter/receiver pair and the drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeAssembly {
    pub transmitter: CoilSpec,
    pub receiver: CoilSpec,
    /// Step amplitude I_0 (or phasor amplitude for frequency sweeps), A.
    pub drive_amplitude: f64,
}

/// Discrete eigenvalues q_i = i pi / h, i = 1..=M.
pub fn eigenvalues(domain: &TruncatedDomain) -> Vec<f64> {
    (1..=domain.n_modes)
        .map(|i| i as f64 * std::f64::consts::PI / domain.h)
        .collect()
}

/// Coil heights from the domain midplane: transmitter bottom at h/2,
/// receiver below it separated by the axial gap.
pub fn place_coils(h: f64, l_t: f64, l_r: f64, gap: f64) -> Result<(f64, f64, f64, f64)> {
    if !(h > 0.0 && l_t > 0.0 && l_r > 0.0 && gap >= 0.0) {
        return Err(Error::Domain(format!(
            "placement needs h, l_T, l_R > 0 and gap >= 0, got ({h}, {l_t}, {l_r}, {gap})"
        )));
    }
    let z1t = 0.5 * h;
    let z2t = z1t + l_t;
    let z2r = 0.5 * h - gap;
    let z1r = z2r - l_r;
    if z1r <= 0.0 || z2t >= h {
        return Err(Error::Domain(format!(
            "coils do not fit inside (0, {h}): z range [{z1r}, {z2t}]"
        )));
    }
    Ok((z1t, z2t, z1r, z2r))
}

/// Coupling factor Y(q) of one coil:
/// w/((r2-r1)(z2-z1)) psi(q r1, q r2) (cos(q z1) - cos(q z2)).
pub fn coupling(q: f64, coil: &CoilSpec) -> f64 {
    assert!(q > 0.0, "coupling needs q > 0");
    let shape = psi(q * coil.r1, q * coil.r2).expect("coil radial integral");
    coil.turns / ((coil.r2 - coil.r1) * (coil.z2 - coil.z1))
        * shape
        * ((q * coil.z1).cos() - (q * coil.z2).cos())
}

/// Per-mode weights Y_T(q_i) Y_R(q_i) / q_i^6 shared by the voltage sum and
/// the transient assembly.
pub(crate) fn modal_weights(assembly: &ProbeAssembly, domain: &TruncatedDomain) -> Vec<(f64, f64)> {
    eigenvalues(domain)
        .into_iter()
        .map(|q| {
            let w = coupling(q, &assembly.transmitter) * coupling(q, &assembly.receiver) / q.powi(6);
            (q, w)
        })
        .collect()
}

/// Truncated-domain voltage V(s) = (4 mu0 pi / h) s I sum_i R(q_i, s)/q_i^6 Y_T Y_R.
/// With s = j omega this is the frequency-domain induced voltage phasor.
pub fn voltage_sum(
    s: Complex64,
    assembly: &ProbeAssembly,
    stack: &LayerStack,
    domain: &TruncatedDomain,
) -> Result<Complex64> {
    let weights = modal_weights(assembly, domain);
    let sum = modal_sum(s, stack, &weights)?;
    Ok(Complex64::new(4.0 * MU0 * std::f64::consts::PI / domain.h * assembly.drive_amplitude, 0.0)
        * s
        * sum)
}

/// Kahan-compensated fixed-order sum of R(q_i, s) * w_i.
pub(crate) fn modal_sum(s: Complex64, stack: &LayerStack, weights: &[(f64, f64)]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for &(q, w) in weights {
        let r = reflection(q, s, stack, ChainMethod::Scaled)?;
        let term = r.r * w - comp;
        let t = acc + term;
        comp = (t - acc) - term;
        acc = t;
    }
    Ok(acc)
}

/// Frequency-domain voltage by the semi-infinite spectral integral
/// (validation path for the truncated-domain sum).
pub fn voltage_integral(
    omega: f64,
    assembly: &ProbeAssembly,
    stack: &LayerStack,
) -> Result<Complex64> {
    if stack.is_all_air() {
        // the reflected part vanishes identically; the coil-shape factors
        // alone grow without bound, so skip the scan
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = Complex64::new(0.0, omega);
    let t = &assembly.transmitter;
    let r = &assembly.receiver;
    let integrand = |q: f64| -> Result<Complex64> {
        if q <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let refl = reflection(q, s, stack, ChainMethod::Scaled)?.r;
        let bracket = (q * (r.z1 - t.z1)).cos() - (q * (r.z2 - t.z1)).cos()
            - (q * (r.z1 - t.z2)).cos()
            + (q * (r.z2 - t.z2)).cos();
        let shape_t = psi(q * t.r1, q * t.r2)?;
        let shape_r = psi(q * r.r1, q * r.r2)?;
        Ok(refl * (shape_t * shape_r * bracket / q.powi(6)))
    };

    // locate the integrand peak, then extend until the tail is negligible
    let b1 = stack.radii()[0];
    let mut peak = 0.0f64;
    let mut q_hi = 0.5 / b1;
    let mut probe = q_hi;
    let mut below = 0;
    loop {
        let g = integrand(probe)?.norm();
        peak = peak.max(g);
        if g < 1e-14 * peak && peak > 0.0 {
            below += 1;
            if below >= 2 {
                q_hi = probe;
                break;
            }
        } else {
            below = 0;
        }
        probe *= 1.3;
        if probe * t.r2 > 650.0 {
            q_hi = 650.0 / t.r2;
            break;
        }
    }

    let val = integrate(
        |q| integrand(q).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        0.0,
        q_hi,
        1e-8,
        1e-300,
        20_000,
    )?;
    if !val.re.is_finite() || !val.im.is_finite() {
        return Err(Error::NonFinite("spectral integrand".into()));
    }

    let c_t = t.turns / ((t.r2 - t.r1) * (t.z2 - t.z1));
    let c_r = r.turns / ((r.r2 - r.r1) * (r.z2 - r.z1));
    Ok(Complex64::new(0.0, 2.0 * omega * MU0 * assembly.drive_amplitude * c_t * c_r) * val)
}

/// Mutual inductance of two coaxial circular filaments.
fn filament_mutual(ra: f64, rb: f64, dz: f64) -> f64 {
    let m = 4.0 * ra * rb / ((ra + rb) * (ra + rb) + dz * dz);
    let k = m.sqrt();
    MU0 * (ra * rb).sqrt() * ((2.0 / k - k) * ellipk(m) - 2.0 / k * ellipe(m))
}

/// Air-core self-inductance of a rectangular-cross-section coil by filament
/// subdivision: the winding window is split into an n x n grid of filaments
/// carrying w/n^2 turns each; cross terms use the coaxial-loop mutual, the
/// self term uses the geometric-mean-distance ring formula.
pub fn air_inductance(coil: &CoilSpec) -> f64 {
    const N: usize = 40;
    let dr = (coil.r2 - coil.r1) / N as f64;
    let dz = (coil.z2 - coil.z1) / N as f64;
    let gmd = 0.2235 * (dr + dz);
    let per_filament = coil.turns / (N * N) as f64;

    let mut rs = Vec::with_capacity(N * N);
    let mut zs = Vec::with_capacity(N * N);
    for i in 0..N {
        for j in 0..N {
            rs.push(coil.r1 + (i as f64 + 0.5) * dr);
            zs.push(coil.z1 + (j as f64 + 0.5) * dz);
        }
    }

    let mut total = 0.0f64;
    for i in 0..rs.len() {
        total += MU0 * rs[i] * ((8.0 * rs[i] / gmd).ln() - 2.0);
        for j in (i + 1)..rs.len() {
            total += 2.0 * filament_mutual(rs[i], rs[j], zs[i] - zs[j]);
        }
    }
    total * per_filament * per_filament
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::Layer;

    fn table1_assembly(h: f64) -> ProbeAssembly {
        let (z1t, z2t, z1r, z2r) = place_coils(h, 0.040, 0.010, 0.010).unwrap();
        ProbeAssembly {
            transmitter: CoilSpec::new(0.020, 0.030, z1t, z2t, 1600.0).unwrap(),
            receiver: CoilSpec::new(0.020, 0.030, z1r, z2r, 10000.0).unwrap(),
            drive_amplitude: 1.0,
        }
    }

    fn air_stack() -> LayerStack {
        LayerStack::new(vec![Layer::AIR; 4], vec![0.070, 0.060, 0.050, 0.040]).unwrap()
    }

    #[test]
    fn eigenvalue_rule() {
        let d = TruncatedDomain::new(std::f64::consts::PI, 3).unwrap();
        let q = eigenvalues(&d);
        assert!((q[0] - 1.0).abs() < 1e-15);
        assert!((q[1] - 2.0).abs() < 1e-15);
        assert!((q[2] - 3.0).abs() < 1e-15);
        let d = TruncatedDomain::new(3.0, 1).unwrap();
        assert!((eigenvalues(&d)[0] - 1.0471975511965976).abs() < 1e-14);
        assert!(TruncatedDomain::new(3.0, 0).is_err());
    }

    #[test]
    fn placement_formulas() {
        let (z1t, z2t, z1r, z2r) = place_coils(3.0, 0.04, 0.01, 0.01).unwrap();
        assert!((z1t - 1.5).abs() < 1e-15);
        assert!((z2t - 1.54).abs() < 1e-15);
        assert!((z1r - 1.48).abs() < 1e-15);
        assert!((z2r - 1.49).abs() < 1e-15);
        // degenerate receiver: gap 0 and vanishing length collapse to h/2
        let (_, _, z1r, z2r) = place_coils(3.0, 0.04, 1e-12, 0.0).unwrap();
        assert!((z2r - 1.5).abs() < 1e-12 && (z1r - 1.5).abs() < 1e-9);
        // does not fit
        assert!(place_coils(0.05, 0.04, 0.01, 0.01).is_err());
    }

    #[test]
    fn coupling_scaling_and_orthogonality() {
        let q = std::f64::consts::PI / 3.0;
        let base = CoilSpec::new(0.02, 0.03, 1.5, 1.54, 1600.0).unwrap();
        let double = CoilSpec { turns: 3200.0, ..base };
        let y1 = coupling(q, &base);
        let y2 = coupling(q, &double);
        assert!((y2 / y1 - 2.0).abs() < 1e-13);
        assert!(CoilSpec::new(0.02, 0.03, 1.5, 1.54, 0.0).is_err());
        // a coil spanning a full axial period couples to nothing
        let coil = CoilSpec::new(0.02, 0.03, 1.0, 1.0 + 2.0 * std::f64::consts::PI / q, 100.0).unwrap();
        let y = coupling(q, &coil);
        assert!(y.abs() < 1e-12 * y1.abs());
    }

    #[test]
    fn coupling_against_independent_quadrature() {
        // midpoint-rule oracle for psi and the closed cosine bracket
        let q = std::f64::consts::PI / 3.0;
        let coil = CoilSpec::new(0.02, 0.03, 1.5, 1.54, 1600.0).unwrap();
        let n = 200_000;
        let (x1, x2) = (q * coil.r1, q * coil.r2);
        let dx = (x2 - x1) / n as f64;
        let mut shape = 0.0;
        for k in 0..n {
            let x: f64 = x1 + (k as f64 + 0.5) * dx;
            // small-argument series for I_1, plenty for x < 0.04
            let x2_ = x * x;
            let i1 = 0.5 * x * (1.0 + x2_ / 8.0 + x2_ * x2_ / 192.0 + x2_ * x2_ * x2_ / 9216.0);
            shape += x * i1 * dx;
        }
        let want = coil.turns / ((coil.r2 - coil.r1) * (coil.z2 - coil.z1))
            * shape
            * ((q * coil.z1).cos() - (q * coil.z2).cos());
        let got = coupling(q, &coil);
        assert!(((got - want) / want).abs() < 1e-9, "got {got}, want {want}");
    }

    #[test]
    fn voltage_sum_zero_for_air() {
        let assembly = table1_assembly(3.0);
        let domain = TruncatedDomain::new(3.0, 20).unwrap();
        let v = voltage_sum(Complex64::new(0.0, 100.0), &assembly, &air_stack(), &domain).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn reciprocity_exact() {
        let assembly = table1_assembly(3.0);
        let swapped = ProbeAssembly {
            transmitter: assembly.receiver,
            receiver: assembly.transmitter,
            drive_amplitude: assembly.drive_amplitude,
        };
        let stack = LayerStack::new(
            vec![Layer::AIR, Layer { sigma: 3e6, mu_r: 100.0 }, Layer::AIR, Layer { sigma: 3e6, mu_r: 100.0 }],
            vec![0.070, 0.060, 0.050, 0.040],
        )
        .unwrap();
        let domain = TruncatedDomain::new(3.0, 30).unwrap();
        let s = Complex64::new(0.0, 2.0 * std::f64::consts::PI * 100.0);
        let v1 = voltage_sum(s, &assembly, &stack, &domain).unwrap();
        let v2 = voltage_sum(s, &swapped, &stack, &domain).unwrap();
        assert!((v1 - v2).norm() <= 1e-12 * v1.norm());
    }

    #[test]
    fn low_frequency_rolloff() {
        let assembly = table1_assembly(0.6);
        let stack = LayerStack::new(
            vec![Layer::AIR, Layer { sigma: 3e6, mu_r: 1.0 }, Layer::AIR, Layer { sigma: 3e6, mu_r: 1.0 }],
            vec![0.070, 0.060, 0.050, 0.040],
        )
        .unwrap();
        let domain = TruncatedDomain::new(0.6, 30).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..4 {
            let omega = 1.0 * 10f64.powi(-k);
            let v = voltage_sum(Complex64::new(0.0, omega), &assembly, &stack, &domain).unwrap();
            assert!(v.norm() < prev);
            prev = v.norm();
        }
    }

    #[test]
    fn air_inductance_anchors() {
        let t = CoilSpec::new(0.020, 0.030, 0.0, 0.040, 1600.0).unwrap();
        let l_t = air_inductance(&t);
        assert!(
            (l_t - 83.24e-3).abs() / 83.24e-3 < 5e-3,
            "transmitter L = {} mH",
            l_t * 1e3
        );
        let r = CoilSpec::new(0.020, 0.030, 0.0, 0.010, 10000.0).unwrap();
        let l_r = air_inductance(&r);
        assert!(
            (l_r - 5738.5e-3).abs() / 5738.5e-3 < 5e-3,
            "receiver L = {} mH",
            l_r * 1e3
        );
    }

    #[test]
    fn air_inductance_turns_scaling() {
        let a = CoilSpec::new(0.02, 0.03, 0.0, 0.01, 100.0).unwrap();
        let b = CoilSpec { turns: 200.0, ..a };
        let ratio = air_inductance(&b) / air_inductance(&a);
        assert!((ratio - 4.0).abs() < 1e-12);
    }
}

//! Exponentially scaled modified Bessel functions of complex argument,
//! orders 0 and 1, and the interface ratio bundle built from them.
//!
//! Scaling follows the usual library convention: the I mantissa is
//! I_nu(z)·e^{-|Re z|} and the K mantissa is K_nu(z)·e^{+Re z}, so the stored
//! exponent is always real and the reconstruction is value = mantissa ·
//! e^{log_scale}. Below |z| = 20 the power series is summed in double-double
//! arithmetic: the K series cancels up to e^{|z|+Re z} ≈ e^40 of its largest
//! term, which plain f64 cannot survive. Above |z| = 20 the standard large-z
//! expansions apply, with the subdominant reflected term of I kept while
//! e^{-2 Re z} is above the noise floor.

use num_complex::Complex64;

use crate::dd::{CDd, Dd, DD_EULER};
use crate::error::{Error, Result};

/// Series/asymptotic crossover radius.
const SERIES_RADIUS: f64 = 20.0;

/// A modified Bessel value in mantissa/exponent form: value = mantissa·e^{log_scale}.
#[derive(Debug, Clone, Copy)]
pub struct ScaledBessel {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledBessel {
    /// Reconstruct the plain value. May overflow to infinity when
    /// log_scale exceeds the double range; callers that must not overflow
    /// should work with the mantissa directly.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite Bessel argument {z}")))
    }
}

fn check_order(order: u32) -> Result<()> {
    if order <= 1 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel order {order} not in {{0, 1}}")))
    }
}

/// I_order(z)·e^{-|Re z|} with log_scale = |Re z|.
pub fn scaled_bessel_i(order: u32, z: Complex64) -> Result<ScaledBessel> {
    check_order(order)?;
    check_finite(z)?;
    // I_0 is even, I_1 odd: reflect into Re z >= 0.
    let (w, sign) = if z.re < 0.0 {
        (-z, if order == 1 { -1.0 } else { 1.0 })
    } else {
        (z, 1.0)
    };
    let mantissa = if w.norm() <= SERIES_RADIUS {
        let val = series_i(order, w);
        val.to_c64() * (-w.re).exp()
    } else {
        asymptotic_i_mantissa(order, w)
    };
    Ok(ScaledBessel { mantissa: mantissa * sign, log_scale: z.re.abs() })
}

/// K_order(z)·e^{+Re z} with log_scale = -Re z. Principal branch, z != 0.
pub fn scaled_bessel_k(order: u32, z: Complex64) -> Result<ScaledBessel> {
    check_order(order)?;
    check_finite(z)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Singularity("K diverges at z = 0".into()));
    }
    if z.re >= 0.0 {
        let mantissa = if z.norm() <= SERIES_RADIUS {
            let val = series_k(order, z);
            val.to_c64() * z.re.exp()
        } else {
            asymptotic_k_mantissa(order, z)
        };
        Ok(ScaledBessel { mantissa, log_scale: -z.re })
    } else {
        // continuation onto the left half-plane (|arg z| < pi):
        // K(z e^{∓i pi}) = e^{±i pi nu} K(z) ± i pi I(z), taken at w = -z.
        let w = -z;
        let kw = scaled_bessel_k(order, w)?;
        let iw = scaled_bessel_i(order, w)?;
        let (phase, ipi) = if z.im >= 0.0 {
            // z = w e^{+i pi}
            (
                Complex64::new((order as f64 * std::f64::consts::PI).cos(), -(order as f64 * std::f64::consts::PI).sin()),
                Complex64::new(0.0, -std::f64::consts::PI),
            )
        } else {
            (
                Complex64::new((order as f64 * std::f64::consts::PI).cos(), (order as f64 * std::f64::consts::PI).sin()),
                Complex64::new(0.0, std::f64::consts::PI),
            )
        };
        // mantissa convention: K(z) e^{Re z}; Re z = -Re w.
        // K(z) = phase·K(w) + ipi·I(w)
        //      = phase·k̂(w) e^{-Re w} + ipi·î(w) e^{Re w}
        // so K(z) e^{Re z} = phase·k̂(w) e^{-2 Re w} + ipi·î(w).
        let mantissa = phase * kw.mantissa * (-2.0 * w.re).exp() + ipi * iw.mantissa;
        Ok(ScaledBessel { mantissa, log_scale: -z.re })
    }
}

/// I series: I_0 = sum u^k/(k!)^2, I_1 = (z/2) sum u^k/(k!(k+1)!), u = (z/2)^2.
fn series_i(order: u32, z: Complex64) -> CDd {
    let half = CDd::from_f64(z.re * 0.5, z.im * 0.5);
    let u = half.mul(half);
    let mut term = CDd::from_f64(1.0, 0.0);
    let mut sum = term;
    for k in 1..300 {
        let kf = k as f64;
        let div = if order == 0 { kf * kf } else { kf * (kf + 1.0) };
        term = term.mul(u).div_f64(div);
        sum = sum.add(term);
        if term.norm_hi() < 1e-36 * sum.norm_hi().max(1.0) && kf > z.norm() * 0.5 {
            break;
        }
    }
    if order == 0 {
        sum
    } else {
        sum.mul(half)
    }
}

/// K series with the log term; everything in double-double.
fn series_k(order: u32, z: Complex64) -> CDd {
    let zc = CDd::from_f64(z.re, z.im);
    let half = CDd::from_f64(z.re * 0.5, z.im * 0.5);
    let u = half.mul(half);
    let log_half = half.ln();

    if order == 0 {
        // K_0 = -(ln(z/2) + gamma) I_0 + sum_{k>=1} H_k u^k/(k!)^2
        let i0 = series_i(0, z);
        let lead = log_half.add(CDd::new(DD_EULER, Dd::from(0.0))).mul(i0);
        let mut term = CDd::from_f64(1.0, 0.0);
        let mut h = Dd::from(0.0);
        let mut s = CDd::zero();
        for k in 1..300 {
            let kf = k as f64;
            term = term.mul(u).div_f64(kf * kf);
            h = h.add(Dd::from(1.0).div_f64(kf));
            let contrib = term.mul_dd(h);
            s = s.add(contrib);
            if contrib.norm_hi() < 1e-36 * s.norm_hi().max(1.0) && kf > z.norm() * 0.5 {
                break;
            }
        }
        s.sub(lead)
    } else {
        // K_1 = 1/z + ln(z/2) I_1 - (z/4) sum_k (H_k + H_{k+1} - 2 gamma) u^k/(k!(k+1)!)
        let i1 = series_i(1, z);
        let mut term = CDd::from_f64(1.0, 0.0);
        let mut hk = Dd::from(0.0);
        let mut s = CDd::zero();
        for k in 0..300 {
            let kf = k as f64;
            if k > 0 {
                term = term.mul(u).div_f64(kf * (kf + 1.0));
            }
            let hk1 = hk.add(Dd::from(1.0).div_f64(kf + 1.0));
            let coeff = hk.add(hk1).sub(DD_EULER.mul_f64(2.0));
            let contrib = term.mul_dd(coeff);
            s = s.add(contrib);
            hk = hk1;
            if k > 0
                && contrib.norm_hi() < 1e-36 * s.norm_hi().max(1.0)
                && kf > z.norm() * 0.5
            {
                break;
            }
        }
        let quarter = CDd::new(zc.re.mul_f64(0.25), zc.im.mul_f64(0.25));
        zc.recip().add(log_half.mul(i1)).sub(quarter.mul(s))
    }
}

/// Coefficients a_k(nu) of the large-z expansion, applied term by term.
fn asymptotic_sum(order: u32, z: Complex64, alternating: bool) -> Complex64 {
    let mu = 4.0 * (order * order) as f64;
    let mut a = 1.0f64;
    let mut zk = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut last = 1.0f64;
    for k in 1..=120u32 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        zk /= z;
        let sgn = if alternating && k % 2 == 1 { -1.0 } else { 1.0 };
        let term = zk * (a * sgn);
        let mag = term.norm();
        if mag > last {
            break; // past the optimal truncation point
        }
        sum += term;
        last = mag;
        if mag < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// Mantissa of I for Re z >= 0, |z| > crossover.
fn asymptotic_i_mantissa(order: u32, z: Complex64) -> Complex64 {
    let root = (2.0 * std::f64::consts::PI * z).sqrt();
    let rot = Complex64::new(0.0, z.im).exp(); // e^{z - Re z}
    let mut m = rot * asymptotic_sum(order, z, true) / root;
    if 2.0 * z.re < 45.0 {
        // reflected subdominant term, sign split across the Stokes line
        let pm = if z.im >= 0.0 { 1.0 } else { -1.0 };
        let phase = Complex64::new(0.0, pm) * if order == 1 { -1.0 } else { 1.0 };
        let damp = Complex64::new(-2.0 * z.re, -z.im).exp();
        m += phase * damp * asymptotic_sum(order, z, false) / root;
    }
    m
}

/// Mantissa of K (convention K·e^{Re z}) for |z| > crossover, |arg z| < pi.
fn asymptotic_k_mantissa(order: u32, z: Complex64) -> Complex64 {
    let root = (std::f64::consts::PI / (2.0 * z)).sqrt();
    let rot = Complex64::new(0.0, -z.im).exp(); // e^{z}·e^{-i Im z} = e^{Re z}
    rot * root * asymptotic_sum(order, z, false)
}

/// The six Bessel ratios entering one interface of the layered chain.
///
/// The interface sits at radius `b`; the outer region (wavenumber `a_out`)
/// spans [b, b_prev], the inner region (wavenumber `a_in`) spans [b_next, b].
#[derive(Debug, Clone, Copy)]
pub struct RatioBundle {
    /// I_1(a_out·b) / I_1(a_out·b_prev) — decay of I across the outer region.
    pub i_ratio: Complex64,
    /// K_1(a_in·b) / K_1(a_in·b_next) — decay of K across the inner region.
    pub k_ratio: Complex64,
    /// I_0/I_1 at a_out·b (outer-side logarithmic slope, no beta factor).
    pub i_slope_outer: Complex64,
    /// K_0/K_1 at a_out·b.
    pub k_slope_outer: Complex64,
    /// I_0/I_1 at a_in·b (inner-side logarithmic slope).
    pub i_slope_inner: Complex64,
    /// K_0/K_1 at a_in·b.
    pub k_slope_inner: Complex64,
}

/// Assemble the ratio bundle from scaled mantissas and the real exponential
/// corrections e^{|Re a|·Δb} (I) and e^{-Re a·Δb} (K); no unscaled value is
/// ever formed, so arbitrarily large |a·b| stays finite.
pub fn ratio_bundle(
    a_out: Complex64,
    a_in: Complex64,
    b_prev: f64,
    b: f64,
    b_next: f64,
) -> Result<RatioBundle> {
    for (name, r) in [("b_prev", b_prev), ("b_n", b), ("b_next", b_next)] {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius {name} = {r} must be positive")));
        }
    }
    check_finite(a_out)?;
    check_finite(a_in)?;

    let zo = a_out * b;
    let zi = a_in * b;
    let i1_o = scaled_bessel_i(1, zo)?;
    let i0_o = scaled_bessel_i(0, zo)?;
    let k1_o = scaled_bessel_k(1, zo)?;
    let k0_o = scaled_bessel_k(0, zo)?;
    let i1_i = scaled_bessel_i(1, zi)?;
    let i0_i = scaled_bessel_i(0, zi)?;
    let k1_i = scaled_bessel_k(1, zi)?;
    let k0_i = scaled_bessel_k(0, zi)?;

    let i1_prev = scaled_bessel_i(1, a_out * b_prev)?;
    let k1_next = scaled_bessel_k(1, a_in * b_next)?;

    // I ratio: mantissa quotient times e^{|Re a|(b - b_prev)} (b <= b_prev).
    let i_ratio = i1_o.mantissa / i1_prev.mantissa * (a_out.re.abs() * (b - b_prev)).exp();
    // K ratio: mantissa quotient times e^{-Re a (b - b_next)} (b >= b_next).
    let k_ratio = k1_i.mantissa / k1_next.mantissa * (-a_in.re * (b - b_next)).exp();

    Ok(RatioBundle {
        i_ratio,
        k_ratio,
        i_slope_outer: i0_o.mantissa / i1_o.mantissa,
        k_slope_outer: k0_o.mantissa / k1_o.mantissa,
        i_slope_inner: i0_i.mantissa / i1_i.mantissa,
        k_slope_inner: k0_i.mantissa / k1_i.mantissa,
    })
}

/// All eight scaled mantissas at one interface, for the chain propagation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InterfaceMantissas {
    pub i0_o: Complex64,
    pub i1_o: Complex64,
    pub k0_o: Complex64,
    pub k1_o: Complex64,
    pub i0_i: Complex64,
    pub i1_i: Complex64,
    pub k0_i: Complex64,
    pub k1_i: Complex64,
}

pub(crate) fn interface_mantissas(zo: Complex64, zi: Complex64) -> Result<InterfaceMantissas> {
    Ok(InterfaceMantissas {
        i0_o: scaled_bessel_i(0, zo)?.mantissa,
        i1_o: scaled_bessel_i(1, zo)?.mantissa,
        k0_o: scaled_bessel_k(0, zo)?.mantissa,
        k1_o: scaled_bessel_k(1, zo)?.mantissa,
        i0_i: scaled_bessel_i(0, zi)?.mantissa,
        i1_i: scaled_bessel_i(1, zi)?.mantissa,
        k0_i: scaled_bessel_k(0, zi)?.mantissa,
        k1_i: scaled_bessel_k(1, zi)?.mantissa,
    })
}

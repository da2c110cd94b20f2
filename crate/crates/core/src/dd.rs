//! Double-double arithmetic for the cancellation-heavy Bessel series.
//!
//! A `Dd` stores an unevaluated sum `hi + lo` with |lo| <= ulp(hi)/2, giving
//! roughly 106 bits of significand. Only the operations the series kernels
//! need are implemented: field ops, exp/ln, sin/cos and a refined atan2.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) const DD_PI_2: Dd = Dd { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
pub(crate) const DD_LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
pub(crate) const DD_EULER: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        let (hi, lo2) = quick_two_sum(hi, lo + q3);
        Dd { hi, lo: lo2 }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        self.div(Dd::from(b))
    }

    /// exp with argument reduction x = k ln2 + r, |r| <= ln2/2.
    pub fn exp(self) -> Dd {
        let k = (self.hi / DD_LN2.hi).round();
        let r = self.sub(DD_LN2.mul_f64(k));
        // Taylor on |r| <= 0.347
        let mut sum = Dd::from(1.0).add(r);
        let mut term = r;
        for n in 2..32 {
            term = term.mul(r).div_f64(n as f64);
            sum = sum.add(term);
            if term.hi.abs() < 1e-40 * sum.hi.abs() {
                break;
            }
        }
        let scale = (k as i32).clamp(-1020, 1020);
        let f = libm_scalbn(1.0, scale);
        Dd { hi: sum.hi * f, lo: sum.lo * f }
    }

    /// Natural log for positive arguments, Newton-refined from the f64 seed.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0);
        let y0 = self.hi.ln();
        // r = x * exp(-y0) = 1 + delta; ln x = y0 + delta - delta^2/2 + ...
        let r = self.mul(Dd::from(-y0).exp());
        let delta = r.sub(Dd::from(1.0));
        let corr = delta.sub(delta.mul(delta).mul_f64(0.5));
        Dd::from(y0).add(corr)
    }

    /// sin/cos for |x| within a few pi; reduction by pi/2 quadrants.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = (self.hi / DD_PI_2.hi).round();
        let r = self.sub(DD_PI_2.mul_f64(k));
        let (s, c) = sin_cos_taylor(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }
}

fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
    // |r| <= pi/4 + eps
    let r2 = r.mul(r);
    let mut s = r;
    let mut term = r;
    let mut n = 1.0;
    loop {
        term = term.mul(r2).div_f64(-((n + 1.0) * (n + 2.0)));
        s = s.add(term);
        n += 2.0;
        if term.hi.abs() < 1e-40 || n > 40.0 {
            break;
        }
    }
    let mut c = Dd::from(1.0);
    let mut term = Dd::from(1.0);
    let mut n = 0.0;
    loop {
        term = term.mul(r2).div_f64(-((n + 1.0) * (n + 2.0)));
        c = c.add(term);
        n += 2.0;
        if term.hi.abs() < 1e-40 || n > 40.0 {
            break;
        }
    }
    (s, c)
}

/// atan2 refined to double-double: one Newton step on the f64 seed.
pub(crate) fn atan2_dd(y: f64, x: f64) -> Dd {
    let th0 = y.atan2(x);
    let (s, c) = Dd::from(th0).sin_cos();
    // residual rotation: (y cos - x sin) / (x cos + y sin)
    let num = s.mul_f64(-x).add(c.mul_f64(y));
    let den = c.mul_f64(x).add(s.mul_f64(y));
    if den.hi.abs() < f64::MIN_POSITIVE {
        return Dd::from(th0);
    }
    Dd::from(th0).add(num.div(den))
}

#[inline]
fn libm_scalbn(x: f64, n: i32) -> f64 {
    // 2^n for |n| <= 1020 via exponent bits
    let bits = ((n + 1023) as u64) << 52;
    x * f64::from_bits(bits)
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    #[inline]
    pub fn new(re: Dd, im: Dd) -> Self {
        CDd { re, im }
    }

    #[inline]
    pub fn from_f64(re: f64, im: f64) -> Self {
        CDd { re: Dd::from(re), im: Dd::from(im) }
    }

    #[inline]
    pub fn zero() -> Self {
        CDd::from_f64(0.0, 0.0)
    }

    #[inline]
    pub fn add(self, o: CDd) -> CDd {
        CDd::new(self.re.add(o.re), self.im.add(o.im))
    }

    #[inline]
    pub fn sub(self, o: CDd) -> CDd {
        CDd::new(self.re.sub(o.re), self.im.sub(o.im))
    }

    #[inline]
    pub fn mul(self, o: CDd) -> CDd {
        CDd::new(
            self.re.mul(o.re).sub(self.im.mul(o.im)),
            self.re.mul(o.im).add(self.im.mul(o.re)),
        )
    }

    #[inline]
    pub fn mul_dd(self, o: Dd) -> CDd {
        CDd::new(self.re.mul(o), self.im.mul(o))
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> CDd {
        CDd::new(self.re.div_f64(b), self.im.div_f64(b))
    }

    pub fn recip(self) -> CDd {
        let d = self.re.mul(self.re).add(self.im.mul(self.im));
        CDd::new(self.re.div(d), self.im.neg().div(d))
    }

    /// Principal log. Modulus part via ln(|z|^2)/2, argument via refined atan2.
    pub fn ln(self) -> CDd {
        let m2 = self.re.mul(self.re).add(self.im.mul(self.im));
        let re = m2.ln().mul_f64(0.5);
        let im = atan2_dd(self.im.to_f64(), self.re.to_f64());
        CDd::new(re, im)
    }

    #[inline]
    pub fn norm_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    #[inline]
    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_mul_exactness() {
        let a = Dd::from(1.0).div_f64(3.0);
        let b = a.mul_f64(3.0);
        assert!((b.to_f64() - 1.0).abs() < 1e-31, "1/3*3 = {:?}", b);
        let c = a.add(a).add(a).sub(Dd::from(1.0));
        assert!(c.to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[1e-3, 0.5, 1.0, 2.5, 7.0, 19.7, -4.2] {
            let e = Dd::from(x).exp();
            let back = e.ln().to_f64();
            assert!((back - x).abs() < 1e-30 * x.abs().max(1.0), "x={x} back={back}");
        }
        // reference: exp(1) to 32 digits = 2.7182818284590452353602874713527
        let e1 = Dd::from(1.0).exp();
        let err = e1.sub(Dd { hi: 2.718281828459045, lo: 1.4456468917292502e-16 });
        assert!(err.to_f64().abs() < 1e-31);
    }

    #[test]
    fn ln2_consistency() {
        let l = Dd::from(2.0).ln();
        assert!(l.sub(DD_LN2).to_f64().abs() < 1e-31);
    }

    #[test]
    fn sincos_reference() {
        // sin(1) = 0.84147098480789650665250232163030, cos(1) = 0.54030230586813971740093660744298
        let (s, c) = Dd::from(1.0).sin_cos();
        assert!(s.sub(Dd { hi: 0.8414709848078965, lo: 1.776845092935536e-18 }).to_f64().abs() < 1e-31);
        assert!(c.sub(Dd { hi: 0.5403023058681398, lo: -4.760954612604417e-17 }).to_f64().abs() < 1e-31);
        // agreement with f64 trig is limited by f64's own rounding
        let (s, c) = DD_PI_2.mul_f64(1.5).sin_cos();
        assert!((s.to_f64() - (0.75 * std::f64::consts::PI).sin()).abs() < 4e-16);
        assert!((c.to_f64() - (0.75 * std::f64::consts::PI).cos()).abs() < 4e-16);
    }

    #[test]
    fn atan2_refined() {
        // atan2(1, 2) = 0.46364760900080611621425623146121
        let a = atan2_dd(1.0, 2.0);
        assert!(a.sub(Dd { hi: 0.4636476090008061, lo: 2.2698777452961687e-17 }).to_f64().abs() < 1e-30);
        // quadrant checks against f64
        for &(y, x) in &[(1.0, -2.0), (-1.0, -2.0), (-1.0, 2.0), (3.0, 0.5), (0.0, 1.0)] {
            assert!((atan2_dd(y, x).to_f64() - y.atan2(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn complex_ln() {
        // ln(2+3i) = 1.2824746787307683680267437207826 + 0.98279372324732906798571061101467i
        let l = CDd::from_f64(2.0, 3.0).ln();
        assert!((l.re.to_f64() - 1.2824746787307684).abs() < 1e-16);
        assert!((l.im.to_f64() - 0.9827937232473291).abs() < 1e-16);
    }
}

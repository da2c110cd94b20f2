//! Complete elliptic integrals K(m), E(m) by the arithmetic-geometric mean,
//! parameter convention m = k^2.

/// K(m) for 0 <= m < 1.
pub fn ellipk(m: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&m));
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..24 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// E(m) for 0 <= m < 1, via the AGM c-sequence.
pub fn ellipe(m: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&m));
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c2_sum = 0.5 * m; // 2^{-1} c_0^2 with c_0^2 = m
    let mut pow = 0.5;
    for _ in 0..24 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        c2_sum += pow * c * c;
    }
    std::f64::consts::FRAC_PI_2 / a * (1.0 - c2_sum)
}

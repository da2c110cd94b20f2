//! Transient-path validation: dominant-mode regression anchors from an
//! independent prototype implementation, cross-method agreement windows,
//! pole-count convergence, monotone decay and the thinning orderings.

use pect_core::{
    dominant_mode, place_coils, thinning_scenarios, transient_voltage, transition_time, CoilSpec,
    InversionMethod, Layer, LayerStack, ProbeAssembly, TransientOptions, TruncatedDomain,
};

fn table1_stack(mu_r: f64) -> LayerStack {
    LayerStack::new(
        vec![
            Layer::AIR,
            Layer { sigma: 3e6, mu_r },
            Layer::AIR,
            Layer { sigma: 3e6, mu_r },
        ],
        vec![0.070, 0.060, 0.050, 0.040],
    )
    .unwrap()
}

fn table1_assembly(h: f64) -> ProbeAssembly {
    let (z1t, z2t, z1r, z2r) = place_coils(h, 0.040, 0.010, 0.010).unwrap();
    ProbeAssembly {
        transmitter: CoilSpec::new(0.020, 0.030, z1t, z2t, 1600.0).unwrap(),
        receiver: CoilSpec::new(0.020, 0.030, z1r, z2r, 10000.0).unwrap(),
        drive_amplitude: 1.0,
    }
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| lo * ratio.powi(k as i32)).collect()
}

/// Cross-implementation anchors computed with an independent prototype
/// (different Bessel kernel, quadrature and root polishing).
#[test]
fn dominant_mode_regression_anchors() {
    let carbon = dominant_mode(
        &table1_assembly(3.0),
        &table1_stack(100.0),
        &TruncatedDomain::new(3.0, 50).unwrap(),
    )
    .unwrap();
    assert!(
        (carbon.rate - (-25.6966)).abs() / 25.6966 < 1e-4,
        "carbon rate {}",
        carbon.rate
    );
    assert!(
        (carbon.amplitude - 4.53539e-3).abs() / 4.53539e-3 < 1e-3,
        "carbon amplitude {}",
        carbon.amplitude
    );

    let stainless = dominant_mode(
        &table1_assembly(0.6),
        &table1_stack(1.0),
        &TruncatedDomain::new(0.6, 50).unwrap(),
    )
    .unwrap();
    assert!(
        (stainless.rate - (-639.4936)).abs() / 639.4936 < 1e-4,
        "stainless rate {}",
        stainless.rate
    );
    assert!(
        (stainless.amplitude - 19.6669).abs() / 19.6669 < 1e-3,
        "stainless amplitude {}",
        stainless.amplitude
    );
}

#[test]
fn cross_method_windows_carbon() {
    let stack = table1_stack(100.0);
    let h = 3.0;
    let assembly = table1_assembly(h);
    let domain = TruncatedDomain::new(h, 50).unwrap();
    let opts = TransientOptions::default();
    let tm = transition_time(&stack);

    // short window: Stehfest against the FFT reference
    let short = geomspace(tm / 100.0, tm, 10);
    let st = transient_voltage(&assembly, &stack, &domain, &short, InversionMethod::Stehfest, &opts)
        .unwrap();
    let ni = transient_voltage(&assembly, &stack, &domain, &short, InversionMethod::Nilt, &opts)
        .unwrap();
    for ((t, a), b) in short.iter().zip(&st.voltage).zip(&ni.voltage) {
        let dev = (a - b).abs() / b.abs();
        assert!(dev < 0.02, "short window t={t}: stehfest {a}, nilt {b}, dev {dev:.3e}");
    }

    // long window: one pole per mode against the FFT reference
    let long = geomspace(tm, 3.0 * tm, 8);
    let po = transient_voltage(&assembly, &stack, &domain, &long, InversionMethod::Poles, &opts)
        .unwrap();
    let ni = transient_voltage(&assembly, &stack, &domain, &long, InversionMethod::Nilt, &opts)
        .unwrap();
    for ((t, a), b) in long.iter().zip(&po.voltage).zip(&ni.voltage) {
        let dev = (a - b).abs() / b.abs();
        assert!(dev < 0.02, "long window t={t}: poles {a}, nilt {b}, dev {dev:.3e}");
    }
}

#[test]
fn hybrid_seam_is_continuous() {
    let stack = table1_stack(100.0);
    let assembly = table1_assembly(3.0);
    let domain = TruncatedDomain::new(3.0, 50).unwrap();
    let opts = TransientOptions::default();
    let tm = transition_time(&stack);
    let ts = [tm];
    let st = transient_voltage(&assembly, &stack, &domain, &ts, InversionMethod::Stehfest, &opts)
        .unwrap()
        .voltage[0];
    let po = transient_voltage(&assembly, &stack, &domain, &ts, InversionMethod::Poles, &opts)
        .unwrap()
        .voltage[0];
    let ni = transient_voltage(&assembly, &stack, &domain, &ts, InversionMethod::Nilt, &opts)
        .unwrap()
        .voltage[0];
    assert!(
        (st - po).abs() / ni.abs() < 0.05,
        "seam at t_m: stehfest {st}, poles {po}, nilt {ni}"
    );
}

#[test]
fn pole_count_converged_at_one() {
    let stack = table1_stack(100.0);
    let assembly = table1_assembly(3.0);
    let domain = TruncatedDomain::new(3.0, 50).unwrap();
    let tm = transition_time(&stack);
    let ts = [2.0 * tm];
    let one = transient_voltage(
        &assembly,
        &stack,
        &domain,
        &ts,
        InversionMethod::Poles,
        &TransientOptions { poles_per_mode: 1, ..Default::default() },
    )
    .unwrap()
    .voltage[0];
    let five = transient_voltage(
        &assembly,
        &stack,
        &domain,
        &ts,
        InversionMethod::Poles,
        &TransientOptions { poles_per_mode: 5, ..Default::default() },
    )
    .unwrap()
    .voltage[0];
    assert!((one - five).abs() / five.abs() < 0.01, "1 pole {one}, 5 poles {five}");
}

#[test]
fn long_time_decay_is_positive_and_monotone() {
    let stack = table1_stack(100.0);
    let assembly = table1_assembly(3.0);
    let domain = TruncatedDomain::new(3.0, 50).unwrap();
    let tm = transition_time(&stack);
    let times = geomspace(tm, 3.0 * tm, 40);
    let r = transient_voltage(
        &assembly,
        &stack,
        &domain,
        &times,
        InversionMethod::Poles,
        &TransientOptions::default(),
    )
    .unwrap();
    for w in r.voltage.windows(2) {
        assert!(w[0] > 0.0 && w[1] > 0.0, "voltage must stay positive: {w:?}");
        assert!(w[1] < w[0], "voltage must decay: {w:?}");
    }
}

#[test]
fn thinned_walls_decay_faster() {
    let base = table1_stack(100.0);
    let domain = TruncatedDomain::new(3.0, 50).unwrap();
    let assembly = table1_assembly(3.0);
    let base_rate = dominant_mode(&assembly, &base, &domain).unwrap().rate;
    let mut absent_rates = Vec::new();
    for (name, stack) in thinning_scenarios(&base, 0.5).unwrap() {
        let rate = dominant_mode(&assembly, &stack, &domain).unwrap().rate;
        assert!(
            rate.abs() > base_rate.abs(),
            "{name}: rate {rate} not faster than intact {base_rate}"
        );
        if name.ends_with("absent") {
            absent_rates.push((name, rate));
        }
    }
    // equal remaining thickness: the two absence cases have nearly equal
    // dominant rates (indistinguishable at long time), distinct amplitudes
    let (_, r1) = &absent_rates[0];
    let (_, r2) = &absent_rates[1];
    assert!(
        (r1 - r2).abs() / r1.abs() < 0.05,
        "absence rates differ too much: {r1} vs {r2}"
    );
}

#[test]
fn absence_cases_differ_in_short_time_amplitude() {
    let base = table1_stack(100.0);
    let domain = TruncatedDomain::new(3.0, 50).unwrap();
    let assembly = table1_assembly(3.0);
    let variants = thinning_scenarios(&base, 0.5).unwrap();
    let tm = transition_time(&base);
    let ts = [tm / 50.0];
    let opts = TransientOptions::default();
    let mut amps = Vec::new();
    for (name, stack) in &variants {
        if !name.ends_with("absent") {
            continue;
        }
        let v = transient_voltage(&assembly, stack, &domain, &ts, InversionMethod::Stehfest, &opts)
            .unwrap()
            .voltage[0];
        amps.push(v);
    }
    let rel = (amps[0] - amps[1]).abs() / amps[0].abs().max(amps[1].abs());
    assert!(rel > 0.01, "short-time amplitudes should differ: {amps:?}");
}

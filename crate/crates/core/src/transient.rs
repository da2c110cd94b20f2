//! Step-response voltage assembly: inversion method selection, the
//! short/long-time hybrid around the transition time, dominant-mode
//! extraction and wall-thinning scenario generation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laplace::{find_poles, nilt_fft, residues, stehfest_weights, NiltPlan};
use crate::medium::{reflection, ChainMethod, Layer, LayerStack};
use crate::model::{modal_sum, modal_weights, ProbeAssembly, TruncatedDomain};
use crate::MU0;

/// Laplace-inversion back end used for a transient run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    Stehfest,
    Nilt,
    Poles,
    Hybrid,
}

impl std::fmt::Display for InversionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            InversionMethod::Stehfest => "stehfest",
            InversionMethod::Nilt => "nilt",
            InversionMethod::Poles => "poles",
            InversionMethod::Hybrid => "hybrid",
        };
        f.write_str(name)
    }
}

/// Tunables for the inversion back ends.
#[derive(Debug, Clone, Copy)]
pub struct TransientOptions {
    /// Poles retained per eigenvalue in the pole-extraction path.
    pub poles_per_mode: usize,
    /// Stehfest term count (even, 2..=20).
    pub stehfest_n: usize,
    /// FFT length basis per inversion window (power of two, >= 64).
    pub nilt_samples: usize,
    /// Epsilon-table depth for the FFT tail.
    pub nilt_accel_depth: usize,
}

impl Default for TransientOptions {
    fn default() -> Self {
        TransientOptions {
            poles_per_mode: 1,
            stehfest_n: 14,
            nilt_samples: 1024,
            nilt_accel_depth: 6,
        }
    }
}

/// Per-run bookkeeping attached to every transient result.
#[derive(Debug, Clone, Default)]
pub struct TransientMetadata {
    pub h: f64,
    pub n_modes: usize,
    /// Poles found per mode (pole path only; empty otherwise).
    pub pole_counts: Vec<usize>,
    /// 1-based mode indices whose pole scan came up empty (contribute zero).
    pub empty_pole_modes: Vec<usize>,
}

/// Sampled receiver voltage with the method that produced it.
#[derive(Debug, Clone)]
pub struct TransientResult {
    pub times: Vec<f64>,
    pub voltage: Vec<f64>,
    pub method: InversionMethod,
    pub metadata: TransientMetadata,
}

/// Single-exponential model of the slowest decay: V(t) = amplitude·e^{rate·t}.
#[derive(Debug, Clone, Copy)]
pub struct DominantMode {
    /// Amplitude of the first term (V).
    pub amplitude: f64,
    /// Decay rate s_1 < 0 (1/s).
    pub rate: f64,
}

/// Empirical Stehfest/pole transition time t_m = mu0 mu_r sigma b^2 with b
/// the total thickness of the (finite) conductive layers; for mixed
/// materials the largest mu_r·sigma is used. All-air stacks return 0. The
/// outermost region is unbounded and never counts toward the thickness.
pub fn transition_time(stack: &LayerStack) -> f64 {
    let radii = stack.radii();
    let mut thickness = 0.0;
    let mut worst = 0.0f64;
    for (i, layer) in stack.layers().iter().enumerate() {
        if i == 0 || !layer.is_conductive() {
            continue;
        }
        thickness += radii[i - 1] - radii[i];
        worst = worst.max(layer.mu_r * layer.sigma);
    }
    MU0 * worst * thickness * thickness
}

/// Scan step for the real-axis pole search: an eighth of the diffusion-mode
/// spacing pi^2/(mu0 max(mu_r sigma) span^2), with span the full radial
/// extent b_1 - b_N containing the conductors (equal to the layer thickness
/// for a single-layer stack). Returns None when nothing conducts.
pub fn pole_scan_step(stack: &LayerStack) -> Option<f64> {
    let worst = stack
        .layers()
        .iter()
        .filter(|l| l.is_conductive())
        .map(|l| l.mu_r * l.sigma)
        .fold(0.0f64, f64::max);
    if worst == 0.0 {
        return None;
    }
    let radii = stack.radii();
    let span = if radii.len() >= 2 {
        radii[0] - radii[radii.len() - 1]
    } else {
        radii[0]
    };
    Some(std::f64::consts::PI.powi(2) / (8.0 * MU0 * worst * span * span))
}

/// The assembled step-response transform
/// G(s) = (4 mu0 pi / h) I0 sum_i R(q_i, s) Y_T Y_R / q_i^6.
pub(crate) struct StepTransform<'a> {
    stack: &'a LayerStack,
    weights: Vec<(f64, f64)>,
    prefactor: f64,
}

impl<'a> StepTransform<'a> {
    pub fn new(assembly: &ProbeAssembly, stack: &'a LayerStack, domain: &TruncatedDomain) -> Self {
        StepTransform {
            stack,
            weights: modal_weights(assembly, domain),
            prefactor: 4.0 * MU0 * std::f64::consts::PI / domain.h * assembly.drive_amplitude,
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        Ok(modal_sum(s, self.stack, &self.weights)? * self.prefactor)
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    for (i, &t) in times.iter().enumerate() {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("times must be positive, times[{i}] = {t}")));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::Domain(format!(
                "times must be strictly increasing at index {i}: {} -> {t}",
                times[i - 1]
            )));
        }
    }
    Ok(())
}

/// Step-response receiver voltage at the requested times.
pub fn transient_voltage(
    assembly: &ProbeAssembly,
    stack: &LayerStack,
    domain: &TruncatedDomain,
    times: &[f64],
    method: InversionMethod,
    options: &TransientOptions,
) -> Result<TransientResult> {
    validate_times(times)?;
    let transform = StepTransform::new(assembly, stack, domain);
    let mut metadata = TransientMetadata {
        h: domain.h,
        n_modes: domain.n_modes,
        ..Default::default()
    };

    let voltage = match method {
        InversionMethod::Stehfest => invert_stehfest(&transform, times, options)?,
        InversionMethod::Nilt => invert_nilt(&transform, times, options)?,
        InversionMethod::Poles => invert_poles(assembly, stack, domain, times, options, &mut metadata)?,
        InversionMethod::Hybrid => {
            let tm = transition_time(stack);
            let split = times.partition_point(|&t| t < tm);
            let mut v = Vec::with_capacity(times.len());
            if split > 0 {
                v.extend(invert_stehfest(&transform, &times[..split], options)?);
            }
            if split < times.len() {
                v.extend(invert_poles(
                    assembly,
                    stack,
                    domain,
                    &times[split..],
                    options,
                    &mut metadata,
                )?);
            }
            v
        }
    };

    for (i, v) in voltage.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("voltage sample {i} at t = {}", times[i])));
        }
    }
    Ok(TransientResult { times: times.to_vec(), voltage, method, metadata })
}

fn invert_stehfest(
    transform: &StepTransform,
    times: &[f64],
    options: &TransientOptions,
) -> Result<Vec<f64>> {
    let weights = stehfest_weights(options.stehfest_n)?;
    times
        .par_iter()
        .map(|&t| crate::laplace::stehfest_invert(|s| transform.eval(Complex64::new(s, 0.0)), t, &weights))
        .collect()
}

/// FFT inversion at arbitrary target times: windows are chosen so every
/// target sits in the interior of its window (t/t_max in [1/4, 1/2]), where
/// the e^{ct} roundoff amplification is far from the window edge.
fn invert_nilt(
    transform: &StepTransform,
    times: &[f64],
    options: &TransientOptions,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; times.len()];
    let mut hi = times.len();
    while hi > 0 {
        let t_big = times[hi - 1];
        let lo = times.partition_point(|&t| t < 0.5 * t_big);
        let t_max = 2.0 * t_big;
        let plan = NiltPlan::new(
            t_max,
            options.nilt_samples,
            -(1e-8f64).ln() / t_max,
            options.nilt_accel_depth,
        )?;
        let (grid_t, grid_v) = nilt_fft(|s| transform.eval(s), &plan)?;
        let dt = grid_t[0];
        for k in lo..hi {
            let x = times[k] / dt;
            let j = (x.floor() as usize).clamp(1, grid_v.len() - 1);
            let frac = x - j as f64;
            // grid_v[j-1] holds f(j dt)
            let (v0, v1) = if j < grid_v.len() {
                (grid_v[j - 1], grid_v[j.min(grid_v.len() - 1)])
            } else {
                (grid_v[grid_v.len() - 1], grid_v[grid_v.len() - 1])
            };
            out[k] = v0 + frac * (v1 - v0);
        }
        hi = lo;
    }
    Ok(out)
}

struct ModePoles {
    mode: usize,
    weight: f64,
    poles: Vec<f64>,
    residues: Vec<Complex64>,
}

fn invert_poles(
    assembly: &ProbeAssembly,
    stack: &LayerStack,
    domain: &TruncatedDomain,
    times: &[f64],
    options: &TransientOptions,
    metadata: &mut TransientMetadata,
) -> Result<Vec<f64>> {
    let weights = modal_weights(assembly, domain);
    let prefactor = 4.0 * MU0 * std::f64::consts::PI / domain.h * assembly.drive_amplitude;
    let Some(step) = pole_scan_step(stack) else {
        // nothing conducts: every mode is poleless and contributes zero
        metadata.pole_counts = vec![0; weights.len()];
        metadata.empty_pole_modes = (1..=weights.len()).collect();
        return Ok(vec![0.0; times.len()]);
    };
    // poles decaying below 1e-6 of signal by the earliest sample are irrelevant
    let s_min = -(1e6f64).ln() / times[0];

    let mode_sets: Result<Vec<ModePoles>> = weights
        .par_iter()
        .enumerate()
        .map(|(idx, &(q, w))| {
            let r2 = |s: f64| -> Result<f64> {
                Ok(reflection(q, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?
                    .denominator
                    .re)
            };
            let poles = find_poles(r2, 0.0, s_min, step, options.poles_per_mode)?;
            let set = if poles.is_empty() {
                ModePoles { mode: idx + 1, weight: w, poles, residues: Vec::new() }
            } else {
                let r1 = |s: f64| -> Result<Complex64> {
                    Ok(reflection(q, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?.numerator)
                };
                let ps = residues(r1, r2, &poles)?;
                ModePoles { mode: idx + 1, weight: w, poles: ps.poles, residues: ps.residues }
            };
            Ok(set)
        })
        .collect();
    let mode_sets = mode_sets?;

    metadata.pole_counts = mode_sets.iter().map(|m| m.poles.len()).collect();
    metadata.empty_pole_modes = mode_sets
        .iter()
        .filter(|m| m.poles.is_empty())
        .map(|m| m.mode)
        .collect();

    let voltage = times
        .par_iter()
        .map(|&t| {
            let mut acc = 0.0;
            for set in &mode_sets {
                let mut mode_sum = 0.0;
                for (sk, ak) in set.poles.iter().zip(&set.residues) {
                    mode_sum += ak.re * (sk * t).exp();
                }
                acc += prefactor * set.weight * mode_sum;
            }
            acc
        })
        .collect();
    Ok(voltage)
}

/// Per-mode pole/residue table (the `poles` CLI command and the Eq-style
/// long-time expansion). Entries are (mode index, q_i, pole, residue).
pub fn pole_table(
    assembly: &ProbeAssembly,
    stack: &LayerStack,
    domain: &TruncatedDomain,
    poles_per_mode: usize,
    t_min_hint: f64,
) -> Result<Vec<(usize, f64, f64, f64)>> {
    let Some(step) = pole_scan_step(stack) else {
        return Ok(Vec::new());
    };
    let s_min = -(1e6f64).ln() / t_min_hint;
    let weights = modal_weights(assembly, domain);
    let rows: Result<Vec<Vec<(usize, f64, f64, f64)>>> = weights
        .par_iter()
        .enumerate()
        .map(|(idx, &(q, _))| {
            let r2 = |s: f64| -> Result<f64> {
                Ok(reflection(q, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?
                    .denominator
                    .re)
            };
            let poles = find_poles(r2, 0.0, s_min, step, poles_per_mode)?;
            if poles.is_empty() {
                return Ok(Vec::new());
            }
            let r1 = |s: f64| -> Result<Complex64> {
                Ok(reflection(q, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?.numerator)
            };
            let ps = residues(r1, r2, &poles)?;
            Ok(ps
                .poles
                .iter()
                .zip(&ps.residues)
                .map(|(&p, a)| (idx + 1, q, p, a.re))
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Slowest decay mode: the least-negative pole of the first eigenvalue and
/// the amplitude of the corresponding first term of the modal expansion.
pub fn dominant_mode(
    assembly: &ProbeAssembly,
    stack: &LayerStack,
    domain: &TruncatedDomain,
) -> Result<DominantMode> {
    let tm = transition_time(stack);
    if tm == 0.0 {
        return Err(Error::NoMode);
    }
    let step = pole_scan_step(stack).ok_or(Error::NoMode)?;
    let q1 = std::f64::consts::PI / domain.h;
    let s_min = -(1e6f64).ln() * 100.0 / tm;

    let r2 = |s: f64| -> Result<f64> {
        Ok(reflection(q1, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?
            .denominator
            .re)
    };
    let poles = find_poles(r2, 0.0, s_min, step, 1)?;
    let &rate = poles.first().ok_or(Error::NoMode)?;
    let r1 = |s: f64| -> Result<Complex64> {
        Ok(reflection(q1, Complex64::new(s, 0.0), stack, ChainMethod::Scaled)?.numerator)
    };
    let ps = residues(r1, r2, &poles)?;

    let w1 = modal_weights(assembly, domain)[0].1;
    let prefactor = 4.0 * MU0 * std::f64::consts::PI / domain.h * assembly.drive_amplitude;
    Ok(DominantMode { amplitude: prefactor * w1 * ps.residues[0].re, rate })
}

/// Wall-thinning variants of a two-tube stack: one-sided losses of
/// `fraction` of each tube's wall (moving the corresponding interface), and
/// the two single-tube cases with one tube replaced by air.
pub fn thinning_scenarios(base: &LayerStack, fraction: f64) -> Result<Vec<(String, LayerStack)>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!("thinning fraction must be in (0, 1), got {fraction}")));
    }
    let conductive: Vec<usize> = base
        .layers()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_conductive())
        .map(|(i, _)| i)
        .collect();
    if conductive.len() != 2 {
        return Err(Error::Unsupported(format!(
            "thinning variants need exactly two conductive tubes, found {}",
            conductive.len()
        )));
    }
    if conductive[0] == 0 {
        return Err(Error::Unsupported(
            "the outer tube must have a finite outer radius (layer 1 must be air)".into(),
        ));
    }
    let radii = base.radii();
    let (outer, inner) = (conductive[0], conductive[1]);
    let th_outer = radii[outer - 1] - radii[outer];
    let th_inner = radii[inner - 1] - radii[inner];

    let variants = vec![
        (
            "outer_od".to_string(),
            base.with_radius(outer - 1, radii[outer - 1] - fraction * th_outer)?,
        ),
        (
            "outer_id".to_string(),
            base.with_radius(outer, radii[outer] + fraction * th_outer)?,
        ),
        (
            "inner_od".to_string(),
            base.with_radius(inner - 1, radii[inner - 1] - fraction * th_inner)?,
        ),
        (
            "inner_id".to_string(),
            base.with_radius(inner, radii[inner] + fraction * th_inner)?,
        ),
        ("outer_absent".to_string(), base.with_layer(outer, Layer::AIR)?),
        ("inner_absent".to_string(), base.with_layer(inner, Layer::AIR)?),
    ];
    Ok(variants)
}

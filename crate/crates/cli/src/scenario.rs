//! Scenario files: a flat TOML schema describing the probe, the layer
//! stack, the truncated domain, the drive and the inversion/output
//! settings. Lengths are meters unless `units = "mm"`; conductivities are
//! always S/m, times seconds, currents amperes.

use serde::{Deserialize, Serialize};

use pect_core::{
    place_coils, CoilSpec, Layer, LayerStack, ProbeAssembly, TransientOptions, TruncatedDomain,
};

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// "m" or "mm"; applies to every length in the file.
    pub units: Units,
    pub coils: CoilsSection,
    pub stack: StackSection,
    pub domain: DomainSection,
    pub drive: DriveSection,
    #[serde(default)]
    pub inversion: InversionSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
pub enum Units {
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "mm")]
    Millimeters,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoilsSection {
    /// Axial gap between the receiver top and the transmitter bottom.
    pub gap: f64,
    pub transmitter: CoilSection,
    pub receiver: CoilSection,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoilSection {
    pub r_inner: f64,
    pub r_outer: f64,
    pub length: f64,
    pub turns: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StackSection {
    /// Interface radii, outermost first, strictly decreasing.
    pub radii: Vec<f64>,
    /// One entry per layer, outermost first.
    pub layers: Vec<LayerSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LayerSection {
    pub sigma: f64,
    pub mu_r: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Axial truncation length, or "auto" for the configuration rule.
    pub h: HeightSpec,
    pub modes: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum HeightSpec {
    Auto(String),
    Length(f64),
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Only "step" is supported.
    pub r#type: DriveType,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
pub enum DriveType {
    #[serde(rename = "step")]
    Step,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InversionSection {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_stehfest_n")]
    pub stehfest_n: usize,
    #[serde(default = "default_poles_per_mode")]
    pub poles_per_mode: usize,
    #[serde(default = "default_nilt_samples")]
    pub nilt_samples: usize,
    #[serde(default = "default_nilt_accel_depth")]
    pub nilt_accel_depth: usize,
}

fn default_method() -> String {
    "hybrid".into()
}
fn default_stehfest_n() -> usize {
    14
}
fn default_poles_per_mode() -> usize {
    1
}
fn default_nilt_samples() -> usize {
    1024
}
fn default_nilt_accel_depth() -> usize {
    6
}

impl Default for InversionSection {
    fn default() -> Self {
        InversionSection {
            method: default_method(),
            stehfest_n: default_stehfest_n(),
            poles_per_mode: default_poles_per_mode(),
            nilt_samples: default_nilt_samples(),
            nilt_accel_depth: default_nilt_accel_depth(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Explicit sample times in seconds (overrides the log range).
    pub times: Option<Vec<f64>>,
    /// Log-spaced range in seconds.
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub points_per_decade: Option<usize>,
    /// Frequency sweep range in Hz.
    pub f_start: Option<f64>,
    pub f_end: Option<f64>,
    pub f_points_per_decade: Option<usize>,
    /// Default output path (the --out flag overrides it).
    pub path: Option<String>,
}

/// A fully validated scenario in SI units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub assembly: ProbeAssembly,
    pub stack: LayerStack,
    pub domain: TruncatedDomain,
    pub method: pect_core::InversionMethod,
    pub options: TransientOptions,
    pub output: OutputSection,
    pub file: ScenarioFile,
}

#[derive(Debug)]
pub enum ParseError {
    Missing(String),
    Syntax(String),
    UnknownKey(String),
    Invariant(String),
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Missing(m) => write!(f, "cannot read scenario: {m}"),
            ParseError::Syntax(m) => write!(f, "scenario syntax error: {m}"),
            ParseError::UnknownKey(m) => write!(f, "scenario has an unknown key: {m}"),
            ParseError::Invariant(m) => write!(f, "scenario violates an invariant: {m}"),
        }
    }
}

pub fn parse_method(name: &str) -> Result<pect_core::InversionMethod, ParseError> {
    match name {
        "stehfest" => Ok(pect_core::InversionMethod::Stehfest),
        "nilt" => Ok(pect_core::InversionMethod::Nilt),
        "poles" => Ok(pect_core::InversionMethod::Poles),
        "hybrid" => Ok(pect_core::InversionMethod::Hybrid),
        other => Err(ParseError::Invariant(format!(
            "method must be stehfest|nilt|poles|hybrid, got \"{other}\""
        ))),
    }
}

/// Resolve "auto" per the configuration rule: 100·r2T when any conductive
/// layer is magnetic (mu_r > 1), 20·r2T otherwise.
pub fn resolve_auto_h(stack: &LayerStack, r2t: f64) -> f64 {
    let magnetic = stack
        .layers()
        .iter()
        .any(|l| l.is_conductive() && l.mu_r > 1.0);
    if magnetic {
        100.0 * r2t
    } else {
        20.0 * r2t
    }
}

pub fn load(path: &std::path::Path) -> Result<Scenario, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseError::Missing(format!("{}: {e}", path.display())))?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<Scenario, ParseError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            ParseError::UnknownKey(msg)
        } else {
            ParseError::Syntax(msg)
        }
    })?;
    build(file)
}

pub fn build(file: ScenarioFile) -> Result<Scenario, ParseError> {
    let scale = match file.units {
        Units::Meters => 1.0,
        Units::Millimeters => 1e-3,
    };
    let inv = |m: String| ParseError::Invariant(m);

    let layers: Vec<Layer> = file
        .stack
        .layers
        .iter()
        .map(|l| Layer::new(l.sigma, l.mu_r).map_err(|e| inv(format!("stack.layers: {e}"))))
        .collect::<Result<_, _>>()?;
    let radii: Vec<f64> = file.stack.radii.iter().map(|r| r * scale).collect();
    let stack = LayerStack::new(layers, radii).map_err(|e| inv(format!("stack.radii: {e}")))?;

    let r2t = file.coils.transmitter.r_outer * scale;
    let h = match &file.domain.h {
        HeightSpec::Auto(word) if word == "auto" => resolve_auto_h(&stack, r2t),
        HeightSpec::Auto(word) => {
            return Err(inv(format!("domain.h must be a length or \"auto\", got \"{word}\"")))
        }
        HeightSpec::Length(v) => v * scale,
    };
    let domain = TruncatedDomain::new(h, file.domain.modes)
        .map_err(|e| inv(format!("domain: {e}")))?;

    let lt = file.coils.transmitter.length * scale;
    let lr = file.coils.receiver.length * scale;
    let gap = file.coils.gap * scale;
    let (z1t, z2t, z1r, z2r) =
        place_coils(h, lt, lr, gap).map_err(|e| inv(format!("coils: {e}")))?;
    let transmitter = CoilSpec::new(
        file.coils.transmitter.r_inner * scale,
        file.coils.transmitter.r_outer * scale,
        z1t,
        z2t,
        file.coils.transmitter.turns,
    )
    .map_err(|e| inv(format!("coils.transmitter: {e}")))?;
    let receiver = CoilSpec::new(
        file.coils.receiver.r_inner * scale,
        file.coils.receiver.r_outer * scale,
        z1r,
        z2r,
        file.coils.receiver.turns,
    )
    .map_err(|e| inv(format!("coils.receiver: {e}")))?;

    if transmitter.r2 >= stack.bore_radius() || receiver.r2 >= stack.bore_radius() {
        return Err(inv(format!(
            "coils must fit inside the bore: r_outer {} vs bore radius {}",
            transmitter.r2.max(receiver.r2),
            stack.bore_radius()
        )));
    }
    if !(file.drive.amplitude > 0.0 && file.drive.amplitude.is_finite()) {
        return Err(inv(format!(
            "drive.amplitude must be positive, got {}",
            file.drive.amplitude
        )));
    }

    let method = parse_method(&file.inversion.method)?;
    if file.inversion.stehfest_n % 2 != 0 || !(2..=20).contains(&file.inversion.stehfest_n) {
        return Err(inv(format!(
            "inversion.stehfest_n must be even in 2..=20, got {}",
            file.inversion.stehfest_n
        )));
    }
    if file.inversion.poles_per_mode == 0 {
        return Err(inv("inversion.poles_per_mode must be at least 1".into()));
    }
    if !file.inversion.nilt_samples.is_power_of_two() || file.inversion.nilt_samples < 64 {
        return Err(inv(format!(
            "inversion.nilt_samples must be a power of two >= 64, got {}",
            file.inversion.nilt_samples
        )));
    }
    let options = TransientOptions {
        poles_per_mode: file.inversion.poles_per_mode,
        stehfest_n: file.inversion.stehfest_n,
        nilt_samples: file.inversion.nilt_samples,
        nilt_accel_depth: file.inversion.nilt_accel_depth,
    };

    if let Some(times) = &file.output.times {
        if times.is_empty() {
            return Err(inv("output.times must not be empty".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(inv("output.times must be strictly increasing".into()));
            }
        }
        if times[0] <= 0.0 {
            return Err(inv("output.times must be positive".into()));
        }
    }
    for (key, v) in [
        ("output.t_start", file.output.t_start),
        ("output.t_end", file.output.t_end),
        ("output.f_start", file.output.f_start),
        ("output.f_end", file.output.f_end),
    ] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(inv(format!("{key} must be positive, got {v}")));
            }
        }
    }

    let assembly = ProbeAssembly {
        transmitter,
        receiver,
        drive_amplitude: file.drive.amplitude,
    };
    Ok(Scenario {
        assembly,
        stack,
        domain,
        method,
        options,
        output: file.output.clone(),
        file,
    })
}

/// Log-spaced time grid from the output section, falling back to a window
/// derived from the stack's transition time.
pub fn time_grid(scenario: &Scenario) -> Result<Vec<f64>, ParseError> {
    if let Some(times) = &scenario.output.times {
        return Ok(times.clone());
    }
    let tm = pect_core::transition_time(&scenario.stack);
    let t_start = scenario.output.t_start.unwrap_or(if tm > 0.0 { tm / 100.0 } else { 1e-4 });
    let t_end = scenario.output.t_end.unwrap_or(if tm > 0.0 { 3.0 * tm } else { 1.0 });
    if t_end <= t_start {
        return Err(ParseError::Invariant(format!(
            "output time range is empty: [{t_start}, {t_end}]"
        )));
    }
    let ppd = scenario.output.points_per_decade.unwrap_or(200);
    Ok(log_grid(t_start, t_end, ppd))
}

pub fn log_grid(lo: f64, hi: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(2);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut out = Vec::with_capacity(n + 1);
    let mut t = lo;
    for _ in 0..=n {
        out.push(t);
        t *= ratio;
    }
    // land exactly on the endpoint
    *out.last_mut().unwrap() = hi;
    out
}

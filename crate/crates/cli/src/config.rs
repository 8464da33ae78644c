//! Experiment configuration: TOML files and the embedded presets.
//!
//! See `README.md` for the full grammar. Energies (`j`, `h`, `omega`, `g`)
//! share one unit; times are reported as `gt` with `g` the largest coupling
//! magnitude, and `gt_max`, `dt`, `gt_from` are given in the same `gt` units.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;
use xxbath::{BellState, Complex64, Coupling};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rabi,
    Decoherence,
    Concurrence,
    AlphaSweep,
    RmaxSweep,
    FirstminSweep,
    EsdSweep,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Rabi => "rabi",
            ExperimentKind::Decoherence => "decoherence",
            ExperimentKind::Concurrence => "concurrence",
            ExperimentKind::AlphaSweep => "alpha_sweep",
            ExperimentKind::RmaxSweep => "rmax_sweep",
            ExperimentKind::FirstminSweep => "firstmin_sweep",
            ExperimentKind::EsdSweep => "esd_sweep",
        }
    }

    /// Runs that evolve a Bell pair and report concurrence.
    pub fn uses_bell(self) -> bool {
        matches!(self, ExperimentKind::Concurrence | ExperimentKind::EsdSweep)
    }

    fn is_sweep(self) -> bool {
        matches!(
            self,
            ExperimentKind::AlphaSweep | ExperimentKind::RmaxSweep | ExperimentKind::FirstminSweep | ExperimentKind::EsdSweep
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ValueList {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl ValueList {
    fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        match self {
            ValueList::List(v) if v.is_empty() => Err(CliError::usage(field, "list is empty")),
            ValueList::List(v) => Ok(v.clone()),
            ValueList::Range { count: 0, .. } => Err(CliError::usage(field, "range count must be positive")),
            ValueList::Range { start, count: 1, .. } => Ok(vec![*start]),
            ValueList::Range { start, stop, count } => Ok((0..*count)
                .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                .collect()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: ExperimentKind,
    #[serde(default)]
    description: Option<String>,
    model: ModelSection,
    #[serde(default)]
    initial: Option<InitialSection>,
    #[serde(default)]
    integrate: IntegrateSection,
    #[serde(default)]
    sweep: Option<SweepSection>,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    n: usize,
    #[serde(default)]
    j: Option<f64>,
    #[serde(default)]
    j_over_h: Option<f64>,
    #[serde(default)]
    h: f64,
    #[serde(default)]
    omega: f64,
    #[serde(default)]
    g: Option<f64>,
    #[serde(default)]
    g_sites: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InitialSection {
    Coherent {
        #[serde(default)]
        z: Option<ComplexValue>,
        #[serde(default)]
        theta: Option<f64>,
        #[serde(default)]
        phi: Option<f64>,
    },
    GroundState {
        #[serde(default)]
        a1: Option<ComplexValue>,
        #[serde(default)]
        abar1: Option<ComplexValue>,
    },
    Bell {
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<ComplexValue>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrateSection {
    gt_max: Option<f64>,
    dt: Option<f64>,
    stride: Option<usize>,
    gt_from: Option<f64>,
    alpha_window: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(default)]
    j_over_h: Option<ValueList>,
    #[serde(default)]
    h: Option<ValueList>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<String>,
    #[serde(default)]
    verify: bool,
}

/// Initial state of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    /// Qubit up, bath in the spin-coherent state `z`.
    Coherent { z: Complex64 },
    /// Qubit in `abar1 |1̄⟩ + a1 |1⟩`, bath in its ground state.
    GroundState { down: Complex64, up: Complex64 },
    /// Two qubit-bath copies, qubits in `α|11̄⟩ + β|1̄1⟩`.
    Bell(BellState),
}

/// One `(h, J)` point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub h: f64,
    pub j: f64,
    /// Set when `J` was given as a ratio to `h`.
    pub j_over_h: Option<f64>,
}

impl SweepPoint {
    /// File stem for the per-point CSV.
    pub fn stem(&self) -> String {
        match self.j_over_h {
            Some(r) => format!("h{}_jh{}", self.h, r),
            None => format!("h{}_j{}", self.h, self.j),
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub description: Option<String>,
    pub n_sites: usize,
    pub omega: f64,
    pub coupling: Coupling,
    pub initial: Initial,
    pub points: Vec<SweepPoint>,
    /// Whether the config carried a `[sweep]` section.
    pub swept: bool,
    pub gt_max: f64,
    /// Step in `gt` units; `None` selects the engine default.
    pub dt: Option<f64>,
    pub stride: usize,
    pub gt_from: f64,
    pub alpha_window: f64,
    pub out_dir: PathBuf,
    pub verify: bool,
}

impl Experiment {
    /// Largest coupling magnitude, the `g` of the `gt` axis.
    pub fn g_scale(&self) -> f64 {
        self.coupling.max_abs()
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub verify: bool,
    pub dt: Option<f64>,
    pub gt_max: Option<f64>,
}

const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("fig1c", include_str!("../presets/fig1c.toml")),
    ("fig1d", include_str!("../presets/fig1d.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig3c", include_str!("../presets/fig3c.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load_preset(name: &str, overrides: &Overrides) -> Result<Experiment, CliError> {
    let text = preset_source(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
    parse(name, text, overrides)
}

/// Resolves `target` as a preset name first, then as a config path.
pub fn load(target: &str, overrides: &Overrides) -> Result<Experiment, CliError> {
    if preset_source(target).is_some() {
        return load_preset(target, overrides);
    }
    let path = PathBuf::from(target);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("`{target}` is neither a preset nor a readable config: {e}")))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    parse(&name, &text, overrides)
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(field, format!("must be finite and positive, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(field, format!("must be finite, got {v}")))
    }
}

pub fn parse(name: &str, text: &str, overrides: &Overrides) -> Result<Experiment, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("config `{name}`: {}", e.message())))?;
    let kind = file.experiment;
    let model = &file.model;

    if model.n < 2 || model.n % 2 != 0 {
        return Err(CliError::usage("model.n", format!("must be even and >= 2, got {}", model.n)));
    }
    let coupling = match (&model.g, &model.g_sites) {
        (Some(_), Some(_)) => return Err(CliError::usage("model.g", "give either `g` or `g_sites`, not both")),
        (Some(g), None) => Coupling::Uniform(positive("model.g", *g)?),
        (None, Some(gs)) => {
            if gs.len() != model.n {
                return Err(CliError::usage("model.g_sites", format!("needs {} entries, got {}", model.n, gs.len())));
            }
            for g in gs {
                finite("model.g_sites", *g)?;
            }
            if gs.iter().all(|g| *g == 0.0) {
                return Err(CliError::usage("model.g_sites", "at least one coupling must be nonzero"));
            }
            Coupling::PerSite(gs.clone())
        }
        (None, None) => Coupling::Uniform(1.0),
    };
    let omega = finite("model.omega", model.omega)?;
    finite("model.h", model.h)?;

    let initial = match (&file.initial, kind) {
        (None, ExperimentKind::Rabi) => return Err(CliError::usage("initial", "rabi runs need a coherent initial state")),
        (None, k) if k.uses_bell() => Initial::Bell(BellState::maximal()),
        (None, _) => Initial::GroundState {
            down: Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            up: Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        },
        (Some(InitialSection::Coherent { z, theta, phi }), ExperimentKind::Rabi) => {
            let z = match (z, theta, phi) {
                (Some(z), None, None) => Complex64::from(*z),
                (None, Some(theta), phi) => {
                    let phi = phi.unwrap_or(0.0);
                    let spec = xxbath::CoherentSpec::from_angles(model.n, *theta, phi)
                        .map_err(|e| CliError::usage("initial.theta", e.to_string()))?;
                    spec.z
                }
                _ => return Err(CliError::usage("initial.z", "give either `z` or `theta` (with optional `phi`)")),
            };
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(CliError::usage("initial.z", "must be finite"));
            }
            Initial::Coherent { z }
        }
        (Some(InitialSection::GroundState { a1, abar1 }), k) if !k.uses_bell() && k != ExperimentKind::Rabi => {
            let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let up = a1.map_or(half, Complex64::from);
            let down = abar1.map_or(half, Complex64::from);
            xxbath::QubitAmplitudes::new(down, up).map_err(|e| CliError::usage("initial.a1", e.to_string()))?;
            Initial::GroundState { down, up }
        }
        (Some(InitialSection::Bell { alpha, beta }), k) if k.uses_bell() => {
            let alpha = alpha.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
            let beta = beta.map_or(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), Complex64::from);
            Initial::Bell(BellState::new(alpha, beta).map_err(|e| CliError::usage("initial.alpha", e.to_string()))?)
        }
        (Some(_), k) => {
            let expected = match k {
                ExperimentKind::Rabi => "coherent",
                k if k.uses_bell() => "bell",
                _ => "ground_state",
            };
            return Err(CliError::usage("initial.kind", format!("`{k}` runs need kind = \"{expected}\"")));
        }
    };

    let points = sweep_points(model, file.sweep.as_ref(), kind)?;

    let integrate = &file.integrate;
    let alpha_window = positive("integrate.alpha_window", integrate.alpha_window.unwrap_or(xxbath::observables::DEFAULT_ALPHA_WINDOW))?;
    let default_gt_max = if kind == ExperimentKind::AlphaSweep {
        2.5 * alpha_window
    } else {
        10.0
    };
    let gt_max = positive("integrate.gt_max", overrides.gt_max.or(integrate.gt_max).unwrap_or(default_gt_max))?;
    let dt = overrides.dt.or(integrate.dt).map(|dt| positive("integrate.dt", dt)).transpose()?;
    let stride = integrate.stride.unwrap_or(1);
    if stride == 0 {
        return Err(CliError::usage("integrate.stride", "must be at least 1"));
    }
    let gt_from = integrate.gt_from.unwrap_or(0.0);
    if !(gt_from.is_finite() && gt_from >= 0.0 && gt_from < gt_max) {
        return Err(CliError::usage("integrate.gt_from", format!("must lie in [0, gt_max), got {gt_from}")));
    }

    let out_dir = overrides
        .out
        .clone()
        .or_else(|| file.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(name));

    Ok(Experiment {
        name: name.to_string(),
        kind,
        description: file.description.clone(),
        n_sites: model.n,
        omega,
        coupling,
        initial,
        swept: file.sweep.is_some(),
        points,
        gt_max,
        dt,
        stride,
        gt_from,
        alpha_window,
        out_dir,
        verify: overrides.verify || file.output.verify,
    })
}

fn sweep_points(model: &ModelSection, sweep: Option<&SweepSection>, kind: ExperimentKind) -> Result<Vec<SweepPoint>, CliError> {
    if kind == ExperimentKind::Rabi && sweep.is_some() {
        return Err(CliError::usage("sweep", "rabi runs do not take a sweep"));
    }
    if kind.is_sweep() && sweep.is_none() {
        return Err(CliError::usage("sweep", format!("`{kind}` needs a [sweep] section")));
    }
    let hs = match sweep.and_then(|s| s.h.as_ref()) {
        Some(list) => list.values("sweep.h")?,
        None => vec![model.h],
    };
    for h in &hs {
        finite("sweep.h", *h)?;
    }
    let ratios = sweep.and_then(|s| s.j_over_h.as_ref()).map(|l| l.values("sweep.j_over_h")).transpose()?;
    let mut points = Vec::new();
    for &h in &hs {
        match (&ratios, model.j, model.j_over_h) {
            (Some(rs), _, _) => {
                for &r in rs {
                    finite("sweep.j_over_h", r)?;
                    points.push(SweepPoint { h, j: r * h, j_over_h: Some(r) });
                }
            }
            (None, Some(_), Some(_)) => return Err(CliError::usage("model.j", "give either `j` or `j_over_h`, not both")),
            (None, Some(j), None) => points.push(SweepPoint { h, j: finite("model.j", j)?, j_over_h: None }),
            (None, None, Some(r)) => points.push(SweepPoint { h, j: finite("model.j_over_h", r)? * h, j_over_h: Some(r) }),
            (None, None, None) => points.push(SweepPoint { h, j: 0.0, j_over_h: None }),
        }
    }
    Ok(points)
}

//! Scenario files: parsing, validation and resolution into simulation inputs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use pairgen_core::bulk::{BulkConfig, FieldPolarizations, NonlinearCoefficients};
use pairgen_core::constants::{omega_from_wavelength, C};
use pairgen_core::layered::{Layer, LayerStack, WavePolarization};
use pairgen_core::materials::{Direction, Material, MaterialDb, Polarization};
use pairgen_core::numerics::{make_grid, UniformGrid};
use pairgen_core::observables::{Contribution, HOMConfig};
use pairgen_core::pump::{cw_regularization, DetectionFilters, GaussianFilter, PumpSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::units::{Dimension, Quantity};

pub const DEFAULT_FILTER_NM: f64 = 30.0;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_WINDOW: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Bulk,
    Layered,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    /// Material database, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials_path: Option<String>,
    /// Inline materials; take precedence over any database.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<Material>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulk: Option<BulkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layered: Option<LayeredSection>,
    pub pump: PumpSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub filters: FilterSection,
    /// Output directions of signal and idler, e.g. `"FF"`.
    #[serde(default = "default_directions")]
    pub directions: String,
    #[serde(default = "default_contributions")]
    pub contributions: Vec<Contribution>,
    /// Detection window `2T` for cw pumping; omitted means normalized output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_window: Option<Quantity>,
    pub outputs: Vec<OutputSpec>,
}

fn default_directions() -> String {
    "FF".into()
}

fn default_contributions() -> Vec<Contribution> {
    vec![Contribution::Volume, Contribution::Surface, Contribution::Total]
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationSection {
    pub pump: Polarization,
    pub signal: Polarization,
    pub idler: Polarization,
}

impl Default for PolarizationSection {
    fn default() -> Self {
        Self {
            pump: Polarization::Ordinary,
            signal: Polarization::Ordinary,
            idler: Polarization::Ordinary,
        }
    }
}

impl From<PolarizationSection> for FieldPolarizations {
    fn from(p: PolarizationSection) -> Self {
        FieldPolarizations {
            pump: p.pump,
            signal: p.signal,
            idler: p.idler,
        }
    }
}

fn vacuum_name() -> String {
    "vacuum".into()
}

fn default_d() -> Quantity {
    Quantity::Text("1 pm/V".into())
}

fn zero() -> Quantity {
    Quantity::Si(0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkSection {
    pub crystal: String,
    pub length: Quantity,
    /// One simulation case per angle.
    pub axis_angles: Vec<Quantity>,
    #[serde(default)]
    pub polarizations: PolarizationSection,
    #[serde(default = "default_d")]
    pub d_eff: Quantity,
    #[serde(default = "vacuum_name")]
    pub surrounding: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub material: String,
    pub length: Quantity,
    #[serde(default = "zero")]
    pub d_eff: Quantity,
}

/// Either a single layer or `repeat` copies of a group of layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_eff: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredSection {
    #[serde(default = "vacuum_name")]
    pub ambient_in: String,
    #[serde(default = "vacuum_name")]
    pub ambient_out: String,
    #[serde(default)]
    pub polarizations: PolarizationSection,
    #[serde(default)]
    pub wave_polarization: WavePolarization,
    #[serde(default = "zero")]
    pub pump_angle: Quantity,
    /// External signal emission angle in `ambient_out`.
    #[serde(default = "zero")]
    pub signal_angle: Quantity,
    pub layers: Vec<LayerEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpKindName {
    Cw,
    Gaussian,
}

fn one() -> f64 {
    1.0
}

fn forward() -> Direction {
    Direction::Forward
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub kind: PumpKindName,
    pub wavelength: Quantity,
    /// Intensity FWHM of a Gaussian pulse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<Quantity>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "forward")]
    pub direction: Direction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub count: usize,
    /// Half-width of the frequency window in units of the signal filter FWHM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_widths: Option<f64>,
    /// Half-width of the window as a wavelength span around the centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfwidth: Option<Quantity>,
    /// Centre of the signal axis; degenerate when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_wavelength: Option<Quantity>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            count: DEFAULT_GRID,
            filter_widths: None,
            halfwidth: None,
            signal_wavelength: None,
        }
    }
}

fn default_filter() -> Quantity {
    Quantity::Text(format!("{DEFAULT_FILTER_NM} nm"))
}

/// Wavelength FWHM of each detection filter, or `"none"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default = "default_filter")]
    pub signal: Quantity,
    #[serde(default = "default_filter")]
    pub idler: Quantity,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            signal: default_filter(),
            idler: default_filter(),
        }
    }
}

/// A beam-splitter amplitude: real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexIn {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexIn {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexIn::Real(r) => Complex64::new(r, 0.0),
            ComplexIn::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn balanced() -> ComplexIn {
    ComplexIn::Real(std::f64::consts::FRAC_1_SQRT_2)
}

fn auto() -> Quantity {
    Quantity::Text("auto".into())
}

fn default_pad() -> usize {
    pairgen_core::observables::DEFAULT_PAD
}

fn default_tau_count() -> usize {
    401
}

fn default_tau_halfwidth() -> Quantity {
    Quantity::Text("2 ps".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputSpec {
    Spectrum,
    JointDensity {
        /// Also write a row-major binary dump with a JSON sidecar.
        #[serde(default)]
        binary: bool,
    },
    Temporal {
        #[serde(default = "default_pad")]
        pad: usize,
    },
    Flux {
        #[serde(default = "default_pad")]
        pad: usize,
    },
    Hom {
        #[serde(default = "balanced")]
        r: ComplexIn,
        #[serde(default = "balanced")]
        t: ComplexIn,
        #[serde(default = "default_tau_halfwidth")]
        tau_halfwidth: Quantity,
        #[serde(default = "default_tau_count")]
        tau_count: usize,
        /// `"auto"` centres the volume dip for bulk crystals.
        #[serde(default = "auto")]
        delay_offset: Quantity,
    },
    Schmidt,
    /// Spectral ratio total/volume against the signal emission angle.
    RatioMap {
        angle_from: Quantity,
        angle_to: Quantity,
        angle_count: usize,
    },
    /// Pair-number ratio surface/volume against the length of one layer.
    LengthSweep {
        layer: usize,
        from: Quantity,
        to: Quantity,
        count: usize,
        #[serde(default = "linear")]
        spacing: Spacing,
    },
}

fn linear() -> Spacing {
    Spacing::Linear
}

impl OutputSpec {
    pub fn label(&self) -> &'static str {
        match self {
            OutputSpec::Spectrum => "spectrum",
            OutputSpec::JointDensity { .. } => "joint_density",
            OutputSpec::Temporal { .. } => "temporal",
            OutputSpec::Flux { .. } => "flux",
            OutputSpec::Hom { .. } => "hom",
            OutputSpec::Schmidt => "schmidt",
            OutputSpec::RatioMap { .. } => "ratio_map",
            OutputSpec::LengthSweep { .. } => "length_sweep",
        }
    }
}

/// Parses scenario text, reporting the JSON path of the first offending field.
pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::validation(path, e.into_inner())
    })
}

/// Reads a scenario file, or the resolved scenario stored in a manifest.
pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("<file>", format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::validation("<file>", format!("{}: {e}", path.display())))?;
    match value.get("resolved_scenario") {
        Some(inner) => parse_scenario(&inner.to_string()),
        None => parse_scenario(&text),
    }
}

/// Command-line overrides applied before resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub contribution: Option<Contribution>,
    pub db: Option<PathBuf>,
}

/// One simulated configuration of a scenario.
#[derive(Debug, Clone)]
pub enum Model {
    Bulk { axis_angle: f64, config: BulkConfig },
    Layered(LayerStack),
}

impl Model {
    pub fn label(&self) -> Option<(String, String)> {
        match self {
            Model::Bulk { axis_angle, .. } => Some(("axis_angle [deg]".into(), fmt_f(axis_angle.to_degrees()))),
            Model::Layered(_) => None,
        }
    }
}

pub fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone)]
pub enum Output {
    Spectrum,
    JointDensity {
        binary: bool,
    },
    Temporal {
        pad: usize,
    },
    Flux {
        pad: usize,
    },
    Hom {
        r: Complex64,
        t: Complex64,
        tau: UniformGrid,
        delay_offset: Option<f64>,
    },
    Schmidt,
    RatioMap {
        angles: Vec<f64>,
    },
    LengthSweep {
        layer: usize,
        lengths: Vec<f64>,
    },
}

/// A scenario with every quantity in SI units and every reference resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Self-contained scenario that reproduces this run.
    pub scenario: Scenario,
    pub models: Vec<Model>,
    pub pump: PumpSpec,
    pub axis_s: UniformGrid,
    pub axis_i: UniformGrid,
    pub filters: DetectionFilters,
    pub directions: (Direction, Direction),
    pub contributions: Vec<Contribution>,
    pub regularization: f64,
    pub outputs: Vec<Output>,
}

fn si(q: &Quantity, dim: Dimension, path: &str) -> CliResult<f64> {
    let v = q.si(dim).map_err(|m| CliError::validation(path, m))?;
    if !v.is_finite() {
        return Err(CliError::validation(path, "value must be finite"));
    }
    Ok(v)
}

fn positive(q: &Quantity, dim: Dimension, path: &str) -> CliResult<f64> {
    let v = si(q, dim, path)?;
    if v <= 0.0 {
        return Err(CliError::validation(path, format!("must be > 0, got {v}")));
    }
    Ok(v)
}

fn filter_fwhm(q: &Quantity, path: &str) -> CliResult<Option<f64>> {
    if matches!(q, Quantity::Text(t) if t.trim() == "none") {
        return Ok(None);
    }
    positive(q, Dimension::Length, path).map(Some)
}

fn parse_directions(s: &str) -> CliResult<(Direction, Direction)> {
    let d = |c| match c {
        'F' => Ok(Direction::Forward),
        'B' => Ok(Direction::Backward),
        _ => Err(CliError::validation(
            "directions",
            format!("'{s}' is not one of FF, FB, BF, BB"),
        )),
    };
    let chars: Vec<char> = s.chars().collect();
    if chars.len() != 2 {
        return Err(CliError::validation(
            "directions",
            format!("'{s}' is not one of FF, FB, BF, BB"),
        ));
    }
    Ok((d(chars[0])?, d(chars[1])?))
}

/// Picks the material database: inline `materials`, `--db`, `materials_path`,
/// the `PAIRGEN_MATERIALS` variable, then the shipped data.
pub fn resolve_db(scenario: &Scenario, base: &Path, overrides: &Overrides) -> CliResult<MaterialDb> {
    if let Some(list) = &scenario.materials {
        return MaterialDb::from_materials(list.clone()).map_err(|e| CliError::validation("materials", e));
    }
    if let Some(p) = &overrides.db {
        return crate::materials_cmd::open_db(Some(p)).map_err(|e| CliError::validation("--db", e));
    }
    if let Some(p) = &scenario.materials_path {
        let full = base.join(p);
        return crate::materials_cmd::open_db(Some(&full)).map_err(|e| CliError::validation("materials_path", e));
    }
    crate::materials_cmd::open_db(None).map_err(|e| CliError::validation("materials", e))
}

struct Lookup<'a> {
    db: &'a MaterialDb,
    used: BTreeSet<String>,
}

impl Lookup<'_> {
    fn get(&mut self, name: &str, path: &str) -> CliResult<Material> {
        let m = self.db.get(name).map_err(|e| CliError::validation(path, e))?;
        self.used.insert(name.to_owned());
        Ok(m.clone())
    }
}

fn expand_layers(section: &LayeredSection, lookup: &mut Lookup) -> CliResult<(Vec<Layer>, Vec<LayerEntry>)> {
    let mut layers = Vec::new();
    let mut normalized = Vec::new();
    let one = |spec: &LayerSpec, path: &str, lookup: &mut Lookup| -> CliResult<(Layer, LayerSpec)> {
        let material = lookup.get(&spec.material, &format!("{path}.material"))?;
        let length = positive(&spec.length, Dimension::Length, &format!("{path}.length"))?;
        let d = si(&spec.d_eff, Dimension::Nonlinear, &format!("{path}.d_eff"))?;
        Ok((
            Layer {
                length,
                material,
                nonlinear: NonlinearCoefficients::uniform(d),
            },
            LayerSpec {
                material: spec.material.clone(),
                length: Quantity::Si(length),
                d_eff: Quantity::Si(d),
            },
        ))
    };
    if section.layers.is_empty() {
        return Err(CliError::validation("layered.layers", "at least one layer is required"));
    }
    for (k, entry) in section.layers.iter().enumerate() {
        let path = format!("layered.layers[{k}]");
        match (&entry.layers, &entry.material) {
            (Some(group), None) => {
                if entry.length.is_some() || entry.d_eff.is_some() {
                    return Err(CliError::validation(&path, "a group takes only 'repeat' and 'layers'"));
                }
                let repeat = entry.repeat.unwrap_or(1);
                if repeat == 0 || group.is_empty() {
                    return Err(CliError::validation(
                        &path,
                        "a group needs repeat >= 1 and at least one layer",
                    ));
                }
                let mut specs = Vec::new();
                let mut built = Vec::new();
                for (j, spec) in group.iter().enumerate() {
                    let (l, s) = one(spec, &format!("{path}.layers[{j}]"), lookup)?;
                    built.push(l);
                    specs.push(s);
                }
                for _ in 0..repeat {
                    layers.extend(built.iter().cloned());
                }
                normalized.push(LayerEntry {
                    material: None,
                    length: None,
                    d_eff: None,
                    repeat: Some(repeat),
                    layers: Some(specs),
                });
            }
            (None, Some(material)) => {
                if entry.repeat.is_some() {
                    return Err(CliError::validation(&path, "'repeat' needs a 'layers' group"));
                }
                let length = entry
                    .length
                    .clone()
                    .ok_or_else(|| CliError::validation(format!("{path}.length"), "missing field"))?;
                let spec = LayerSpec {
                    material: material.clone(),
                    length,
                    d_eff: entry.d_eff.clone().unwrap_or(Quantity::Si(0.0)),
                };
                let (l, s) = one(&spec, &path, lookup)?;
                layers.push(l);
                normalized.push(LayerEntry {
                    material: Some(s.material),
                    length: Some(s.length),
                    d_eff: Some(s.d_eff),
                    repeat: None,
                    layers: None,
                });
            }
            _ => {
                return Err(CliError::validation(
                    &path,
                    "give either 'material' and 'length' or a 'layers' group",
                ))
            }
        }
    }
    Ok((layers, normalized))
}

fn angle_grid(from: f64, to: f64, count: usize, path: &str) -> CliResult<Vec<f64>> {
    if count < 2 || !(to > from) {
        return Err(CliError::validation(path, "needs count >= 2 and an increasing range"));
    }
    Ok((0..count)
        .map(|k| from + (to - from) * k as f64 / (count - 1) as f64)
        .collect())
}

/// Validates `scenario` and builds everything a run needs. Every module
/// precondition is checked here, before any kernel is evaluated.
pub fn resolve(mut scenario: Scenario, base: &Path, overrides: &Overrides) -> CliResult<Resolved> {
    if let Some(n) = overrides.grid {
        scenario.grid.count = n;
    }
    if let Some(c) = overrides.contribution {
        scenario.contributions = vec![c];
    }
    let db = resolve_db(&scenario, base, overrides)?;
    let mut lookup = Lookup {
        db: &db,
        used: BTreeSet::new(),
    };

    if scenario.name.trim().is_empty() {
        return Err(CliError::validation("name", "must not be empty"));
    }
    if scenario.contributions.is_empty() {
        return Err(CliError::validation(
            "contributions",
            "at least one contribution is required",
        ));
    }
    if scenario.outputs.is_empty() {
        return Err(CliError::validation("outputs", "at least one output is required"));
    }
    let directions = parse_directions(&scenario.directions)?;

    let lambda_p = positive(&scenario.pump.wavelength, Dimension::Length, "pump.wavelength")?;
    let omega_p = omega_from_wavelength(lambda_p);
    let mut pump = match scenario.pump.kind {
        PumpKindName::Cw => {
            if scenario.pump.duration.is_some() {
                return Err(CliError::validation("pump.duration", "a cw pump takes no duration"));
            }
            PumpSpec::cw(omega_p)
        }
        PumpKindName::Gaussian => {
            let q = scenario
                .pump
                .duration
                .as_ref()
                .ok_or_else(|| CliError::validation("pump.duration", "required for a gaussian pump"))?;
            PumpSpec::gaussian(omega_p, positive(q, Dimension::Time, "pump.duration")?)
        }
    };
    pump.amplitude_scale = scenario.pump.amplitude;
    pump.direction = scenario.pump.direction;
    pump.validate().map_err(|e| CliError::validation("pump", e))?;
    scenario.pump.wavelength = Quantity::Si(lambda_p);
    if let (PumpKindName::Gaussian, pairgen_core::pump::PumpKind::GaussianPulse { duration }) =
        (scenario.pump.kind, pump.kind)
    {
        scenario.pump.duration = Some(Quantity::Si(duration));
    }

    let lambda_s = match &scenario.grid.signal_wavelength {
        Some(q) => positive(q, Dimension::Length, "grid.signal_wavelength")?,
        None => 2.0 * lambda_p,
    };
    let omega_s0 = omega_from_wavelength(lambda_s);
    if omega_s0 >= omega_p {
        return Err(CliError::validation(
            "grid.signal_wavelength",
            "must be longer than the pump wavelength",
        ));
    }
    let omega_i0 = omega_p - omega_s0;
    let lambda_i = 2.0 * std::f64::consts::PI * C / omega_i0;

    let fs = filter_fwhm(&scenario.filters.signal, "filters.signal")?;
    let fi = filter_fwhm(&scenario.filters.idler, "filters.idler")?;
    let filters = DetectionFilters {
        signal: fs
            .map(|w| GaussianFilter::from_wavelength(lambda_s, w))
            .transpose()
            .map_err(|e| CliError::validation("filters.signal", e))?,
        idler: fi
            .map(|w| GaussianFilter::from_wavelength(lambda_i, w))
            .transpose()
            .map_err(|e| CliError::validation("filters.idler", e))?,
    };
    scenario.filters = FilterSection {
        signal: fs.map_or(Quantity::Text("none".into()), Quantity::Si),
        idler: fi.map_or(Quantity::Text("none".into()), Quantity::Si),
    };

    let count = scenario.grid.count;
    if count < 2 {
        return Err(CliError::validation("grid.count", format!("must be >= 2, got {count}")));
    }
    let halfwidth = match (&scenario.grid.halfwidth, scenario.grid.filter_widths) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(
                "grid",
                "give either 'halfwidth' or 'filter_widths', not both",
            ))
        }
        (Some(q), None) => {
            let dl = positive(q, Dimension::Length, "grid.halfwidth")?;
            let hw = 2.0 * std::f64::consts::PI * C * dl / (lambda_s * lambda_s);
            scenario.grid.halfwidth = Some(Quantity::Si(dl));
            hw
        }
        (None, w) => {
            let w = w.unwrap_or(DEFAULT_WINDOW);
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::validation("grid.filter_widths", "must be > 0"));
            }
            let f = filters.signal.ok_or_else(|| {
                CliError::validation(
                    "grid",
                    "without a signal filter the window needs an explicit 'halfwidth'",
                )
            })?;
            scenario.grid.filter_widths = Some(w);
            w * f.fwhm
        }
    };
    if halfwidth >= omega_s0.min(omega_i0) {
        return Err(CliError::validation("grid", "frequency window reaches zero frequency"));
    }
    scenario.grid.signal_wavelength = Some(Quantity::Si(lambda_s));
    let axis_s = make_grid(omega_s0, halfwidth, count).map_err(|e| CliError::validation("grid", e))?;
    let axis_i = make_grid(omega_i0, halfwidth, count).map_err(|e| CliError::validation("grid", e))?;

    let regularization = match &scenario.detection_window {
        Some(q) => {
            let w = positive(q, Dimension::Time, "detection_window")?;
            scenario.detection_window = Some(Quantity::Si(w));
            cw_regularization(Some(w))
        }
        None => cw_regularization(None),
    };

    let models = match scenario.kind {
        Kind::Bulk => {
            if scenario.layered.is_some() {
                return Err(CliError::validation("layered", "not allowed for kind 'bulk'"));
            }
            let b = scenario
                .bulk
                .as_mut()
                .ok_or_else(|| CliError::validation("bulk", "required for kind 'bulk'"))?;
            let crystal = lookup.get(&b.crystal, "bulk.crystal")?;
            let surrounding = lookup.get(&b.surrounding, "bulk.surrounding")?;
            let length = positive(&b.length, Dimension::Length, "bulk.length")?;
            let d = si(&b.d_eff, Dimension::Nonlinear, "bulk.d_eff")?;
            if b.axis_angles.is_empty() {
                return Err(CliError::validation(
                    "bulk.axis_angles",
                    "at least one angle is required",
                ));
            }
            let mut models = Vec::new();
            let mut angles = Vec::new();
            for (k, q) in b.axis_angles.iter().enumerate() {
                let path = format!("bulk.axis_angles[{k}]");
                let a = si(q, Dimension::Angle, &path)?;
                let config = BulkConfig {
                    length,
                    crystal: crystal.clone(),
                    polarizations: b.polarizations.into(),
                    axis_angle: a,
                    nonlinear: NonlinearCoefficients::uniform(d),
                    pump,
                    surrounding: surrounding.clone(),
                };
                config.validate().map_err(|e| CliError::validation(&path, e))?;
                angles.push(Quantity::Si(a));
                models.push(Model::Bulk { axis_angle: a, config });
            }
            b.length = Quantity::Si(length);
            b.d_eff = Quantity::Si(d);
            b.axis_angles = angles;
            models
        }
        Kind::Layered => {
            if scenario.bulk.is_some() {
                return Err(CliError::validation("bulk", "not allowed for kind 'layered'"));
            }
            let l = scenario
                .layered
                .as_mut()
                .ok_or_else(|| CliError::validation("layered", "required for kind 'layered'"))?;
            let (layers, normalized) = expand_layers(l, &mut lookup)?;
            let stack = LayerStack {
                layers,
                ambient_in: lookup.get(&l.ambient_in, "layered.ambient_in")?,
                ambient_out: lookup.get(&l.ambient_out, "layered.ambient_out")?,
                polarizations: l.polarizations.into(),
                wave_polarization: l.wave_polarization,
                pump_angle: si(&l.pump_angle, Dimension::Angle, "layered.pump_angle")?,
                signal_angle: si(&l.signal_angle, Dimension::Angle, "layered.signal_angle")?,
            };
            stack.validate().map_err(|e| CliError::validation("layered", e))?;
            if stack.layers.iter().all(|x| x.nonlinear.is_zero()) {
                return Err(CliError::validation("layered.layers", "no layer has a nonzero d_eff"));
            }
            if pump.direction != Direction::Forward {
                return Err(CliError::validation(
                    "pump.direction",
                    "a layered stack is pumped from the input side (F)",
                ));
            }
            l.layers = normalized;
            l.pump_angle = Quantity::Si(stack.pump_angle);
            l.signal_angle = Quantity::Si(stack.signal_angle);
            vec![Model::Layered(stack)]
        }
    };

    let cw = pump.is_cw();
    let mut outputs = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, spec) in scenario.outputs.iter_mut().enumerate() {
        let path = format!("outputs[{k}]");
        if !seen.insert(spec.label()) {
            return Err(CliError::validation(
                &path,
                format!("duplicate output '{}'", spec.label()),
            ));
        }
        let out = match spec {
            OutputSpec::Spectrum => Output::Spectrum,
            OutputSpec::JointDensity { binary } => Output::JointDensity { binary: *binary },
            OutputSpec::Temporal { pad } => {
                if *pad == 0 {
                    return Err(CliError::validation(format!("{path}.pad"), "must be >= 1"));
                }
                if cw && (filters.signal.is_none() || filters.idler.is_none()) {
                    return Err(CliError::validation(
                        &path,
                        "temporal amplitudes under cw pumping need both detection filters",
                    ));
                }
                Output::Temporal { pad: *pad }
            }
            OutputSpec::Flux { pad } => {
                if cw {
                    return Err(CliError::validation(&path, "photon flux needs a pulsed pump"));
                }
                if *pad == 0 {
                    return Err(CliError::validation(format!("{path}.pad"), "must be >= 1"));
                }
                Output::Flux { pad: *pad }
            }
            OutputSpec::Hom {
                r,
                t,
                tau_halfwidth,
                tau_count,
                delay_offset,
            } => {
                let hw = positive(tau_halfwidth, Dimension::Time, &format!("{path}.tau_halfwidth"))?;
                let tau =
                    make_grid(0.0, hw, *tau_count).map_err(|e| CliError::validation(format!("{path}.tau_count"), e))?;
                let offset = match &*delay_offset {
                    Quantity::Text(s) if s.trim() == "auto" => None,
                    q => Some(si(q, Dimension::Time, &format!("{path}.delay_offset"))?),
                };
                let cfg = HOMConfig {
                    r: r.value(),
                    t: t.value(),
                    tau,
                    delay_offset: offset.unwrap_or(0.0),
                };
                cfg.validate().map_err(|e| CliError::validation(&path, e))?;
                if (omega_s0 - omega_i0).abs() > 1e-9 * omega_p {
                    return Err(CliError::validation(&path, "HOM interference needs a degenerate grid"));
                }
                *tau_halfwidth = Quantity::Si(hw);
                if let Some(o) = offset {
                    *delay_offset = Quantity::Si(o);
                }
                Output::Hom {
                    r: cfg.r,
                    t: cfg.t,
                    tau,
                    delay_offset: offset,
                }
            }
            OutputSpec::Schmidt => {
                if cw {
                    return Err(CliError::validation(&path, "Schmidt decomposition needs a pulsed pump"));
                }
                Output::Schmidt
            }
            OutputSpec::RatioMap {
                angle_from,
                angle_to,
                angle_count,
            } => {
                if scenario.kind != Kind::Layered {
                    return Err(CliError::validation(&path, "ratio_map applies to layered scenarios"));
                }
                let a = si(angle_from, Dimension::Angle, &format!("{path}.angle_from"))?;
                let b = si(angle_to, Dimension::Angle, &format!("{path}.angle_to"))?;
                let angles = angle_grid(a, b, *angle_count, &path)?;
                if angles.iter().any(|x| x.abs() >= std::f64::consts::FRAC_PI_2) {
                    return Err(CliError::validation(&path, "angles must lie inside (-90, 90) deg"));
                }
                *angle_from = Quantity::Si(a);
                *angle_to = Quantity::Si(b);
                Output::RatioMap { angles }
            }
            OutputSpec::LengthSweep {
                layer,
                from,
                to,
                count,
                spacing,
            } => {
                let Some(Model::Layered(stack)) = models.first() else {
                    return Err(CliError::validation(&path, "length_sweep applies to layered scenarios"));
                };
                if *layer >= stack.layers.len() {
                    return Err(CliError::validation(
                        format!("{path}.layer"),
                        format!("stack has {} layers", stack.layers.len()),
                    ));
                }
                let a = positive(from, Dimension::Length, &format!("{path}.from"))?;
                let b = positive(to, Dimension::Length, &format!("{path}.to"))?;
                let lengths = match spacing {
                    Spacing::Linear => angle_grid(a, b, *count, &path)?,
                    Spacing::Log => angle_grid(a.ln(), b.ln(), *count, &path)?
                        .into_iter()
                        .map(f64::exp)
                        .collect(),
                };
                *from = Quantity::Si(a);
                *to = Quantity::Si(b);
                Output::LengthSweep { layer: *layer, lengths }
            }
        };
        outputs.push(out);
    }

    let used: Vec<Material> = lookup.used.iter().map(|n| db.get(n).unwrap().clone()).collect();
    scenario.materials = Some(used);
    scenario.materials_path = None;

    let resolved = Resolved {
        contributions: scenario.contributions.clone(),
        scenario,
        models,
        pump,
        axis_s,
        axis_i,
        filters,
        directions,
        regularization,
        outputs,
    };
    preflight(&resolved)?;
    Ok(resolved)
}

/// Evaluates the amplitudes at the corners of every grid the run will use so
/// that dispersion range and evanescence problems surface as validation errors.
fn preflight(r: &Resolved) -> CliResult<()> {
    let (s0, s1) = (r.axis_s.start, r.axis_s.end());
    let wp = r.pump.omega_p0;
    let points: Vec<(f64, f64)> = if r.pump.is_cw() {
        vec![
            (s0, wp - s0),
            (s1, wp - s1),
            (r.axis_s.center(), wp - r.axis_s.center()),
        ]
    } else {
        let (i0, i1) = (r.axis_i.start, r.axis_i.end());
        vec![(s0, i0), (s0, i1), (s1, i0), (s1, i1)]
    };
    let mut stacks = Vec::new();
    for m in &r.models {
        match m {
            Model::Bulk { config, .. } => {
                for &(ws, wi) in &points {
                    for ch in pairgen_core::bulk::Channel::all() {
                        config
                            .amplitudes(ch, ws, wi, r.pump.spectral_amplitude(ws + wi))
                            .map_err(|e| {
                                CliError::validation("grid", format!("at ws = {ws:e} rad/s, wi = {wi:e} rad/s: {e}"))
                            })?;
                    }
                }
            }
            Model::Layered(stack) => {
                stacks.push(stack.clone());
                for o in &r.outputs {
                    if let Output::RatioMap { angles } = o {
                        for &a in [angles[0], *angles.last().unwrap()].iter() {
                            let mut s = stack.clone();
                            s.signal_angle = a;
                            stacks.push(s);
                        }
                    }
                }
            }
        }
    }
    for s in &stacks {
        for &(ws, wi) in &points {
            s.output_amplitudes(&r.pump, ws, wi, Contribution::Total)
                .map_err(|e| CliError::validation("grid", format!("at ws = {ws:e} rad/s, wi = {wi:e} rad/s: {e}")))?;
        }
    }
    Ok(())
}

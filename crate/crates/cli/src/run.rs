//! `pairgen run`: kernels, observables and output files for a scenario.

use std::path::{Path, PathBuf};

use pairgen_core::constants::{wavelength_from_omega, HBAR};
use pairgen_core::layered::LayerStack;
use pairgen_core::materials::Field;
use pairgen_core::numerics::{integrate_1d, UniformGrid};
use pairgen_core::observables::{
    hom_rate, hom_rate_line, intensity_spectrum, joint_density, joint_density_line, photon_flux, schmidt_entropy,
    temporal_amplitude, temporal_line, Contribution, Curve, HOMConfig, KernelPair, LinePair,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::output::{f64_dump, pretty_json, write_all, OutputFile, Table};
use crate::scenario::{fmt_f, load_scenario, resolve, Model, Output, Overrides, Resolved, Scenario};

/// Kernels of one case: a cw line or a pulsed grid.
#[derive(Debug, Clone)]
pub enum Kernels {
    Line(LinePair),
    Grid(KernelPair),
}

pub fn kernels(r: &Resolved, model: &Model, c: Contribution) -> pairgen_core::Result<Kernels> {
    let dirs = r.directions;
    match (model, r.pump.is_cw()) {
        (Model::Bulk { config, .. }, true) => config
            .kernel_line(dirs, c, &r.axis_s, &r.filters, r.regularization)
            .map(Kernels::Line),
        (Model::Bulk { config, .. }, false) => config
            .kernel_grid(dirs, c, &r.axis_s, &r.axis_i, &r.filters)
            .map(Kernels::Grid),
        (Model::Layered(stack), true) => stack
            .kernel_line(&r.pump, dirs, c, &r.axis_s, &r.filters, r.regularization)
            .map(Kernels::Line),
        (Model::Layered(stack), false) => stack
            .kernel_grid(&r.pump, dirs, c, &r.axis_s, &r.axis_i, &r.filters)
            .map(Kernels::Grid),
    }
}

/// Signal and idler spectra `(omega_s, S_s, omega_i, S_i)` row by row.
pub fn spectra(k: &Kernels) -> pairgen_core::Result<Vec<(f64, f64, f64, f64)>> {
    match k {
        Kernels::Line(p) => {
            let n = joint_density_line(&p.signal, &p.idler)?;
            Ok((0..n.values.len())
                .map(|j| {
                    let ws = n.axis.at(j);
                    let wi = p.signal.idler_frequency(j);
                    (ws, HBAR * ws * n.values[j], wi, HBAR * wi * n.values[j])
                })
                .collect())
        }
        Kernels::Grid(p) => {
            let n = joint_density(&p.signal, &p.idler)?;
            let s = intensity_spectrum(&n, Field::Signal)?;
            let i = intensity_spectrum(&n, Field::Idler)?;
            Ok((0..s.values.len())
                .map(|j| (s.axis.at(j), s.values[j], i.axis.at(j), i.values[j]))
                .collect())
        }
    }
}

/// Number of emitted pairs in the simulated window, up to the global scale.
pub fn pair_number(k: &Kernels) -> pairgen_core::Result<f64> {
    match k {
        Kernels::Line(p) => {
            let n = joint_density_line(&p.signal, &p.idler)?;
            integrate_1d(&n.values, &n.axis)
        }
        Kernels::Grid(p) => joint_density(&p.signal, &p.idler)?.total(),
    }
}

/// `|F^s(tau_s, 0)|` with real and imaginary parts.
pub fn temporal_cut(k: &Kernels, pad: usize) -> pairgen_core::Result<(UniformGrid, Vec<num_complex::Complex64>)> {
    match k {
        Kernels::Line(p) => {
            let t = temporal_line(&p.signal, pad)?;
            Ok((t.tau, t.values))
        }
        Kernels::Grid(p) => {
            let t = temporal_amplitude(&p.signal, pad)?;
            let zero = (0..t.tau_i.count)
                .min_by(|&a, &b| t.tau_i.at(a).abs().total_cmp(&t.tau_i.at(b).abs()))
                .unwrap_or(0);
            Ok((t.tau_s, t.values.column(zero).to_vec()))
        }
    }
}

pub fn flux(k: &Kernels, pad: usize) -> pairgen_core::Result<Curve> {
    match k {
        Kernels::Line(_) => Err(pairgen_core::Error::InvalidArgument(
            "photon flux needs pulsed kernels".into(),
        )),
        Kernels::Grid(p) => photon_flux(
            &temporal_amplitude(&p.signal, pad)?,
            &temporal_amplitude(&p.idler, pad)?,
        ),
    }
}

/// HOM delay that centres the volume dip: half the group-delay difference for
/// a bulk crystal, zero otherwise.
pub fn auto_delay_offset(r: &Resolved, model: &Model) -> pairgen_core::Result<f64> {
    match model {
        Model::Bulk { config, .. } => Ok(0.5 * config.group_delay_difference(r.axis_s.center(), r.axis_i.center())?),
        Model::Layered(_) => Ok(0.0),
    }
}

pub fn hom(k: &Kernels, cfg: &HOMConfig) -> pairgen_core::Result<Curve> {
    match k {
        Kernels::Line(p) => hom_rate_line(&p.signal, &p.idler, cfg),
        Kernels::Grid(p) => hom_rate(&p.signal, &p.idler, cfg),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub software: Software,
    pub scenario_name: String,
    pub resolved_scenario: Scenario,
    pub grid: GridInfo,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub signal: UniformGrid,
    pub idler: UniformGrid,
    pub cw_line: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub summary: Value,
}

/// Loads, validates and runs the scenario at `path`.
pub fn run_scenario(path: &Path, out: Option<&Path>, overrides: &Overrides) -> CliResult<RunReport> {
    let scenario = load_scenario(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolved = resolve(scenario, base, overrides)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("pairgen-out").join(&resolved.scenario.name));
    execute(&resolved, &dir)
}

fn nm(omega: f64) -> String {
    fmt_f(wavelength_from_omega(omega) * 1e9)
}

struct Ctx<'a> {
    r: &'a Resolved,
    case: String,
}

impl Ctx<'_> {
    fn fail(&self, what: &str, e: impl std::fmt::Display) -> CliError {
        CliError::runtime(&format!("scenario '{}', {}{what}", self.r.scenario.name, self.case), e)
    }
}

fn header(label: &Option<(String, String)>, rest: &[&str]) -> Vec<String> {
    label
        .iter()
        .map(|(h, _)| h.clone())
        .chain(std::iter::once("contribution".to_string()))
        .chain(rest.iter().map(|s| s.to_string()))
        .collect()
}

fn row(label: &Option<(String, String)>, c: Contribution, rest: Vec<String>) -> Vec<String> {
    label
        .iter()
        .map(|(_, v)| v.clone())
        .chain(std::iter::once(c.to_string()))
        .chain(rest)
        .collect()
}

fn insert(summary: &mut Map<String, Value>, section: &str, key: String, value: Value) {
    summary
        .entry(section)
        .or_insert_with(|| Value::Object(Map::new()))
        .as_object_mut()
        .unwrap()
        .insert(key, value);
}

fn with_length(stack: &LayerStack, layer: usize, length: f64) -> LayerStack {
    let mut s = stack.clone();
    s.layers[layer].length = length;
    s
}

/// Computes every requested output of `r` and writes them with a manifest.
pub fn execute(r: &Resolved, dir: &Path) -> CliResult<RunReport> {
    let label0 = r.models[0].label();
    let mut tables: Vec<(String, Table)> = Vec::new();
    let mut binaries: Vec<(String, Vec<u8>)> = Vec::new();
    let mut summary = Map::new();

    let needs_kernels = r
        .outputs
        .iter()
        .any(|o| !matches!(o, Output::RatioMap { .. } | Output::LengthSweep { .. }));

    for o in &r.outputs {
        let t = match o {
            Output::Spectrum => Some((
                "spectrum.csv",
                header(
                    &label0,
                    &[
                        "omega_s [rad/s]",
                        "lambda_s [nm]",
                        "S_s [arb.]",
                        "omega_i [rad/s]",
                        "lambda_i [nm]",
                        "S_i [arb.]",
                    ],
                ),
            )),
            Output::JointDensity { .. } => Some((
                "joint_density.csv",
                header(&label0, &["omega_s [rad/s]", "omega_i [rad/s]", "n [arb.]"]),
            )),
            Output::Temporal { .. } => Some((
                "temporal_s.csv",
                header(
                    &label0,
                    &["tau_s [s]", "abs F_s [arb.]", "re F_s [arb.]", "im F_s [arb.]"],
                ),
            )),
            Output::Flux { .. } => Some(("flux.csv", header(&label0, &["tau_s [s]", "N_s [arb.]"]))),
            Output::Hom { .. } => Some(("hom.csv", header(&label0, &["tau_l [s]", "R_n [1]"]))),
            Output::Schmidt => Some(("schmidt.csv", header(&label0, &["k [1]", "sigma [arb.]", "lambda [1]"]))),
            _ => None,
        };
        if let Some((name, h)) = t {
            tables.push((name.to_string(), Table::new(h)));
        }
    }
    let table = |tables: &mut Vec<(String, Table)>, name: &str| -> usize {
        tables
            .iter()
            .position(|(n, _)| n == name)
            .expect("table declared above")
    };

    if needs_kernels {
        for model in &r.models {
            let label = model.label();
            let case = label.as_ref().map_or(String::new(), |(h, v)| format!("{h} = {v}, "));
            let key_prefix = label
                .as_ref()
                .map_or(String::new(), |(_, v)| format!("axis_angle={v}/"));
            if let Model::Bulk { config, .. } = model {
                let gd = config
                    .group_delay_difference(r.axis_s.center(), r.axis_i.center())
                    .map_err(|e| CliError::runtime("group delay", e))?;
                insert(
                    &mut summary,
                    "group_delay_difference [s]",
                    key_prefix.trim_end_matches('/').to_string(),
                    json!(gd),
                );
            }
            for &c in &r.contributions {
                let ctx = Ctx {
                    r,
                    case: format!("{case}contribution {c}: "),
                };
                let key = format!("{key_prefix}{c}");
                let k = kernels(r, model, c).map_err(|e| ctx.fail("kernels", e))?;
                insert(
                    &mut summary,
                    "pair_number [arb.]",
                    key.clone(),
                    json!(pair_number(&k).map_err(|e| ctx.fail("pair number", e))?),
                );
                for o in &r.outputs {
                    match o {
                        Output::Spectrum => {
                            let ti = table(&mut tables, "spectrum.csv");
                            for (ws, ss, wi, si) in spectra(&k).map_err(|e| ctx.fail("spectrum", e))? {
                                tables[ti].1.push(row(
                                    &label,
                                    c,
                                    vec![fmt_f(ws), nm(ws), fmt_f(ss), fmt_f(wi), nm(wi), fmt_f(si)],
                                ));
                            }
                        }
                        Output::JointDensity { binary } => {
                            let ti = table(&mut tables, "joint_density.csv");
                            let (shape, values, axis_s, axis_i) = match &k {
                                Kernels::Line(p) => {
                                    let n = joint_density_line(&p.signal, &p.idler)
                                        .map_err(|e| ctx.fail("joint density", e))?;
                                    for j in 0..n.values.len() {
                                        tables[ti].1.push(row(
                                            &label,
                                            c,
                                            vec![
                                                fmt_f(n.axis.at(j)),
                                                fmt_f(p.signal.idler_frequency(j)),
                                                fmt_f(n.values[j]),
                                            ],
                                        ));
                                    }
                                    (vec![n.values.len()], n.values.clone(), r.axis_s, None)
                                }
                                Kernels::Grid(p) => {
                                    let n =
                                        joint_density(&p.signal, &p.idler).map_err(|e| ctx.fail("joint density", e))?;
                                    for ((a, b), v) in n.values.indexed_iter() {
                                        tables[ti].1.push(row(
                                            &label,
                                            c,
                                            vec![fmt_f(n.axis_s.at(a)), fmt_f(n.axis_i.at(b)), fmt_f(*v)],
                                        ));
                                    }
                                    (
                                        vec![n.axis_s.count, n.axis_i.count],
                                        n.values.iter().copied().collect(),
                                        n.axis_s,
                                        Some(n.axis_i),
                                    )
                                }
                            };
                            if *binary {
                                let stem = format!("joint_density_{}{c}", key_prefix.replace(['/', '='], "_"));
                                binaries.push((format!("{stem}.bin"), f64_dump(values)));
                                let sidecar = json!({
                                    "file": format!("{stem}.bin"),
                                    "dtype": "<f8",
                                    "order": "row-major",
                                    "shape": shape,
                                    "axis_s": axis_s,
                                    "axis_i": axis_i,
                                    "cw_line": axis_i.is_none(),
                                    "contribution": c,
                                });
                                binaries.push((format!("{stem}.json"), pretty_json(&sidecar)?));
                            }
                        }
                        Output::Temporal { pad } => {
                            let ti = table(&mut tables, "temporal_s.csv");
                            let (tau, v) = temporal_cut(&k, *pad).map_err(|e| ctx.fail("temporal amplitude", e))?;
                            for (j, z) in v.iter().enumerate() {
                                tables[ti].1.push(row(
                                    &label,
                                    c,
                                    vec![fmt_f(tau.at(j)), fmt_f(z.norm()), fmt_f(z.re), fmt_f(z.im)],
                                ));
                            }
                        }
                        Output::Flux { pad } => {
                            let ti = table(&mut tables, "flux.csv");
                            let f = flux(&k, *pad).map_err(|e| ctx.fail("photon flux", e))?;
                            for (j, v) in f.values.iter().enumerate() {
                                tables[ti].1.push(row(&label, c, vec![fmt_f(f.axis.at(j)), fmt_f(*v)]));
                            }
                            let (j, _) = f.argmax();
                            insert(&mut summary, "flux_peak_time [s]", key.clone(), json!(f.axis.at(j)));
                        }
                        Output::Hom {
                            r: rr,
                            t,
                            tau,
                            delay_offset,
                        } => {
                            let ti = table(&mut tables, "hom.csv");
                            let offset = match delay_offset {
                                Some(o) => *o,
                                None => auto_delay_offset(r, model).map_err(|e| ctx.fail("delay offset", e))?,
                            };
                            let cfg = HOMConfig {
                                r: *rr,
                                t: *t,
                                tau: *tau,
                                delay_offset: offset,
                            };
                            let h = hom(&k, &cfg).map_err(|e| ctx.fail("HOM rate", e))?;
                            for (j, v) in h.values.iter().enumerate() {
                                tables[ti].1.push(row(&label, c, vec![fmt_f(h.axis.at(j)), fmt_f(*v)]));
                            }
                            insert(&mut summary, "hom_delay_offset [s]", key.clone(), json!(offset));
                        }
                        Output::Schmidt => {
                            let ti = table(&mut tables, "schmidt.csv");
                            let Kernels::Grid(p) = &k else {
                                return Err(ctx.fail("Schmidt decomposition", "needs pulsed kernels"));
                            };
                            let s = schmidt_entropy(&p.signal).map_err(|e| ctx.fail("Schmidt decomposition", e))?;
                            for (j, (sg, l)) in s.singular_values.iter().zip(&s.weights).enumerate() {
                                tables[ti]
                                    .1
                                    .push(row(&label, c, vec![j.to_string(), fmt_f(*sg), fmt_f(*l)]));
                            }
                            insert(&mut summary, "schmidt_entropy [ebit]", key.clone(), json!(s.entropy));
                        }
                        Output::RatioMap { .. } | Output::LengthSweep { .. } => {}
                    }
                }
            }
        }
    }

    for o in &r.outputs {
        match o {
            Output::RatioMap { angles } => {
                let Model::Layered(stack) = &r.models[0] else {
                    unreachable!("checked during validation")
                };
                let mut t = Table::new([
                    "theta_s [deg]",
                    "omega_s [rad/s]",
                    "lambda_s [nm]",
                    "S_total [arb.]",
                    "S_volume [arb.]",
                    "ratio [1]",
                ]);
                for &a in angles {
                    let mut s = stack.clone();
                    s.signal_angle = a;
                    let m = Model::Layered(s);
                    let ctx = Ctx {
                        r,
                        case: format!("theta_s = {} deg: ", a.to_degrees()),
                    };
                    let tot = spectra(&kernels(r, &m, Contribution::Total).map_err(|e| ctx.fail("kernels", e))?)
                        .map_err(|e| ctx.fail("spectrum", e))?;
                    let vol = spectra(&kernels(r, &m, Contribution::Volume).map_err(|e| ctx.fail("kernels", e))?)
                        .map_err(|e| ctx.fail("spectrum", e))?;
                    for (x, y) in tot.iter().zip(&vol) {
                        t.push(vec![
                            fmt_f(a.to_degrees()),
                            fmt_f(x.0),
                            nm(x.0),
                            fmt_f(x.1),
                            fmt_f(y.1),
                            fmt_f(x.1 / y.1),
                        ]);
                    }
                }
                tables.push(("ratio_map.csv".into(), t));
            }
            Output::LengthSweep { layer, lengths } => {
                let Model::Layered(stack) = &r.models[0] else {
                    unreachable!("checked during validation")
                };
                let mut t = Table::new(["length [m]", "N_surface [arb.]", "N_volume [arb.]", "ratio [1]"]);
                for &l in lengths {
                    let m = Model::Layered(with_length(stack, *layer, l));
                    let ctx = Ctx {
                        r,
                        case: format!("layers[{layer}].length = {l:e} m: "),
                    };
                    let ns = pair_number(&kernels(r, &m, Contribution::Surface).map_err(|e| ctx.fail("kernels", e))?)
                        .map_err(|e| ctx.fail("pair number", e))?;
                    let nv = pair_number(&kernels(r, &m, Contribution::Volume).map_err(|e| ctx.fail("kernels", e))?)
                        .map_err(|e| ctx.fail("pair number", e))?;
                    t.push(vec![fmt_f(l), fmt_f(ns), fmt_f(nv), fmt_f(ns / nv)]);
                }
                tables.push(("length_sweep.csv".into(), t));
            }
            _ => {}
        }
    }

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for (name, t) in &tables {
        files.push((name.clone(), t.to_bytes()?));
    }
    files.extend(binaries);
    let summary = Value::Object(summary);
    files.push(("summary.json".into(), pretty_json(&summary)?));

    let outputs = write_all(dir, &files)?;
    let manifest = Manifest {
        software: Software {
            name: "pairgen".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        scenario_name: r.scenario.name.clone(),
        resolved_scenario: r.scenario.clone(),
        grid: GridInfo {
            signal: r.axis_s,
            idler: r.axis_i,
            cw_line: r.pump.is_cw(),
        },
        outputs,
    };
    write_all(dir, &[("manifest.json".into(), pretty_json(&manifest)?)])?;
    Ok(RunReport {
        out_dir: dir.to_path_buf(),
        manifest,
        summary,
    })
}

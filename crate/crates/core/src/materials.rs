//! Dispersion models, the material database and signed wave vectors.
//!
//! Refractive indices follow a generalized Sellmeier form with the vacuum
//! wavelength `l` in micrometres:
//!
//! ```text
//! n^2 = A + sum_j B_j l^2 / (l^2 - C_j) - D l^2
//! ```
//!
//! `A` defaults to 1 and `D` to 0, so a plain Sellmeier set only needs the
//! `B`/`C` lists. The designated material named `vacuum` carries no
//! coefficients and has `n = 1` at every frequency.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{wavelength_from_omega, C};
use crate::error::{Error, Result};

/// Name of the material with `n = 1` identically.
pub const VACUUM: &str = "vacuum";

/// Dispersion branch of a (possibly uniaxial) medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "o")]
    Ordinary,
    #[serde(rename = "e")]
    Extraordinary,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::Ordinary => write!(f, "o"),
            Polarization::Extraordinary => write!(f, "e"),
        }
    }
}

/// Propagation direction along the stack normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "F")]
    Forward,
    #[serde(rename = "B")]
    Backward,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Forward, Direction::Backward];

    /// `+1` for forward (+z), `-1` for backward (-z).
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Forward => write!(f, "F"),
            Direction::Backward => write!(f, "B"),
        }
    }
}

/// The three interacting fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Pump,
    Signal,
    Idler,
}

/// One propagating mode: field, direction, dispersion branch and internal
/// angle from the stack normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub field: Field,
    pub direction: Direction,
    pub polarization: Polarization,
    pub propagation_angle: f64,
}

impl ModeSpec {
    pub fn new(field: Field, direction: Direction, polarization: Polarization, propagation_angle: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&propagation_angle) {
            return Err(Error::InvalidArgument(format!(
                "propagation angle {propagation_angle} rad outside [0, pi/2)"
            )));
        }
        Ok(Self {
            field,
            direction,
            polarization,
            propagation_angle,
        })
    }

    /// Signed z component of the wave vector of this mode.
    pub fn k_z(&self, n: f64, omega: f64) -> f64 {
        wave_vector(n, omega, self.direction, self.propagation_angle)
    }
}

/// Coefficients of one dispersion branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierSet {
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    /// Pole positions, um^2.
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    /// Infrared correction, um^-2.
    #[serde(rename = "D", default)]
    pub d: f64,
}

fn one() -> f64 {
    1.0
}

impl SellmeierSet {
    /// `n^2` at vacuum wavelength `lambda_um` (micrometres).
    pub fn n_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let poles: f64 = self.b.iter().zip(&self.c).map(|(b, c)| b * l2 / (l2 - c)).sum();
        self.a + poles - self.d * l2
    }
}

/// A named dispersive medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub name: String,
    pub uniaxial: bool,
    /// Wavelength interval (um) where the dispersion model applies.
    pub validity_um: [f64; 2],
    pub sellmeier: BTreeMap<Polarization, SellmeierSet>,
    #[serde(default)]
    pub provenance: String,
}

impl Material {
    /// The designated `n = 1` medium.
    pub fn vacuum() -> Self {
        Material {
            name: VACUUM.to_string(),
            uniaxial: false,
            validity_um: [0.01, 1000.0],
            sellmeier: BTreeMap::new(),
            provenance: "n = 1 identically".to_string(),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.name == VACUUM
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidMaterial {
            material: self.name.clone(),
            reason: reason.into(),
        }
    }

    /// Checks the structural invariants and that the index is real, finite and
    /// above one across the validity range.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.validity_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(self.invalid(format!("bad validity range [{lo}, {hi}] um")));
        }
        if self.is_vacuum() {
            if !self.sellmeier.is_empty() {
                return Err(self.invalid("vacuum must not carry sellmeier sets"));
            }
            return Ok(());
        }
        if self.sellmeier.is_empty() {
            return Err(self.invalid("empty sellmeier set"));
        }
        for (pol, set) in &self.sellmeier {
            if set.b.is_empty() {
                return Err(self.invalid(format!("empty sellmeier set for polarization '{pol}'")));
            }
            if set.b.len() != set.c.len() {
                return Err(self.invalid(format!(
                    "polarization '{pol}': B has {} terms but C has {}",
                    set.b.len(),
                    set.c.len()
                )));
            }
            let finite = set.a.is_finite() && set.d.is_finite() && set.b.iter().chain(&set.c).all(|v| v.is_finite());
            if !finite {
                return Err(self.invalid(format!("polarization '{pol}': non-finite coefficient")));
            }
        }
        if self.uniaxial {
            for pol in [Polarization::Ordinary, Polarization::Extraordinary] {
                if !self.sellmeier.contains_key(&pol) {
                    return Err(self.invalid(format!("uniaxial material lacks '{pol}' branch")));
                }
            }
        } else if self.sellmeier.len() != 1 {
            return Err(self.invalid("isotropic material must have exactly one sellmeier set"));
        }
        // sample the range densely; poles inside the range show up as n^2 <= 1
        const SAMPLES: usize = 512;
        for set in self.sellmeier.values() {
            for j in 0..=SAMPLES {
                let l = lo + (hi - lo) * j as f64 / SAMPLES as f64;
                let n2 = set.n_squared(l);
                if !(n2.is_finite() && n2 > 1.0) {
                    return Err(self.invalid(format!("index not real, finite and > 1 at {l:.4} um (n^2 = {n2})")));
                }
            }
        }
        Ok(())
    }

    /// Polarization labels present in the file.
    pub fn polarizations(&self) -> Vec<Polarization> {
        self.sellmeier.keys().copied().collect()
    }

    fn branch(&self, pol: Polarization) -> Result<&SellmeierSet> {
        if self.uniaxial {
            self.sellmeier.get(&pol)
        } else {
            self.sellmeier.values().next()
        }
        .ok_or_else(|| Error::MissingPolarization {
            material: self.name.clone(),
            polarization: pol.to_string(),
        })
    }

    /// Refractive index at angular frequency `omega` (rad/s).
    ///
    /// For the extraordinary branch of a uniaxial medium `axis_angle` is the
    /// angle between the optic axis and the propagation direction, and
    /// `1/n(theta)^2 = cos^2/n_o^2 + sin^2/n_e^2`.
    pub fn refractive_index(&self, omega: f64, pol: Polarization, axis_angle: Option<f64>) -> Result<f64> {
        let lambda_um = wavelength_from_omega(omega) * 1e6;
        let [lo, hi] = self.validity_um;
        if !(lo..=hi).contains(&lambda_um) {
            return Err(Error::OutOfRange {
                material: self.name.clone(),
                wavelength_um: lambda_um,
                lo,
                hi,
            });
        }
        if self.is_vacuum() {
            return Ok(1.0);
        }
        let n_o2 = self.branch(Polarization::Ordinary)?.n_squared(lambda_um);
        let n2 = match (self.uniaxial, pol) {
            (true, Polarization::Extraordinary) => {
                let theta = axis_angle.ok_or_else(|| Error::MissingAxisAngle {
                    material: self.name.clone(),
                })?;
                let n_e2 = self.branch(Polarization::Extraordinary)?.n_squared(lambda_um);
                let (s, c) = theta.sin_cos();
                1.0 / (c * c / n_o2 + s * s / n_e2)
            }
            _ => n_o2,
        };
        Ok(n2.sqrt())
    }
}

/// Free-function form of [`Material::refractive_index`].
pub fn refractive_index(mat: &Material, omega: f64, pol: Polarization, axis_angle: Option<f64>) -> Result<f64> {
    mat.refractive_index(omega, pol, axis_angle)
}

/// Signed z component of the wave vector, `sign * n * omega * cos(angle) / c`.
pub fn wave_vector(n: f64, omega: f64, direction: Direction, angle: f64) -> f64 {
    direction.sign() * n * omega * angle.cos() / C
}

/// Refraction angle from Snell's law, `n1 sin(theta1) = n2 sin(theta2)`.
pub fn refract_angle(n1: f64, theta1: f64, n2: f64) -> Result<f64> {
    let s = n1 * theta1.sin() / n2;
    if s.abs() >= 1.0 {
        return Err(Error::Evanescent {
            material: format!("index {n2}"),
        });
    }
    Ok(s.asin())
}

/// Name-indexed collection of materials.
#[derive(Debug, Clone, Default)]
pub struct MaterialDb {
    materials: BTreeMap<String, Material>,
}

impl MaterialDb {
    pub fn from_materials(list: Vec<Material>) -> Result<Self> {
        let mut materials = BTreeMap::new();
        for m in list {
            m.validate()?;
            if materials.contains_key(&m.name) {
                return Err(Error::InvalidMaterial {
                    material: m.name.clone(),
                    reason: "duplicate material name".into(),
                });
            }
            materials.insert(m.name.clone(), m);
        }
        Ok(Self { materials })
    }

    /// Parses the JSON array form. A blank document is an empty database.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let list: Vec<Material> = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: origin.to_string(),
            source,
        })?;
        Self::from_materials(list)
    }

    pub fn get(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }
}

/// Loads and validates a material file.
pub fn load_material_db(path: impl AsRef<Path>) -> Result<MaterialDb> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    MaterialDb::from_json_str(&text, &path.display().to_string())
}

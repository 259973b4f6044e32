use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{Direction, Field};
use crate::numerics::UniformGrid;

/// Which part of the emission a kernel describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contribution {
    Volume,
    Surface,
    Total,
}

impl Contribution {
    /// Weights applied to the volume term and to the surface term.
    pub fn weights(self) -> (f64, f64) {
        match self {
            Contribution::Volume => (1.0, 0.0),
            Contribution::Surface => (0.0, 1.0),
            Contribution::Total => (1.0, 1.0),
        }
    }
}

impl std::fmt::Display for Contribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Contribution::Volume => "volume",
            Contribution::Surface => "surface",
            Contribution::Total => "total",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Contribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volume" => Ok(Contribution::Volume),
            "surface" => Ok(Contribution::Surface),
            "total" => Ok(Contribution::Total),
            _ => Err(Error::InvalidArgument(format!(
                "contribution '{s}' is not one of volume|surface|total"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSource {
    Bulk,
    Layered,
}

/// Provenance of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub source: KernelSource,
    /// Output directions of signal and idler.
    pub directions: (Direction, Direction),
    pub contribution: Contribution,
}

/// Two-photon amplitude `F(ws, wi)` sampled on a rectangle; rows follow
/// `axis_s`, columns `axis_i`.
#[derive(Debug, Clone)]
pub struct TwoPhotonAmplitudeGrid {
    pub axis_s: UniformGrid,
    pub axis_i: UniformGrid,
    pub values: Array2<Complex64>,
    /// Which annihilation operator the kernel belongs to (`F^s` or `F^i`).
    pub field: Field,
    /// Central frequencies `(ws0, wi0)` used by the `sqrt(w/w0)` weights.
    pub reference: (f64, f64),
    pub meta: KernelMeta,
}

impl TwoPhotonAmplitudeGrid {
    pub fn new(
        axis_s: UniformGrid,
        axis_i: UniformGrid,
        values: Array2<Complex64>,
        field: Field,
        reference: (f64, f64),
        meta: KernelMeta,
    ) -> Result<Self> {
        let k = Self {
            axis_s,
            axis_i,
            values,
            field,
            reference,
            meta,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.dim() != (self.axis_s.count, self.axis_i.count) {
            return Err(Error::GridMismatch(format!(
                "values {:?} vs axes {}x{}",
                self.values.dim(),
                self.axis_s.count,
                self.axis_i.count
            )));
        }
        if self.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("two-photon amplitude".into()));
        }
        if !(self.reference.0 > 0.0 && self.reference.1 > 0.0) {
            return Err(Error::InvalidArgument("reference frequencies must be > 0".into()));
        }
        Ok(())
    }

    pub fn same_axes(&self, other: &Self) -> bool {
        self.axis_s.matches(&other.axis_s) && self.axis_i.matches(&other.axis_i)
    }

    /// Copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.mapv_inplace(|v| v * factor);
        out
    }
}

/// Two-photon amplitude under cw pumping: the pair lives on the line
/// `wi = wp0 - ws`, sampled along `axis_s`.
#[derive(Debug, Clone)]
pub struct CwAmplitudeLine {
    pub axis_s: UniformGrid,
    pub omega_p0: f64,
    pub values: Vec<Complex64>,
    pub field: Field,
    pub reference: (f64, f64),
    pub meta: KernelMeta,
    /// `2T/(2 pi)` factor that replaces the squared pump delta function.
    pub regularization: f64,
}

impl CwAmplitudeLine {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.axis_s.count {
            return Err(Error::GridMismatch(format!(
                "{} values on a {}-point line",
                self.values.len(),
                self.axis_s.count
            )));
        }
        if self.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("cw two-photon amplitude".into()));
        }
        Ok(())
    }

    pub fn idler_frequency(&self, j: usize) -> f64 {
        self.omega_p0 - self.axis_s.at(j)
    }

    pub fn same_axes(&self, other: &Self) -> bool {
        self.axis_s.matches(&other.axis_s) && (self.omega_p0 - other.omega_p0).abs() <= 1e-12 * self.omega_p0
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Signal (`F^s`) and idler (`F^i`) kernels on a common grid.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub signal: TwoPhotonAmplitudeGrid,
    pub idler: TwoPhotonAmplitudeGrid,
}

/// Signal and idler kernels on a common cw line.
#[derive(Debug, Clone)]
pub struct LinePair {
    pub signal: CwAmplitudeLine,
    pub idler: CwAmplitudeLine,
}

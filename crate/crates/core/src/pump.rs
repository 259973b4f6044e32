//! Pump spectra and detection filters.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::materials::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PumpKind {
    /// Monochromatic line at `omega_p0`.
    Cw,
    /// Gaussian pulse; `duration` is the intensity FWHM in seconds.
    GaussianPulse { duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub kind: PumpKind,
    /// Central angular frequency, rad/s.
    pub omega_p0: f64,
    /// Overall field scale, V/m. Enters every observable as a global factor.
    pub amplitude_scale: f64,
    pub direction: Direction,
}

impl PumpSpec {
    pub fn cw(omega_p0: f64) -> Self {
        Self {
            kind: PumpKind::Cw,
            omega_p0,
            amplitude_scale: 1.0,
            direction: Direction::Forward,
        }
    }

    pub fn gaussian(omega_p0: f64, duration: f64) -> Self {
        Self {
            kind: PumpKind::GaussianPulse { duration },
            omega_p0,
            amplitude_scale: 1.0,
            direction: Direction::Forward,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_p0 > 0.0 && self.omega_p0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pump frequency {} must be > 0",
                self.omega_p0
            )));
        }
        if !self.amplitude_scale.is_finite() {
            return Err(Error::InvalidArgument("pump amplitude must be finite".into()));
        }
        if let PumpKind::GaussianPulse { duration } = self.kind {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::InvalidArgument(format!("pulse duration {duration} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn is_cw(&self) -> bool {
        matches!(self.kind, PumpKind::Cw)
    }

    /// Spectral amplitude `E_p(omega)`.
    ///
    /// For a pulse, `amplitude_scale * exp(-(w - w0)^2 tau^2 / 2)` with
    /// `tau = FWHM / (2 sqrt(ln 2))`. For cw the line strength is returned
    /// regardless of `omega`; callers evaluate cw kernels on the line only.
    pub fn spectral_amplitude(&self, omega: f64) -> Complex64 {
        match self.kind {
            PumpKind::Cw => Complex64::new(self.amplitude_scale, 0.0),
            PumpKind::GaussianPulse { duration } => {
                let tau = duration / (2.0 * LN_2.sqrt());
                let x = (omega - self.omega_p0) * tau;
                Complex64::new(self.amplitude_scale * (-0.5 * x * x).exp(), 0.0)
            }
        }
    }
}

/// Replacement factor `2T / (2 pi)` for the squared delta function of a cw
/// pump, where `2T` is the detection window. `None` leaves kernels unscaled,
/// which is the convention for normalized outputs.
pub fn cw_regularization(detection_window: Option<f64>) -> f64 {
    detection_window.map_or(1.0, |w| w / (2.0 * PI))
}

/// Gaussian amplitude filter with intensity FWHM `fwhm` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFilter {
    pub center: f64,
    pub fwhm: f64,
}

impl GaussianFilter {
    pub fn new(center: f64, fwhm: f64) -> Result<Self> {
        if !(center > 0.0 && fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "filter centre {center} and width {fwhm} must be > 0"
            )));
        }
        Ok(Self { center, fwhm })
    }

    /// Filter centred at vacuum wavelength `lambda` with wavelength FWHM
    /// `dlambda` (both metres), converted with `dw = 2 pi c dlambda / lambda^2`.
    pub fn from_wavelength(lambda: f64, dlambda: f64) -> Result<Self> {
        Self::new(2.0 * PI * C / lambda, 2.0 * PI * C * dlambda / (lambda * lambda))
    }

    pub fn amplitude(&self, omega: f64) -> f64 {
        let x = (omega - self.center) / self.fwhm;
        (-2.0 * LN_2 * x * x).exp()
    }
}

/// Optional detection filters in front of the signal and idler detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionFilters {
    pub signal: Option<GaussianFilter>,
    pub idler: Option<GaussianFilter>,
}

impl DetectionFilters {
    pub fn none() -> Self {
        Self::default()
    }

    /// Product of the two amplitude transmissions.
    pub fn amplitude(&self, omega_s: f64, omega_i: f64) -> f64 {
        self.signal.map_or(1.0, |f| f.amplitude(omega_s)) * self.idler.map_or(1.0, |f| f.amplitude(omega_i))
    }
}

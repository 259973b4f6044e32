use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced, strictly increasing sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid step {step} must be > 0")));
        }
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    pub fn at(&self, j: usize) -> f64 {
        self.start + self.step * j as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.count - 1)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.end())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.at(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same points up to a relative tolerance on start and step.
    pub fn matches(&self, other: &UniformGrid) -> bool {
        let tol = 1e-12 * self.step.max(other.step);
        self.count == other.count
            && (self.step - other.step).abs() <= tol
            && (self.start - other.start).abs() <= 1e-12 * self.start.abs().max(1.0) + tol
    }
}

/// Symmetric grid about `center` with inclusive endpoints `center +- halfwidth`.
pub fn make_grid(center: f64, halfwidth: f64, count: usize) -> Result<UniformGrid> {
    if !(halfwidth > 0.0 && halfwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!("halfwidth {halfwidth} must be > 0")));
    }
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 points, got {count}"
        )));
    }
    let step = 2.0 * halfwidth / (count - 1) as f64;
    UniformGrid::new(center - halfwidth, step, count)
}

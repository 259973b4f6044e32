//! Kernels and the observables computed from them.

mod density;
mod hom;
mod kernel;
mod schmidt;
mod temporal;

pub use density::*;
pub use hom::*;
pub use kernel::*;
pub use schmidt::*;
pub use temporal::*;

use serde::Serialize;

use crate::numerics::UniformGrid;

/// A real quantity sampled on a uniform axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub axis: UniformGrid,
    pub values: Vec<f64>,
}

impl Curve {
    /// Index and value of the largest sample.
    pub fn argmax(&self) -> (usize, f64) {
        self.values.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
        )
    }

    /// Full width at half maximum with linear interpolation between samples.
    pub fn fwhm(&self) -> Option<f64> {
        let (k, peak) = self.argmax();
        if !(peak > 0.0) {
            return None;
        }
        let half = 0.5 * peak;
        let v = &self.values;
        let mut lo = None;
        for j in (0..k).rev() {
            if v[j] < half {
                let f = (half - v[j]) / (v[j + 1] - v[j]);
                lo = Some(self.axis.at(j) + f * self.axis.step);
                break;
            }
        }
        let mut hi = None;
        for j in k + 1..v.len() {
            if v[j] < half {
                let f = (v[j - 1] - half) / (v[j - 1] - v[j]);
                hi = Some(self.axis.at(j - 1) + f * self.axis.step);
                break;
            }
        }
        Some(hi? - lo?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fwhm_of_triangle() {
        let axis = UniformGrid::new(-2.0, 0.5, 9).unwrap();
        let values = axis.values().iter().map(|x| (1.0 - x.abs()).max(0.0)).collect();
        let c = Curve { axis, values };
        assert!((c.fwhm().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.argmax(), (4, 1.0));
    }
}

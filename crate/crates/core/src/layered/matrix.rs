//! 2x2 transfer matrices acting on `(forward, backward)` amplitude pairs.
//!
//! Matrices map amplitudes on the left of an element to amplitudes on its
//! right. Inside a homogeneous medium a field is
//! `A exp(i k_z (z - z0)) + B exp(-i k_z (z - z0))` with `z0` the point at
//! which the pair `(A, B)` is referenced.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::refract_angle;

type C = Complex64;

/// Polarization of a plane wave relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavePolarization {
    #[default]
    S,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub [[C; 2]; 2]);

impl TransferMatrix {
    pub fn identity() -> Self {
        let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        Self([[o, z], [z, o]])
    }

    pub fn det(&self) -> C {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: (C, C)) -> (C, C) {
        let m = &self.0;
        (m[0][0] * v.0 + m[0][1] * v.1, m[1][0] * v.0 + m[1][1] * v.1)
    }

    /// Largest absolute entry difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Reflection `-m21/m22` and transmission `det/m22` for a wave incident
    /// from the left with nothing entering from the right.
    pub fn left_scattering(&self) -> Result<(C, C)> {
        let m22 = self.0[1][1];
        if m22.norm() == 0.0 {
            return Err(Error::Singular("transfer matrix has m22 = 0".into()));
        }
        Ok((-self.0[1][0] / m22, self.det() / m22))
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        TransferMatrix(out)
    }
}

/// A planar interface between media 1 (left) and 2 (right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub matrix: TransferMatrix,
    /// Fresnel reflection for incidence from medium 1.
    pub r: f64,
    /// Fresnel transmission for incidence from medium 1.
    pub t: f64,
    /// Refracted angle in medium 2.
    pub theta2: f64,
}

fn fresnel(n1: f64, c1: f64, n2: f64, c2: f64, pol: WavePolarization) -> (f64, f64) {
    match pol {
        WavePolarization::S => {
            let den = n1 * c1 + n2 * c2;
            ((n1 * c1 - n2 * c2) / den, 2.0 * n1 * c1 / den)
        }
        WavePolarization::P => {
            let den = n2 * c1 + n1 * c2;
            ((n2 * c1 - n1 * c2) / den, 2.0 * n1 * c1 / den)
        }
    }
}

/// Boundary matrix from indices and direction cosines on both sides,
/// `(1/t21) [[1, r21], [r21, 1]]`.
pub fn boundary_from_cosines(n1: f64, cos1: f64, n2: f64, cos2: f64, pol: WavePolarization) -> Boundary {
    let (r12, t12) = fresnel(n1, cos1, n2, cos2, pol);
    let (r21, t21) = fresnel(n2, cos2, n1, cos1, pol);
    let s = C::new(1.0 / t21, 0.0);
    let matrix = TransferMatrix([[s, s * r21], [s * r21, s]]);
    Boundary {
        matrix,
        r: r12,
        t: t12,
        theta2: cos2.clamp(-1.0, 1.0).acos(),
    }
}

/// Boundary between media of indices `n1`, `n2` for a wave hitting it at
/// `theta1` from medium 1. Total internal reflection is an error.
pub fn boundary_matrix(n1: f64, n2: f64, theta1: f64, pol: WavePolarization) -> Result<Boundary> {
    if !(n1 >= 1.0 && n2 >= 1.0) {
        return Err(Error::InvalidArgument(format!("indices {n1}, {n2} must be >= 1")));
    }
    let theta2 = refract_angle(n1, theta1, n2)?;
    let mut b = boundary_from_cosines(n1, theta1.cos(), n2, theta2.cos(), pol);
    b.theta2 = theta2;
    Ok(b)
}

/// `diag(exp(i k_z L), exp(-i k_z L))`.
pub fn propagation_matrix(k_z: f64, length: f64) -> TransferMatrix {
    let p = C::from_polar(1.0, k_z * length);
    let z = C::new(0.0, 0.0);
    TransferMatrix([[p, z], [z, p.conj()]])
}

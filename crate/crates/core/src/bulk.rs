//! Pair emission from a single homogeneous crystal of length `L` embedded in
//! an isotropic surrounding medium.
//!
//! Every amplitude is the coefficient of `a_s^dag a_i^dag |0>` for one
//! channel `(gamma, alpha, beta)`: pump direction, signal output direction,
//! idler output direction. Wave numbers passed to the free functions are
//! signed z components (`+` forward, `-` backward).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::materials::{Direction, Field, Material, Polarization};
use crate::numerics::UniformGrid;
use crate::observables::{
    Contribution, CwAmplitudeLine, KernelMeta, KernelPair, KernelSource, LinePair, TwoPhotonAmplitudeGrid,
};
use crate::pump::{DetectionFilters, PumpSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Pump, signal and idler directions of one emission channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub pump: Direction,
    pub signal: Direction,
    pub idler: Direction,
}

impl Channel {
    pub const fn new(pump: Direction, signal: Direction, idler: Direction) -> Self {
        Self { pump, signal, idler }
    }

    /// All eight combinations, pump direction outermost.
    pub fn all() -> impl Iterator<Item = Channel> {
        Direction::ALL.into_iter().flat_map(|g| {
            Direction::ALL
                .into_iter()
                .flat_map(move |a| Direction::ALL.into_iter().map(move |b| Channel::new(g, a, b)))
        })
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}{}", self.pump, self.signal, self.idler)
    }
}

/// Second-order coefficients `d_{gamma, alpha beta}` in m/V, indexed
/// `[pump][signal][idler]` by [`Direction::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearCoefficients(pub [[[f64; 2]; 2]; 2]);

impl NonlinearCoefficients {
    pub fn uniform(d: f64) -> Self {
        Self([[[d; 2]; 2]; 2])
    }

    /// `d` for one pump direction, zero for the other.
    pub fn pump_direction_only(pump: Direction, d: f64) -> Self {
        let mut out = Self::uniform(0.0);
        out.0[pump.index()] = [[d; 2]; 2];
        out
    }

    pub fn get(&self, ch: Channel) -> f64 {
        self.0[ch.pump.index()][ch.signal.index()][ch.idler.index()]
    }

    pub fn set(&mut self, ch: Channel, d: f64) {
        self.0[ch.pump.index()][ch.signal.index()][ch.idler.index()] = d;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().flatten().all(|&d| d == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().flatten().flatten().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("nonlinear coefficient".into()));
        }
        Ok(())
    }
}

/// Coupling constant `g = (2i d / c) sqrt(ws wi / (2 pi n_s n_i))`.
pub fn coupling_constant(d: f64, omega_s: f64, omega_i: f64, n_s: f64, n_i: f64) -> Complex64 {
    I * (2.0 * d / C) * (omega_s * omega_i / (2.0 * PI * n_s * n_i)).sqrt()
}

/// `sin(x)/x`, with a series near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `dk = k_p - k_s - k_i` from signed wave numbers.
pub fn phase_mismatch(k_p: f64, k_s: f64, k_i: f64) -> f64 {
    k_p - k_s - k_i
}

/// Volume amplitude `g E_p exp(i k_p L) exp(-i dk L/2) L sinc(dk L/2)`.
pub fn volume_amplitude(g: Complex64, e_p: Complex64, k_p: f64, dk: f64, length: f64) -> Complex64 {
    let x = 0.5 * dk * length;
    g * e_p * Complex64::from_polar(length * sinc(x), k_p * length - x)
}

/// Surface amplitude of photon `m`,
/// `(i/k_m) g E_p [exp(i(k_s+k_i)L) - exp(i k_p L)]`.
///
/// The bracket is evaluated as `-2i exp(i k_p L) exp(-i dk L/2) sin(dk L/2)`,
/// which avoids cancelling two unit phasors when `dk L` is small.
/// `k_m` is the magnitude of the z wave number of photon `m`.
pub fn surface_amplitude(
    g: Complex64,
    e_p: Complex64,
    k_p: f64,
    k_s: f64,
    k_i: f64,
    k_m: f64,
    length: f64,
) -> Result<Complex64> {
    if !(k_m.abs() > 0.0) {
        return Err(Error::InvalidArgument("surface amplitude needs k_m != 0".into()));
    }
    let x = 0.5 * phase_mismatch(k_p, k_s, k_i) * length;
    Ok(g * e_p * Complex64::from_polar(2.0 * x.sin() / k_m.abs(), k_p * length - x))
}

/// The bracket of [`surface_amplitude`] written literally as a difference of
/// phasors.
pub fn surface_amplitude_literal(
    g: Complex64,
    e_p: Complex64,
    k_p: f64,
    k_s: f64,
    k_i: f64,
    k_m: f64,
    length: f64,
) -> Complex64 {
    let bracket = Complex64::from_polar(1.0, (k_s + k_i) * length) - Complex64::from_polar(1.0, k_p * length);
    I / k_m.abs() * g * e_p * bracket
}

/// `V = dk / k_m`, the ratio of surface to volume amplitude.
pub fn surface_volume_ratio(dk: f64, k_m: f64) -> f64 {
    dk / k_m.abs()
}

/// Field transmissivity `2n / (n + n_out)` of a photon leaving the crystal.
pub fn fresnel_transmission(n: f64, n_out: f64) -> f64 {
    2.0 * n / (n + n_out)
}

/// `t_s t_i (F_vol + F_surf)`.
pub fn total_output_amplitude(volume: Complex64, surface: Complex64, t_s: f64, t_i: f64) -> Complex64 {
    t_s * t_i * (volume + surface)
}

/// Crystal face at which a boundary correction is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    /// `z = 0`.
    Input,
    /// `z = L`.
    Output,
}

/// Forward and backward corrections `(delta_F, delta_B)` of photon `m`
/// for one emission term, in closed form.
///
/// `k_m` is the wave-number magnitude of the corrected photon, `k_other`
/// the signed wave number of its partner, `k_p` the signed pump wave number.
pub fn boundary_correction(
    face: Face,
    g: Complex64,
    e_p: Complex64,
    k_p: f64,
    k_other: f64,
    k_m: f64,
    length: f64,
) -> (Complex64, Complex64) {
    let k = k_m.abs();
    let d = match face {
        Face::Input => I * g * e_p / (2.0 * k),
        Face::Output => -I * g * e_p * Complex64::from_polar(1.0, (k_p - k_other) * length) / (2.0 * k),
    };
    (d, d)
}

/// Same corrections obtained by solving the two matching conditions
/// (continuity of the field and of its z derivative) as a linear system.
pub fn boundary_correction_solve(
    face: Face,
    g: Complex64,
    e_p: Complex64,
    k_p: f64,
    k_other: f64,
    k_m: f64,
    length: f64,
) -> Result<(Complex64, Complex64)> {
    let (kf, kb) = (k_m.abs(), -k_m.abs());
    let (a, rhs) = match face {
        Face::Input => {
            let s = g * e_p;
            (
                [[1.0.into(), (-1.0).into()], [I * kf, -I * kb]],
                [Complex64::from(0.0), -s],
            )
        }
        Face::Output => {
            let s = g * e_p * Complex64::from_polar(1.0, (k_p - k_other) * length);
            (
                [[(-1.0).into(), 1.0.into()], [-I * kf, I * kb]],
                [Complex64::from(0.0), -s],
            )
        }
    };
    solve2(a, rhs)
}

fn solve2(a: [[Complex64; 2]; 2], b: [Complex64; 2]) -> Result<(Complex64, Complex64)> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 {
        return Err(Error::Singular("boundary matching system".into()));
    }
    let x0 = (b[0] * a[1][1] - a[0][1] * b[1]) / det;
    let x1 = (a[0][0] * b[1] - b[0] * a[1][0]) / det;
    Ok((x0, x1))
}

/// Surface amplitude of photon `m` rebuilt from the two face corrections:
/// `2 [exp(i(k_s+k_i)L) delta_in + exp(i k_other L) delta_out]`.
pub fn surface_from_corrections(
    delta_in: Complex64,
    delta_out: Complex64,
    k_s: f64,
    k_i: f64,
    k_other: f64,
    length: f64,
) -> Complex64 {
    2.0 * (Complex64::from_polar(1.0, (k_s + k_i) * length) * delta_in
        + Complex64::from_polar(1.0, k_other * length) * delta_out)
}

/// Polarization branch of each field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPolarizations {
    pub pump: Polarization,
    pub signal: Polarization,
    pub idler: Polarization,
}

/// Refractive indices at one frequency pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indices {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

/// All amplitudes of one channel at one frequency pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointAmplitudes {
    pub coupling: Complex64,
    pub dk: f64,
    pub volume: Complex64,
    pub surface_signal: Complex64,
    pub surface_idler: Complex64,
    pub ratio_signal: f64,
    pub ratio_idler: f64,
    pub t_signal: f64,
    pub t_idler: f64,
}

/// Homogeneous crystal with collinear beams along the z axis.
#[derive(Debug, Clone)]
pub struct BulkConfig {
    /// Crystal length, m.
    pub length: f64,
    pub crystal: Material,
    pub polarizations: FieldPolarizations,
    /// Angle between optic axis and z, rad. Ignored for isotropic crystals.
    pub axis_angle: f64,
    pub nonlinear: NonlinearCoefficients,
    pub pump: PumpSpec,
    /// Medium on both sides of the crystal.
    pub surrounding: Material,
}

impl BulkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "crystal length {} must be > 0",
                self.length
            )));
        }
        self.crystal.validate()?;
        self.surrounding.validate()?;
        if self.surrounding.uniaxial {
            return Err(Error::InvalidMaterial {
                material: self.surrounding.name.clone(),
                reason: "surrounding medium must be isotropic".into(),
            });
        }
        self.nonlinear.validate()?;
        self.pump.validate()
    }

    fn index(&self, omega: f64, pol: Polarization) -> Result<f64> {
        self.crystal.refractive_index(omega, pol, Some(self.axis_angle))
    }

    pub fn indices(&self, omega_s: f64, omega_i: f64) -> Result<Indices> {
        Ok(Indices {
            pump: self.index(omega_s + omega_i, self.polarizations.pump)?,
            signal: self.index(omega_s, self.polarizations.signal)?,
            idler: self.index(omega_i, self.polarizations.idler)?,
        })
    }

    /// Signed wave numbers `(k_p, k_s, k_i)` of a channel.
    pub fn wave_numbers(&self, ch: Channel, omega_s: f64, omega_i: f64) -> Result<(f64, f64, f64)> {
        let n = self.indices(omega_s, omega_i)?;
        Ok((
            ch.pump.sign() * n.pump * (omega_s + omega_i) / C,
            ch.signal.sign() * n.signal * omega_s / C,
            ch.idler.sign() * n.idler * omega_i / C,
        ))
    }

    pub fn phase_mismatch(&self, ch: Channel, omega_s: f64, omega_i: f64) -> Result<f64> {
        let (kp, ks, ki) = self.wave_numbers(ch, omega_s, omega_i)?;
        Ok(phase_mismatch(kp, ks, ki))
    }

    /// Amplitudes of channel `ch` for pump field `e_p` at `ws + wi`.
    pub fn amplitudes(&self, ch: Channel, omega_s: f64, omega_i: f64, e_p: Complex64) -> Result<PointAmplitudes> {
        let n = self.indices(omega_s, omega_i)?;
        let (kp, ks, ki) = (
            ch.pump.sign() * n.pump * (omega_s + omega_i) / C,
            ch.signal.sign() * n.signal * omega_s / C,
            ch.idler.sign() * n.idler * omega_i / C,
        );
        let g = coupling_constant(self.nonlinear.get(ch), omega_s, omega_i, n.signal, n.idler);
        let dk = phase_mismatch(kp, ks, ki);
        let n_out_s = self
            .surrounding
            .refractive_index(omega_s, Polarization::Ordinary, None)?;
        let n_out_i = self
            .surrounding
            .refractive_index(omega_i, Polarization::Ordinary, None)?;
        Ok(PointAmplitudes {
            coupling: g,
            dk,
            volume: volume_amplitude(g, e_p, kp, dk, self.length),
            surface_signal: surface_amplitude(g, e_p, kp, ks, ki, ks, self.length)?,
            surface_idler: surface_amplitude(g, e_p, kp, ks, ki, ki, self.length)?,
            ratio_signal: surface_volume_ratio(dk, ks),
            ratio_idler: surface_volume_ratio(dk, ki),
            t_signal: fresnel_transmission(n.signal, n_out_s),
            t_idler: fresnel_transmission(n.idler, n_out_i),
        })
    }

    /// Output kernels `(F^s, F^i)` of one point, weighted by `contribution`.
    fn output_pair(
        &self,
        ch: Channel,
        contribution: Contribution,
        omega_s: f64,
        omega_i: f64,
        e_p: Complex64,
    ) -> Result<(Complex64, Complex64)> {
        let a = self.amplitudes(ch, omega_s, omega_i, e_p)?;
        let (wv, ws) = contribution.weights();
        let vol = a.volume * wv;
        Ok((
            total_output_amplitude(vol, a.surface_signal * ws, a.t_signal, a.t_idler),
            total_output_amplitude(vol, a.surface_idler * ws, a.t_signal, a.t_idler),
        ))
    }

    fn channel(&self, signal: Direction, idler: Direction) -> Channel {
        Channel::new(self.pump.direction, signal, idler)
    }

    /// Pulsed kernels on a rectangular grid for output directions
    /// `(signal, idler)`.
    pub fn kernel_grid(
        &self,
        directions: (Direction, Direction),
        contribution: Contribution,
        axis_s: &UniformGrid,
        axis_i: &UniformGrid,
        filters: &DetectionFilters,
    ) -> Result<KernelPair> {
        self.validate()?;
        let ch = self.channel(directions.0, directions.1);
        let rows: Vec<Vec<(Complex64, Complex64)>> = (0..axis_s.count)
            .into_par_iter()
            .map(|r| {
                let ws = axis_s.at(r);
                (0..axis_i.count)
                    .map(|c| {
                        let wi = axis_i.at(c);
                        let e_p = self.pump.spectral_amplitude(ws + wi);
                        let f = filters.amplitude(ws, wi);
                        self.output_pair(ch, contribution, ws, wi, e_p)
                            .map(|(s, i)| (s * f, i * f))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let shape = (axis_s.count, axis_i.count);
        let sig = Array2::from_shape_fn(shape, |(r, c)| rows[r][c].0);
        let idl = Array2::from_shape_fn(shape, |(r, c)| rows[r][c].1);
        let meta = KernelMeta {
            source: KernelSource::Bulk,
            directions,
            contribution,
        };
        let reference = (axis_s.center(), axis_i.center());
        Ok(KernelPair {
            signal: TwoPhotonAmplitudeGrid::new(*axis_s, *axis_i, sig, Field::Signal, reference, meta)?,
            idler: TwoPhotonAmplitudeGrid::new(*axis_s, *axis_i, idl, Field::Idler, reference, meta)?,
        })
    }

    /// cw kernels on the line `wi = wp0 - ws`.
    pub fn kernel_line(
        &self,
        directions: (Direction, Direction),
        contribution: Contribution,
        axis_s: &UniformGrid,
        filters: &DetectionFilters,
        regularization: f64,
    ) -> Result<LinePair> {
        self.validate()?;
        if !self.pump.is_cw() {
            return Err(Error::InvalidArgument("kernel_line needs a cw pump".into()));
        }
        let ch = self.channel(directions.0, directions.1);
        let wp = self.pump.omega_p0;
        let e_p = self.pump.spectral_amplitude(wp);
        let pairs = (0..axis_s.count)
            .into_par_iter()
            .map(|j| {
                let ws = axis_s.at(j);
                let wi = wp - ws;
                let f = filters.amplitude(ws, wi);
                self.output_pair(ch, contribution, ws, wi, e_p)
                    .map(|(s, i)| (s * f, i * f))
            })
            .collect::<Result<Vec<_>>>()?;
        let meta = KernelMeta {
            source: KernelSource::Bulk,
            directions,
            contribution,
        };
        let reference = (axis_s.center(), wp - axis_s.center());
        let line = |values: Vec<Complex64>, field| {
            let l = CwAmplitudeLine {
                axis_s: *axis_s,
                omega_p0: wp,
                values,
                field,
                reference,
                meta,
                regularization,
            };
            l.validate().map(|_| l)
        };
        Ok(LinePair {
            signal: line(pairs.iter().map(|p| p.0).collect(), Field::Signal)?,
            idler: line(pairs.iter().map(|p| p.1).collect(), Field::Idler)?,
        })
    }

    /// Group delay of the signal minus that of the idler across the
    /// crystal, `L (dk_s/dw - dk_i/dw)`, by central differences.
    pub fn group_delay_difference(&self, omega_s: f64, omega_i: f64) -> Result<f64> {
        let k = |w: f64, pol| -> Result<f64> { Ok(self.index(w, pol)? * w / C) };
        let deriv = |w: f64, pol| -> Result<f64> {
            let h = 1e-4 * w;
            Ok((k(w + h, pol)? - k(w - h, pol)?) / (2.0 * h))
        };
        let ks1 = deriv(omega_s, self.polarizations.signal)?;
        let ki1 = deriv(omega_i, self.polarizations.idler)?;
        Ok(self.length * (ks1 - ki1))
    }
}

/// Axis angle in `[lo, hi]` (rad) at which the all-forward channel is phase
/// matched for the given frequencies, found by bisection.
pub fn phase_matching_angle(
    crystal: &Material,
    polarizations: FieldPolarizations,
    omega_s: f64,
    omega_i: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let f = |theta: f64| -> Result<f64> {
        let n = |w: f64, pol| crystal.refractive_index(w, pol, Some(theta));
        Ok(n(omega_s + omega_i, polarizations.pump)? * (omega_s + omega_i)
            - n(omega_s, polarizations.signal)? * omega_s
            - n(omega_i, polarizations.idler)? * omega_i)
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "no phase-matching angle in [{lo}, {hi}] rad"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

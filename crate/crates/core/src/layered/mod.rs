//! Pair emission from a one-dimensional stack of linear and nonlinear layers.
//!
//! Media are numbered `0` (ambient on the input side), `1..=N` (layers) and
//! `N + 1` (ambient on the output side); layer `l` spans `z_{l-1}..z_l` with
//! `z_0 = 0`. Transfer matrices follow [`matrix`]. All waves share the
//! transverse wave number fixed by the pump and by the external signal angle.

pub mod matrix;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bulk::{coupling_constant, phase_mismatch, sinc, Channel, FieldPolarizations, NonlinearCoefficients};
use crate::constants::C as LIGHT;
use crate::error::{Error, Result};
use crate::materials::{Direction, Field, Material, Polarization};
use crate::numerics::UniformGrid;
use crate::observables::{
    Contribution, CwAmplitudeLine, KernelMeta, KernelPair, KernelSource, LinePair, TwoPhotonAmplitudeGrid,
};
use crate::pump::{DetectionFilters, PumpSpec};

pub use matrix::{
    boundary_from_cosines, boundary_matrix, propagation_matrix, Boundary, TransferMatrix, WavePolarization,
};

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct Layer {
    /// Thickness, m.
    pub length: f64,
    pub material: Material,
    /// Zero for linear layers.
    pub nonlinear: NonlinearCoefficients,
}

#[derive(Debug, Clone)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub ambient_in: Material,
    pub ambient_out: Material,
    /// Dispersion branch of each field in every layer.
    pub polarizations: FieldPolarizations,
    pub wave_polarization: WavePolarization,
    /// Pump angle of incidence in `ambient_in`, rad.
    pub pump_angle: f64,
    /// Signal emission angle in `ambient_out`, rad.
    pub signal_angle: f64,
}

/// Wave numbers and matrices of one field at one frequency.
#[derive(Debug, Clone)]
pub struct StackOptics {
    pub omega: f64,
    /// Refractive index of media `0..=N+1`.
    pub n: Vec<f64>,
    /// z wave number (magnitude) in media `0..=N+1`.
    pub k_z: Vec<f64>,
    /// `boundaries[j]` maps medium `j` to medium `j + 1` at `z_j`.
    pub boundaries: Vec<TransferMatrix>,
    /// `propagation[l - 1]` crosses layer `l`.
    pub propagation: Vec<TransferMatrix>,
}

impl StackOptics {
    /// Matrix of the whole stack, from `z_0` in medium 0 to `z_N` in
    /// medium `N + 1`.
    pub fn total(&self) -> TransferMatrix {
        let mut m = self.boundaries[0];
        for (p, b) in self.propagation.iter().zip(&self.boundaries[1..]) {
            m = *b * *p * m;
        }
        m
    }

    fn layer_count(&self) -> usize {
        self.propagation.len()
    }

    /// `M_L(l)`: medium 0 at `z_0` to layer `l` at `z_l`, for `l = 1..=N`.
    fn left_products(&self) -> Vec<TransferMatrix> {
        let mut out = Vec::with_capacity(self.layer_count());
        let mut m = self.boundaries[0];
        for l in 1..=self.layer_count() {
            if l > 1 {
                m = self.boundaries[l - 1] * m;
            }
            m = self.propagation[l - 1] * m;
            out.push(m);
        }
        out
    }

    /// `M_R(l)`: layer `l` at `z_l` to medium `N + 1` at `z_N`.
    fn right_products(&self) -> Vec<TransferMatrix> {
        let n = self.layer_count();
        let mut out = vec![TransferMatrix::identity(); n];
        let mut m = self.boundaries[n];
        out[n - 1] = m;
        for l in (1..n).rev() {
            m = m * self.propagation[l] * self.boundaries[l];
            out[l - 1] = m;
        }
        out
    }
}

/// Pump field inside every layer.
#[derive(Debug, Clone)]
pub struct PumpProfile {
    pub omega: f64,
    /// Reflection and transmission of the whole stack.
    pub r: C,
    pub t: C,
    /// `(E_F, E_B)` at the left edge `z_{l-1}` of layer `l` (index `l - 1`).
    pub left: Vec<(C, C)>,
    /// `(E_F, E_B)` at the right edge `z_l`.
    pub right: Vec<(C, C)>,
    /// z wave number of the pump in each layer.
    pub k_z: Vec<f64>,
}

/// `T[alpha][alpha']` of one layer: outgoing amplitude in direction `alpha`
/// per unit amplitude emitted in direction `alpha'` at `z_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeCoefficients(pub [[C; 2]; 2]);

impl EscapeCoefficients {
    pub fn get(&self, out: Direction, emitted: Direction) -> C {
        self.0[out.index()][emitted.index()]
    }
}

/// `F^{o,(l)}_{alpha' beta'}` for `o = s` and `o = i`, indexed
/// `[alpha'][beta']`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerAmplitudes {
    pub signal: [[C; 2]; 2],
    pub idler: [[C; 2]; 2],
}

/// Transverse wave numbers `(k_x,p, k_x,s, k_x,i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transverse {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

fn k_z_in(mat: &Material, n: f64, omega: f64, k_x: f64) -> Result<f64> {
    let k = n * omega / LIGHT;
    let kz2 = k * k - k_x * k_x;
    if kz2 <= 0.0 {
        return Err(Error::Evanescent {
            material: mat.name.clone(),
        });
    }
    Ok(kz2.sqrt())
}

impl LayerStack {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("layers: at least one layer required".into()));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if !(layer.length > 0.0 && layer.length.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "layers[{k}].length must be > 0, got {}",
                    layer.length
                )));
            }
            layer.material.validate()?;
            layer.nonlinear.validate()?;
        }
        for (name, m) in [("ambient_in", &self.ambient_in), ("ambient_out", &self.ambient_out)] {
            m.validate()?;
            if m.uniaxial {
                return Err(Error::InvalidArgument(format!("{name} must be isotropic")));
            }
        }
        for (name, a) in [("pump_angle", self.pump_angle), ("signal_angle", self.signal_angle)] {
            if !(0.0..std::f64::consts::FRAC_PI_2).contains(&a.abs()) {
                return Err(Error::InvalidArgument(format!("{name} {a} rad outside (-pi/2, pi/2)")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Interface positions `z_0 = 0 < z_1 < ... < z_N`.
    pub fn interfaces(&self) -> Vec<f64> {
        let mut z = vec![0.0];
        for l in &self.layers {
            z.push(z.last().unwrap() + l.length);
        }
        z
    }

    fn medium(&self, j: usize) -> &Material {
        if j == 0 {
            &self.ambient_in
        } else if j > self.layers.len() {
            &self.ambient_out
        } else {
            &self.layers[j - 1].material
        }
    }

    fn polarization(&self, field: Field) -> Polarization {
        match field {
            Field::Pump => self.polarizations.pump,
            Field::Signal => self.polarizations.signal,
            Field::Idler => self.polarizations.idler,
        }
    }

    fn index(&self, j: usize, field: Field, omega: f64) -> Result<f64> {
        let mat = self.medium(j);
        let pol = if mat.uniaxial {
            self.polarization(field)
        } else {
            Polarization::Ordinary
        };
        mat.refractive_index(omega, pol, None)
    }

    /// Transverse wave numbers for a signal at `omega_s` and an idler at
    /// `omega_i`; the idler takes whatever the pump does not give the signal.
    pub fn transverse(&self, omega_s: f64, omega_i: f64) -> Result<Transverse> {
        let omega_p = omega_s + omega_i;
        let n_in = self.index(0, Field::Pump, omega_p)?;
        let n_out = self.index(self.layers.len() + 1, Field::Signal, omega_s)?;
        let pump = n_in * omega_p * self.pump_angle.sin() / LIGHT;
        let signal = n_out * omega_s * self.signal_angle.sin() / LIGHT;
        Ok(Transverse {
            pump,
            signal,
            idler: pump - signal,
        })
    }

    pub fn optics(&self, field: Field, omega: f64, k_x: f64) -> Result<StackOptics> {
        let media = self.layers.len() + 2;
        let mut n = Vec::with_capacity(media);
        let mut k_z = Vec::with_capacity(media);
        for j in 0..media {
            let nj = self.index(j, field, omega)?;
            k_z.push(k_z_in(self.medium(j), nj, omega, k_x)?);
            n.push(nj);
        }
        let cos = |j: usize| k_z[j] * LIGHT / (n[j] * omega);
        let boundaries = (0..media - 1)
            .map(|j| boundary_from_cosines(n[j], cos(j), n[j + 1], cos(j + 1), self.wave_polarization).matrix)
            .collect();
        let propagation = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| propagation_matrix(k_z[i + 1], l.length))
            .collect();
        Ok(StackOptics {
            omega,
            n,
            k_z,
            boundaries,
            propagation,
        })
    }

    /// Pump field in every layer for a wave of spectral amplitude
    /// `pump.spectral_amplitude(omega)` incident from `ambient_in`.
    pub fn pump_profile(&self, pump: &PumpSpec, omega: f64, k_x: f64) -> Result<PumpProfile> {
        if pump.direction != Direction::Forward {
            return Err(Error::InvalidArgument(
                "layered pump must enter from ambient_in (direction F)".into(),
            ));
        }
        let optics = self.optics(Field::Pump, omega, k_x)?;
        let (r, t) = optics.total().left_scattering()?;
        let e0 = pump.spectral_amplitude(omega);
        let mut v = optics.boundaries[0].apply((e0, r * e0));
        let mut left = Vec::with_capacity(self.layers.len());
        let mut right = Vec::with_capacity(self.layers.len());
        for l in 0..self.layers.len() {
            if l > 0 {
                v = optics.boundaries[l].apply(v);
            }
            left.push(v);
            v = optics.propagation[l].apply(v);
            right.push(v);
        }
        Ok(PumpProfile {
            omega,
            r,
            t,
            left,
            right,
            k_z: optics.k_z[1..=self.layers.len()].to_vec(),
        })
    }

    /// Escape coefficients of every layer for a photon of `field` at
    /// `omega` with transverse wave number `k_x`.
    ///
    /// A unit wave emitted at `z_l` bounces between the left and right
    /// substacks; the geometric series is summed in closed form.
    pub fn escape_coefficients(&self, field: Field, omega: f64, k_x: f64) -> Result<Vec<EscapeCoefficients>> {
        let optics = self.optics(field, omega, k_x)?;
        escape_from_optics(&optics)
    }

    /// Outgoing `(A_out, B_in)` for a source `(u_F, u_B)` at `z_l` found by
    /// solving the global matching problem directly.
    pub fn escape_by_global_solve(
        &self,
        field: Field,
        omega: f64,
        k_x: f64,
        layer: usize,
        source: (C, C),
    ) -> Result<(C, C)> {
        let optics = self.optics(field, omega, k_x)?;
        let ml = optics.left_products()[layer - 1];
        let mr = optics.right_products()[layer - 1];
        let total = mr * ml;
        let jump = mr.apply((source.0, -source.1));
        let n22 = total.0[1][1];
        if n22.norm() == 0.0 {
            return Err(Error::Singular("global stack matrix".into()));
        }
        let b_in = -jump.1 / n22;
        let a_out = total.0[0][1] * b_in + jump.0;
        Ok((a_out, b_in))
    }

    /// Emission amplitudes of layer `l` (1-based) before escape.
    ///
    /// The volume term carries weight `contribution.weights().0`, the
    /// `V`-proportional surface term `contribution.weights().1`.
    #[allow(clippy::too_many_arguments)]
    pub fn layer_amplitudes(
        &self,
        l: usize,
        profile: &PumpProfile,
        omega_s: f64,
        omega_i: f64,
        k_z_s: f64,
        k_z_i: f64,
        contribution: Contribution,
    ) -> Result<LayerAmplitudes> {
        let layer = &self.layers[l - 1];
        let mut out = LayerAmplitudes {
            signal: [[ZERO; 2]; 2],
            idler: [[ZERO; 2]; 2],
        };
        if layer.nonlinear.is_zero() {
            return Ok(out);
        }
        let n_s = self.index(l, Field::Signal, omega_s)?;
        let n_i = self.index(l, Field::Idler, omega_i)?;
        let (wv, ws) = contribution.weights();
        let len = layer.length;
        let kp = profile.k_z[l - 1];
        let (ep_f, ep_b) = profile.left[l - 1];
        for ch in Channel::all() {
            let d = layer.nonlinear.get(ch);
            if d == 0.0 {
                continue;
            }
            let g = coupling_constant(d, omega_s, omega_i, n_s, n_i);
            let e_p = match ch.pump {
                Direction::Forward => ep_f,
                Direction::Backward => ep_b,
            };
            let kp_s = ch.pump.sign() * kp;
            let dk = phase_mismatch(kp_s, ch.signal.sign() * k_z_s, ch.idler.sign() * k_z_i);
            let x = 0.5 * dk * len;
            let base = g * e_p * C::from_polar(len * sinc(x), kp_s * len - x);
            let (a, b) = (ch.signal.index(), ch.idler.index());
            out.signal[a][b] += base * (wv + ws * dk / k_z_s);
            out.idler[a][b] += base * (wv + ws * dk / k_z_i);
        }
        Ok(out)
    }

    /// `V^o_{gamma, alpha beta}` of layer `l` at the given frequencies.
    pub fn surface_ratio(&self, l: usize, ch: Channel, field: Field, omega_s: f64, omega_i: f64) -> Result<f64> {
        let tr = self.transverse(omega_s, omega_i)?;
        let kp = k_z_in(
            self.medium(l),
            self.index(l, Field::Pump, omega_s + omega_i)?,
            omega_s + omega_i,
            tr.pump,
        )?;
        let ks = k_z_in(
            self.medium(l),
            self.index(l, Field::Signal, omega_s)?,
            omega_s,
            tr.signal,
        )?;
        let ki = k_z_in(self.medium(l), self.index(l, Field::Idler, omega_i)?, omega_i, tr.idler)?;
        let dk = phase_mismatch(ch.pump.sign() * kp, ch.signal.sign() * ks, ch.idler.sign() * ki);
        Ok(match field {
            Field::Idler => dk / ki,
            _ => dk / ks,
        })
    }

    /// Output amplitudes `F^{o,out}_{alpha beta}` for all four direction
    /// pairs, indexed `[alpha][beta]`.
    pub fn output_amplitudes(
        &self,
        pump: &PumpSpec,
        omega_s: f64,
        omega_i: f64,
        contribution: Contribution,
    ) -> Result<LayerAmplitudes> {
        let tr = self.transverse(omega_s, omega_i)?;
        let sig = self.optics(Field::Signal, omega_s, tr.signal)?;
        let esc_s = escape_from_optics(&sig)?;
        self.output_with_signal(pump, omega_s, omega_i, contribution, tr, &sig.k_z, &esc_s)
    }

    #[allow(clippy::too_many_arguments)]
    fn output_with_signal(
        &self,
        pump: &PumpSpec,
        omega_s: f64,
        omega_i: f64,
        contribution: Contribution,
        tr: Transverse,
        k_z_s: &[f64],
        esc_s: &[EscapeCoefficients],
    ) -> Result<LayerAmplitudes> {
        let idl = self.optics(Field::Idler, omega_i, tr.idler)?;
        let esc_i = escape_from_optics(&idl)?;
        let profile = self.pump_profile(pump, omega_s + omega_i, tr.pump)?;
        let mut out = LayerAmplitudes {
            signal: [[ZERO; 2]; 2],
            idler: [[ZERO; 2]; 2],
        };
        for l in 1..=self.layers.len() {
            let f = self.layer_amplitudes(l, &profile, omega_s, omega_i, k_z_s[l], idl.k_z[l], contribution)?;
            let (ts, ti) = (&esc_s[l - 1].0, &esc_i[l - 1].0);
            for a in 0..2 {
                for b in 0..2 {
                    for a1 in 0..2 {
                        for b1 in 0..2 {
                            let w = ts[a][a1] * ti[b][b1];
                            out.signal[a][b] += w * f.signal[a1][b1];
                            out.idler[a][b] += w * f.idler[a1][b1];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn meta(directions: (Direction, Direction), contribution: Contribution) -> KernelMeta {
        KernelMeta {
            source: KernelSource::Layered,
            directions,
            contribution,
        }
    }

    /// Kernels on a rectangular grid for output directions `directions`.
    pub fn kernel_grid(
        &self,
        pump: &PumpSpec,
        directions: (Direction, Direction),
        contribution: Contribution,
        axis_s: &UniformGrid,
        axis_i: &UniformGrid,
        filters: &DetectionFilters,
    ) -> Result<KernelPair> {
        self.validate()?;
        pump.validate()?;
        let (a, b) = (directions.0.index(), directions.1.index());
        let rows = (0..axis_s.count)
            .into_par_iter()
            .map(|r| {
                let ws = axis_s.at(r);
                let mut row = Vec::with_capacity(axis_i.count);
                let mut cached: Option<(f64, StackOptics, Vec<EscapeCoefficients>)> = None;
                for c in 0..axis_i.count {
                    let wi = axis_i.at(c);
                    let tr = self.transverse(ws, wi)?;
                    if cached.as_ref().is_none_or(|(kx, _, _)| *kx != tr.signal) {
                        let sig = self.optics(Field::Signal, ws, tr.signal)?;
                        let esc = escape_from_optics(&sig)?;
                        cached = Some((tr.signal, sig, esc));
                    }
                    let (_, sig, esc) = cached.as_ref().unwrap();
                    let o = self.output_with_signal(pump, ws, wi, contribution, tr, &sig.k_z, esc)?;
                    let f = filters.amplitude(ws, wi);
                    row.push((o.signal[a][b] * f, o.idler[a][b] * f));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let shape = (axis_s.count, axis_i.count);
        let sig = Array2::from_shape_fn(shape, |(r, c)| rows[r][c].0);
        let idl = Array2::from_shape_fn(shape, |(r, c)| rows[r][c].1);
        let meta = Self::meta(directions, contribution);
        let reference = (axis_s.center(), axis_i.center());
        Ok(KernelPair {
            signal: TwoPhotonAmplitudeGrid::new(*axis_s, *axis_i, sig, Field::Signal, reference, meta)?,
            idler: TwoPhotonAmplitudeGrid::new(*axis_s, *axis_i, idl, Field::Idler, reference, meta)?,
        })
    }

    /// cw kernels on the line `wi = wp0 - ws`.
    pub fn kernel_line(
        &self,
        pump: &PumpSpec,
        directions: (Direction, Direction),
        contribution: Contribution,
        axis_s: &UniformGrid,
        filters: &DetectionFilters,
        regularization: f64,
    ) -> Result<LinePair> {
        self.validate()?;
        pump.validate()?;
        if !pump.is_cw() {
            return Err(Error::InvalidArgument("kernel_line needs a cw pump".into()));
        }
        let (a, b) = (directions.0.index(), directions.1.index());
        let wp = pump.omega_p0;
        let pairs = (0..axis_s.count)
            .into_par_iter()
            .map(|j| {
                let ws = axis_s.at(j);
                let wi = wp - ws;
                let o = self.output_amplitudes(pump, ws, wi, contribution)?;
                let f = filters.amplitude(ws, wi);
                Ok((o.signal[a][b] * f, o.idler[a][b] * f))
            })
            .collect::<Result<Vec<_>>>()?;
        let meta = Self::meta(directions, contribution);
        let reference = (axis_s.center(), wp - axis_s.center());
        let line = |values: Vec<C>, field| {
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
}

fn escape_from_optics(optics: &StackOptics) -> Result<Vec<EscapeCoefficients>> {
    let left = optics.left_products();
    let right = optics.right_products();
    left.iter()
        .zip(&right)
        .map(|(ml, mr)| {
            let (r_r, t_r) = mr.left_scattering()?;
            let m22 = ml.0[1][1];
            if m22.norm() == 0.0 {
                return Err(Error::Singular("left substack".into()));
            }
            let t_l = 1.0 / m22;
            let r_l = ml.0[0][1] / m22;
            let d = 1.0 - r_l * r_r;
            if d.norm() == 0.0 {
                return Err(Error::Singular("layer cavity".into()));
            }
            Ok(EscapeCoefficients([[t_r / d, t_r * r_l / d], [t_l * r_r / d, t_l / d]]))
        })
        .collect()
}

#[cfg(test)]
mod tests;

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::{Curve, CwAmplitudeLine, TwoPhotonAmplitudeGrid};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::materials::Field;
use crate::numerics::{dft1_centered, dft2_centered, UniformGrid};

/// Zero-padding factor used unless a caller asks otherwise.
pub const DEFAULT_PAD: usize = 4;

/// Two-photon amplitude in the time domain, rows along `tau_s`.
#[derive(Debug, Clone)]
pub struct TemporalKernel {
    pub tau_s: UniformGrid,
    pub tau_i: UniformGrid,
    pub values: Array2<Complex64>,
    pub field: Field,
    pub reference: (f64, f64),
}

/// Time-domain cross-section `F(tau_s, 0)` of a cw kernel. Under cw pumping
/// the amplitude depends on `tau_s - tau_i` only, up to a phase.
#[derive(Debug, Clone)]
pub struct TemporalLine {
    pub tau: UniformGrid,
    pub values: Vec<Complex64>,
    pub field: Field,
}

impl TemporalLine {
    pub fn magnitude(&self) -> Curve {
        Curve {
            axis: self.tau,
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }
}

/// `(1/2pi) integral dws dwi sqrt(ws wi / ws0 wi0) F exp(-i ws ts - i wi ti)`
/// evaluated by a zero-padded 2D DFT.
pub fn temporal_amplitude(f: &TwoPhotonAmplitudeGrid, pad: usize) -> Result<TemporalKernel> {
    f.validate()?;
    let (ws0, wi0) = f.reference;
    let weighted = Array2::from_shape_fn(f.values.dim(), |(a, b)| {
        let w = (f.axis_s.at(a) * f.axis_i.at(b) / (ws0 * wi0)).sqrt();
        f.values[[a, b]] * w
    });
    let out = dft2_centered(&weighted, &f.axis_s, &f.axis_i, pad)?;
    Ok(TemporalKernel {
        tau_s: out.tau_s,
        tau_i: out.tau_i,
        values: out.values,
        field: f.field,
        reference: f.reference,
    })
}

/// `F(tau_s, 0)` of a cw kernel.
pub fn temporal_line(f: &CwAmplitudeLine, pad: usize) -> Result<TemporalLine> {
    f.validate()?;
    let (ws0, wi0) = f.reference;
    let weighted: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * (f.axis_s.at(j) * f.idler_frequency(j) / (ws0 * wi0)).sqrt())
        .collect();
    let out = dft1_centered(&weighted, &f.axis_s, pad, 1.0 / (2.0 * PI))?;
    Ok(TemporalLine {
        tau: out.tau,
        values: out.values,
        field: f.field,
    })
}

/// Signal photon flux in the narrow-idler approximation,
/// `hbar ws0 integral dti Re{F^i*(ts, ti) F^s(ts, ti)}`.
///
/// The delay grid is periodic, so the `tau_i` integral is a plain sum.
pub fn photon_flux(fs: &TemporalKernel, fi: &TemporalKernel) -> Result<Curve> {
    if !(fs.tau_s.matches(&fi.tau_s) && fs.tau_i.matches(&fi.tau_i)) || fs.values.dim() != fi.values.dim() {
        return Err(Error::GridMismatch("signal and idler temporal kernels differ".into()));
    }
    let scale = HBAR * fs.reference.0 * fs.tau_i.step;
    let values = (0..fs.tau_s.count)
        .map(|a| {
            let row: f64 = fs
                .values
                .row(a)
                .iter()
                .zip(fi.values.row(a))
                .map(|(s, i)| (i.conj() * s).re)
                .sum();
            scale * row
        })
        .collect();
    Ok(Curve { axis: fs.tau_s, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Direction;
    use crate::numerics::make_grid;
    use crate::observables::{Contribution, KernelMeta, KernelSource};

    fn meta() -> KernelMeta {
        KernelMeta {
            source: KernelSource::Bulk,
            directions: (Direction::Forward, Direction::Forward),
            contribution: Contribution::Total,
        }
    }

    fn kernel(
        gs: UniformGrid,
        gi: UniformGrid,
        field: Field,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> TwoPhotonAmplitudeGrid {
        let v = Array2::from_shape_fn((gs.count, gi.count), |(a, b)| f(gs.at(a), gi.at(b)));
        TwoPhotonAmplitudeGrid::new(gs, gi, v, field, (gs.center(), gi.center()), meta()).unwrap()
    }

    #[test]
    fn single_bin_is_flat_in_time() {
        let g = make_grid(10.0, 2.0, 16).unwrap();
        let f = kernel(g, g, Field::Signal, |a, b| {
            if a == g.at(5) && b == g.at(9) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let t = temporal_amplitude(&f, 2).unwrap();
        let m0 = t.values[[0, 0]].norm();
        assert!(t.values.iter().all(|v| (v.norm() - m0).abs() < 1e-12 * m0));
    }

    #[test]
    fn weighted_parseval() {
        let gs = make_grid(20.0, 3.0, 48).unwrap();
        let gi = make_grid(15.0, 4.0, 40).unwrap();
        let f = kernel(gs, gi, Field::Signal, |a, b| {
            Complex64::from_polar((-(a - 20.0).powi(2) - 0.5 * (b - 15.0).powi(2)).exp(), a * b * 0.1)
        });
        let t = temporal_amplitude(&f, DEFAULT_PAD).unwrap();
        let lhs: f64 = t.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * t.tau_s.step * t.tau_i.step;
        let (ws0, wi0) = f.reference;
        let rhs: f64 = f
            .values
            .indexed_iter()
            .map(|((a, b), v)| gs.at(a) * gi.at(b) / (ws0 * wi0) * v.norm_sqr())
            .sum::<f64>()
            * gs.step
            * gi.step;
        assert!((lhs - rhs).abs() < 1e-8 * rhs, "{lhs} {rhs}");
    }

    /// Direct triple sum over `(ws, ws', wi)` of the general flux formula.
    fn flux_direct(fs: &TwoPhotonAmplitudeGrid, fi: &TwoPhotonAmplitudeGrid, tau: &UniformGrid) -> Vec<f64> {
        let (gs, gi) = (fs.axis_s, fs.axis_i);
        let w = gs.step * gs.step * gi.step;
        (0..tau.count)
            .map(|k| {
                let t = tau.at(k);
                let mut acc = 0.0;
                for a in 0..gs.count {
                    for a2 in 0..gs.count {
                        let ph = Complex64::from_polar((gs.at(a) * gs.at(a2)).sqrt(), (gs.at(a) - gs.at(a2)) * t);
                        for b in 0..gi.count {
                            acc += (ph * fi.values[[a, b]].conj() * fs.values[[a2, b]]).re;
                        }
                    }
                }
                HBAR / (2.0 * PI) * acc * w
            })
            .collect()
    }

    #[test]
    fn narrow_idler_flux_matches_direct_sum() {
        let gs = make_grid(2.0e15, 4.0e13, 32).unwrap();
        let gi = make_grid(2.2e15, 2.2e15 * 1e-7, 32).unwrap();
        let chirp = |a: f64, b: f64| {
            let x = (a - 2.0e15) / 1.2e13;
            let y = (b - 2.2e15) / (0.7e-7 * 2.2e15);
            ((-x * x - y * y) / 2.0, 0.4 * x * x + 0.3 * x * y)
        };
        let fs = kernel(gs, gi, Field::Signal, |a, b| {
            let (m, p) = chirp(a, b);
            Complex64::from_polar(m.exp(), p)
        });
        let fi = kernel(gs, gi, Field::Idler, |a, b| {
            let (m, p) = chirp(a, b);
            Complex64::from_polar(m.exp() * (1.0 + 0.2 * (a - 2.0e15) / 4e13), p - 0.1)
        });
        let ts = temporal_amplitude(&fs, 4).unwrap();
        let ti = temporal_amplitude(&fi, 4).unwrap();
        let flux = photon_flux(&ts, &ti).unwrap();
        let direct = flux_direct(&fs, &fi, &flux.axis);
        let num: f64 = flux.values.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = direct.iter().map(|b| b * b).sum();
        assert!((num / den).sqrt() < 1e-6, "{}", (num / den).sqrt());
    }

    #[test]
    fn mismatched_kernels_rejected() {
        let g = make_grid(10.0, 2.0, 16).unwrap();
        let h = make_grid(10.0, 2.0, 20).unwrap();
        let a = temporal_amplitude(&kernel(g, g, Field::Signal, |_, _| Complex64::new(1.0, 0.0)), 2).unwrap();
        let b = temporal_amplitude(&kernel(h, h, Field::Idler, |_, _| Complex64::new(1.0, 0.0)), 2).unwrap();
        assert!(photon_flux(&a, &b).is_err());
    }
}

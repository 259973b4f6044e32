use num_complex::Complex64;
use rayon::prelude::*;

use super::{Curve, CwAmplitudeLine, TwoPhotonAmplitudeGrid};
use crate::error::{Error, Result};
use crate::numerics::{trapezoid_weights, UniformGrid};

/// Hong-Ou-Mandel interferometer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HOMConfig {
    /// Amplitude reflectivity of the beam splitter.
    pub r: Complex64,
    /// Amplitude transmissivity of the beam splitter.
    pub t: Complex64,
    /// Relative delays `tau_l` at which the rate is reported, s.
    pub tau: UniformGrid,
    /// Fixed delay added to every `tau_l`, s. A compensating delay line
    /// moves the interference feature to `tau_l = 0`.
    pub delay_offset: f64,
}

impl HOMConfig {
    pub fn balanced(tau: UniformGrid) -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            r: h,
            t: h,
            tau,
            delay_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.r.norm_sqr() + self.t.norm_sqr();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "beam splitter must satisfy |r|^2 + |t|^2 = 1, got {s}"
            )));
        }
        if !self.delay_offset.is_finite() {
            return Err(Error::NonFinite("delay offset".into()));
        }
        Ok(())
    }

    fn interference(&self) -> Complex64 {
        let rt = self.r.conj() * self.t;
        rt * rt
    }

    fn background(&self) -> f64 {
        (self.r.norm_sqr().powi(2) + self.t.norm_sqr().powi(2)) / 8.0
    }
}

fn normalization(r0: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::NoPairs);
    }
    Ok(1.0 / (4.0 * r0))
}

/// Normalized coincidence rate `R_n(tau_l) = 1 - rho(tau_l)` from pulsed
/// kernels. The idler kernel enters with swapped arguments, so both axes
/// must coincide.
pub fn hom_rate(fs: &TwoPhotonAmplitudeGrid, fi: &TwoPhotonAmplitudeGrid, cfg: &HOMConfig) -> Result<Curve> {
    cfg.validate()?;
    fs.validate()?;
    fi.validate()?;
    if !fs.same_axes(fi) || !fs.axis_s.matches(&fs.axis_i) {
        return Err(Error::GridMismatch(
            "HOM needs identical signal and idler axes on both kernels".into(),
        ));
    }
    let axis = fs.axis_s;
    let n = axis.count;
    let w = trapezoid_weights(&axis);
    let (ws0, wi0) = fs.reference;
    let omega = axis.values();
    let mut r0 = 0.0;
    let mut p = vec![Complex64::new(0.0, 0.0); n * n];
    let k = cfg.interference();
    for a in 0..n {
        for b in 0..n {
            let weight = w[a] * w[b] * omega[a] * omega[b] / (ws0 * wi0);
            r0 += weight * (fs.values[[a, b]].conj() * fi.values[[a, b]]).re;
            p[a * n + b] = weight * k * fs.values[[a, b]].conj() * fi.values[[b, a]];
        }
    }
    let norm = normalization(cfg.background() * r0)?;
    let values = (0..cfg.tau.count)
        .into_par_iter()
        .map(|j| {
            let tau = cfg.tau.at(j) + cfg.delay_offset;
            let e: Vec<Complex64> = omega.iter().map(|o| Complex64::from_polar(1.0, o * tau)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n {
                let inner: Complex64 = (0..n).map(|b| p[a * n + b] * e[b].conj()).sum();
                acc += e[a] * inner;
            }
            1.0 - norm * acc.re
        })
        .collect();
    Ok(Curve { axis: cfg.tau, values })
}

/// cw form of [`hom_rate`]: on the line `wi = wp0 - ws` the double integral
/// becomes a single one over `ws`. The line must be symmetric about `wp0/2`.
pub fn hom_rate_line(fs: &CwAmplitudeLine, fi: &CwAmplitudeLine, cfg: &HOMConfig) -> Result<Curve> {
    cfg.validate()?;
    fs.validate()?;
    fi.validate()?;
    if !fs.same_axes(fi) {
        return Err(Error::GridMismatch("signal and idler lines differ".into()));
    }
    let axis = fs.axis_s;
    let wp = fs.omega_p0;
    if ((axis.start + axis.end()) - wp).abs() > 1e-9 * axis.step {
        return Err(Error::GridMismatch(
            "cw HOM needs a signal axis symmetric about wp0/2".into(),
        ));
    }
    let n = axis.count;
    let w = trapezoid_weights(&axis);
    let (ws0, wi0) = fs.reference;
    let k = cfg.interference();
    let mut r0 = 0.0;
    let mut p = Vec::with_capacity(n);
    for j in 0..n {
        let ws = axis.at(j);
        let weight = w[j] * ws * (wp - ws) / (ws0 * wi0);
        r0 += weight * (fs.values[j].conj() * fi.values[j]).re;
        p.push((weight * k * fs.values[j].conj() * fi.values[n - 1 - j], 2.0 * ws - wp));
    }
    let norm = normalization(cfg.background() * r0)?;
    let values = (0..cfg.tau.count)
        .into_par_iter()
        .map(|j| {
            let tau = cfg.tau.at(j) + cfg.delay_offset;
            let acc: f64 = p
                .iter()
                .map(|(v, d)| (v * Complex64::from_polar(1.0, d * tau)).re)
                .sum();
            1.0 - norm * acc
        })
        .collect();
    Ok(Curve { axis: cfg.tau, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{Direction, Field};
    use crate::numerics::make_grid;
    use crate::observables::{Contribution, KernelMeta, KernelSource};
    use ndarray::Array2;
    use proptest::prelude::*;

    fn meta() -> KernelMeta {
        KernelMeta {
            source: KernelSource::Bulk,
            directions: (Direction::Forward, Direction::Forward),
            contribution: Contribution::Total,
        }
    }

    fn symmetric_pair(chirp: f64) -> (TwoPhotonAmplitudeGrid, TwoPhotonAmplitudeGrid) {
        let g = make_grid(1.0e15, 5e13, 48).unwrap();
        let f = |a: f64, b: f64| {
            let x = (a - 1e15) / 1e13;
            let y = (b - 1e15) / 1e13;
            Complex64::from_polar(
                (-(x + y).powi(2) / 8.0 - (x - y).powi(2) / 2.0).exp(),
                chirp * (x * x + y * y),
            )
        };
        let v = Array2::from_shape_fn((48, 48), |(a, b)| f(g.at(a), g.at(b)));
        let s = TwoPhotonAmplitudeGrid::new(g, g, v.clone(), Field::Signal, (1e15, 1e15), meta()).unwrap();
        let i = TwoPhotonAmplitudeGrid::new(g, g, v.t().to_owned(), Field::Idler, (1e15, 1e15), meta()).unwrap();
        (s, i)
    }

    #[test]
    fn exchange_symmetric_kernels_give_full_dip() {
        let (s, i) = symmetric_pair(0.3);
        // exchange symmetry: F^s(ws, wi) = F^i(wi, ws)
        let tau = UniformGrid::new(-2e-12, 4e-12, 2).unwrap();
        let mut cfg = HOMConfig::balanced(tau);
        cfg.tau = make_grid(0.0, 1e-12, 3).unwrap();
        let r = hom_rate(&s, &i, &cfg).unwrap();
        assert!(r.values[1].abs() < 1e-6, "{}", r.values[1]);
    }

    #[test]
    fn far_delays_recover_unity() {
        let (s, i) = symmetric_pair(0.0);
        let mut cfg = HOMConfig::balanced(make_grid(0.0, 5e-12, 5).unwrap());
        cfg.delay_offset = 0.0;
        let r = hom_rate(&s, &i, &cfg).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-3 && (r.values[4] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mirror_splitter_has_no_interference() {
        let (s, i) = symmetric_pair(0.2);
        let mut cfg = HOMConfig::balanced(make_grid(0.0, 1e-12, 7).unwrap());
        cfg.r = Complex64::new(1.0, 0.0);
        cfg.t = Complex64::new(0.0, 0.0);
        let r = hom_rate(&s, &i, &cfg).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn lossy_splitter_rejected() {
        let mut cfg = HOMConfig::balanced(make_grid(0.0, 1e-12, 7).unwrap());
        cfg.t = Complex64::new(0.5, 0.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_kernel_reports_no_pairs() {
        let (mut s, mut i) = symmetric_pair(0.0);
        s.values.fill(Complex64::new(0.0, 0.0));
        i.values.fill(Complex64::new(0.0, 0.0));
        let cfg = HOMConfig::balanced(make_grid(0.0, 1e-12, 7).unwrap());
        assert!(matches!(hom_rate(&s, &i, &cfg), Err(Error::NoPairs)));
    }

    proptest! {
        #[test]
        fn global_phase_invariance(phi in 0.0f64..6.3, chirp in -1.0f64..1.0) {
            let (s, i) = symmetric_pair(chirp);
            let cfg = HOMConfig::balanced(make_grid(0.0, 1e-12, 9).unwrap());
            let a = hom_rate(&s, &i, &cfg).unwrap();
            let ph = Complex64::from_polar(1.0, phi);
            let b = hom_rate(&s.scaled(ph), &i.scaled(ph), &cfg).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

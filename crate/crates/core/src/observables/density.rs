use super::{Curve, CwAmplitudeLine, TwoPhotonAmplitudeGrid};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::materials::Field;
use crate::numerics::{integrate_2d, trapezoid_weights, UniformGrid};
use ndarray::Array2;

/// Joint signal-idler photon-number density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDensity {
    pub axis_s: UniformGrid,
    pub axis_i: UniformGrid,
    pub values: Array2<f64>,
}

impl JointDensity {
    /// Number of pairs, `integral dws dwi n`.
    pub fn total(&self) -> Result<f64> {
        integrate_2d(&self.values, &self.axis_s, &self.axis_i)
    }
}

fn check_pair(fs: &TwoPhotonAmplitudeGrid, fi: &TwoPhotonAmplitudeGrid) -> Result<()> {
    fs.validate()?;
    fi.validate()?;
    if !fs.same_axes(fi) {
        return Err(Error::GridMismatch(
            "signal and idler kernels use different grids".into(),
        ));
    }
    Ok(())
}

fn check_line_pair(fs: &CwAmplitudeLine, fi: &CwAmplitudeLine) -> Result<()> {
    fs.validate()?;
    fi.validate()?;
    if !fs.same_axes(fi) {
        return Err(Error::GridMismatch("signal and idler lines differ".into()));
    }
    Ok(())
}

/// `n = Re{F^s* F^i}` pointwise.
pub fn joint_density(fs: &TwoPhotonAmplitudeGrid, fi: &TwoPhotonAmplitudeGrid) -> Result<JointDensity> {
    check_pair(fs, fi)?;
    let values = ndarray::Zip::from(&fs.values)
        .and(&fi.values)
        .map_collect(|s, i| (s.conj() * i).re);
    Ok(JointDensity {
        axis_s: fs.axis_s,
        axis_i: fs.axis_i,
        values,
    })
}

/// Density along a cw line, multiplied by the line's regularization factor.
pub fn joint_density_line(fs: &CwAmplitudeLine, fi: &CwAmplitudeLine) -> Result<Curve> {
    check_line_pair(fs, fi)?;
    Ok(Curve {
        axis: fs.axis_s,
        values: fs
            .values
            .iter()
            .zip(&fi.values)
            .map(|(s, i)| fs.regularization * (s.conj() * i).re)
            .collect(),
    })
}

/// Intensity spectrum `S(w) = hbar w integral n` over the partner frequency
/// (trapezoidal rule).
pub fn intensity_spectrum(n: &JointDensity, which: Field) -> Result<Curve> {
    let (axis, other, by_rows) = match which {
        Field::Signal => (n.axis_s, n.axis_i, true),
        Field::Idler => (n.axis_i, n.axis_s, false),
        Field::Pump => return Err(Error::InvalidArgument("no pump spectrum from a pair density".into())),
    };
    let w = trapezoid_weights(&other);
    let values = (0..axis.count)
        .map(|j| {
            let lane = if by_rows { n.values.row(j) } else { n.values.column(j) };
            HBAR * axis.at(j) * lane.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    Ok(Curve { axis, values })
}

/// Signal spectrum under cw pumping, `S(ws) = hbar ws n(ws, wp0 - ws)`.
pub fn intensity_spectrum_line(n: &Curve) -> Curve {
    Curve {
        axis: n.axis,
        values: n
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| HBAR * n.axis.at(j) * v)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Direction;
    use crate::numerics::make_grid;
    use crate::observables::{Contribution, KernelMeta, KernelSource};
    use num_complex::Complex64;

    fn meta() -> KernelMeta {
        KernelMeta {
            source: KernelSource::Bulk,
            directions: (Direction::Forward, Direction::Forward),
            contribution: Contribution::Volume,
        }
    }

    fn grid(f: impl Fn(f64, f64) -> Complex64, field: Field) -> TwoPhotonAmplitudeGrid {
        let g = make_grid(2.0, 1.0, 41).unwrap();
        let v = Array2::from_shape_fn((41, 41), |(a, b)| f(g.at(a), g.at(b)));
        TwoPhotonAmplitudeGrid::new(g, g, v, field, (2.0, 2.0), meta()).unwrap()
    }

    #[test]
    fn equal_kernels_give_modulus_squared() {
        let f = grid(|a, b| Complex64::from_polar(a * b, a - b), Field::Signal);
        let n = joint_density(&f, &f).unwrap();
        assert!(n.values.iter().all(|&v| v >= 0.0));
        assert!((n.values[[3, 7]] - f.values[[3, 7]].norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn zero_kernel_gives_zero_spectrum() {
        let f = grid(|_, _| Complex64::new(0.0, 0.0), Field::Signal);
        let n = joint_density(&f, &f).unwrap();
        let s = intensity_spectrum(&n, Field::Signal).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn separable_density_factorizes() {
        let f = grid(
            |a, b| Complex64::new((-(a - 2.0).powi(2)).exp() * (b - 1.0), 0.0),
            Field::Signal,
        );
        let n = joint_density(&f, &f).unwrap();
        let s = intensity_spectrum(&n, Field::Signal).unwrap();
        let gi = f.axis_i.values();
        let int_g: f64 = trapezoid_weights(&f.axis_i)
            .iter()
            .zip(&gi)
            .map(|(w, b)| w * (b - 1.0).powi(2))
            .sum();
        for j in [0, 10, 20, 33] {
            let ws = f.axis_s.at(j);
            let expect = HBAR * ws * (-(ws - 2.0).powi(2)).exp().powi(2) * int_g;
            assert!((s.values[j] - expect).abs() < 1e-12 * expect.abs().max(1e-300));
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = grid(|_, _| Complex64::new(1.0, 0.0), Field::Signal);
        let mut g = f.clone();
        g.axis_i = make_grid(2.5, 1.0, 41).unwrap();
        assert!(matches!(joint_density(&f, &g), Err(Error::GridMismatch(_))));
    }
}

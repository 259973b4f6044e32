//! Centred DFTs normalized to approximate the continuous transform
//!
//! ```text
//! F(tau) = norm * integral d(omega) f(omega) exp(-i omega tau)
//! ```
//!
//! on a uniform frequency grid starting at an arbitrary `omega_0`. The delay
//! axis is centred on zero with spacing `2 pi / (M step)`, where `M` is the
//! zero-padded length.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::UniformGrid;
use crate::error::{Error, Result};

/// One-dimensional transform result.
#[derive(Debug, Clone)]
pub struct Dft1 {
    pub tau: UniformGrid,
    pub values: Vec<Complex64>,
}

/// Two-dimensional transform result, rows along `tau_s`, columns along `tau_i`.
#[derive(Debug, Clone)]
pub struct Dft2 {
    pub tau_s: UniformGrid,
    pub tau_i: UniformGrid,
    pub values: Array2<Complex64>,
}

fn dual_grid(grid: &UniformGrid, padded: usize) -> Result<UniformGrid> {
    let dtau = 2.0 * PI / (padded as f64 * grid.step);
    UniformGrid::new(-((padded / 2) as f64) * dtau, dtau, padded)
}

fn checked_pad(grid: &UniformGrid, pad: usize) -> Result<usize> {
    if pad == 0 {
        return Err(Error::InvalidArgument("zero-padding factor must be >= 1".into()));
    }
    Ok(grid.count * pad)
}

/// Forward transform of a line: `norm * sum_j step v_j exp(-i omega_j tau_k)`.
pub fn dft1_centered(values: &[Complex64], grid: &UniformGrid, pad: usize, norm: f64) -> Result<Dft1> {
    if values.len() != grid.count {
        return Err(Error::GridMismatch(format!(
            "{} samples on a {}-point grid",
            values.len(),
            grid.count
        )));
    }
    let m = checked_pad(grid, pad)?;
    let tau = dual_grid(grid, m)?;
    let tw = centring_twiddle(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (j, v) in values.iter().enumerate() {
        buf[j] = v * tw[j];
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = norm * grid.step;
    let out = (0..m)
        .map(|k| scale * Complex64::from_polar(1.0, -grid.start * tau.at(k)) * buf[k])
        .collect();
    Ok(Dft1 { tau, values: out })
}

/// `exp(2 pi i j floor(M/2) / M)`: after the FFT, bin `k` holds delay
/// `(k - floor(M/2)) dtau`. Equals `(-1)^j` for even `M`.
fn centring_twiddle(m: usize) -> Vec<Complex64> {
    let half = (m / 2) as f64;
    (0..m)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * ((j as f64 * half) % m as f64) / m as f64))
        .collect()
}

/// Applies a 1D FFT along `axis` of `data` in place, with the centring
/// twiddle and output reorder.
fn transform_axis(data: &mut Array2<Complex64>, axis: Axis, fft: &dyn Fft<f64>, forward: bool) {
    let m = data.len_of(axis);
    let tw = centring_twiddle(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for mut lane in data.lanes_mut(axis) {
        if forward {
            for (j, v) in lane.iter().enumerate() {
                buf[j] = v * tw[j];
            }
            fft.process(&mut buf);
            lane.iter_mut().zip(&buf).for_each(|(l, b)| *l = *b);
        } else {
            buf.iter_mut().zip(lane.iter()).for_each(|(b, l)| *b = *l);
            fft.process(&mut buf);
            for (j, v) in buf.iter().enumerate() {
                lane[j] = v * tw[j].conj();
            }
        }
    }
}

/// Forward 2D transform with `1/(2 pi)` normalization:
/// `F(ts, ti) = (1/2pi) sum ds di v(ws, wi) exp(-i ws ts - i wi ti)`.
pub fn dft2_centered(
    values: &Array2<Complex64>,
    grid_s: &UniformGrid,
    grid_i: &UniformGrid,
    pad: usize,
) -> Result<Dft2> {
    let (ns, ni) = values.dim();
    if ns != grid_s.count || ni != grid_i.count {
        return Err(Error::GridMismatch(format!(
            "{ns}x{ni} samples on a {}x{} grid",
            grid_s.count, grid_i.count
        )));
    }
    let ms = checked_pad(grid_s, pad)?;
    let mi = checked_pad(grid_i, pad)?;
    let tau_s = dual_grid(grid_s, ms)?;
    let tau_i = dual_grid(grid_i, mi)?;
    let mut data = Array2::<Complex64>::zeros((ms, mi));
    data.slice_mut(ndarray::s![..ns, ..ni]).assign(values);
    let mut planner = FftPlanner::new();
    transform_axis(&mut data, Axis(0), planner.plan_fft_forward(ms).as_ref(), true);
    transform_axis(&mut data, Axis(1), planner.plan_fft_forward(mi).as_ref(), true);
    let scale = grid_s.step * grid_i.step / (2.0 * PI);
    let phase_s: Vec<Complex64> = (0..ms)
        .map(|k| Complex64::from_polar(scale, -grid_s.start * tau_s.at(k)))
        .collect();
    let phase_i: Vec<Complex64> = (0..mi)
        .map(|k| Complex64::from_polar(1.0, -grid_i.start * tau_i.at(k)))
        .collect();
    for ((a, b), v) in data.indexed_iter_mut() {
        *v *= phase_s[a] * phase_i[b];
    }
    Ok(Dft2 {
        tau_s,
        tau_i,
        values: data,
    })
}

/// Inverse of [`dft2_centered`], returning samples on the original frequency
/// grids: `f(ws, wi) = (1/2pi) sum dts dti F(ts, ti) exp(+i ws ts + i wi ti)`.
pub fn idft2_centered(dft: &Dft2, grid_s: &UniformGrid, grid_i: &UniformGrid) -> Result<Array2<Complex64>> {
    let (ms, mi) = dft.values.dim();
    if ms != dft.tau_s.count || mi != dft.tau_i.count {
        return Err(Error::GridMismatch("transform shape does not match its axes".into()));
    }
    if ms < grid_s.count || mi < grid_i.count {
        return Err(Error::GridMismatch("frequency grid longer than transform".into()));
    }
    let mut data = dft.values.clone();
    for ((a, b), v) in data.indexed_iter_mut() {
        *v *= Complex64::from_polar(1.0, grid_s.start * dft.tau_s.at(a) + grid_i.start * dft.tau_i.at(b));
    }
    let mut planner = FftPlanner::new();
    transform_axis(&mut data, Axis(0), planner.plan_fft_inverse(ms).as_ref(), false);
    transform_axis(&mut data, Axis(1), planner.plan_fft_inverse(mi).as_ref(), false);
    let scale = dft.tau_s.step * dft.tau_i.step / (2.0 * PI);
    Ok(data
        .slice(ndarray::s![..grid_s.count, ..grid_i.count])
        .mapv(|v| v * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    fn gaussian_2d(gs: &UniformGrid, gi: &UniformGrid, s0: f64, i0: f64) -> Array2<Complex64> {
        Array2::from_shape_fn((gs.count, gi.count), |(a, b)| {
            let x = gs.at(a) - s0;
            let y = gi.at(b) - i0;
            Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)
        })
    }

    #[test]
    fn gaussian_pair_2d() {
        // exp(-(x^2+y^2)/2) centred at (s0, i0) -> exp(-(ts^2+ti^2)/2) e^{-i(s0 ts + i0 ti)}
        let (s0, i0) = (3.0, -2.0);
        let gs = make_grid(s0, 12.0, 96).unwrap();
        let gi = make_grid(i0, 12.0, 64).unwrap();
        let f = gaussian_2d(&gs, &gi, s0, i0);
        let out = dft2_centered(&f, &gs, &gi, 2).unwrap();
        let mut worst: f64 = 0.0;
        for ((a, b), v) in out.values.indexed_iter() {
            let ts = out.tau_s.at(a);
            let ti = out.tau_i.at(b);
            let exact = Complex64::from_polar((-(ts * ts + ti * ti) / 2.0).exp(), -(s0 * ts + i0 * ti));
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn gaussian_pair_1d() {
        let g = make_grid(5.0, 10.0, 200).unwrap();
        let f: Vec<Complex64> = g
            .values()
            .iter()
            .map(|w| Complex64::new((-(w - 5.0) * (w - 5.0) / 2.0).exp(), 0.0))
            .collect();
        let out = dft1_centered(&f, &g, 4, 1.0 / (2.0 * PI).sqrt()).unwrap();
        for (k, v) in out.values.iter().enumerate() {
            let t = out.tau.at(k);
            let exact = Complex64::from_polar((-t * t / 2.0).exp(), -5.0 * t);
            assert!((v - exact).norm() < 1e-6);
        }
    }

    #[test]
    fn shift_theorem() {
        let gs = make_grid(0.0, 10.0, 64).unwrap();
        let gi = make_grid(1.0, 10.0, 64).unwrap();
        let f = gaussian_2d(&gs, &gi, 0.0, 1.0);
        let base = dft2_centered(&f, &gs, &gi, 1).unwrap();
        let shift = 5;
        let t0 = shift as f64 * base.tau_s.step;
        let g = Array2::from_shape_fn(f.dim(), |(a, b)| f[[a, b]] * Complex64::from_polar(1.0, gs.at(a) * t0));
        let moved = dft2_centered(&g, &gs, &gi, 1).unwrap();
        for a in shift..base.tau_s.count {
            for b in 0..base.tau_i.count {
                let d = (moved.values[[a, b]] - base.values[[a - shift, b]]).norm();
                assert!(d < 1e-12, "{a} {b} {d}");
            }
        }
    }

    #[test]
    fn round_trip_identity() {
        let gs = make_grid(1.2e15, 3e13, 48).unwrap();
        let gi = make_grid(1.1e15, 2e13, 40).unwrap();
        let f = Array2::from_shape_fn((48, 40), |(a, b)| {
            Complex64::new((a as f64 * 0.37).sin(), (b as f64 * 0.11 + a as f64).cos())
        });
        let fwd = dft2_centered(&f, &gs, &gi, 4).unwrap();
        let back = idft2_centered(&fwd, &gs, &gi).unwrap();
        let err: f64 = (&back - &f).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-10, "{}", err / norm);
    }

    #[test]
    fn parseval_discrete() {
        let gs = make_grid(0.0, 6.0, 40).unwrap();
        let gi = make_grid(2.0, 6.0, 30).unwrap();
        let f = Array2::from_shape_fn((40, 30), |(a, b)| {
            Complex64::new((a as f64).cos(), (b as f64 * 0.3).sin())
        });
        let out = dft2_centered(&f, &gs, &gi, 4).unwrap();
        let lhs: f64 = out.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * out.tau_s.step * out.tau_i.step;
        let rhs: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * gs.step * gi.step;
        assert!(((lhs - rhs) / rhs).abs() < 1e-10);
    }

    #[test]
    fn mismatched_shape_rejected() {
        let g = make_grid(0.0, 1.0, 8).unwrap();
        let f = Array2::<Complex64>::zeros((8, 9));
        assert!(dft2_centered(&f, &g, &g, 1).is_err());
        assert!(dft2_centered(&Array2::zeros((8, 8)), &g, &g, 0).is_err());
    }
}

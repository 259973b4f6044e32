use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use super::TwoPhotonAmplitudeGrid;
use crate::error::{Error, Result};
use crate::numerics::svd;

/// Schmidt spectrum of a two-photon amplitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtResult {
    /// Singular values of the quadrature-weighted kernel, descending.
    pub singular_values: Vec<f64>,
    /// Schmidt weights `sigma_k^2 / sum sigma^2`.
    pub weights: Vec<f64>,
    /// `-sum lambda log2 lambda`, in ebits.
    pub entropy: f64,
}

/// Schmidt decomposition of a plain matrix.
pub fn schmidt_from_matrix(m: &Array2<Complex64>) -> Result<SchmidtResult> {
    let dec = svd(m)?;
    let total: f64 = dec.sigma.iter().map(|s| s * s).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("Schmidt decomposition of a zero kernel".into()));
    }
    let weights: Vec<f64> = dec.sigma.iter().map(|s| s * s / total).collect();
    let entropy = weights
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0);
    Ok(SchmidtResult {
        singular_values: dec.sigma,
        weights,
        entropy,
    })
}

/// Schmidt decomposition of `F * sqrt(dws dwi)`.
pub fn schmidt_entropy(f: &TwoPhotonAmplitudeGrid) -> Result<SchmidtResult> {
    f.validate()?;
    let scale = (f.axis_s.step * f.axis_i.step).sqrt();
    schmidt_from_matrix(&f.values.mapv(|v| v * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_kernel_has_zero_entropy() {
        let m = Array2::from_shape_fn((20, 30), |(a, b)| {
            Complex64::new((a as f64 * 0.3).sin() + 2.0, 0.0) * Complex64::from_polar(1.0, b as f64 * 0.1)
        });
        assert!(schmidt_from_matrix(&m).unwrap().entropy < 1e-9);
    }

    #[test]
    fn identity_has_log_d_entropy() {
        let m = Array2::from_shape_fn((8, 8), |(a, b)| Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0));
        let r = schmidt_from_matrix(&m).unwrap();
        assert!((r.entropy - 3.0).abs() < 1e-12);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_rejected() {
        assert!(schmidt_from_matrix(&Array2::zeros((4, 4))).is_err());
    }

    proptest! {
        #[test]
        fn local_phases_do_not_change_entropy(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = Array2::from_shape_fn((12, 12), |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let a: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 6.0).collect();
            let b: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 6.0).collect();
            let ph = Array2::from_shape_fn((12, 12), |(x, y)| m[[x, y]] * Complex64::from_polar(1.0, a[x] + b[y]));
            let e1 = schmidt_from_matrix(&m).unwrap().entropy;
            let e2 = schmidt_from_matrix(&ph).unwrap().entropy;
            prop_assert!((e1 - e2).abs() < 1e-9);
        }
    }
}

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thin SVD `M = U diag(sigma) V^dagger` with `sigma` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Array2<Complex64>,
    pub sigma: Vec<f64>,
    pub v_adjoint: Array2<Complex64>,
}

impl Svd {
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let k = self.sigma.len();
        let (rows, _) = self.u.dim();
        let (_, cols) = self.v_adjoint.dim();
        Array2::from_shape_fn((rows, cols), |(a, b)| {
            (0..k)
                .map(|j| self.u[[a, j]] * self.sigma[j] * self.v_adjoint[[j, b]])
                .sum()
        })
    }
}

pub fn svd(matrix: &Array2<Complex64>) -> Result<Svd> {
    if matrix.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("svd input".into()));
    }
    let (rows, cols) = matrix.dim();
    let m = DMatrix::from_fn(rows, cols, |a, b| matrix[[a, b]]);
    let dec = m.svd(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let k = order.len();
    Ok(Svd {
        u: Array2::from_shape_fn((rows, k), |(a, j)| u[(a, order[j])]),
        sigma: order.iter().map(|&j| dec.singular_values[j]).collect(),
        v_adjoint: Array2::from_shape_fn((k, cols), |(j, b)| vt[(order[j], b)]),
    })
}

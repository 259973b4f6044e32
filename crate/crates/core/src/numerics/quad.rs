use ndarray::{Array1, Array2};

use super::UniformGrid;
use crate::error::{Error, Result};

/// Trapezoid weights of a uniform grid (`step/2` at the ends, `step` inside).
pub fn trapezoid_weights(grid: &UniformGrid) -> Array1<f64> {
    let mut w = Array1::from_elem(grid.count, grid.step);
    w[0] *= 0.5;
    w[grid.count - 1] *= 0.5;
    w
}

pub fn integrate_1d(values: &[f64], grid: &UniformGrid) -> Result<f64> {
    if values.len() != grid.count {
        return Err(Error::GridMismatch(format!(
            "{} values on a {}-point grid",
            values.len(),
            grid.count
        )));
    }
    let w = trapezoid_weights(grid);
    Ok(values.iter().zip(w.iter()).map(|(v, w)| v * w).sum())
}

/// Trapezoidal rule over a rectangle; rows follow `grid_s`, columns `grid_i`.
pub fn integrate_2d(values: &Array2<f64>, grid_s: &UniformGrid, grid_i: &UniformGrid) -> Result<f64> {
    let (rows, cols) = values.dim();
    if rows != grid_s.count || cols != grid_i.count {
        return Err(Error::GridMismatch(format!(
            "{rows}x{cols} values on a {}x{} grid",
            grid_s.count, grid_i.count
        )));
    }
    let ws = trapezoid_weights(grid_s);
    let wi = trapezoid_weights(grid_i);
    Ok(values
        .outer_iter()
        .zip(ws.iter())
        .map(|(row, a)| a * row.iter().zip(wi.iter()).map(|(v, b)| v * b).sum::<f64>())
        .sum())
}

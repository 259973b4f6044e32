//! Volume and surface contributions to spontaneous parametric down-conversion
//! in bulk crystals and one-dimensional nonlinear layered media, and the
//! photon-pair observables derived from the two-photon amplitudes.
//!
//! Internal units are SI throughout: angular frequencies in rad/s, lengths in
//! metres, times in seconds. Absolute pair rates carry an arbitrary global
//! scale (pump amplitude and transverse area), so observables are meant to be
//! read as shapes and ratios.

pub mod bulk;
pub mod constants;
pub mod error;
pub mod layered;
pub mod materials;
pub mod numerics;
pub mod observables;
pub mod pump;

pub use error::{Error, Result};

use thiserror::Error;

/// Errors raised by the simulation kernels and data loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("material file {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("material '{material}': {reason}")]
    InvalidMaterial { material: String, reason: String },

    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("material '{material}': wavelength {wavelength_um:.4} um outside validity range [{lo}, {hi}] um")]
    OutOfRange {
        material: String,
        wavelength_um: f64,
        lo: f64,
        hi: f64,
    },

    #[error("material '{material}': extraordinary index requires an optic-axis angle")]
    MissingAxisAngle { material: String },

    #[error("material '{material}' has no '{polarization}' dispersion branch")]
    MissingPolarization { material: String, polarization: String },

    #[error("evanescent wave: transverse wave number exceeds n*omega/c in '{material}' (total internal reflection is not modelled)")]
    Evanescent { material: String },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("no photon pairs: normalization R0 vanishes")]
    NoPairs,
}

pub type Result<T> = std::result::Result<T, Error>;

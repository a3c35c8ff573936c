use alloc::string::String;
use thiserror::Error;

/// A query was made at a point that is not in the open domain of the graph.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("point ({x}, {y}) is outside the domain interior of `{surface}`")]
pub struct GeometryError {
    pub surface: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParameterError {
    #[error("Scherk half-width {0} must lie in (0, pi/2)")]
    ScherkHalfWidth(f64),
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("region parameters do not nest: {0}")]
    Nesting(&'static str),
    #[error("no sampled configuration fell in region {0}; increase the sample size")]
    EmptyRegion(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigurationError {
    #[error("points coincide in space (distance {0:e}); the chord direction is undefined")]
    Degenerate(f64),
    #[error("vector {0} is not a unit vector (norm {1})")]
    NotUnit(&'static str, f64),
    #[error("configuration is not on a great circle (|det| = {0:e})")]
    NotGreatCircle(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Requested a conformal chart for a surface that has none.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("no conformal chart is available for surface `{0}`")]
pub struct UnsupportedSurface(pub String);

//! Brownian motion on minimal graphs.
//!
//! The crate is `no_std` (with `alloc`) and contains the numerical core:
//!
//! - [`surface`]: analytic minimal graphs (catalog and user-defined), Gauss map,
//!   curvature and graph metric.
//! - [`graph_sim`]: Euler–Maruyama simulation of intrinsic Brownian motion in graph
//!   coordinates with absorbing boundary and the curvature clock.
//! - [`conformal`]: the independent simulator that runs planar Brownian motion in a
//!   conformal chart and converts chart time to surface time.
//! - [`coupling`]: the configuration space `(S²)³`, great-circle coordinates, the
//!   chord-length coefficients `f`, `g` and the nested configuration regions.
//! - [`reduced`]: the reduced `(ρ, θ+φ)` dynamics in `s`-time and the statistics built
//!   on them (interval drift indicators, linear decay, last exits, Bessel comparison).
//!
//! Parallel execution, file formats and the command line live in the `mbm` crate.

#![no_std]

extern crate alloc;

pub mod conformal;
pub mod coupling;
pub mod error;
pub mod graph_sim;
pub mod noise;
pub mod reduced;
pub mod rng;
pub mod sphere;
pub mod surface;

pub use error::{ConfigurationError, GeometryError, ParameterError, UnsupportedSurface};
pub use surface::{MinimalGraph, Point2, Surface};

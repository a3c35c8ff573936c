//! Sources of Gaussian increments for the simulators.

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

/// Supplies standard normal and uniform draws.
pub trait Noise {
    fn gaussian(&mut self) -> f64;
    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64;
}

impl<R: RngCore> Noise for R {
    #[inline]
    fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Deterministic noise: every Gaussian draw is zero and every uniform draw is 1/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl Noise for ZeroNoise {
    fn gaussian(&mut self) -> f64 {
        0.0
    }

    fn uniform(&mut self) -> f64 {
        0.5
    }
}

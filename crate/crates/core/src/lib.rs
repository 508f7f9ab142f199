//! Periodic Parseval wavelet frames built from dyadic scaling masks.
//!
//! Everything lives in coefficient space: a 1-periodic function is a finite
//! [`Spectrum`] of Fourier coefficients and a mask is a `2^j`-periodic
//! [`DyadicSequence`]. The crate derives refinement chains and wavelet
//! spectra from masks ([`masks`]), constructs wavelet masks from angle
//! parameterizations of auxiliary coefficients ([`construct`]), solves the
//! explicit product schedules ([`schedules`]) and certifies candidate systems
//! against the coefficient and mask criteria ([`certify`]).
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod certify;
pub mod construct;
pub mod error;
pub mod haar;
pub mod masks;
pub mod scalar;
pub mod schedules;
pub mod spectra;
pub mod verdict;

pub use error::{FrameError, Result};
pub use masks::{FrameSystem, FundamentalCoefficients, RefinementChain, WaveletSystem};
pub use scalar::Real;
pub use spectra::{DyadicSequence, FrameIndex, Mask, Spectrum};
pub use verdict::Verdict;

pub type Complex64 = num_complex::Complex<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Mask64 = Mask<f64>;
pub type RefinementChain64 = RefinementChain<f64>;
pub type WaveletSystem64 = WaveletSystem<f64>;
pub type FrameSystem64 = FrameSystem<f64>;

/// Numerical tolerances shared by construction and certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual bound for exact identities (cross conditions, unit sphere).
    pub equality: f64,
    /// Bound for transform identities (Plancherel, DFT agreement).
    pub transform: f64,
    /// Distance to the limit accepted for truncated limit conditions.
    pub convergence: f64,
    /// A limit check whose last increment exceeds this is still drifting.
    pub drift: f64,
    /// Magnitudes at or below this count as zero when deciding activation.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: 1e-10,
            transform: 1e-12,
            convergence: 1e-6,
            drift: 1e-9,
            zero: 0.0,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("equality", self.equality),
            ("transform", self.transform),
            ("convergence", self.convergence),
            ("drift", self.drift),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FrameError::InvalidArgument(format!(
                    "tolerance `{name}` must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.zero >= 0.0 && self.zero.is_finite()) {
            return Err(FrameError::InvalidArgument(format!(
                "zero threshold must be nonnegative, got {}",
                self.zero
            )));
        }
        Ok(())
    }
}

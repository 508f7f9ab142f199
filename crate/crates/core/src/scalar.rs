//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point type the frame machinery is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + Default + 'static
{
    /// Lossy conversion from `f64`; used for tolerances and literals.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `2^p` as a scalar.
#[inline]
pub fn pow2<T: Real>(p: u32) -> T {
    T::lit(2.0).powi(p as i32)
}

#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `e^{-2 pi i n / 2^level}`, exact at quarter turns so that masks built from
/// it vanish exactly where they should.
pub fn root_of_unity<T: Real>(n: i64, level: u32) -> Complex<T> {
    let period = 1i64 << level;
    let r = n.rem_euclid(period);
    if r == 0 {
        return Complex::new(T::one(), T::zero());
    }
    if level == 1 {
        return Complex::new(-T::one(), T::zero());
    }
    let quarter = period / 4;
    if r % quarter == 0 {
        return match r / quarter {
            1 => Complex::new(T::zero(), -T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), T::one()),
        };
    }
    let angle = -T::TAU() * T::lit(r as f64) / T::lit(period as f64);
    Complex::new(angle.cos(), angle.sin())
}

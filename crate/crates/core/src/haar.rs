//! The periodic Haar system: the reference chain used by the CLI's named
//! generator and by most tests.

use num_complex::Complex;

use crate::masks::{FrameSystem, RefinementChain, WaveletSystem};
use crate::scalar::{pow2, root_of_unity, Real};
use crate::spectra::{Mask, Spectrum};

/// `(1 + w)/2` with `w = e^{-2 pi i n / 2^j}`.
pub fn scaling_mask<T: Real>(j: u32) -> Mask<T> {
    let half = T::lit(0.5);
    Mask::from_fn(j, |n| (Complex::new(T::one(), T::zero()) + root_of_unity::<T>(n, j)) * half)
}

/// `(1 - w)/2`.
pub fn wavelet_mask<T: Real>(j: u32) -> Mask<T> {
    let half = T::lit(0.5);
    Mask::from_fn(j, |n| (Complex::new(T::one(), T::zero()) - root_of_unity::<T>(n, j)) * half)
}

/// `phi_J(n) = 2^{J/2} (1 - w)/(2 pi i n)`, `phi_J(0) = 2^{-J/2}`, on `|n| <= bound`.
pub fn top_spectrum<T: Real>(top_level: u32, bound: i64) -> Spectrum<T> {
    let scale = T::lit(2.0).powf(T::lit(top_level as f64 / 2.0));
    Spectrum::from_fn(-bound..=bound, |n| {
        if n == 0 {
            return Complex::new(T::one() / scale, T::zero());
        }
        let num = Complex::new(T::one(), T::zero()) - root_of_unity::<T>(n, top_level);
        num * scale / Complex::new(T::zero(), T::TAU() * T::lit(n as f64))
    })
}

pub fn chain<T: Real>(top_level: u32, bound: i64) -> RefinementChain<T> {
    RefinementChain::from_fn(top_spectrum(top_level, bound), top_level, scaling_mask)
        .expect("Haar masks have consistent levels")
}

/// Two level-0 generators with seeds `(1, 0)` and `(0, 1)`, then one Haar
/// wavelet per level up to `depth - 1`.
pub fn wavelets<T: Real>(depth: u32) -> WaveletSystem<T> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let mut masks = Vec::with_capacity(depth as usize);
    if depth >= 1 {
        masks.push(vec![
            Mask::new(1, vec![one, zero]).expect("two values"),
            Mask::new(1, vec![zero, one]).expect("two values"),
        ]);
    }
    for level in 2..=depth {
        masks.push(vec![wavelet_mask(level)]);
    }
    WaveletSystem::new(masks).expect("Haar masks have consistent levels")
}

/// Haar chain up to level `J` on `|n| <= bound`, wavelets at levels `0..J`.
pub fn system<T: Real>(top_level: u32, bound: i64) -> FrameSystem<T> {
    FrameSystem::assemble(chain(top_level, bound), wavelets(top_level))
        .expect("Haar system is consistent")
}

/// `|a_j(n)|^2 = cos^2(pi n / 2^j)`, the Haar product factor.
pub fn scaling_energy<T: Real>(j: u32, n: i64) -> T {
    let x = T::PI() * T::lit(n as f64) / pow2::<T>(j);
    x.cos().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_are_complementary() {
        for j in 1..8 {
            let a = scaling_mask::<f64>(j);
            let b = wavelet_mask::<f64>(j);
            for n in 0..(1i64 << j) {
                let s = a.get(n).norm_sqr() + b.get(n).norm_sqr();
                assert!((s - 1.0).abs() < 1e-15);
                assert!((a.get(n).norm_sqr() - scaling_energy::<f64>(j, n)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn half_period_zeros_are_exact() {
        let a = scaling_mask::<f64>(4);
        assert_eq!(a.get(8).norm(), 0.0);
        let b = wavelet_mask::<f64>(4);
        assert_eq!(b.get(0).norm(), 0.0);
    }

    #[test]
    fn seeds_match_level_one_haar_masks() {
        let w = wavelets::<f64>(1);
        let a1 = scaling_mask::<f64>(1);
        let b1 = wavelet_mask::<f64>(1);
        assert_eq!(w.masks_at(1)[0], a1);
        assert_eq!(w.masks_at(1)[1], b1);
    }

    #[test]
    fn single_precision_chain_builds() {
        let s = system::<f32>(6, 16);
        assert!((s.theta.get(6, 3) - 1.0).abs() < 1e-6);
    }
}

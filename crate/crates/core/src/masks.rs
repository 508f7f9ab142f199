//! Refinement chains, wavelet masks and spectra, and the fundamental
//! coefficients `theta_j`.
//!
//! Chains are stored top-down: the spectrum at the top level `J` is given and
//! every lower level follows from `phi_j = sqrt2 * a_{j+1} * phi_{j+1}`, so a
//! vanishing mask propagates zeros downward without any division.

use num_complex::Complex;

use crate::error::{FrameError, Result};
use crate::scalar::{pow2, Real};
use crate::spectra::{DyadicSequence, Mask, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementChain<T> {
    top_level: u32,
    /// `a_j` for `j = 2..=top_level`, at index `j - 2`.
    scaling_masks: Vec<Mask<T>>,
    /// `phi_j` for `j = 1..=top_level`, at index `j - 1`.
    spectra: Vec<Spectrum<T>>,
}

impl<T: Real> RefinementChain<T> {
    /// Derives `phi_1..phi_J` from `phi_J` and the masks `a_2..a_J` (in that
    /// order). The level-1 mask never enters and is not accepted.
    pub fn derive(top_spectrum: Spectrum<T>, top_level: u32, scaling_masks: Vec<Mask<T>>) -> Result<Self> {
        if top_level == 0 {
            return Err(FrameError::InvalidArgument(
                "a refinement chain needs top level >= 1".into(),
            ));
        }
        if scaling_masks.len() != (top_level - 1) as usize {
            return Err(FrameError::InvalidArgument(format!(
                "top level {top_level} needs {} scaling masks (levels 2..={top_level}), got {}",
                top_level - 1,
                scaling_masks.len()
            )));
        }
        for (i, mask) in scaling_masks.iter().enumerate() {
            if mask.level() != i as u32 + 2 {
                return Err(FrameError::InvalidArgument(format!(
                    "scaling mask #{i} should have level {}, got {}",
                    i + 2,
                    mask.level()
                )));
            }
        }
        let sqrt2 = T::SQRT_2();
        let mut spectra = vec![top_spectrum];
        for j in (1..top_level).rev() {
            let upper = spectra.last().expect("nonempty");
            let a = &scaling_masks[(j - 1) as usize];
            let lower = upper.map_indexed(|n, phi| a.get(n) * phi * sqrt2);
            spectra.push(lower);
        }
        spectra.reverse();
        Ok(Self {
            top_level,
            scaling_masks,
            spectra,
        })
    }

    /// Builds the masks from `mask(j)` for `j = 2..=top_level` and derives.
    pub fn from_fn(top_spectrum: Spectrum<T>, top_level: u32, mut mask: impl FnMut(u32) -> Mask<T>) -> Result<Self> {
        let masks = (2..=top_level).map(&mut mask).collect();
        Self::derive(top_spectrum, top_level, masks)
    }

    pub fn top_level(&self) -> u32 {
        self.top_level
    }

    pub fn top_spectrum(&self) -> &Spectrum<T> {
        self.spectra.last().expect("chain has at least one level")
    }

    /// `a_j` for `2 <= j <= J`.
    pub fn scaling_mask(&self, j: u32) -> Option<&Mask<T>> {
        if j < 2 {
            return None;
        }
        self.scaling_masks.get((j - 2) as usize)
    }

    pub fn scaling_masks(&self) -> &[Mask<T>] {
        &self.scaling_masks
    }

    /// `phi_j` for `1 <= j <= J`.
    pub fn spectrum(&self, j: u32) -> Option<&Spectrum<T>> {
        if j == 0 {
            return None;
        }
        self.spectra.get((j - 1) as usize)
    }

    /// `a_j(n)`; panics outside `2..=J`.
    pub fn a(&self, j: u32, n: i64) -> Complex<T> {
        self.scaling_mask(j)
            .unwrap_or_else(|| panic!("no scaling mask at level {j}"))
            .get(n)
    }

    /// `phi_j(n)`; panics outside `1..=J`.
    pub fn phi(&self, j: u32, n: i64) -> Complex<T> {
        self.spectrum(j)
            .unwrap_or_else(|| panic!("no refinable spectrum at level {j}"))
            .get(n)
    }

    /// Common support of all derived spectra.
    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        self.top_spectrum().support()
    }
}

/// Convenience wrapper around [`RefinementChain::derive`].
pub fn derive_chain<T: Real>(top_spectrum: Spectrum<T>, top_level: u32, scaling_masks: Vec<Mask<T>>) -> Result<RefinementChain<T>> {
    RefinementChain::derive(top_spectrum, top_level, scaling_masks)
}

/// Wavelet masks `b^m_{j+1}` for `j = 0..depth` and, once filled, the wavelet
/// spectra `psi^m_j`. Generator index `m` is 0-based here.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSystem<T> {
    masks: Vec<Vec<Mask<T>>>,
    spectra: Vec<Vec<Spectrum<T>>>,
}

impl<T: Real> WaveletSystem<T> {
    /// `masks[j]` holds the `rho_j` masks of level `j + 1`.
    pub fn new(masks: Vec<Vec<Mask<T>>>) -> Result<Self> {
        for (j, level) in masks.iter().enumerate() {
            if level.is_empty() {
                return Err(FrameError::InvalidArgument(format!(
                    "level {j} has no wavelet generators"
                )));
            }
            for (m, mask) in level.iter().enumerate() {
                if mask.level() != j as u32 + 1 {
                    return Err(FrameError::InvalidArgument(format!(
                        "wavelet mask (j={j}, m={m}) should have level {}, got {}",
                        j + 1,
                        mask.level()
                    )));
                }
            }
        }
        Ok(Self {
            masks,
            spectra: Vec::new(),
        })
    }

    /// Number of wavelet levels `j = 0..depth`.
    pub fn depth(&self) -> u32 {
        self.masks.len() as u32
    }

    pub fn rho(&self, j: u32) -> usize {
        self.masks[j as usize].len()
    }

    pub fn rhos(&self) -> Vec<usize> {
        self.masks.iter().map(Vec::len).collect()
    }

    /// The masks `b^m_level`, `level >= 1`.
    pub fn masks_at(&self, level: u32) -> &[Mask<T>] {
        &self.masks[(level - 1) as usize]
    }

    pub fn all_masks(&self) -> &[Vec<Mask<T>>] {
        &self.masks
    }

    /// `sum_m |b^m_level(n)|^2`.
    pub fn mask_energy(&self, level: u32, n: i64) -> T {
        self.masks_at(level)
            .iter()
            .fold(T::zero(), |acc, b| acc + b.get(n).norm_sqr())
    }

    pub fn has_spectra(&self) -> bool {
        self.spectra.len() == self.masks.len()
    }

    /// `psi^m_j`; panics if spectra were not filled.
    pub fn psi(&self, j: u32, m: usize) -> &Spectrum<T> {
        &self.spectra[j as usize][m]
    }

    pub fn spectra_at(&self, j: u32) -> &[Spectrum<T>] {
        &self.spectra[j as usize]
    }

    /// Returns a copy with mask `(j, m)` replaced; spectra are dropped.
    pub fn with_mask(&self, j: u32, m: usize, mask: Mask<T>) -> Result<Self> {
        let mut masks = self.masks.clone();
        let slot = masks
            .get_mut(j as usize)
            .and_then(|l| l.get_mut(m))
            .ok_or_else(|| FrameError::InvalidArgument(format!("no wavelet mask at (j={j}, m={m})")))?;
        *slot = mask;
        Self::new(masks)
    }
}

/// Fills `psi^m_j = sqrt2 * b^m_{j+1} * phi_{j+1}` for every stored mask.
pub fn wavelet_spectra<T: Real>(chain: &RefinementChain<T>, system: &WaveletSystem<T>) -> Result<WaveletSystem<T>> {
    if system.depth() > chain.top_level() {
        return Err(FrameError::InvalidArgument(format!(
            "wavelet masks reach level {} but the chain stops at {}",
            system.depth(),
            chain.top_level()
        )));
    }
    let sqrt2 = T::SQRT_2();
    let spectra = system
        .masks
        .iter()
        .enumerate()
        .map(|(j, level)| {
            let phi = chain.spectrum(j as u32 + 1).expect("checked depth");
            level
                .iter()
                .map(|b| phi.map_indexed(|n, p| b.get(n) * p * sqrt2))
                .collect()
        })
        .collect();
    Ok(WaveletSystem {
        masks: system.masks.clone(),
        spectra,
    })
}

/// `theta_j` for `j = 0..=depth`, each of level `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalCoefficients<T> {
    theta: Vec<DyadicSequence<T>>,
}

impl<T: Real> FundamentalCoefficients<T> {
    pub fn level(&self, j: u32) -> &DyadicSequence<T> {
        &self.theta[j as usize]
    }

    pub fn get(&self, j: u32, n: i64) -> T {
        self.theta[j as usize].get(n)
    }

    /// Highest stored level.
    pub fn depth(&self) -> u32 {
        self.theta.len() as u32 - 1
    }
}

/// `theta_{j+1} = sum_m |b^m_{j+1}|^2 + theta_j |a_{j+1}|^2`, `theta_0 = 0`.
pub fn theta_recursion<T: Real>(chain: &RefinementChain<T>, system: &WaveletSystem<T>) -> Result<FundamentalCoefficients<T>> {
    let depth = system.depth();
    if depth > chain.top_level() {
        return Err(FrameError::InvalidArgument(format!(
            "theta up to level {depth} needs scaling masks up to level {depth}, chain stops at {}",
            chain.top_level()
        )));
    }
    let mut theta = vec![DyadicSequence::from_fn(0, |_| T::zero())];
    for level in 1..=depth {
        let prev = &theta[(level - 1) as usize];
        let next = DyadicSequence::from_fn(level, |n| {
            let carried = if level == 1 {
                T::zero()
            } else {
                prev.get(n) * chain.a(level, n).norm_sqr()
            };
            system.mask_energy(level, n) + carried
        });
        theta.push(next);
    }
    Ok(FundamentalCoefficients { theta })
}

/// Unrolled `theta_q(n) = sum_{p=1}^{q} sum_m |b^m_p(n)|^2 prod_{r=p+1}^{q} |a_r(n)|^2`.
pub fn theta_closed_form<T: Real>(chain: &RefinementChain<T>, system: &WaveletSystem<T>, q: u32, n: i64) -> T {
    assert!(q >= 1 && q <= system.depth(), "level {q} outside 1..={}", system.depth());
    let mut total = T::zero();
    let mut carry = T::one();
    for p in (1..=q).rev() {
        total = total + system.mask_energy(p, n) * carry;
        if p >= 2 {
            carry = carry * chain.a(p, n).norm_sqr();
        }
    }
    total
}

/// Both sides of `sum_{j<q} sum_m 2^j |psi^m_j(n)|^2 = theta_q(n) 2^q |phi_q(n)|^2`.
/// `system` must carry spectra.
pub fn telescoping_energy<T: Real>(chain: &RefinementChain<T>, system: &WaveletSystem<T>, q: u32, n: i64) -> (T, T) {
    assert!(system.has_spectra(), "wavelet spectra not filled");
    let lhs = (0..q).fold(T::zero(), |acc, j| {
        let level = system
            .spectra_at(j)
            .iter()
            .fold(T::zero(), |s, psi| s + psi.get(n).norm_sqr());
        acc + pow2::<T>(j) * level
    });
    let theta = if q == 0 {
        T::zero()
    } else {
        theta_closed_form(chain, system, q, n)
    };
    let rhs = if q == 0 {
        T::zero()
    } else {
        theta * pow2::<T>(q) * chain.phi(q, n).norm_sqr()
    };
    (lhs, rhs)
}

/// A chain with wavelet masks, wavelet spectra and `theta`, ready for
/// certification. Wavelet levels run over `j = 0..depth` with `depth <= J`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSystem<T> {
    pub chain: RefinementChain<T>,
    pub wavelets: WaveletSystem<T>,
    pub theta: FundamentalCoefficients<T>,
}

impl<T: Real> FrameSystem<T> {
    pub fn assemble(chain: RefinementChain<T>, wavelets: WaveletSystem<T>) -> Result<Self> {
        let wavelets = wavelet_spectra(&chain, &wavelets)?;
        let theta = theta_recursion(&chain, &wavelets)?;
        Ok(Self { chain, wavelets, theta })
    }

    pub fn depth(&self) -> u32 {
        self.wavelets.depth()
    }

    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        self.chain.support()
    }

    /// `sum_{j<q} sum_m 2^j |psi^m_j(n)|^2`, the single-frequency frame energy.
    pub fn partial_energy(&self, q: u32, n: i64) -> T {
        (0..q).fold(T::zero(), |acc, j| {
            let level = self
                .wavelets
                .spectra_at(j)
                .iter()
                .fold(T::zero(), |s, psi| s + psi.get(n).norm_sqr());
            acc + pow2::<T>(j) * level
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn haar_phi_closed(j: u32, n: i64) -> C {
        let s = (2f64).powf(j as f64 / 2.0);
        if n == 0 {
            return C::new(1.0 / s, 0.0);
        }
        let w = C::from_polar(1.0, -std::f64::consts::TAU * n as f64 / (1u64 << j) as f64);
        (C::new(1.0, 0.0) - w) * s / C::new(0.0, std::f64::consts::TAU * n as f64)
    }

    fn random_mask(rng: &mut ChaCha8Rng, level: u32) -> Mask<f64> {
        Mask::from_fn(level, |_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_system(rng: &mut ChaCha8Rng, top: u32, bound: i64) -> (RefinementChain<f64>, WaveletSystem<f64>) {
        let top_spectrum = Spectrum::from_fn(-bound..=bound, |_| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let masks: Vec<_> = (2..=top).map(|j| random_mask(rng, j)).collect();
        let chain = RefinementChain::derive(top_spectrum, top, masks).unwrap();
        let wavelets = (0..top)
            .map(|j| {
                let rho = rng.random_range(1..=3);
                (0..rho).map(|_| random_mask(rng, j + 1)).collect()
            })
            .collect();
        (chain, WaveletSystem::new(wavelets).unwrap())
    }

    #[test]
    fn haar_chain_matches_closed_form_at_every_level() {
        let chain = haar::chain::<f64>(12, 300);
        for j in 1..=12 {
            for n in -300..=300 {
                let err = (chain.phi(j, n) - haar_phi_closed(j, n)).norm();
                assert!(err < 1e-12, "j={j} n={n} err={err}");
            }
        }
    }

    #[test]
    fn constant_chain_keeps_dc_value() {
        let c = C::new(0.3, -0.2);
        let a = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let chain = RefinementChain::from_fn(Spectrum::delta(0, c), 6, |j| Mask::constant(j, a)).unwrap();
        for j in 1..=6 {
            assert!((chain.phi(j, 0) - c).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_mask_propagates_downward() {
        let top = Spectrum::from_fn(-8..=8, |_| C::new(1.0, 0.0));
        let chain = RefinementChain::from_fn(top, 5, |j| {
            let mut m = Mask::constant(j, C::new(0.7, 0.0));
            if j == 4 {
                m.set(3, C::new(0.0, 0.0));
            }
            m
        })
        .unwrap();
        for j in 1..=3 {
            assert_eq!(chain.phi(j, 3), C::new(0.0, 0.0));
            assert_eq!(chain.phi(j, 3 + 16), C::new(0.0, 0.0));
        }
        assert_ne!(chain.phi(4, 3), C::new(0.0, 0.0));
    }

    #[test]
    fn mismatched_mask_levels_are_rejected() {
        let top = Spectrum::delta(0, C::new(1.0, 0.0));
        let bad = vec![Mask::zeros(2), Mask::zeros(2)];
        assert!(matches!(RefinementChain::derive(top.clone(), 3, bad), Err(FrameError::InvalidArgument(_))));
        assert!(RefinementChain::derive(top, 3, vec![Mask::zeros(2)]).is_err());
        assert!(WaveletSystem::<f64>::new(vec![vec![Mask::zeros(2)]]).is_err());
    }

    #[test]
    fn wavelet_spectra_need_chain_levels() {
        let chain = haar::chain::<f64>(3, 8);
        let deep = haar::wavelets::<f64>(5);
        assert!(wavelet_spectra(&chain, &deep).is_err());
    }

    #[test]
    fn zero_masks_give_zero_spectra_and_theta() {
        let chain = haar::chain::<f64>(6, 16);
        let zero = WaveletSystem::new((0..6).map(|j| vec![Mask::zeros(j + 1)]).collect()).unwrap();
        let system = FrameSystem::assemble(chain, zero).unwrap();
        for j in 0..6 {
            assert!(system.wavelets.psi(j, 0).coeffs().iter().all(|c| c.norm() == 0.0));
            assert!(system.theta.level(j).values().iter().all(|&t| t == 0.0));
        }
        let (lhs, rhs) = telescoping_energy(&system.chain, &system.wavelets, 6, 3);
        assert_eq!((lhs, rhs), (0.0, 0.0));
    }

    #[test]
    fn mask_reuse_reproduces_refinable_spectrum() {
        let chain = haar::chain::<f64>(5, 20);
        // Slot j holds level-(j+1) masks; a_1 is never stored, so slot 0 is a placeholder.
        let masks = (0..5)
            .map(|j| vec![if j == 0 { Mask::zeros(1) } else { chain.scaling_mask(j + 1).unwrap().clone() }])
            .collect();
        let w = wavelet_spectra(&chain, &WaveletSystem::new(masks).unwrap()).unwrap();
        for j in 1..5 {
            for n in -20..=20 {
                assert!((w.psi(j, 0).get(n) - chain.phi(j, n)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn haar_wavelets_have_unit_norm() {
        // psi_j(n) = 2^{j/2} (1 - w)^2 / (2 pi i n) with w = e^{-2 pi i n / 2^{j+1}};
        // the coefficient tail beyond |n| = B is bounded by sum 2^j 4 / (pi^2 n^2).
        let bound = 1i64 << 15;
        let chain = haar::chain::<f64>(6, bound);
        let w = wavelet_spectra(&chain, &haar::wavelets(6)).unwrap();
        for j in 1..6u32 {
            let direct: f64 = (-bound..=bound)
                .map(|n| {
                    if n == 0 {
                        return 0.0;
                    }
                    let x = std::f64::consts::PI * n as f64 / (1u64 << (j + 1)) as f64;
                    (1u64 << j) as f64 * 16.0 * x.sin().powi(4)
                        / (std::f64::consts::TAU * n as f64).powi(2)
                })
                .sum();
            let tail = 2.0 * (1u64 << j) as f64 * 4.0 / (std::f64::consts::PI.powi(2) * bound as f64);
            let stored = w.psi(j, 0).norm_sqr();
            assert!((stored - direct).abs() < 1e-12, "j={j}");
            assert!((stored - 1.0).abs() < tail, "j={j} norm {stored}");
        }
    }

    #[test]
    fn haar_theta_is_identically_one() {
        let system = haar::system::<f64>(10, 64);
        for j in 1..=10 {
            assert!(system.theta.level(j).values().iter().all(|&t| (t - 1.0).abs() < 1e-15));
        }
        assert!(system.theta.level(0).values().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn haar_telescoping_at_dc_is_one() {
        let system = haar::system::<f64>(12, 128);
        let (lhs, rhs) = telescoping_energy(&system.chain, &system.wavelets, 12, 0);
        assert!((lhs - 1.0).abs() < 1e-14 && (rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_two_level_single_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (chain, _) = random_system(&mut rng, 2, 4);
        let b1 = random_mask(&mut rng, 1);
        let b2 = random_mask(&mut rng, 2);
        let w = WaveletSystem::new(vec![vec![b1.clone()], vec![b2.clone()]]).unwrap();
        for n in 0..4 {
            let expected = b2.get(n).norm_sqr() + b1.get(n).norm_sqr() * chain.a(2, n).norm_sqr();
            assert!((theta_closed_form(&chain, &w, 2, n) - expected).abs() < 1e-15);
            assert_eq!(theta_closed_form(&chain, &w, 1, n), b1.get(n).norm_sqr());
        }
    }

    #[test]
    fn haar_theta_is_positive() {
        let system = haar::system::<f64>(8, 32);
        for j in 1..=8 {
            assert!(system.theta.level(j).values().iter().all(|&t| t > 0.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recursion_equals_closed_form(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (chain, w) = random_system(&mut rng, 6, 8);
            let theta = theta_recursion(&chain, &w).unwrap();
            for q in 1..=6u32 {
                for n in 0..(1i64 << q) {
                    let a = theta.get(q, n);
                    let b = theta_closed_form(&chain, &w, q, n);
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }
        }

        #[test]
        fn telescoping_holds_for_random_systems(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (chain, w) = random_system(&mut rng, 5, 32);
            let w = wavelet_spectra(&chain, &w).unwrap();
            for n in -32..32 {
                for q in 1..=5 {
                    let (lhs, rhs) = telescoping_energy(&chain, &w, q, n);
                    prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
                }
            }
        }

        #[test]
        fn theta_is_phase_invariant(seed in any::<u64>(), phase in -3.2f64..3.2, j in 0u32..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (chain, w) = random_system(&mut rng, 5, 4);
            let rotated = w.masks_at(j + 1)[0].map(|c| c * C::from_polar(1.0, phase));
            let w2 = w.with_mask(j, 0, rotated).unwrap();
            let t1 = theta_recursion(&chain, &w).unwrap();
            let t2 = theta_recursion(&chain, &w2).unwrap();
            for q in 0..=5 {
                for (x, y) in t1.level(q).values().iter().zip(t2.level(q).values()) {
                    prop_assert!((x - y).abs() <= 1e-13 * x.max(1.0));
                }
            }
        }

        #[test]
        fn theta_positive_for_nonvanishing_masks(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (chain, w) = random_system(&mut rng, 6, 4);
            let theta = theta_recursion(&chain, &w).unwrap();
            for n in 0..64i64 {
                let nonvanishing = (2..=6).all(|j| chain.a(j, n).norm() > 0.0) && w.mask_energy(1, n) > 0.0;
                if nonvanishing {
                    for q in 1..=6 {
                        prop_assert!(theta.get(q, n) > 0.0);
                    }
                }
            }
        }
    }
}

//! Coefficient-space substrate: dyadic-periodic sequences, truncated Fourier
//! spectra of 1-periodic functions, the DFT, and frame coefficients
//! `<f, S^k_j psi>` computed by folding followed by an FFT.

use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{FrameError, Result};
use crate::scalar::{czero, Real};

/// A `2^level`-periodic sequence. Evaluation at any integer reduces it
/// modulo the period.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSequence<V> {
    level: u32,
    values: Vec<V>,
}

/// Complex-valued dyadic sequence: scaling masks, wavelet masks, folds.
pub type Mask<T> = DyadicSequence<Complex<T>>;

impl<V: Copy> DyadicSequence<V> {
    pub fn new(level: u32, values: Vec<V>) -> Result<Self> {
        let period = period_of(level)?;
        if values.len() != period {
            return Err(FrameError::InvalidArgument(format!(
                "a level-{level} sequence needs {period} values, got {}",
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    /// Builds the sequence from its values on `0..2^level`.
    pub fn from_fn(level: u32, mut f: impl FnMut(i64) -> V) -> Self {
        let period = 1usize << level;
        Self {
            level,
            values: (0..period as i64).map(&mut f).collect(),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, n: i64) -> V {
        self.values[n.rem_euclid(self.values.len() as i64) as usize]
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn set(&mut self, n: i64, value: V) {
        let idx = n.rem_euclid(self.values.len() as i64) as usize;
        self.values[idx] = value;
    }

    pub fn map<W: Copy>(&self, f: impl FnMut(&V) -> W) -> DyadicSequence<W> {
        DyadicSequence {
            level: self.level,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Real> DyadicSequence<Complex<T>> {
    pub fn zeros(level: u32) -> Self {
        Self::from_fn(level, |_| czero())
    }

    pub fn constant(level: u32, value: Complex<T>) -> Self {
        Self::from_fn(level, |_| value)
    }
}

fn period_of(level: u32) -> Result<usize> {
    if level >= usize::BITS - 1 {
        return Err(FrameError::InvalidArgument(format!(
            "level {level} is too large"
        )));
    }
    Ok(1usize << level)
}

/// Fourier coefficients of a trigonometric polynomial, stored on the
/// contiguous support `n_min..=n_max` and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    n_min: i64,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(n_min: i64, coeffs: Vec<Complex<T>>) -> Self {
        Self { n_min, coeffs }
    }

    pub fn zero() -> Self {
        Self {
            n_min: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn delta(n0: i64, value: Complex<T>) -> Self {
        Self {
            n_min: n0,
            coeffs: vec![value],
        }
    }

    pub fn from_fn(support: RangeInclusive<i64>, f: impl FnMut(i64) -> Complex<T>) -> Self {
        let n_min = *support.start();
        Self {
            n_min,
            coeffs: support.map(f).collect(),
        }
    }

    /// Builds a spectrum from sparse `(n, value)` pairs; repeated indices add up.
    pub fn from_pairs(pairs: &[(i64, Complex<T>)]) -> Self {
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::zero();
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let mut coeffs = vec![czero(); (hi - lo + 1) as usize];
        for &(n, v) in pairs {
            coeffs[(n - lo) as usize] = coeffs[(n - lo) as usize] + v;
        }
        Self { n_min: lo, coeffs }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    /// Last stored index; `n_min - 1` for an empty spectrum.
    pub fn n_max(&self) -> i64 {
        self.n_min + self.coeffs.len() as i64 - 1
    }

    pub fn support(&self) -> RangeInclusive<i64> {
        self.n_min..=self.n_max()
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn get(&self, n: i64) -> Complex<T> {
        if self.contains(n) {
            self.coeffs[(n - self.n_min) as usize]
        } else {
            czero()
        }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.n_min + i as i64, c))
    }

    /// Pointwise map over the stored support.
    pub fn map_indexed(&self, mut f: impl FnMut(i64, Complex<T>) -> Complex<T>) -> Self {
        Self {
            n_min: self.n_min,
            coeffs: self.iter().map(|(n, c)| f(n, c)).collect(),
        }
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        self.map_indexed(|_, c| c * factor)
    }

    /// `||f||_2^2 = sum |f^(n)|^2`.
    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// Frame index `(j, m, k)`: level, generator and dyadic shift `k` in `R_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameIndex {
    pub j: u32,
    pub m: usize,
    pub k: i64,
}

/// The shift set `R_j = {-2^{j-1}+1, ..., 2^{j-1}}`, and `{0}` at level 0.
pub fn shifts(j: u32) -> RangeInclusive<i64> {
    if j == 0 {
        0..=0
    } else {
        let half = 1i64 << (j - 1);
        (-half + 1)..=half
    }
}

/// Reusable forward DFT with cached FFT plans.
pub struct Dft<T: Real> {
    planner: FftPlanner<T>,
    plans: Vec<Option<Arc<dyn Fft<T>>>>,
}

impl<T: Real> Default for Dft<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Dft<T> {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            plans: Vec::new(),
        }
    }

    /// `X(k) = sum_n x(n) e^{-2 pi i k n / N}` in place; `N` must be a power of two.
    pub fn forward_in_place(&mut self, buf: &mut [Complex<T>]) -> Result<()> {
        let len = buf.len();
        if !len.is_power_of_two() {
            return Err(FrameError::InvalidArgument(format!(
                "DFT length must be a power of two, got {len}"
            )));
        }
        let level = len.trailing_zeros() as usize;
        if self.plans.len() <= level {
            self.plans.resize(level + 1, None);
        }
        let plan = self.plans[level]
            .get_or_insert_with(|| self.planner.plan_fft_forward(len))
            .clone();
        plan.process(buf);
        Ok(())
    }

    pub fn forward(&mut self, values: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Frame coefficients `<f, S^k_j psi>` for `k` in `R_j`, in the order of
    /// [`shifts`].
    pub fn frame_coefficients(
        &mut self,
        f: &Spectrum<T>,
        psi: &Spectrum<T>,
        j: u32,
    ) -> Vec<Complex<T>> {
        let mut h = fold_pair(f, psi, j).values;
        self.forward_in_place(&mut h)
            .expect("fold length is a power of two");
        let period = h.len() as i64;
        shifts(j)
            .map(|k| h[k.rem_euclid(period) as usize])
            .collect()
    }

    /// `sum_{k in R_j} |<f, S^k_j psi>|^2`.
    pub fn frame_energy(&mut self, f: &Spectrum<T>, psi: &Spectrum<T>, j: u32) -> T {
        self.frame_coefficients(f, psi, j)
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// One-shot forward DFT of a power-of-two length array.
pub fn dft<T: Real>(values: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    Dft::new().forward(values)
}

/// `h(n) = sum_q f^(2^j q + n) conj(g^(2^j q + n))`, a `2^j`-periodic sequence.
pub fn fold_pair<T: Real>(f: &Spectrum<T>, g: &Spectrum<T>, j: u32) -> Mask<T> {
    let mut out = Mask::zeros(j);
    let lo = f.n_min().max(g.n_min());
    let hi = f.n_max().min(g.n_max());
    let period = out.period() as i64;
    for n in lo..=hi {
        let idx = n.rem_euclid(period) as usize;
        out.values[idx] = out.values[idx] + f.get(n) * g.get(n).conj();
    }
    out
}

/// Frame coefficients `<f, S^k_j psi>`, `k` in `R_j`.
pub fn frame_coefficients<T: Real>(f: &Spectrum<T>, psi: &Spectrum<T>, j: u32) -> Vec<Complex<T>> {
    Dft::new().frame_coefficients(f, psi, j)
}

/// `<f, g> = sum_n f^(n) conj(g^(n))`.
pub fn inner_product<T: Real>(f: &Spectrum<T>, g: &Spectrum<T>) -> Complex<T> {
    let lo = f.n_min().max(g.n_min());
    let hi = f.n_max().min(g.n_max());
    (lo..=hi).fold(czero(), |acc, n| acc + f.get(n) * g.get(n).conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn naive_dft(x: &[C]) -> Vec<C> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(C::new(0.0, 0.0), |acc, (i, &v)| {
                    let ang = -std::f64::consts::TAU * (k * i % n) as f64 / n as f64;
                    acc + v * C::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    fn naive_frame_coefficients(f: &Spectrum<f64>, psi: &Spectrum<f64>, j: u32) -> Vec<C> {
        let p = (1i64 << j) as f64;
        shifts(j)
            .map(|k| {
                f.iter().fold(C::new(0.0, 0.0), |acc, (n, c)| {
                    let ang = -std::f64::consts::TAU * (k * n) as f64 / p;
                    acc + c * psi.get(n).conj() * C::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<C> {
        (0..len)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn random_spectrum(rng: &mut ChaCha8Rng, n_min: i64, len: usize) -> Spectrum<f64> {
        Spectrum::new(n_min, random_vec(rng, len))
    }

    fn max_rel(a: &[C], b: &[C]) -> f64 {
        let scale = b.iter().map(|c| c.norm()).fold(1.0, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn dft_of_delta_and_constant() {
        let out = dft(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert_eq!(out, vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]);
        let out = dft(&[C::new(1.0, 0.0); 4]).unwrap();
        assert!(max_rel(&out, &[C::new(4.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]) < 1e-15);
    }

    #[test]
    fn dft_rejects_non_power_of_two() {
        assert!(matches!(dft::<f64>(&[C::new(1.0, 0.0); 3]), Err(FrameError::InvalidArgument(_))));
        assert!(dft::<f64>(&[]).is_err());
    }

    #[test]
    fn dft_matches_naive_up_to_4096() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut engine = Dft::new();
        for level in 0..=12u32 {
            let x = random_vec(&mut rng, 1 << level);
            let fast = engine.forward(&x).unwrap();
            if level <= 10 {
                assert!(max_rel(&fast, &naive_dft(&x)) < 1e-12, "level {level}");
            }
            let e_in: f64 = x.iter().map(|c| c.norm_sqr()).sum();
            let e_out: f64 = fast.iter().map(|c| c.norm_sqr()).sum();
            assert!((e_out - (1u64 << level) as f64 * e_in).abs() <= 1e-12 * e_out);
        }
    }

    #[test]
    fn fold_single_term_and_aliasing() {
        let one = C::new(1.0, 0.0);
        let f = Spectrum::delta(3, one);
        let h = fold_pair(&f, &f, 2);
        assert_eq!(h.values(), &[C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), one]);

        let f = Spectrum::from_pairs(&[(1, one), (5, one)]);
        let h = fold_pair(&f, &f, 2);
        assert_eq!(h.get(1), C::new(2.0, 0.0));
        assert_eq!(h.get(0) + h.get(2) + h.get(3), C::new(0.0, 0.0));
    }

    #[test]
    fn fold_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_spectrum(&mut rng, -16, 33);
        let g = random_spectrum(&mut rng, -10, 27);
        let h = fold_pair(&f, &g, 3);
        for r in 0..8i64 {
            let mut direct = C::new(0.0, 0.0);
            for q in -10..=10i64 {
                let n = 8 * q + r;
                direct += f.get(n) * g.get(n).conj();
            }
            assert!((h.get(r) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_psi_gives_zero_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_spectrum(&mut rng, -8, 17);
        let coeffs = frame_coefficients(&f, &Spectrum::zero(), 4);
        assert_eq!(coeffs.len(), 16);
        assert!(coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn delta_probe_energy_is_scaled_spectrum_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_spectrum(&mut rng, -20, 41);
        for (j, n0) in [(0u32, 3i64), (3, -7), (5, 12)] {
            let f = Spectrum::delta(n0, C::new(1.0, 0.0));
            let energy = Dft::new().frame_energy(&f, &psi, j);
            let expected = (1u64 << j) as f64 * psi.get(n0).norm_sqr();
            assert!((energy - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn inner_product_characters() {
        let e1 = Spectrum::delta(1, C::new(1.0, 0.0));
        let e2 = Spectrum::delta(2, C::new(1.0, 0.0));
        assert_eq!(inner_product(&e1, &e1), C::new(1.0, 0.0));
        assert_eq!(inner_product(&e1, &e2), C::new(0.0, 0.0));
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_spectrum(&mut rng, -12, 25);
        let g = random_spectrum(&mut rng, -9, 30);
        let nodes = 1usize << 12;
        let eval = |s: &Spectrum<f64>, x: f64| {
            s.iter().fold(C::new(0.0, 0.0), |acc, (n, c)| {
                acc + c * C::from_polar(1.0, std::f64::consts::TAU * n as f64 * x)
            })
        };
        let quad = (0..nodes).fold(C::new(0.0, 0.0), |acc, i| {
            let x = i as f64 / nodes as f64;
            acc + eval(&f, x) * eval(&g, x).conj()
        }) / nodes as f64;
        assert!((quad - inner_product(&f, &g)).norm() < 1e-8);
    }

    #[test]
    fn shift_sets_have_dyadic_cardinality() {
        assert_eq!(shifts(0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(shifts(1).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(shifts(3).collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        for j in 0..10 {
            assert_eq!(shifts(j).count(), 1 << j);
        }
    }

    #[test]
    fn dyadic_sequence_rejects_wrong_length() {
        assert!(DyadicSequence::new(2, vec![C::new(0.0, 0.0); 3]).is_err());
        let s = DyadicSequence::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.get(-1), 4.0);
        assert_eq!(s.get(9), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn fft_path_equals_naive_path(seed in any::<u64>(), j in 0u32..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_spectrum(&mut rng, -32, 65);
            let psi = random_spectrum(&mut rng, -32, 65);
            let fast = frame_coefficients(&f, &psi, j);
            let slow = naive_frame_coefficients(&f, &psi, j);
            prop_assert!(max_rel(&fast, &slow) < 1e-10);
        }

        #[test]
        fn self_fold_is_real_nonnegative(seed in any::<u64>(), j in 0u32..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_spectrum(&mut rng, -20, 41);
            for v in fold_pair(&f, &f, j).values() {
                prop_assert!(v.im.abs() < 1e-12 && v.re >= 0.0);
            }
        }

        #[test]
        fn plancherel_for_frame_coefficients(seed in any::<u64>(), j in 0u32..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_spectrum(&mut rng, -20, 41);
            let psi = random_spectrum(&mut rng, -25, 50);
            let lhs: f64 = frame_coefficients(&f, &psi, j).iter().map(|c| c.norm_sqr()).sum();
            let rhs = (1u64 << j) as f64
                * fold_pair(&f, &psi, j).values().iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn dyadic_evaluation_is_periodic(level in 0u32..8, n in -1000i64..1000, p in -5i64..5) {
            let s = DyadicSequence::from_fn(level, |i| i as f64);
            prop_assert_eq!(s.get(n), s.get(n + p * (1i64 << level)));
        }
    }
}

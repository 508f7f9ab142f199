//! Activation levels, the mask builder and the truncated product certificate.

use num_complex::Complex;

use crate::construct::angles::{tiny, TildeCoefficients};
use crate::error::{FrameError, Result};
use crate::masks::{RefinementChain, WaveletSystem};
use crate::scalar::{czero, pow2, Real};
use crate::spectra::Mask;
use crate::verdict::{limit_verdict, Monotone, Verdict};
use crate::Tolerances;

/// How the mask at level `j` is determined for a given frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `j <= j0`: the refinable spectrum vanishes, the mask is free.
    Arbitrary,
    /// `j0 < j < j1`: forced to zero.
    Zero,
    /// `j = j1`: the configured seed.
    Seed,
    /// `j > j1`: product formula from the auxiliary coefficients.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `j0 + 1` is the first level with `phi_j(n) != 0`; `j1` the first such
    /// level that also carries wavelet mass.
    Active { j0: u32, j1: u32 },
    /// No stored level has both a nonzero spectrum and nonzero wavelet mass.
    Violated,
}

impl Activation {
    pub fn regime(&self, j: u32) -> Option<Regime> {
        match *self {
            Activation::Violated => None,
            Activation::Active { j0, j1 } => Some(if j <= j0 {
                Regime::Arbitrary
            } else if j < j1 {
                Regime::Zero
            } else if j == j1 {
                Regime::Seed
            } else {
                Regime::Derived
            }),
        }
    }
}

/// Activation levels for every frequency of the chain's support.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationProfile {
    n_min: i64,
    entries: Vec<Activation>,
}

impl ActivationProfile {
    pub fn get(&self, n: i64) -> Option<Activation> {
        let idx = n - self.n_min;
        if idx < 0 {
            return None;
        }
        self.entries.get(idx as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Activation)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.n_min + i as i64, a))
    }

    pub fn violations(&self) -> Vec<i64> {
        self.iter()
            .filter(|(_, a)| *a == Activation::Violated)
            .map(|(n, _)| n)
            .collect()
    }
}

/// Computes `j0(n)` and `j1(n)` from the chain and the configured masks.
/// Only levels `1..=masks.depth()` are searched.
pub fn activation_profile<T: Real>(chain: &RefinementChain<T>, masks: &WaveletSystem<T>, zero: f64) -> ActivationProfile {
    let zero = T::lit(zero);
    let depth = masks.depth().min(chain.top_level());
    let support = chain.support();
    let entries = support
        .clone()
        .map(|n| {
            let Some(first) = (1..=chain.top_level()).find(|&j| chain.phi(j, n).norm() > zero) else {
                return Activation::Violated;
            };
            match (first..=depth).find(|&j| masks.mask_energy(j, n) > zero) {
                Some(j1) => Activation::Active { j0: first - 1, j1 },
                None => Activation::Violated,
            }
        })
        .collect();
    ActivationProfile {
        n_min: *support.start(),
        entries,
    }
}

/// `active[r]` is true when some `n = r (mod 2^j)` in the support has
/// `phi_j(n) != 0`.
pub(crate) fn active_residues<T: Real>(chain: &RefinementChain<T>, j: u32, zero: T) -> Vec<bool> {
    let period = 1i64 << j;
    let mut active = vec![false; period as usize];
    let phi = chain.spectrum(j).expect("level within chain");
    for (n, v) in phi.iter() {
        if v.norm() > zero {
            active[n.rem_euclid(period) as usize] = true;
        }
    }
    active
}

/// Masks produced by [`build_masks`] together with the `theta` values the
/// construction implies and the per-residue classification.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltMasks<T> {
    pub wavelets: WaveletSystem<T>,
    /// `derived[j-1][r]`: whether residue `r` of level `j` used the product formula.
    pub derived: Vec<Vec<bool>>,
}

/// Builds wavelet masks level by level.
///
/// At level `j` and residue `r` the carried energy `theta_{j-1}(r) |a_j(r)|^2`
/// decides the regime. When it is positive the mask is
/// `b~_j(r) sqrt(theta_j(r))` with `theta_j(r) = carried / |a~_j(r)|^2`,
/// which unrolls to the product formula. Otherwise the configured value from
/// `base` is used: that is the seed at the activation level and the free or
/// zero value below it. `tilde[i]` covers level `i + 2`; the phases of
/// `a~_j` must agree with those of `a_j` wherever `a_j != 0`.
pub fn build_masks<T: Real>(
    chain: &RefinementChain<T>,
    base: &WaveletSystem<T>,
    tilde: &[TildeCoefficients<T>],
    tol: &Tolerances,
) -> Result<BuiltMasks<T>> {
    let depth = base.depth();
    if depth == 0 {
        return Err(FrameError::InvalidArgument("no wavelet levels to build".into()));
    }
    if depth > chain.top_level() {
        return Err(FrameError::InvalidArgument(format!(
            "{depth} wavelet levels need a chain up to level {depth}, got {}",
            chain.top_level()
        )));
    }
    if tilde.len() != (depth - 1) as usize {
        return Err(FrameError::InvalidArgument(format!(
            "{} levels of auxiliary coefficients supplied, {} needed (levels 2..={depth})",
            tilde.len(),
            depth - 1
        )));
    }
    for (i, t) in tilde.iter().enumerate() {
        let j = i as u32 + 2;
        if t.level() != j || t.rho() != base.rho(j - 1) {
            return Err(FrameError::InvalidArgument(format!(
                "auxiliary coefficients for level {j} should have level {j} and {} generators, got level {} and {}",
                base.rho(j - 1),
                t.level(),
                t.rho()
            )));
        }
    }
    let zero = T::lit(tol.zero);
    let eq = T::lit(tol.equality);

    let seeds = base.masks_at(1);
    if seeds.len() == 1 && seeds[0].get(0).norm() > zero && seeds[0].get(1).norm() > zero {
        return Err(FrameError::TooFewLevelZeroGenerators { rho0: 1 });
    }
    let active1 = active_residues(chain, 1, zero);
    let b1 = cross_of(seeds, seeds, 0, 1);
    if active1[0] && active1[1] && b1.norm() > eq {
        return Err(FrameError::Precondition(format!(
            "level-1 seeds are not orthogonal across residues 0 and 1 (|cross| = {:e})",
            b1.norm().as_f64()
        )));
    }

    let mut out: Vec<Vec<Mask<T>>> = vec![seeds.to_vec()];
    let mut derived_flags = vec![vec![false; 2]];
    let mut theta = Mask::<T>::from_fn(1, |n| Complex::new(base.mask_energy(1, n), T::zero()));

    for j in 2..=depth {
        let rho = base.rho(j - 1);
        let t = &tilde[(j - 2) as usize];
        let half = 1i64 << (j - 1);
        let configured = base.masks_at(j);
        let mut masks = vec![Mask::<T>::zeros(j); rho];
        let mut next_theta = Mask::<T>::zeros(j);
        let mut flags = vec![false; 1usize << j];
        let active = active_residues(chain, j, zero);

        for idx in 0..(1i64 << j) {
            let a = chain.a(j, idx);
            let carried = theta.get(idx).re * a.norm_sqr();
            if carried > zero {
                let point = t.at(idx);
                let at = point.a.norm();
                if at <= tiny() {
                    return Err(FrameError::Degenerate(format!(
                        "a~_{j}({idx}) vanishes where the carried energy is positive"
                    )));
                }
                let mismatch = (point.a / at - a / a.norm()).norm();
                if mismatch > T::lit(1e-9) {
                    return Err(FrameError::Precondition(format!(
                        "phase of a~_{j}({idx}) differs from that of a_{j}({idx}) by {:e}",
                        mismatch.as_f64()
                    )));
                }
                let th = carried / (at * at);
                let root = th.sqrt();
                for (m, mask) in masks.iter_mut().enumerate() {
                    mask.set(idx, point.b[m] * root);
                }
                next_theta.set(idx, Complex::new(th, T::zero()));
                flags[idx as usize] = true;
            } else {
                let mut energy = T::zero();
                for (m, mask) in masks.iter_mut().enumerate() {
                    let v = configured[m].get(idx);
                    energy = energy + v.norm_sqr();
                    mask.set(idx, v);
                }
                next_theta.set(idx, Complex::new(energy, T::zero()));
            }
        }

        for r in 0..half {
            let (lo, hi) = (r as usize, (r + half) as usize);
            if flags[lo] && flags[hi] || !(active[lo] && active[hi]) {
                continue;
            }
            let cross = cross_of(&masks, &masks, r, r + half);
            let scale = next_theta.get(r).re.max(next_theta.get(r + half).re).max(T::one());
            if cross.norm() > eq * scale {
                return Err(FrameError::Precondition(format!(
                    "seed at level {j} is not orthogonal to its partner at residues {r} and {} (|cross| = {:e})",
                    r + half,
                    cross.norm().as_f64()
                )));
            }
        }

        out.push(masks);
        derived_flags.push(flags);
        theta = next_theta;
    }

    Ok(BuiltMasks {
        wavelets: WaveletSystem::new(out)?,
        derived: derived_flags,
    })
}

fn cross_of<T: Real>(x: &[Mask<T>], y: &[Mask<T>], n: i64, n2: i64) -> Complex<T> {
    x.iter()
        .zip(y)
        .fold(czero(), |acc, (p, q)| acc + p.get(n).conj() * q.get(n2))
}

/// Truncated infinite-product check at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRecord {
    pub n: i64,
    pub j1: Option<u32>,
    /// `prod_{r=j1+1}^{N} |a~_r(n)|^2`.
    pub product: f64,
    /// `2^{j1} sum_m |b^m_{j1}(n)|^2 |phi_{j1}(n)|^2`.
    pub target: f64,
    pub xi: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Evaluates `xi(n, N) = target / product` for every frequency of the
/// profile. `tilde[i]` covers level `i + 2`, and levels up to `horizon` must
/// be present. `xi` is nondecreasing in `N`, so overshooting 1 is final.
pub fn product_certificate<T: Real>(
    chain: &RefinementChain<T>,
    profile: &ActivationProfile,
    seeds: &WaveletSystem<T>,
    tilde: &[TildeCoefficients<T>],
    horizon: u32,
    tol: &Tolerances,
) -> Result<Vec<ProductRecord>> {
    if horizon < 2 || tilde.len() < (horizon - 1) as usize {
        return Err(FrameError::InvalidArgument(format!(
            "horizon {horizon} needs auxiliary coefficients for levels 2..={horizon}, got {} levels",
            tilde.len()
        )));
    }
    let mut records = Vec::new();
    for (n, activation) in profile.iter() {
        let Activation::Active { j1, .. } = activation else {
            records.push(ProductRecord {
                n,
                j1: None,
                product: f64::NAN,
                target: f64::NAN,
                xi: f64::NAN,
                verdict: Verdict::Fail,
                note: Some("no level carries both spectrum and wavelet mass".into()),
            });
            continue;
        };
        let target = pow2::<T>(j1) * seeds.mask_energy(j1, n) * chain.phi(j1, n).norm_sqr();
        let target = target.as_f64();
        let mut product = 1.0f64;
        let mut xi_seq = vec![target];
        for r in (j1 + 1)..=horizon {
            product *= tilde[(r - 2) as usize].a.get(n).norm_sqr().as_f64();
            xi_seq.push(target / product);
        }
        let xi = *xi_seq.last().expect("nonempty");
        let (verdict, note) = if product == 0.0 || !product.is_finite() {
            (Verdict::Fail, Some("product underflows to zero".to_string()))
        } else {
            (limit_verdict(&xi_seq, 1.0, tol, Monotone::Nondecreasing).verdict, None)
        };
        records.push(ProductRecord {
            n,
            j1: Some(j1),
            product,
            target,
            xi,
            verdict,
            note,
        });
    }
    Ok(records)
}

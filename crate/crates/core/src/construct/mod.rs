//! Construction of wavelet masks from a refinement chain.
//!
//! The free data are angles parameterizing auxiliary coefficients `a~_j`,
//! `b~^m_j` on the unit sphere; [`build_masks`] turns them into wavelet masks
//! whose fundamental coefficients follow the product recursion, and
//! [`product_certificate`] checks the remaining limit condition.

mod angles;
mod build;

pub use angles::{
    check_sys2, identity_tilde, rho1_angles, solve_rho1, solve_sys2_general, sphere_point,
    tilde_from_angles, AngleParameters, AnglePair, Sign, TildeCoefficients, TildePair, TildePoint,
};
pub use build::{
    activation_profile, build_masks, product_certificate, Activation, ActivationProfile, BuiltMasks,
    ProductRecord, Regime,
};
pub(crate) use build::active_residues;

use crate::error::Result;
use crate::masks::RefinementChain;
use crate::scalar::Real;

/// `arg z`, with `arg 0 = 0`.
fn phase<T: Real>(z: num_complex::Complex<T>) -> T {
    if z.norm() == T::zero() {
        T::zero()
    } else {
        z.arg()
    }
}

/// Single-generator pair for residue `r` of level `j` with the scaling-slot
/// phases taken from `a_j`, so that `a~_j` and `a_j` point the same way.
/// Negative amplitudes are absorbed into the phase.
pub fn pinned_rho1_pair<T: Real>(chain: &RefinementChain<T>, j: u32, r: i64, t01: T, t03: T, sign: Sign) -> Result<TildePair<T>> {
    let half = 1i64 << (j - 1);
    let flip = |negative: bool| if negative { T::PI() } else { T::zero() };
    let t02 = phase(chain.a(j, r)) + flip(t01.cos() < T::zero());
    let t12 = phase(chain.a(j, r + half)) + flip(sign.value::<T>() * t01.sin() < T::zero());
    solve_rho1(t01, t02, t03, t12, sign)
}

/// Level-`j` auxiliary coefficients from `params(r) = (t01, t03, sign)` for
/// each residue `r < 2^{j-1}`, phases pinned to the chain.
pub fn pinned_rho1_tilde<T: Real>(
    chain: &RefinementChain<T>,
    j: u32,
    mut params: impl FnMut(i64) -> (T, T, Sign),
) -> Result<TildeCoefficients<T>> {
    let half = 1i64 << (j - 1);
    let pairs = (0..half)
        .map(|r| {
            let (t01, t03, sign) = params(r);
            pinned_rho1_pair(chain, j, r, t01, t03, sign)
        })
        .collect::<Result<Vec<_>>>()?;
    TildeCoefficients::from_pairs(j, &pairs)
}

/// Angles reproducing the Haar wavelet masks on the Haar chain:
/// `t01 = pi r / 2^j`, `t03 = pi/2 - pi r / 2^j`.
pub fn haar_uep_tilde<T: Real>(chain: &RefinementChain<T>, j: u32) -> TildeCoefficients<T> {
    let step = T::PI() / T::lit((1u64 << j) as f64);
    pinned_rho1_tilde(chain, j, |r| {
        let t01 = step * T::lit(r as f64);
        (t01, T::FRAC_PI_2() - t01, Sign::Plus)
    })
    .expect("Haar angles keep cos t01 > 0")
}

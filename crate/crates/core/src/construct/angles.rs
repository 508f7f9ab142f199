//! Spherical-coordinate parameterization of auxiliary coefficients and the
//! solvers for the cross-orthogonality system.
//!
//! An angle vector `t` of length `2 rho + 1` stores `t_r` at `t[r - 1]`.
//! Component 0 is the scaling slot `a~`, components `1..=rho` are `b~^m`:
//!
//! ```text
//! a~   = prod_{r=1}^{rho} cos t_r            * e^{i t_{rho+1}}
//! b~^m = prod_{r=m+1}^{rho} cos t_r * sin t_m * e^{i t_{rho+1+m}}
//! ```

use num_complex::Complex;

use crate::error::{FrameError, Result};
use crate::scalar::{czero, Real};
use crate::spectra::Mask;

/// Threshold under which a trigonometric pivot counts as zero.
pub(crate) fn tiny<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Auxiliary coefficients at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TildePoint<T> {
    pub a: Complex<T>,
    pub b: Vec<Complex<T>>,
}

impl<T: Real> TildePoint<T> {
    pub fn rho(&self) -> usize {
        self.b.len()
    }

    /// `|a~|^2 + sum_m |b~^m|^2`.
    pub fn norm_sqr(&self) -> T {
        self.b.iter().fold(self.a.norm_sqr(), |acc, c| acc + c.norm_sqr())
    }

    /// `conj(a~) a~' + sum_m conj(b~^m) b~'^m`.
    pub fn cross(&self, other: &Self) -> Complex<T> {
        self.b
            .iter()
            .zip(&other.b)
            .fold(self.a.conj() * other.a, |acc, (x, y)| acc + x.conj() * y)
    }
}

/// The two frequencies `n` and `n + 2^{j-1}` of one residue pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TildePair<T> {
    pub low: TildePoint<T>,
    pub high: TildePoint<T>,
}

impl<T: Real> TildePair<T> {
    pub fn cross(&self) -> Complex<T> {
        self.low.cross(&self.high)
    }
}

fn rho_of(len: usize) -> Result<usize> {
    if len < 3 || len.is_multiple_of(2) {
        return Err(FrameError::InvalidArgument(format!(
            "angle vectors have length 2*rho + 1 with rho >= 1, got {len}"
        )));
    }
    Ok((len - 1) / 2)
}

/// Amplitudes `sin t_m prod_{r=m+1}^{upto} cos t_r` for `m = 0..=upto`,
/// with `sin t_0 := 1`.
fn amplitudes<T: Real>(t: &[T], upto: usize) -> Vec<T> {
    let mut out = vec![T::zero(); upto + 1];
    let mut carry = T::one();
    for m in (0..=upto).rev() {
        let s = if m == 0 { T::one() } else { t[m - 1].sin() };
        out[m] = s * carry;
        if m >= 1 {
            carry = carry * t[m - 1].cos();
        }
    }
    out
}

/// Evaluates the parameterization at one frequency.
pub fn sphere_point<T: Real>(t: &[T]) -> Result<TildePoint<T>> {
    let rho = rho_of(t.len())?;
    let amp = amplitudes(t, rho);
    let slot = |m: usize| Complex::from_polar(amp[m], t[rho + m]);
    Ok(TildePoint {
        a: slot(0),
        b: (1..=rho).map(slot).collect(),
    })
}

/// Angle vectors `t^0` (frequency `n`) and `t^1` (frequency `n + 2^{j-1}`).
#[derive(Debug, Clone, PartialEq)]
pub struct AnglePair<T> {
    pub k0: Vec<T>,
    pub k1: Vec<T>,
}

impl<T: Real> AnglePair<T> {
    pub fn new(k0: Vec<T>, k1: Vec<T>) -> Result<Self> {
        let rho = rho_of(k0.len())?;
        if rho_of(k1.len())? != rho {
            return Err(FrameError::InvalidArgument(format!(
                "angle vectors differ in length ({} vs {})",
                k0.len(),
                k1.len()
            )));
        }
        if k0.iter().chain(&k1).any(|t| !t.is_finite()) {
            return Err(FrameError::InvalidArgument("angles must be finite".into()));
        }
        Ok(Self { k0, k1 })
    }

    pub fn rho(&self) -> usize {
        (self.k0.len() - 1) / 2
    }

    pub fn evaluate(&self) -> TildePair<T> {
        TildePair {
            low: sphere_point(&self.k0).expect("validated length"),
            high: sphere_point(&self.k1).expect("validated length"),
        }
    }

    /// Sets the scaling-slot phases `t^0_{rho+1}`, `t^1_{rho+1}`.
    pub fn pin_phases(&mut self, low: T, high: T) {
        let rho = self.rho();
        self.k0[rho] = low;
        self.k1[rho] = high;
    }
}

/// Residuals of the cross system in angle form:
/// `sum_m A^0_m A^1_m cos(d_m)` and `sum_m A^0_m A^1_m sin(d_m)` with
/// `d_m = t^0_{rho+1+m} - t^1_{rho+1+m}`. They equal `Re X` and `-Im X` for
/// the direct cross sum `X`.
pub fn check_sys2<T: Real>(pair: &AnglePair<T>) -> (T, T) {
    let rho = pair.rho();
    let a0 = amplitudes(&pair.k0, rho);
    let a1 = amplitudes(&pair.k1, rho);
    (0..=rho).fold((T::zero(), T::zero()), |(c, s), m| {
        let d = pair.k0[rho + m] - pair.k1[rho + m];
        let w = a0[m] * a1[m];
        (c + w * d.cos(), s + w * d.sin())
    })
}

/// Closed-form single-generator pair. One sign `s` governs both high-frequency
/// amplitudes:
///
/// ```text
/// a~(n)  = cos t01 e^{i t02}     a~(n')  =  s sin t01 e^{i t12}
/// b~(n)  = sin t01 e^{i t03}     b~(n')  = -s cos t01 e^{i (t03 + t12 - t02)}
/// ```
pub fn solve_rho1<T: Real>(t01: T, t02: T, t03: T, t12: T, sign: Sign) -> Result<TildePair<T>> {
    if t01.cos().abs() <= tiny() {
        return Err(FrameError::Degenerate(format!(
            "cos t01 vanishes (t01 = {t01}); the low-frequency scaling coefficient must be nonzero"
        )));
    }
    let s = sign.value::<T>();
    let (sn, cs) = t01.sin_cos();
    Ok(TildePair {
        low: TildePoint {
            a: Complex::from_polar(cs, t02),
            b: vec![Complex::from_polar(sn, t03)],
        },
        high: TildePoint {
            a: Complex::from_polar(s * sn, t12),
            b: vec![Complex::from_polar(-s * cs, t03 + t12 - t02)],
        },
    })
}

/// Angle vectors reproducing [`solve_rho1`] in the general parameterization.
pub fn rho1_angles<T: Real>(t01: T, t02: T, t03: T, t12: T, sign: Sign) -> AnglePair<T> {
    let s = sign.value::<T>();
    let t11 = (-s * t01.cos()).atan2(s * t01.sin());
    AnglePair {
        k0: vec![t01, t02, t03],
        k1: vec![t11, t12, t03 + t12 - t02],
    }
}

/// Completes `pair` by solving the cross system for two entries of `t^0`.
///
/// For `rho >= 2` the pivots are `t^0_{rho-1}` and `t^0_rho`: the first
/// zeroes the determinant of the system seen as linear in
/// `(cos t^0_rho cos t^1_rho, sin t^0_rho sin t^1_rho)`, the second then
/// solves the surviving equation. For `rho = 1` there is no `t^0_{rho-1}`, so
/// the determinant is zeroed through the phase `t^0_3` instead. All other
/// entries are taken from `pair` unchanged.
pub fn solve_sys2_general<T: Real>(pair: &AnglePair<T>) -> Result<AnglePair<T>> {
    let rho = pair.rho();
    let (t0, t1) = (&pair.k0, &pair.k1);
    let mut out = pair.clone();
    let eps = tiny::<T>();
    let singular = |what: &str, v: T| {
        FrameError::Singular(format!("{what} vanishes ({:e}); perturb the free angles", v.as_f64()))
    };
    let delta = |k0: &[T], m: usize| k0[rho + m] - t1[rho + m];

    if rho == 1 {
        let d0 = delta(t0, 0);
        out.k0[2] = t1[2] + d0;
        let st = t1[0].sin();
        if st.abs() <= eps {
            return Err(singular("sin t^1_1", st));
        }
        if d0.cos().abs() <= eps {
            return Err(singular("cos of the scaling phase difference", d0.cos()));
        }
        out.k0[0] = (-t1[0].cos() / st).atan();
        return Ok(out);
    }

    let p = rho;
    let d_top = delta(t0, p);
    let s_prev = t1[p - 2].sin();
    if s_prev.abs() <= eps {
        return Err(singular(&format!("sin t^1_{}", p - 1), s_prev));
    }
    let den1 = (delta(t0, p - 1) - d_top).sin();
    if den1.abs() <= eps {
        return Err(singular("sine of the top phase-difference gap", den1));
    }
    let w0 = amplitudes(t0, p - 2);
    let w1 = amplitudes(t1, p - 2);
    let num1 = (0..=p - 2).fold(T::zero(), |acc, m| {
        acc + w0[m] * w1[m] * (delta(t0, m) - d_top).sin()
    });
    out.k0[p - 2] = (-(t1[p - 2].cos() / s_prev) * num1 / den1).atan();

    let s_top = t1[p - 1].sin();
    if s_top.abs() <= eps {
        return Err(singular(&format!("sin t^1_{p}"), s_top));
    }
    if d_top.cos().abs() <= eps {
        return Err(singular("cosine of the top phase difference", d_top.cos()));
    }
    let b0 = amplitudes(&out.k0, p - 1);
    let b1 = amplitudes(t1, p - 1);
    let sc = (0..p).fold(T::zero(), |acc, m| acc + b0[m] * b1[m] * delta(&out.k0, m).cos());
    out.k0[p - 1] = (-(t1[p - 1].cos() / s_top) * sc / d_top.cos()).atan();
    Ok(out)
}

/// Angles for every residue pair of one level `j >= 1`: `pairs[n]` covers
/// frequencies `n` and `n + 2^{j-1}`, `n < 2^{j-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleParameters<T> {
    level: u32,
    pairs: Vec<AnglePair<T>>,
}

impl<T: Real> AngleParameters<T> {
    pub fn new(level: u32, pairs: Vec<AnglePair<T>>) -> Result<Self> {
        if level == 0 || level > 30 {
            return Err(FrameError::InvalidArgument(format!(
                "angle parameters need a level in 1..=30, got {level}"
            )));
        }
        let half = 1usize << (level - 1);
        if pairs.len() != half {
            return Err(FrameError::InvalidArgument(format!(
                "level {level} needs {half} angle pairs, got {}",
                pairs.len()
            )));
        }
        let rho = pairs[0].rho();
        if pairs.iter().any(|p| p.rho() != rho) {
            return Err(FrameError::InvalidArgument(
                "all angle pairs of a level must share rho".into(),
            ));
        }
        Ok(Self { level, pairs })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn rho(&self) -> usize {
        self.pairs[0].rho()
    }

    pub fn pairs(&self) -> &[AnglePair<T>] {
        &self.pairs
    }
}

/// Auxiliary sequences `a~_j` and `b~^m_j` of level `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeCoefficients<T> {
    pub a: Mask<T>,
    pub b: Vec<Mask<T>>,
}

impl<T: Real> TildeCoefficients<T> {
    pub fn level(&self) -> u32 {
        self.a.level()
    }

    pub fn rho(&self) -> usize {
        self.b.len()
    }

    pub fn at(&self, n: i64) -> TildePoint<T> {
        TildePoint {
            a: self.a.get(n),
            b: self.b.iter().map(|m| m.get(n)).collect(),
        }
    }

    /// Assembles level-`j` sequences from one pair per residue `n < 2^{j-1}`.
    pub fn from_pairs(level: u32, pairs: &[TildePair<T>]) -> Result<Self> {
        if level == 0 || pairs.len() != 1usize << (level - 1) {
            return Err(FrameError::InvalidArgument(format!(
                "level {level} needs {} tilde pairs, got {}",
                if level == 0 { 0 } else { 1usize << (level - 1) },
                pairs.len()
            )));
        }
        let rho = pairs[0].low.rho();
        if pairs.iter().any(|p| p.low.rho() != rho || p.high.rho() != rho) {
            return Err(FrameError::InvalidArgument(
                "tilde pairs disagree on the number of generators".into(),
            ));
        }
        let half = pairs.len();
        let point = |n: usize| {
            if n < half {
                &pairs[n].low
            } else {
                &pairs[n - half].high
            }
        };
        let a = Mask::from_fn(level, |n| point(n as usize).a);
        let b = (0..rho)
            .map(|m| Mask::from_fn(level, |n| point(n as usize).b[m]))
            .collect();
        Ok(Self { a, b })
    }

    /// `max_n | |a~(n)|^2 + sum |b~(n)|^2 - 1 |`.
    pub fn unit_sphere_residual(&self) -> T {
        (0..self.a.period() as i64).fold(T::zero(), |acc, n| {
            acc.max((self.at(n).norm_sqr() - T::one()).abs())
        })
    }

    /// Cross sum for residue pair `n < 2^{j-1}`.
    pub fn cross(&self, n: i64) -> Complex<T> {
        let half = (self.a.period() / 2) as i64;
        self.at(n).cross(&self.at(n + half))
    }

    pub fn max_cross_residual(&self) -> T {
        let half = (self.a.period() / 2) as i64;
        (0..half).fold(T::zero(), |acc, n| acc.max(self.cross(n).norm()))
    }
}

/// Evaluates the parameterization on every residue of the level.
pub fn tilde_from_angles<T: Real>(params: &AngleParameters<T>) -> TildeCoefficients<T> {
    let pairs: Vec<_> = params.pairs().iter().map(AnglePair::evaluate).collect();
    TildeCoefficients::from_pairs(params.level(), &pairs).expect("validated parameters")
}

/// Constant tilde sequence `a~ = 1`, `b~ = 0`; useful as a neutral level.
pub fn identity_tilde<T: Real>(level: u32, rho: usize) -> TildeCoefficients<T> {
    TildeCoefficients {
        a: Mask::constant(level, Complex::new(T::one(), T::zero())),
        b: (0..rho).map(|_| Mask::constant(level, czero())).collect(),
    }
}

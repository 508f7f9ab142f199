//! Certification of candidate systems.
//!
//! Two criteria are checked on truncated data: the coefficient criterion on
//! wavelet spectra (unit diagonal energy and vanishing cross sums over odd
//! shifts) and the mask criterion on `a`, `b` and `theta`. A numerical Parseval
//! oracle compares frame energies of random trigonometric polynomials with
//! their exact values.

use std::fmt;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::construct::active_residues;
use crate::error::{FrameError, Result};
use crate::masks::FrameSystem;
use crate::scalar::{czero, pow2, Real};
use crate::spectra::{fold_pair, Dft, Spectrum};
use crate::verdict::{limit_verdict, Monotone, Verdict};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `sum_j sum_m 2^j |psi^m_j(n)|^2 -> 1`.
    FrameEnergy,
    /// `sum_{q<=j} 2^q sum_m conj(psi^m_q(n)) psi^m_q(n + 2^j k) = 0`, `k` odd.
    FrameCross,
    /// `theta_j conj(a_{j+1}(n)) a_{j+1}(n+2^j) + sum_m conj(b^m_{j+1}(n)) b^m_{j+1}(n+2^j) = 0`.
    MaskCross,
    /// `2^j |phi_j(n)|^2 theta_j(n) -> 1`.
    MaskLimit,
    /// `target(n) / prod |a~_r(n)|^2 -> 1`.
    ProductLimit,
    /// Largest relative error of [`parseval_oracle`].
    ParsevalOracle,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::FrameEnergy => "frame_energy",
            Condition::FrameCross => "frame_cross",
            Condition::MaskCross => "mask_cross",
            Condition::MaskLimit => "mask_limit",
            Condition::ProductLimit => "product_limit",
            Condition::ParsevalOracle => "parseval_oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Condition::FrameEnergy,
            Condition::FrameCross,
            Condition::MaskCross,
            Condition::MaskLimit,
            Condition::ProductLimit,
            Condition::ParsevalOracle,
        ]
        .into_iter()
        .find(|c| c.id() == s)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub condition: Condition,
    pub j: u32,
    pub n: i64,
    pub k: Option<i64>,
    pub residual: f64,
    pub verdict: Verdict,
}

pub const CSV_HEADER: &str = "condition_id,j,n,k,residual,verdict";

/// How truncated limit conditions are judged.
pub const DRIFT_MODEL: &str = "limit conditions pass when the last truncated value is within the convergence \
     tolerance of 1; an overshoot of a nondecreasing sequence fails; the check is inconclusive while the last \
     increment exceeds the drift tolerance and fails once it has stalled";

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub horizon: u32,
    pub tolerances: Tolerances,
    pub records: Vec<Record>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn new(horizon: u32, tolerances: Tolerances, records: Vec<Record>) -> Self {
        let verdict = Verdict::aggregate(records.iter().map(|r| r.verdict));
        Self {
            horizon,
            tolerances,
            records,
            verdict,
        }
    }

    /// Concatenates the records of `other`; the horizon becomes the larger one.
    pub fn merge(mut self, other: Certificate) -> Self {
        self.records.extend(other.records);
        self.horizon = self.horizon.max(other.horizon);
        self.verdict = Verdict::aggregate(self.records.iter().map(|r| r.verdict));
        self
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn of(&self, condition: Condition) -> impl Iterator<Item = &Record> + '_ {
        self.records.iter().filter(move |r| r.condition == condition)
    }

    /// Largest residual among records of `condition` that were not skipped.
    pub fn max_residual(&self, condition: Condition) -> f64 {
        self.of(condition)
            .filter(|r| r.verdict != Verdict::Skipped)
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn verdict_of(&self, condition: Condition) -> Verdict {
        Verdict::aggregate(self.of(condition).map(|r| r.verdict))
    }

    /// One row per record under [`CSV_HEADER`]; `k` is empty where it does not apply.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let k = r.k.map(|k| k.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{:.16e},{}", r.condition, r.j, r.n, k, r.residual, r.verdict);
        }
        out
    }
}

fn check_depth<T: Real>(system: &FrameSystem<T>, horizon: u32) -> Result<()> {
    if horizon == 0 || horizon > system.depth() {
        return Err(FrameError::InvalidArgument(format!(
            "horizon {horizon} outside 1..={} (the system depth)",
            system.depth()
        )));
    }
    if !system.wavelets.has_spectra() {
        return Err(FrameError::InvalidArgument("wavelet spectra not filled".into()));
    }
    Ok(())
}

/// `sum_{q<=j, q<J} 2^q sum_m conj(psi^m_q(n)) psi^m_q(n2)`.
pub fn cross_sum<T: Real>(system: &FrameSystem<T>, j: u32, n: i64, n2: i64) -> Complex<T> {
    let top = j.min(system.depth() - 1);
    (0..=top).fold(czero(), |acc, q| {
        let level = system
            .wavelets
            .spectra_at(q)
            .iter()
            .fold(czero::<T>(), |s, psi| s + psi.get(n).conj() * psi.get(n2));
        acc + level * pow2::<T>(q)
    })
}

/// Coefficient criterion truncated at `horizon` levels, for `n` in `n_range`.
///
/// Diagonal energies are judged as limits; cross sums over odd `k` are exact
/// finite sums, checked wherever `n + 2^j k` lies in the stored support.
pub fn check_theorem1<T: Real>(
    system: &FrameSystem<T>,
    horizon: u32,
    n_range: RangeInclusive<i64>,
    tol: &Tolerances,
) -> Result<Certificate> {
    check_depth(system, horizon)?;
    let support = system.support();
    let mut records = Vec::new();
    for n in n_range.clone() {
        let seq: Vec<f64> = (1..=horizon).map(|q| system.partial_energy(q, n).as_f64()).collect();
        let check = limit_verdict(&seq, 1.0, tol, Monotone::Nondecreasing);
        records.push(Record {
            condition: Condition::FrameEnergy,
            j: horizon,
            n,
            k: None,
            residual: check.residual,
            verdict: check.verdict,
        });
    }
    for n in n_range {
        for j in 0..horizon {
            let step = 1i64 << j;
            // Odd k with n + 2^j k inside the support.
            let k_lo = (support.start() - n).div_euclid(step) - 1;
            let k_hi = (support.end() - n).div_euclid(step) + 1;
            for k in (k_lo..=k_hi).filter(|k| k.rem_euclid(2) == 1) {
                let n2 = n + step * k;
                if !support.contains(&n2) {
                    continue;
                }
                let residual = cross_sum(system, j, n, n2).norm().as_f64();
                records.push(Record {
                    condition: Condition::FrameCross,
                    j,
                    n,
                    k: Some(k),
                    residual,
                    verdict: Verdict::from_residual(residual, tol.equality),
                });
            }
        }
    }
    Ok(Certificate::new(horizon, *tol, records))
}

/// Mask criterion truncated at `horizon` levels.
///
/// The mask cross condition is checked per residue `r < 2^j` of level `j + 1`
/// for `j < horizon`, and skipped when `phi_{j+1}` vanishes on the residue
/// class of `r` or of `r + 2^j`. The limit `2^j |phi_j(n)|^2 theta_j(n) -> 1` is
/// judged for `n` in `n_range`.
pub fn check_theorem2<T: Real>(
    system: &FrameSystem<T>,
    horizon: u32,
    n_range: RangeInclusive<i64>,
    tol: &Tolerances,
) -> Result<Certificate> {
    check_depth(system, horizon)?;
    let chain = &system.chain;
    let zero = T::lit(tol.zero);
    let mut records = Vec::new();
    for j in 0..horizon {
        let level = j + 1;
        let active = active_residues(chain, level, zero);
        let half = 1i64 << j;
        let theta = system.theta.level(j);
        let masks = system.wavelets.masks_at(level);
        for r in 0..half {
            let r2 = r + half;
            if !active[r as usize] || !active[r2 as usize] {
                records.push(Record {
                    condition: Condition::MaskCross,
                    j,
                    n: r,
                    k: None,
                    residual: 0.0,
                    verdict: Verdict::Skipped,
                });
                continue;
            }
            // a_1 is never stored; theta_0 = 0 removes the scaling term there.
            let scaling = if j == 0 {
                czero()
            } else {
                chain.a(level, r).conj() * chain.a(level, r2) * theta.get(r)
            };
            let wavelet = masks
                .iter()
                .fold(czero::<T>(), |acc, b| acc + b.get(r).conj() * b.get(r2));
            let residual = (scaling + wavelet).norm().as_f64();
            records.push(Record {
                condition: Condition::MaskCross,
                j,
                n: r,
                k: None,
                residual,
                verdict: Verdict::from_residual(residual, tol.equality),
            });
        }
    }
    for n in n_range {
        let seq: Vec<f64> = (1..=horizon)
            .map(|q| (pow2::<T>(q) * chain.phi(q, n).norm_sqr() * system.theta.get(q, n)).as_f64())
            .collect();
        let check = limit_verdict(&seq, 1.0, tol, Monotone::Nondecreasing);
        records.push(Record {
            condition: Condition::MaskLimit,
            j: horizon,
            n,
            k: None,
            residual: check.residual,
            verdict: check.verdict,
        });
    }
    Ok(Certificate::new(horizon, *tol, records))
}

/// Frame energies and their exact counterparts, reusing FFT plans.
pub struct FrameEnergy<T: Real> {
    dft: Dft<T>,
}

impl<T: Real> Default for FrameEnergy<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> FrameEnergy<T> {
    pub fn new() -> Self {
        Self { dft: Dft::new() }
    }

    /// `E_J(f) = sum_{j<J} sum_m sum_{k in R_j} |<f, S^k_j psi^m_j>|^2`.
    pub fn truncated(&mut self, system: &FrameSystem<T>, f: &Spectrum<T>, horizon: u32) -> T {
        (0..horizon).fold(T::zero(), |acc, j| {
            system
                .wavelets
                .spectra_at(j)
                .iter()
                .fold(acc, |s, psi| s + self.dft.frame_energy(f, psi, j))
        })
    }

    /// `2^J sum_r theta_J(r) |sum_{n = r mod 2^J} f^(n) conj(phi_J(n))|^2`, which
    /// equals `E_J(f)` exactly when the cross conditions hold below `J`.
    pub fn expected(&self, system: &FrameSystem<T>, f: &Spectrum<T>, horizon: u32) -> T {
        let phi = system.chain.spectrum(horizon).expect("horizon within chain");
        let folded = fold_pair(f, phi, horizon);
        let theta = system.theta.level(horizon);
        let sum = folded
            .values()
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (r, h)| acc + theta.get(r as i64) * h.norm_sqr());
        sum * pow2::<T>(horizon)
    }

    /// `|E_J(f) - expected| / ||f||^2`.
    pub fn relative_error(&mut self, system: &FrameSystem<T>, f: &Spectrum<T>, horizon: u32) -> f64 {
        let e = self.truncated(system, f, horizon).as_f64();
        let x = self.expected(system, f, horizon).as_f64();
        (e - x).abs() / f.norm_sqr().as_f64()
    }

    /// `|E_J(f) - ||f||^2| / ||f||^2`.
    pub fn parseval_defect(&mut self, system: &FrameSystem<T>, f: &Spectrum<T>, horizon: u32) -> f64 {
        let norm = f.norm_sqr().as_f64();
        (self.truncated(system, f, horizon).as_f64() - norm).abs() / norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStats {
    pub trials: usize,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
}

/// Trigonometric polynomial with complex standard normal coefficients on `|n| < degree`.
pub fn random_polynomial<T: Real, R: Rng + ?Sized>(rng: &mut R, degree: i64) -> Spectrum<T> {
    Spectrum::from_fn(-(degree - 1)..=(degree - 1), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    })
}

/// Runs [`FrameEnergy::relative_error`] on `trials` random polynomials.
pub fn parseval_oracle<T: Real, R: Rng + ?Sized>(
    system: &FrameSystem<T>,
    trials: usize,
    degree: i64,
    horizon: u32,
    rng: &mut R,
) -> Result<OracleStats> {
    check_depth(system, horizon)?;
    if horizon > system.chain.top_level() {
        return Err(FrameError::InvalidArgument(format!(
            "horizon {horizon} exceeds the chain top level {}",
            system.chain.top_level()
        )));
    }
    if degree < 1 {
        return Err(FrameError::InvalidArgument(format!("degree must be positive, got {degree}")));
    }
    let mut energy = FrameEnergy::new();
    let mut max = 0.0f64;
    let mut total = 0.0;
    for _ in 0..trials {
        let f = random_polynomial::<T, R>(rng, degree);
        let err = energy.relative_error(system, &f, horizon);
        max = max.max(err);
        total += err;
    }
    Ok(OracleStats {
        trials,
        max_relative_error: max,
        mean_relative_error: if trials == 0 { 0.0 } else { total / trials as f64 },
    })
}

/// `2^{-j/2} (delta_n + delta_{n + 2^j k})`; its frame energy isolates the
/// real part of the level-`j` cross sum.
pub fn real_probe<T: Real>(j: u32, n: i64, k: i64) -> Spectrum<T> {
    let c = Complex::new(pow2::<T>(j).sqrt().recip(), T::zero());
    Spectrum::from_pairs(&[(n, c), (n + (1i64 << j) * k, c)])
}

/// `i 2^{-j/2} delta_n + 2^{-j/2} delta_{n + 2^j k}`; isolates the imaginary part.
pub fn imaginary_probe<T: Real>(j: u32, n: i64, k: i64) -> Spectrum<T> {
    let s = pow2::<T>(j).sqrt().recip();
    Spectrum::from_pairs(&[(n, Complex::new(T::zero(), s)), (n + (1i64 << j) * k, Complex::new(s, T::zero()))])
}

/// Cross sum at `(j, n, k)` recovered from the frame energies of the two probes:
/// `E(real) = 2^{-j} (d(n) + d(n')) + 2^{1-j} Re C` and
/// `E(imag) = 2^{-j} (d(n) + d(n')) - 2^{1-j} Im C`, `d` the diagonal energy.
pub fn probe_cross_sum<T: Real>(system: &FrameSystem<T>, horizon: u32, j: u32, n: i64, k: i64) -> Complex<f64> {
    let mut energy = FrameEnergy::new();
    let n2 = n + (1i64 << j) * k;
    let scale = 2f64.powi(-(j as i32));
    let diag = scale * (system.partial_energy(horizon, n) + system.partial_energy(horizon, n2)).as_f64();
    let er = energy.truncated(system, &real_probe(j, n, k), horizon).as_f64();
    let ei = energy.truncated(system, &imaginary_probe(j, n, k), horizon).as_f64();
    Complex::new((er - diag) / (2.0 * scale), (diag - ei) / (2.0 * scale))
}

/// Larger of the two probes' Parseval defects at `(j, n, k)`.
pub fn probe_defect<T: Real>(system: &FrameSystem<T>, horizon: u32, j: u32, n: i64, k: i64) -> f64 {
    let mut energy = FrameEnergy::new();
    let a = energy.parseval_defect(system, &real_probe(j, n, k), horizon);
    let b = energy.parseval_defect(system, &imaginary_probe(j, n, k), horizon);
    a.max(b)
}

//! Verdicts and the truncation policy for limit conditions.

use std::fmt;

use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    /// The condition is exempt at this index; neutral when aggregating.
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Skipped => "SKIPPED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PASS" => Some(Verdict::Pass),
            "FAIL" => Some(Verdict::Fail),
            "INCONCLUSIVE" => Some(Verdict::Inconclusive),
            "SKIPPED" => Some(Verdict::Skipped),
            _ => None,
        }
    }

    pub fn from_residual(residual: f64, tol: f64) -> Self {
        if residual <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// FAIL dominates, then INCONCLUSIVE; SKIPPED is neutral.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Skipped, x) | (x, Skipped) => x,
            (Pass, Pass) => Pass,
        }
    }

    /// Aggregate over many records; an empty or all-skipped set passes.
    pub fn aggregate(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        match verdicts.into_iter().fold(Verdict::Skipped, Verdict::combine) {
            Verdict::Skipped => Verdict::Pass,
            v => v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Known monotonicity of a truncated sequence, used to call an overshoot final.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Nondecreasing,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCheck {
    pub verdict: Verdict,
    /// `|s_N - target|`.
    pub residual: f64,
    /// `|s_N - s_{N-1}|`, infinite for a single term.
    pub increment: f64,
}

/// Judges whether `seq` (values at successive truncation levels) has reached
/// `target`. PASS within the convergence tolerance; FAIL on an overshoot of
/// a nondecreasing sequence or when the sequence has stalled away from the
/// target; INCONCLUSIVE while the last increment still exceeds the drift bound.
pub fn limit_verdict(seq: &[f64], target: f64, tol: &Tolerances, monotone: Monotone) -> LimitCheck {
    let last = seq.last().copied().unwrap_or(f64::NAN);
    let residual = (last - target).abs();
    let increment = if seq.len() >= 2 {
        (last - seq[seq.len() - 2]).abs()
    } else {
        f64::INFINITY
    };
    let verdict = if !last.is_finite() {
        Verdict::Fail
    } else if residual <= tol.convergence {
        Verdict::Pass
    } else if monotone == Monotone::Nondecreasing && last > target {
        Verdict::Fail
    } else if increment > tol.drift {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    };
    LimitCheck {
        verdict,
        residual,
        increment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregation_rules() {
        use Verdict::*;
        assert_eq!(Verdict::aggregate([Pass, Skipped, Pass]), Pass);
        assert_eq!(Verdict::aggregate([Pass, Inconclusive, Skipped]), Inconclusive);
        assert_eq!(Verdict::aggregate([Inconclusive, Fail, Pass]), Fail);
        assert_eq!(Verdict::aggregate([Skipped]), Pass);
        assert_eq!(Verdict::aggregate(std::iter::empty()), Pass);
    }

    #[test]
    fn limit_policy() {
        let tol = Tolerances::default();
        let pass = limit_verdict(&[0.5, 0.999_999_9], 1.0, &tol, Monotone::Nondecreasing);
        assert_eq!(pass.verdict, Verdict::Pass);
        let drifting = limit_verdict(&[0.5, 0.9], 1.0, &tol, Monotone::Nondecreasing);
        assert_eq!(drifting.verdict, Verdict::Inconclusive);
        let stalled = limit_verdict(&[0.9, 0.9], 1.0, &tol, Monotone::Nondecreasing);
        assert_eq!(stalled.verdict, Verdict::Fail);
        let over = limit_verdict(&[1.0, 1.01], 1.0, &tol, Monotone::Nondecreasing);
        assert_eq!(over.verdict, Verdict::Fail);
        let over_unknown = limit_verdict(&[1.0, 1.01], 1.0, &tol, Monotone::Unknown);
        assert_eq!(over_unknown.verdict, Verdict::Inconclusive);
        assert_eq!(limit_verdict(&[0.3], 1.0, &tol, Monotone::Unknown).verdict, Verdict::Inconclusive);
        assert_eq!(limit_verdict(&[f64::NAN], 1.0, &tol, Monotone::Unknown).verdict, Verdict::Fail);
    }

    #[test]
    fn round_trip_names() {
        for v in [Verdict::Pass, Verdict::Fail, Verdict::Inconclusive, Verdict::Skipped] {
            assert_eq!(Verdict::parse(v.as_str()), Some(v));
        }
    }
}

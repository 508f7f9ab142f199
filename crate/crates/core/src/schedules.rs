//! Target schedules for the truncated products `prod_{r=j1+1}^{N} |a~_r(n)|^2`
//! with one wavelet generator per level, and their explicit solutions.
//!
//! A schedule fixes `F(n, N)`, the value the level-`N` product must take at
//! frequency `n < 2^{N-1}`; `F(n, N) = target(n) / xi(n, N)` with
//! `xi(n, N) -> 1`. Solutions are tables of `cos^2 alpha_N(n)`, the squared
//! cosine of the first angle of each auxiliary pair.
//!
//! In the fully active regime (every `j1(n) = 1`) the products over `n` and
//! `n + 2^{N-1}` share their first `N - 1` factors, which extends `F` to all
//! residues mod `2^N`:
//!
//! ```text
//! E(1, n) = 1,   E(N, n) = F(n, N),   E(N, n + 2^{N-1}) = E(N-1, n) - F(n, N)
//! ```
//!
//! `E(N-1, n)` is the product of the first `N - 1` factors at `n`, so
//! `cos^2 alpha_N(n) = F(n, N) / E(N-1, n)`, and every entry of `E` is the
//! truncated margin of one chain of strict inequalities.

use std::fmt;

use crate::error::{FrameError, Result};
use crate::verdict::Verdict;

/// A violated inequality, named by the chain or bound it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inequality {
    /// `F(k, 2) + F(k + 2, 3) + F(k + 2 + 4, 4) + ... < 1`, `k in {0, 1}`.
    RootChain { k: u64 },
    /// `F(k, M+1) + F(k + 2^M, M+2) + F(k + 2^M + 2^{M+1}, M+3) + ... < F(k, M)`,
    /// `M >= 2`, `k < 2^{M-1}`.
    NestedChain { m: u32, k: u64 },
    /// A target value that is not strictly positive.
    NonPositiveTarget { n: u64, level: u32 },
    /// Sparse regime: `xi(n, N-1) < xi(n, N)` fails.
    XiMonotonicity { n: u64, level: u32 },
    /// Sparse regime: `xi(n, N) > target(n)` fails at the first active level.
    XiLowerBound { n: u64, level: u32 },
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Inequality::RootChain { k } => write!(f, "root chain inequality (k={k})"),
            Inequality::NestedChain { m, k } => write!(f, "nested chain inequality (M={m}, k={k})"),
            Inequality::NonPositiveTarget { n, level } => {
                write!(f, "positivity of F(n={n}, N={level})")
            }
            Inequality::XiMonotonicity { n, level } => {
                write!(f, "xi monotonicity xi(n={n}, {}) < xi(n={n}, {level})", level - 1)
            }
            Inequality::XiLowerBound { n, level } => {
                write!(f, "xi lower bound xi(n={n}, {level}) > target(n={n})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Infeasibility {
    pub inequality: Inequality,
    /// Level `N` at which the solver or the check ran into the violation.
    pub level: u32,
    /// Frequency `n < 2^{N-1}` whose angle left the open unit interval.
    pub n: u64,
    pub margin: f64,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at N={}, n={} (margin {:e})",
            self.inequality, self.level, self.n, self.margin
        )
    }
}

fn infeasible(inequality: Inequality, level: u32, n: u64, margin: f64) -> FrameError {
    FrameError::Infeasible(Infeasibility {
        inequality,
        level,
        n,
        margin,
    })
}

/// The chain containing the level-`N` equation at `n < 2^{N-1}`: strip the run
/// of one-bits from bit `N-2` down to bit 1; the remaining top position `M`
/// names the chain.
pub fn chain_of(level: u32, n: u64) -> Inequality {
    let mut bit = level as i64 - 2;
    while bit >= 1 && (n >> bit) & 1 == 1 {
        bit -= 1;
    }
    let m = (bit + 1) as u32;
    if m <= 1 {
        Inequality::RootChain { k: n & 1 }
    } else {
        Inequality::NestedChain {
            m,
            k: n & ((1u64 << (m - 1)) - 1),
        }
    }
}

fn check_horizon(n_max: u32) -> Result<()> {
    if !(2..=30).contains(&n_max) {
        return Err(FrameError::InvalidArgument(format!(
            "schedule horizon must lie in 2..=30, got {n_max}"
        )));
    }
    Ok(())
}

fn check_rows(n_max: u32, rows: &[Vec<f64>], what: &str) -> Result<()> {
    if rows.len() != (n_max - 1) as usize {
        return Err(FrameError::InvalidArgument(format!(
            "{what} needs {} rows (N = 2..={n_max}), got {}",
            n_max - 1,
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        let level = i + 2;
        if row.len() != 1usize << (level - 1) {
            return Err(FrameError::InvalidArgument(format!(
                "{what} row N={level} needs {} entries, got {}",
                1usize << (level - 1),
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(FrameError::InvalidArgument(format!("{what} row N={level} has non-finite entries")));
        }
    }
    Ok(())
}

/// `F(n, N)` for `N = 2..=n_max`, `n < 2^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    n_max: u32,
    f: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn new(n_max: u32, f: Vec<Vec<f64>>) -> Result<Self> {
        check_horizon(n_max)?;
        check_rows(n_max, &f, "F table")?;
        Ok(Self { n_max, f })
    }

    /// `F(n, N) = target(n) / xi(n, N)`.
    pub fn from_xi(n_max: u32, target: impl Fn(u64) -> f64, xi: impl Fn(u64, u32) -> f64) -> Result<Self> {
        check_horizon(n_max)?;
        let f = (2..=n_max)
            .map(|level| (0..1u64 << (level - 1)).map(|n| target(n) / xi(n, level)).collect())
            .collect();
        Self::new(n_max, f)
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn get(&self, n: u64, level: u32) -> f64 {
        self.f[(level - 2) as usize][n as usize]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.f
    }

    /// `xi(n, N)` implied by a target value.
    pub fn xi(&self, target: f64, n: u64, level: u32) -> f64 {
        target / self.get(n, level)
    }

    /// `E(N, .)` for `N = 1..=n_max`; entry `N - 1` has `2^N` values.
    pub fn extended(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![1.0, 1.0]];
        for level in 2..=self.n_max {
            let prev = out.last().expect("nonempty");
            let half = 1usize << (level - 1);
            let row = &self.f[(level - 2) as usize];
            let mut e = vec![0.0; 2 * half];
            for n in 0..half {
                e[n] = row[n];
                e[n + half] = prev[n] - row[n];
            }
            out.push(e);
        }
        out
    }
}

/// `cos^2 alpha_N(n)` for `N = 2..=n_max`, `n < 2^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSolution {
    n_max: u32,
    cos2: Vec<Vec<f64>>,
    /// `(N, n)` where the solution sits on the boundary `cos^2 = 1`.
    pub boundary: Vec<(u32, u64)>,
}

impl AngleSolution {
    pub fn new(n_max: u32, cos2: Vec<Vec<f64>>) -> Result<Self> {
        check_horizon(n_max)?;
        check_rows(n_max, &cos2, "cos^2 table")?;
        Ok(Self {
            n_max,
            cos2,
            boundary: Vec::new(),
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn get(&self, n: u64, level: u32) -> f64 {
        self.cos2[(level - 2) as usize][n as usize]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.cos2
    }

    /// `alpha_N(n) = arccos sqrt(cos^2)`, in `[0, pi/2]`.
    pub fn alpha(&self, n: u64, level: u32) -> f64 {
        self.get(n, level).clamp(0.0, 1.0).sqrt().acos()
    }
}

/// Solves the nested product systems level by level.
pub fn solve_example1(schedule: &Schedule) -> Result<AngleSolution> {
    let extended = schedule.extended();
    let mut cos2 = Vec::with_capacity((schedule.n_max - 1) as usize);
    for level in 2..=schedule.n_max {
        let prev = &extended[(level - 2) as usize];
        let here = &extended[(level - 1) as usize];
        let half = 1usize << (level - 1);
        let mut row = vec![0.0; half];
        for n in 0..half {
            let f = schedule.get(n as u64, level);
            if f <= 0.0 {
                return Err(infeasible(
                    Inequality::NonPositiveTarget { n: n as u64, level },
                    level,
                    n as u64,
                    f,
                ));
            }
            // prev[n] is positive: it is F or a margin already checked one level down.
            let margin = here[n + half];
            if margin <= 0.0 {
                return Err(infeasible(chain_of(level, n as u64), level, n as u64, margin));
            }
            row[n] = f / prev[n];
        }
        cos2.push(row);
    }
    AngleSolution::new(schedule.n_max, cos2)
}

/// Products `prod_{r=2}^{N} c_r(n)` with `c_N = cos^2 alpha_N(n)` and, for
/// `r < N`, `cos^2` or `sin^2` of `alpha_r(n mod 2^{r-1})` according to bit
/// `r - 1` of `n`.
pub fn example1_forward(solution: &AngleSolution) -> Schedule {
    let n_max = solution.n_max;
    // prefix[n] = prod of the factors of levels 2..N-1 at residue n mod 2^{N-1}.
    let mut prefix = vec![1.0, 1.0];
    let mut rows = Vec::new();
    for level in 2..=n_max {
        let half = 1usize << (level - 1);
        let row: Vec<f64> = (0..half).map(|n| solution.get(n as u64, level) * prefix[n]).collect();
        let mut next = vec![0.0; 2 * half];
        for n in 0..half {
            let c = solution.get(n as u64, level);
            next[n] = prefix[n] * c;
            next[n + half] = prefix[n] * (1.0 - c);
        }
        rows.push(row);
        prefix = next;
    }
    Schedule {
        n_max,
        f: rows,
    }
}

/// Truncated margin of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMargin {
    pub chain: Inequality,
    /// Right-hand side minus the truncated left-hand side.
    pub margin: f64,
    /// Estimated size of the omitted terms; infinite when it cannot be estimated.
    pub tail: f64,
    pub terms: usize,
    pub verdict: Verdict,
}

/// Evaluates every chain truncated at the schedule horizon.
///
/// The margins are read off the extended table. The tail estimate extrapolates
/// the last two terms geometrically and is infinite when they do not shrink or
/// the chain has a single term. FAIL for a nonpositive margin, PASS when the
/// margin clears the tail estimate, INCONCLUSIVE otherwise.
pub fn check_example1_feasibility(schedule: &Schedule) -> Vec<ChainMargin> {
    let n_max = schedule.n_max;
    let top = &schedule.extended()[(n_max - 1) as usize];
    let mut out = Vec::new();
    let push = |out: &mut Vec<ChainMargin>, chain: Inequality, m: u32, k: u64| {
        let mut idx = k;
        let mut terms = Vec::new();
        let mut level = m + 1;
        let mut n = k;
        while level <= n_max {
            terms.push(schedule.get(n, level));
            n += 1u64 << (level - 1);
            level += 1;
        }
        for b in m..n_max {
            idx |= 1u64 << b;
        }
        let margin = top[idx as usize];
        let tail = match terms.as_slice() {
            [.., a, b] if *b > 0.0 && b < a => b * (b / a) / (1.0 - b / a),
            _ => f64::INFINITY,
        };
        let verdict = if margin <= 0.0 {
            Verdict::Fail
        } else if margin > tail {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        out.push(ChainMargin {
            chain,
            margin,
            tail,
            terms: terms.len(),
            verdict,
        });
    };
    for k in 0..2 {
        push(&mut out, Inequality::RootChain { k }, 1, k);
    }
    for m in 2..n_max {
        for k in 0..(1u64 << (m - 1)) {
            push(&mut out, Inequality::NestedChain { m, k }, m, k);
        }
    }
    out
}

/// `j1(n)` for the sparse regime: the bit length of `n`, and 1 at `n = 0`.
pub fn sparse_activation(n: u64) -> u32 {
    (64 - n.leading_zeros()).max(1)
}

/// Sparse-regime schedule: `target(n)` for `n < 2^{n_max-1}` and `xi(n, N)`
/// for `N = 2..=n_max`, `n < 2^{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSchedule {
    n_max: u32,
    targets: Vec<f64>,
    xi: Vec<Vec<f64>>,
}

impl SparseSchedule {
    pub fn new(n_max: u32, targets: Vec<f64>, xi: Vec<Vec<f64>>) -> Result<Self> {
        check_horizon(n_max)?;
        check_rows(n_max, &xi, "xi table")?;
        if targets.len() != 1usize << (n_max - 1) {
            return Err(FrameError::InvalidArgument(format!(
                "sparse schedule needs {} targets, got {}",
                1usize << (n_max - 1),
                targets.len()
            )));
        }
        Ok(Self { n_max, targets, xi })
    }

    /// `xi(n, N) = 1 - c(n) 2^{-N}` with `c(n) = (1 - target(n)) 2^{j1(n)}`,
    /// half the largest value keeping `xi(n, j1 + 1) > target(n)`. Targets must
    /// lie in `(0, 1)`.
    pub fn geometric(n_max: u32, targets: Vec<f64>) -> Result<Self> {
        check_horizon(n_max)?;
        let xi = (2..=n_max)
            .map(|level| {
                (0..1u64 << (level - 1))
                    .map(|n| {
                        let t = targets.get(n as usize).copied().unwrap_or(f64::NAN);
                        let c = (1.0 - t) * (1u64 << sparse_activation(n)) as f64;
                        1.0 - c * 2f64.powi(-(level as i32))
                    })
                    .collect()
            })
            .collect();
        Self::new(n_max, targets, xi)
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn target(&self, n: u64) -> f64 {
        self.targets[n as usize]
    }

    pub fn xi(&self, n: u64, level: u32) -> f64 {
        self.xi[(level - 2) as usize][n as usize]
    }

    pub fn xi_rows(&self) -> &[Vec<f64>] {
        &self.xi
    }

    /// `F(n, N) = target(n) / xi(n, N)` for `N > j1(n)`.
    pub fn f(&self, n: u64, level: u32) -> f64 {
        self.target(n) / self.xi(n, level)
    }
}

/// Solves the sparse-regime systems, where the product at `n` starts at level
/// `j1(n) + 1`: `cos^2 alpha_N(n) = xi(n, N-1)/xi(n, N)` when `j1(n) < N - 1`
/// and `target(n)/xi(n, N)` when `j1(n) = N - 1`. A value of exactly 1 is
/// recorded as a boundary case.
pub fn solve_example2(schedule: &SparseSchedule) -> Result<AngleSolution> {
    let mut cos2 = Vec::new();
    let mut boundary = Vec::new();
    for level in 2..=schedule.n_max {
        let half = 1u64 << (level - 1);
        let mut row = Vec::with_capacity(half as usize);
        for n in 0..half {
            let t = schedule.target(n);
            let xi = schedule.xi(n, level);
            if t <= 0.0 || xi <= 0.0 {
                return Err(infeasible(Inequality::NonPositiveTarget { n, level }, level, n, t.min(xi)));
            }
            let value = if sparse_activation(n) + 1 < level {
                let prev = schedule.xi(n, level - 1);
                let margin = xi - prev;
                if margin < 0.0 {
                    return Err(infeasible(Inequality::XiMonotonicity { n, level }, level, n, margin));
                }
                prev / xi
            } else {
                let margin = xi - t;
                if margin < 0.0 {
                    return Err(infeasible(Inequality::XiLowerBound { n, level }, level, n, margin));
                }
                t / xi
            };
            if value >= 1.0 {
                boundary.push((level, n));
            }
            row.push(value);
        }
        cos2.push(row);
    }
    let mut solution = AngleSolution::new(schedule.n_max, cos2)?;
    solution.boundary = boundary;
    Ok(solution)
}

/// `prod_{r=j1(n)+1}^{N} cos^2 alpha_r(n)` for `N = 2..=n_max`, `n < 2^{N-1}`.
pub fn example2_forward(solution: &AngleSolution) -> Vec<Vec<f64>> {
    (2..=solution.n_max)
        .map(|level| {
            (0..1u64 << (level - 1))
                .map(|n| {
                    ((sparse_activation(n) + 1)..=level)
                        .map(|r| solution.get(n, r))
                        .product()
                })
                .collect()
        })
        .collect()
}

//! Mode implementations. Each returns a verdict, summary lines and the
//! artifacts to write; nothing here touches the filesystem except config inputs.

use std::f64::consts::{PI, TAU};
use std::fs;

use periodic_frames::certify::{
    check_theorem1, check_theorem2, parseval_oracle, random_polynomial, Certificate, Condition, FrameEnergy, Record,
};
use periodic_frames::construct::{
    activation_profile, build_masks, pinned_rho1_tilde, product_certificate, Sign, TildeCoefficients,
};
use periodic_frames::schedules::{
    check_example1_feasibility, example1_forward, solve_example1, solve_example2, AngleSolution, Schedule,
    SparseSchedule,
};
use periodic_frames::spectra::{shifts, Dft};
use periodic_frames::verdict::{limit_verdict, Monotone};
use periodic_frames::{FrameError, FrameSystem64, RefinementChain64, Verdict, WaveletSystem64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{AngleFile, AngleLevel, ConfigError, Mode, Resolved, ScheduleFile, SystemData};
use crate::report::{margins_csv, products_csv, CertificateReport, COEFFICIENT_HEADER};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// A well-formed request whose computation failed (infeasible schedule,
    /// construction precondition, I/O while writing).
    Failed(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Failed(msg) => f.write_str(msg),
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError(msg.into()))
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub verdict: Option<Verdict>,
    pub summary: Vec<String>,
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn artifact(&mut self, name: &str, content: String) {
        self.artifacts.push((name.to_string(), content));
    }
}

fn toml_text<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::Failed(format!("serializing report: {e}")))
}

pub fn run(cfg: &Resolved) -> Result<Outcome, CliError> {
    match cfg.mode {
        Mode::Certify => certify(cfg),
        Mode::Construct => construct(cfg),
        Mode::Analyze => analyze(cfg),
        Mode::Example1 => example1(cfg),
        Mode::Example2 => example2(cfg),
    }
}

fn n_range(cfg: &Resolved, system: &FrameSystem64) -> Result<std::ops::RangeInclusive<i64>, CliError> {
    let support = system.support();
    let lo = cfg.raw.certify.n_min.unwrap_or(-cfg.bound / 2);
    let hi = cfg.raw.certify.n_max.unwrap_or(cfg.bound / 2 - 1);
    if lo > hi || lo < *support.start() || hi > *support.end() {
        return Err(config(format!(
            "certification range {lo}..={hi} must be nonempty and inside the stored support {}..={}",
            support.start(),
            support.end()
        )));
    }
    Ok(lo..=hi)
}

/// Both criteria plus the oracle; shared by `certify` and `construct`.
fn certify_system(cfg: &Resolved, system: &FrameSystem64) -> Result<Certificate, CliError> {
    let range = n_range(cfg, system)?;
    let failed = |e: FrameError| CliError::Failed(e.to_string());
    let t1 = check_theorem1(system, cfg.horizon, range.clone(), &cfg.tol).map_err(failed)?;
    let t2 = check_theorem2(system, cfg.horizon, range, &cfg.tol).map_err(failed)?;
    let trials = cfg.raw.certify.oracle_trials.unwrap_or(20);
    let degree = cfg.raw.certify.oracle_degree.unwrap_or((cfg.bound / 2).max(1));
    if degree < 1 {
        return Err(config(format!("oracle_degree must be positive, got {degree}")));
    }
    let mut cert = t1.merge(t2);
    if trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let stats = parseval_oracle(system, trials, degree, cfg.horizon, &mut rng).map_err(failed)?;
        let oracle = Certificate::new(
            cfg.horizon,
            cfg.tol,
            vec![Record {
                condition: Condition::ParsevalOracle,
                j: cfg.horizon,
                n: 0,
                k: None,
                residual: stats.max_relative_error,
                verdict: Verdict::from_residual(stats.max_relative_error, cfg.tol.equality),
            }],
        );
        cert = cert.merge(oracle);
    }
    Ok(cert)
}

fn certificate_outcome(cert: &Certificate, out: &mut Outcome) -> Result<(), CliError> {
    let report = CertificateReport::new(cert);
    for c in &report.conditions {
        out.summary.push(format!(
            "{:<16} {:<12} records={} fail={} inconclusive={} skipped={} max_residual={:.3e}",
            c.id, c.verdict, c.records, c.fail, c.inconclusive, c.skipped, c.max_residual
        ));
    }
    out.artifact("certificate.toml", toml_text(&report)?);
    out.artifact("certificate.csv", cert.to_csv());
    out.verdict = Some(cert.verdict);
    Ok(())
}

fn certify(cfg: &Resolved) -> Result<Outcome, CliError> {
    let system = cfg.frame_system()?;
    let cert = certify_system(cfg, &system)?;
    let mut out = Outcome::default();
    certificate_outcome(&cert, &mut out)?;
    Ok(out)
}

fn haar_angle_file(horizon: u32, rng: Option<(&mut ChaCha8Rng, f64)>) -> AngleFile {
    let mut rng = rng;
    let levels = (2..=horizon)
        .map(|j| {
            let half = 1usize << (j - 1);
            let step = PI / (1u64 << j) as f64;
            let mut t01 = Vec::with_capacity(half);
            let mut t03 = Vec::with_capacity(half);
            let mut sign = Vec::with_capacity(half);
            for r in 0..half {
                let base = step * r as f64;
                match rng.as_mut() {
                    // Residue 0 pairs with the zero of the Haar scaling mask;
                    // its wavelet coefficient has to stay zero.
                    Some((rng, amp)) => {
                        let t = if r == 0 { 0.0 } else { base + *amp * step * rng.random_range(-1.0..1.0) };
                        t01.push(t);
                        t03.push(rng.random_range(0.0..TAU));
                        sign.push(if rng.random_bool(0.5) { 1 } else { -1 });
                    }
                    None => {
                        t01.push(base);
                        t03.push(PI / 2.0 - base);
                        sign.push(1);
                    }
                }
            }
            AngleLevel { level: j, t01, t03, sign }
        })
        .collect();
    AngleFile { levels }
}

fn angle_file(cfg: &Resolved) -> Result<AngleFile, CliError> {
    let c = &cfg.raw.construct;
    match c.angles.as_deref().unwrap_or("haar") {
        "haar" => Ok(haar_angle_file(cfg.horizon, None)),
        "random" => {
            let amp = c.amplitude.unwrap_or(0.2);
            if !(0.0..=1.0).contains(&amp) {
                return Err(config(format!("construct.amplitude must lie in [0, 1], got {amp}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(haar_angle_file(cfg.horizon, Some((&mut rng, amp))))
        }
        "file" => {
            let path = c.file.as_ref().ok_or_else(|| config("construct.angles = \"file\" needs construct.file"))?;
            let path = cfg.path(path);
            let text = fs::read_to_string(&path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| config(format!("angle file {}: {e}", path.display())))
        }
        other => Err(config(format!("unknown construct.angles `{other}` (haar, random, file)"))),
    }
}

fn tilde_levels(chain: &RefinementChain64, angles: &AngleFile, horizon: u32) -> Result<Vec<TildeCoefficients<f64>>, CliError> {
    (2..=horizon)
        .map(|j| {
            let lvl = angles
                .levels
                .iter()
                .find(|l| l.level == j)
                .ok_or_else(|| config(format!("angle file has no entry for level {j}")))?;
            let half = 1usize << (j - 1);
            if lvl.t01.len() != half || lvl.t03.len() != half || lvl.sign.len() != half {
                return Err(config(format!("level {j} angles need {half} entries each")));
            }
            if let Some(s) = lvl.sign.iter().find(|s| s.abs() != 1) {
                return Err(config(format!("level {j} sign must be 1 or -1, got {s}")));
            }
            pinned_rho1_tilde(chain, j, |r| {
                let r = r as usize;
                let sign = if lvl.sign[r] > 0 { Sign::Plus } else { Sign::Minus };
                (lvl.t01[r], lvl.t03[r], sign)
            })
            .map_err(|e| CliError::Failed(format!("level {j} angles: {e}")))
        })
        .collect()
}

fn construct(cfg: &Resolved) -> Result<Outcome, CliError> {
    let (chain, configured) = cfg.system_parts()?;
    if configured.all_masks()[1..cfg.horizon as usize].iter().any(|l| l.len() != 1) {
        return Err(config("construction from angles supports one wavelet generator per level above level 0"));
    }
    let base = WaveletSystem64::new(configured.all_masks()[..cfg.horizon as usize].to_vec())
        .map_err(|e| config(e.to_string()))?;
    let angles = angle_file(cfg)?;
    let tilde = tilde_levels(&chain, &angles, cfg.horizon)?;
    let built = build_masks(&chain, &base, &tilde, &cfg.tol).map_err(|e| match e {
        FrameError::TooFewLevelZeroGenerators { .. } => config(e.to_string()),
        e => CliError::Failed(format!("construction failed: {e}")),
    })?;
    let system = FrameSystem64::assemble(chain.clone(), built.wavelets.clone())
        .map_err(|e| CliError::Failed(e.to_string()))?;

    let profile = activation_profile(&chain, &base, cfg.tol.zero);
    let products = product_certificate(&chain, &profile, &base, &tilde, cfg.horizon, &cfg.tol)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let cert = certify_system(cfg, &system)?;

    let mut out = Outcome::default();
    certificate_outcome(&cert, &mut out)?;
    let product_verdict = Verdict::aggregate(products.iter().map(|r| r.verdict));
    out.summary.push(format!(
        "{:<16} {:<12} records={} (reported only; the mask limit above is the same condition)",
        "product_limit",
        product_verdict,
        products.len()
    ));
    out.artifact("system.toml", toml_text(&SystemData::from_parts(&chain, &built.wavelets))?);
    out.artifact("angles.toml", toml_text(&angles)?);
    out.artifact("products.csv", products_csv(&products));
    Ok(out)
}

fn analyze(cfg: &Resolved) -> Result<Outcome, CliError> {
    let system = cfg.frame_system()?;
    let f = match &cfg.raw.analyze.input {
        Some(data) => data.to_spectrum(),
        None => {
            let degree = cfg.raw.analyze.degree.unwrap_or(16);
            if degree < 1 {
                return Err(config(format!("analyze.degree must be positive, got {degree}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_polynomial::<f64, _>(&mut rng, degree)
        }
    };
    if f.is_empty() || f.norm_sqr() == 0.0 {
        return Err(config("analyze input spectrum is zero"));
    }
    let mut dft = Dft::new();
    let mut csv = String::from(COEFFICIENT_HEADER);
    csv.push('\n');
    for j in 0..cfg.horizon {
        for (m, psi) in system.wavelets.spectra_at(j).iter().enumerate() {
            let coeffs = dft.frame_coefficients(&f, psi, j);
            for (k, c) in shifts(j).zip(coeffs) {
                csv.push_str(&format!("{j},{m},{k},{:.16e},{:.16e}\n", c.re, c.im));
            }
        }
    }
    let mut energy = FrameEnergy::new();
    let e = energy.truncated(&system, &f, cfg.horizon);
    let expected = energy.expected(&system, &f, cfg.horizon);
    let norm = f.norm_sqr();
    let rel = (e - expected).abs() / norm;
    let mut out = Outcome::default();
    out.summary.push(format!("input energy     {norm:.16e}"));
    out.summary.push(format!("frame energy     {e:.16e} over {} levels", cfg.horizon));
    out.summary.push(format!("expected energy  {expected:.16e} (relative gap {rel:.3e})"));
    out.artifact("coefficients.csv", csv);
    out.verdict = Some(Verdict::from_residual(rel, cfg.tol.equality));
    Ok(out)
}

#[derive(Serialize)]
struct SolutionReport {
    n_max: u32,
    /// `cos2[N-2][n] = cos^2 alpha_N(n)`.
    cos2: Vec<Vec<f64>>,
    boundary: Vec<[u64; 2]>,
}

impl SolutionReport {
    fn new(sol: &AngleSolution) -> Self {
        Self {
            n_max: sol.n_max(),
            cos2: sol.rows().to_vec(),
            boundary: sol.boundary.iter().map(|&(l, n)| [l as u64, n]).collect(),
        }
    }
}

fn schedule_horizon(n: Option<u32>) -> Result<u32, CliError> {
    let n = n.unwrap_or(10);
    if !(2..=crate::config::MAX_HORIZON).contains(&n) {
        return Err(config(format!("schedule n_max {n} outside 2..={}", crate::config::MAX_HORIZON)));
    }
    Ok(n)
}

fn example1(cfg: &Resolved) -> Result<Outcome, CliError> {
    let c = &cfg.raw.example1;
    let n_max = schedule_horizon(c.n_max)?;
    let shape = |e: FrameError| config(format!("example1 schedule: {e}"));
    let schedule = match c.schedule.as_deref().unwrap_or("smooth") {
        "smooth" => {
            let lambda = c.lambda.unwrap_or(0.5);
            if lambda.is_nan() || lambda.abs() >= 1.0 {
                return Err(config(format!("example1.lambda must lie in (-1, 1), got {lambda}")));
            }
            let rows = (2..=n_max)
                .map(|r| {
                    (0..1u64 << (r - 1))
                        .map(|n| (1.0 + lambda * (TAU * n as f64 / (1u64 << r) as f64).cos()) / 2.0)
                        .collect()
                })
                .collect();
            example1_forward(&AngleSolution::new(n_max, rows).map_err(shape)?)
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let rows = (2..=n_max)
                .map(|r| (0..1usize << (r - 1)).map(|_| rng.random_range(0.02..0.98)).collect())
                .collect();
            example1_forward(&AngleSolution::new(n_max, rows).map_err(shape)?)
        }
        "inline" => {
            let f = c.f.clone().ok_or_else(|| config("example1.schedule = \"inline\" needs example1.f"))?;
            Schedule::new(n_max, f).map_err(shape)?
        }
        "file" => {
            let path = c.file.as_ref().ok_or_else(|| config("example1.schedule = \"file\" needs example1.file"))?;
            let path = cfg.path(path);
            let text = fs::read_to_string(&path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
            let file: ScheduleFile = toml::from_str(&text).map_err(|e| config(format!("schedule file: {e}")))?;
            Schedule::new(file.n_max, file.f).map_err(shape)?
        }
        other => return Err(config(format!("unknown example1.schedule `{other}` (smooth, random, inline, file)"))),
    };
    let margins = check_example1_feasibility(&schedule);
    let mut out = Outcome::default();
    out.artifact("feasibility.csv", margins_csv(&margins));
    let worst = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    out.summary.push(format!("{} chains, smallest margin {worst:.3e}", margins.len()));
    match solve_example1(&schedule) {
        Ok(sol) => {
            out.artifact("solution.toml", toml_text(&SolutionReport::new(&sol))?);
            let verdict = Verdict::aggregate(margins.iter().map(|m| m.verdict));
            let count = |v| margins.iter().filter(|m| m.verdict == v).count();
            out.summary.push(format!(
                "chain margins: pass={} inconclusive={} fail={}",
                count(Verdict::Pass),
                count(Verdict::Inconclusive),
                count(Verdict::Fail)
            ));
            out.verdict = Some(verdict);
            Ok(out)
        }
        Err(FrameError::Infeasible(inf)) => {
            out.summary.push(format!("infeasible schedule: {inf}"));
            out.verdict = Some(Verdict::Fail);
            Ok(out)
        }
        Err(e) => Err(CliError::Failed(e.to_string())),
    }
}

fn example2(cfg: &Resolved) -> Result<Outcome, CliError> {
    let c = &cfg.raw.example2;
    let n_max = schedule_horizon(c.n_max)?;
    let count = 1usize << (n_max - 1);
    let targets = match &c.targets {
        Some(t) => t.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..count).map(|_| rng.random_range(0.05..0.95)).collect()
        }
    };
    let shape = |e: FrameError| config(format!("example2 schedule: {e}"));
    let schedule = match &c.xi {
        Some(xi) => SparseSchedule::new(n_max, targets, xi.clone()).map_err(shape)?,
        None => {
            if let Some(t) = targets.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
                return Err(config(format!("geometric xi needs targets in (0, 1), got {t}")));
            }
            SparseSchedule::geometric(n_max, targets).map_err(shape)?
        }
    };
    let mut out = Outcome::default();
    match solve_example2(&schedule) {
        Ok(sol) => {
            // xi(n, N) -> 1 is a limit; judge it on the stored levels.
            let mut csv = String::from("n,xi_last,residual,verdict\n");
            let mut verdicts = Vec::with_capacity(count);
            for n in 0..count as u64 {
                let first = periodic_frames::schedules::sparse_activation(n) + 1;
                let seq: Vec<f64> = (first..=n_max).map(|l| schedule.xi(n, l)).collect();
                let check = limit_verdict(&seq, 1.0, &cfg.tol, Monotone::Nondecreasing);
                csv.push_str(&format!("{n},{:.16e},{:.16e},{}\n", seq[seq.len() - 1], check.residual, check.verdict));
                verdicts.push(check.verdict);
            }
            out.summary.push(format!(
                "solved {} levels, {} boundary entries with cos^2 = 1",
                n_max - 1,
                sol.boundary.len()
            ));
            out.artifact("solution.toml", toml_text(&SolutionReport::new(&sol))?);
            out.artifact("xi_limits.csv", csv);
            out.verdict = Some(Verdict::aggregate(verdicts));
        }
        Err(FrameError::Infeasible(inf)) => {
            out.summary.push(format!("infeasible schedule: {inf}"));
            out.verdict = Some(Verdict::Fail);
        }
        Err(e) => return Err(CliError::Failed(e.to_string())),
    }
    Ok(out)
}

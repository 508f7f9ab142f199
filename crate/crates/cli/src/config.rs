//! Run configuration: TOML schema, command-line overrides and validation.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use periodic_frames::{
    haar, Complex64, FrameSystem64, Mask64, RefinementChain64, Spectrum64, Tolerances, WaveletSystem64,
};
use serde::{Deserialize, Serialize};

/// Largest accepted horizon; level-`j` data grows like `2^j`.
pub const MAX_HORIZON: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Construct,
    Certify,
    Analyze,
    Example1,
    Example2,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = clap::ValueEnum::to_possible_value(self).expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub type Pair = [f64; 2];

pub fn to_complex(p: &Pair) -> Complex64 {
    Complex::new(p[0], p[1])
}

pub fn to_pair(c: &Complex64) -> Pair {
    [c.re, c.im]
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub horizon: Option<u32>,
    /// Spectra are stored on `|n| <= bound`.
    pub bound: Option<i64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub construct: ConstructConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub example1: Example1Config,
    #[serde(default)]
    pub example2: Example2Config,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub equality: Option<f64>,
    pub transform: Option<f64>,
    pub convergence: Option<f64>,
    pub drift: Option<f64>,
    pub zero: Option<f64>,
}

/// Where the chain and wavelet masks come from: the named `haar` generator,
/// a system file written by `construct`, or inline tables under `[system.inline]`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub generator: Option<String>,
    pub file: Option<PathBuf>,
    pub inline: Option<SystemData>,
}

/// Serialized chain and masks; also the format of `system.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemData {
    pub top_level: u32,
    pub top_spectrum: SpectrumData,
    /// `a_2 .. a_J`, each with `2^j` entries.
    pub scaling_masks: Vec<Vec<Pair>>,
    /// `wavelet_masks[j][m]` is `b^m_{j+1}` with `2^{j+1}` entries.
    pub wavelet_masks: Vec<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumData {
    pub n_min: i64,
    pub coeffs: Vec<Pair>,
}

impl SpectrumData {
    pub fn from_spectrum(s: &Spectrum64) -> Self {
        Self {
            n_min: s.n_min(),
            coeffs: s.coeffs().iter().map(to_pair).collect(),
        }
    }

    pub fn to_spectrum(&self) -> Spectrum64 {
        Spectrum64::new(self.n_min, self.coeffs.iter().map(to_complex).collect())
    }
}

impl SystemData {
    pub fn from_parts(chain: &RefinementChain64, wavelets: &WaveletSystem64) -> Self {
        let mask = |m: &Mask64| m.values().iter().map(to_pair).collect::<Vec<_>>();
        Self {
            top_level: chain.top_level(),
            top_spectrum: SpectrumData::from_spectrum(chain.top_spectrum()),
            scaling_masks: chain.scaling_masks().iter().map(mask).collect(),
            wavelet_masks: wavelets.all_masks().iter().map(|l| l.iter().map(mask).collect()).collect(),
        }
    }

    fn mask(level: u32, values: &[Pair], what: &str) -> Result<Mask64, ConfigError> {
        Mask64::new(level, values.iter().map(to_complex).collect())
            .or_else(|e| bad(format!("{what}: {e}")))
    }

    pub fn chain(&self) -> Result<RefinementChain64, ConfigError> {
        let masks = self
            .scaling_masks
            .iter()
            .enumerate()
            .map(|(i, v)| Self::mask(i as u32 + 2, v, &format!("scaling mask a_{}", i + 2)))
            .collect::<Result<Vec<_>, _>>()?;
        RefinementChain64::derive(self.top_spectrum.to_spectrum(), self.top_level, masks)
            .or_else(|e| bad(format!("refinement chain: {e}")))
    }

    pub fn wavelets(&self) -> Result<WaveletSystem64, ConfigError> {
        let masks = self
            .wavelet_masks
            .iter()
            .enumerate()
            .map(|(j, level)| {
                level
                    .iter()
                    .enumerate()
                    .map(|(m, v)| Self::mask(j as u32 + 1, v, &format!("wavelet mask (j={j}, m={m})")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        WaveletSystem64::new(masks).or_else(|e| bad(format!("wavelet masks: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
    pub oracle_trials: Option<usize>,
    pub oracle_degree: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    /// `haar`, `random` or `file`.
    pub angles: Option<String>,
    /// Relative size of the random departure from the Haar angles.
    pub amplitude: Option<f64>,
    pub file: Option<PathBuf>,
}

/// Single-generator angles per level: `t01[r]`, `t03[r]`, `sign[r]` for `r < 2^{j-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleFile {
    pub levels: Vec<AngleLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleLevel {
    pub level: u32,
    pub t01: Vec<f64>,
    pub t03: Vec<f64>,
    pub sign: Vec<i8>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// Inline input spectrum; a random polynomial of `degree` otherwise.
    pub input: Option<SpectrumData>,
    pub degree: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Config {
    pub n_max: Option<u32>,
    /// `smooth`, `random`, `inline` or `file`.
    pub schedule: Option<String>,
    pub lambda: Option<f64>,
    /// `f[N-2][n]` for `N = 2..=n_max`.
    pub f: Option<Vec<Vec<f64>>>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Config {
    pub n_max: Option<u32>,
    /// Inline targets for `n < 2^{n_max-1}`; random in `(0.05, 0.95)` otherwise.
    pub targets: Option<Vec<f64>>,
    /// Inline `xi[N-2][n]`; the geometric family otherwise.
    pub xi: Option<Vec<Vec<f64>>>,
}

/// Schedule file for `example1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub n_max: u32,
    pub f: Vec<Vec<f64>>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub horizon: Option<u32>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A validated configuration with sources resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: Mode,
    pub horizon: u32,
    pub bound: i64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tol: Tolerances,
    pub base_dir: PathBuf,
    pub raw: RunConfig,
}

impl Resolved {
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Chain and (configured) wavelet masks.
    pub fn system_parts(&self) -> Result<(RefinementChain64, WaveletSystem64), ConfigError> {
        let sys = &self.raw.system;
        let data = if let Some(file) = &sys.file {
            let path = self.path(file);
            let text = fs::read_to_string(&path)
                .or_else(|e| bad(format!("cannot read system file {}: {e}", path.display())))?;
            Some(toml::from_str::<SystemData>(&text).or_else(|e| bad(format!("system file {}: {e}", path.display())))?)
        } else {
            sys.inline.clone()
        };
        let (chain, wavelets) = match (data, sys.generator.as_deref()) {
            (Some(d), None) => (d.chain()?, d.wavelets()?),
            (Some(_), Some(g)) => return bad(format!("system sets generator `{g}` together with explicit tables")),
            (None, None | Some("haar")) => (haar::chain(self.horizon, self.bound), haar::wavelets(self.horizon)),
            (None, Some(g)) => return bad(format!("unknown system generator `{g}` (expected `haar`)")),
        };
        check_seeds(&wavelets)?;
        if chain.top_level() < self.horizon || wavelets.depth() < self.horizon {
            return bad(format!(
                "horizon {} exceeds the supplied system (chain to level {}, {} wavelet levels)",
                self.horizon,
                chain.top_level(),
                wavelets.depth()
            ));
        }
        Ok((chain, wavelets))
    }

    pub fn frame_system(&self) -> Result<FrameSystem64, ConfigError> {
        let (chain, wavelets) = self.system_parts()?;
        FrameSystem64::assemble(chain, wavelets).or_else(|e| bad(format!("system: {e}")))
    }
}

/// A single level-0 generator cannot carry both level-1 residues.
fn check_seeds(wavelets: &WaveletSystem64) -> Result<(), ConfigError> {
    if wavelets.depth() == 0 {
        return bad("the system has no wavelet levels");
    }
    let seeds = wavelets.masks_at(1);
    if seeds.len() == 1 && seeds[0].get(0).norm() > 0.0 && seeds[0].get(1).norm() > 0.0 {
        return bad(
            "a single level-0 generator with nonzero seeds on both residues cannot give a Parseval frame; \
             use two level-0 generators (rho0 = 2), e.g. seeds (1, 0) and (0, 1)",
        );
    }
    Ok(())
}

pub fn load(path: Option<&Path>) -> Result<(RunConfig, PathBuf), ConfigError> {
    match path {
        None => Ok((RunConfig::default(), PathBuf::from("."))),
        Some(p) => {
            let text = fs::read_to_string(p).or_else(|e| bad(format!("cannot read config {}: {e}", p.display())))?;
            let cfg = toml::from_str(&text).or_else(|e| bad(format!("config {}: {e}", p.display())))?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
            Ok((cfg, dir))
        }
    }
}

pub fn resolve(raw: RunConfig, base_dir: PathBuf, over: Overrides) -> Result<Resolved, ConfigError> {
    let Some(mode) = over.mode.or(raw.mode) else {
        return bad("no mode given (construct, certify, analyze, example1, example2)");
    };
    let horizon = over.horizon.or(raw.horizon).unwrap_or(12);
    if horizon == 0 || horizon > MAX_HORIZON {
        return bad(format!(
            "horizon {horizon} outside 1..={MAX_HORIZON}; level-j data takes O(2^j) memory"
        ));
    }
    let bound = raw.bound.unwrap_or(128);
    if bound < 1 {
        return bad(format!("bound must be positive, got {bound}"));
    }
    let d = Tolerances::default();
    let t = &raw.tolerances;
    let tol = Tolerances {
        equality: over.tol.or(t.equality).unwrap_or(d.equality),
        transform: t.transform.unwrap_or(d.transform),
        convergence: t.convergence.unwrap_or(d.convergence),
        drift: t.drift.unwrap_or(d.drift),
        zero: t.zero.unwrap_or(d.zero),
    };
    tol.validate().or_else(|e| bad(e.to_string()))?;
    let out = over.out.or_else(|| raw.out.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base_dir.join(p) }));
    Ok(Resolved {
        mode,
        horizon,
        bound,
        seed: over.seed.or(raw.seed).unwrap_or(0),
        out,
        tol,
        base_dir,
        raw,
    })
}

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coupling::CouplingMode;
use crate::error::{Error, Result};
use crate::fem::QuadratureSpec;
use crate::solver::BilaplaceCoupling;

/// Built-in experiment setups.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `[0, 2/3]` and `[1/3, 1]`, `-u'' = f`, zero end values.
    Seg1dPoisson,
    /// The same segments, `u'''' = f`, zero values and second derivatives at the ends.
    Seg1dBilaplace,
    /// Two rotated copies of the annulus `1 <= r <= 2`, `u = 0` at `r = 1`,
    /// `u = 1` at `r = 2`, no source.
    Annulus2dLaplace,
    /// The same annuli with `Δu = 1` and zero boundary values.
    Annulus2dPoisson,
    /// Two identical copies of the unit segment.
    DuplicatedMesh,
    /// Unit disk cut into two overlapping halves, `-Δu = f`, zero boundary values.
    HalfDisk2d,
    /// Meshes read from DMESH files; boundary values on the exterior boundary.
    Custom(Vec<PathBuf>),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Seg1dPoisson => "seg1d_poisson",
            Self::Seg1dBilaplace => "seg1d_bilaplace",
            Self::Annulus2dLaplace => "annulus2d_laplace",
            Self::Annulus2dPoisson => "annulus2d_poisson",
            Self::DuplicatedMesh => "duplicated_mesh",
            Self::HalfDisk2d => "halfdisk2d",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pde {
    Poisson,
    Heat,
    Bilaplace,
}

impl FromStr for Pde {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" | "laplace" => Ok(Self::Poisson),
            "heat" => Ok(Self::Heat),
            "bilaplace" => Ok(Self::Bilaplace),
            _ => Err(Error::Config(format!("unknown pde `{s}`"))),
        }
    }
}

/// Parsed experiment file. See the README for the key reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub pde: Option<Pde>,
    pub coupling: CouplingMode,
    pub bilaplace_coupling: BilaplaceCoupling,
    pub quadrature: QuadratureSpec,
    pub resolutions: Vec<usize>,
    /// Overrides the scenario's source term.
    pub source: Option<f64>,
    pub boundary_value: f64,
    pub dt: f64,
    pub initial: f64,
    pub penalty_weights: Vec<f64>,
    pub penalty_output: Option<PathBuf>,
    pub modes: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Seg1dPoisson,
            pde: None,
            coupling: CouplingMode::BoundaryOnly,
            bilaplace_coupling: BilaplaceCoupling::HighOrder,
            quadrature: QuadratureSpec::CornerAverage,
            resolutions: vec![20, 40, 80, 160],
            source: None,
            boundary_value: 0.0,
            dt: 1e-2,
            initial: 0.0,
            penalty_weights: Vec::new(),
            penalty_output: None,
            modes: 10,
            output: None,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{s}`"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

/// `corner_average`, `barycenter`, `symmetric_fixed_order(n)` or
/// `monte_carlo(samples, seed)`.
pub fn parse_quadrature(s: &str) -> Result<QuadratureSpec> {
    let s = s.trim();
    let bad = || Error::Config(format!("unknown quadrature `{s}`"));
    let args = |prefix: &str| -> Option<Vec<u64>> {
        let inner = s.strip_prefix(prefix)?.trim().strip_prefix('(')?.strip_suffix(')')?;
        inner.split(',').map(|a| a.trim().parse().ok()).collect()
    };
    let spec = match s {
        "corner_average" => QuadratureSpec::CornerAverage,
        "barycenter" => QuadratureSpec::Barycenter,
        _ => {
            if let Some(a) = args("symmetric_fixed_order") {
                match a[..] {
                    [n] => QuadratureSpec::SymmetricFixedOrder(n as usize),
                    _ => return Err(bad()),
                }
            } else if let Some(a) = args("monte_carlo") {
                match a[..] {
                    [samples, seed] => {
                        QuadratureSpec::MonteCarlo { samples_per_element: samples as usize, seed }
                    }
                    _ => return Err(bad()),
                }
            } else {
                return Err(bad());
            }
        }
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

pub struct DisplayQuadrature<'a>(pub &'a QuadratureSpec);

impl fmt::Display for DisplayQuadrature<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.0 {
            QuadratureSpec::CornerAverage => write!(f, "corner_average"),
            QuadratureSpec::Barycenter => write!(f, "barycenter"),
            QuadratureSpec::SymmetricFixedOrder(n) => write!(f, "symmetric_fixed_order({n})"),
            QuadratureSpec::MonteCarlo { samples_per_element, seed } => {
                write!(f, "monte_carlo({samples_per_element}, {seed})")
            }
        }
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut scenario: Option<String> = None;
        let mut meshes: Vec<PathBuf> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", lineno + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scenario" => scenario = Some(value.to_string()),
                "meshes" => meshes = parse_list::<String>(key, value)?.into_iter().map(|p| base.join(p)).collect(),
                "pde" => cfg.pde = Some(value.parse()?),
                "coupling" => cfg.coupling = value.parse()?,
                "bilaplace_coupling" => cfg.bilaplace_coupling = value.parse()?,
                "quadrature" => cfg.quadrature = parse_quadrature(value)?,
                "resolutions" => cfg.resolutions = parse_list(key, value)?,
                "source" => cfg.source = Some(parse_one(key, value)?),
                "boundary_value" => cfg.boundary_value = parse_one(key, value)?,
                "dt" => cfg.dt = parse_one(key, value)?,
                "initial" => cfg.initial = parse_one(key, value)?,
                "penalty_weights" => cfg.penalty_weights = parse_list(key, value)?,
                "penalty_output" => cfg.penalty_output = Some(base.join(value)),
                "modes" => cfg.modes = parse_one(key, value)?,
                "output" => cfg.output = Some(base.join(value)),
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        cfg.scenario = match scenario.as_deref() {
            None => return Err(Error::Config("missing `scenario`".into())),
            Some("seg1d_poisson") => Scenario::Seg1dPoisson,
            Some("seg1d_bilaplace") => Scenario::Seg1dBilaplace,
            Some("annulus2d_laplace") => Scenario::Annulus2dLaplace,
            Some("annulus2d_poisson") => Scenario::Annulus2dPoisson,
            Some("duplicated_mesh") => Scenario::DuplicatedMesh,
            Some("halfdisk2d") => Scenario::HalfDisk2d,
            Some("custom") if meshes.is_empty() => {
                return Err(Error::Config("custom scenario needs `meshes`".into()))
            }
            Some("custom") => Scenario::Custom(meshes),
            Some(other) => return Err(Error::Config(format!("unknown scenario `{other}`"))),
        };
        if !matches!(cfg.scenario, Scenario::Custom(_)) {
            if cfg.resolutions.len() < 2 {
                return Err(Error::Config("`resolutions` needs at least two entries".into()));
            }
            if cfg.resolutions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("`resolutions` must be strictly increasing".into()));
            }
        }
        if !(cfg.dt > 0.0) {
            return Err(Error::Config("`dt` must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

//! Experiment configuration: a flat TOML file, command-line overrides, and
//! validation with line references.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::fields::{AnalyticModel, Vec2};
use crate::integrators::SchemeOrder;
use crate::pic::PoissonSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    SingleParticleNoE,
    SingleParticleWithE,
    VlasovPoisson,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::SingleParticleNoE, Family::SingleParticleWithE, Family::VlasovPoisson];

    pub fn name(self) -> &'static str {
        match self {
            Family::SingleParticleNoE => "single_particle_no_e",
            Family::SingleParticleWithE => "single_particle_with_e",
            Family::VlasovPoisson => "vlasov_poisson",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn is_single_particle(self) -> bool {
        !matches!(self, Family::VlasovPoisson)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub epsilons: Vec<f64>,
    pub dts: Vec<f64>,
    pub orders: Vec<SchemeOrder>,
    pub t_final: f64,
    /// Curvature of the parabolic field `b = 1 + α x₁²`.
    pub alpha: f64,
    pub x0: Vec2,
    pub v0: Vec2,
    /// Reference fine step is `min(f ε², f Δt)` with this `f`.
    pub reference_factor: f64,
    /// RK4 substeps per `Δt` for the guiding-center reference.
    pub limit_substeps: usize,
    pub write_trajectories: bool,
    pub n_particles: usize,
    pub seed: u64,
    pub nx: usize,
    pub snapshot_times: Vec<f64>,
    pub write_particles: bool,
    pub poisson: PoissonSettings,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl ExperimentConfig {
    /// Defaults for `family`.
    pub fn defaults(family: Family) -> Self {
        let single = family.is_single_particle();
        Self {
            family,
            epsilons: if single { log_spaced(1e-3, 3.0, 25) } else { vec![0.05] },
            dts: if single { vec![0.01, 0.005, 0.0025] } else { vec![0.1] },
            orders: vec![SchemeOrder::Third],
            t_final: if single { 2.0 } else { 80.0 },
            alpha: 0.5,
            x0: Vec2::new(5.0, 4.0),
            v0: Vec2::new(5.0, 6.0),
            reference_factor: 0.1,
            limit_substeps: 100,
            write_trajectories: false,
            n_particles: 10_000,
            seed: 1,
            nx: 65,
            snapshot_times: vec![10.0, 20.0, 55.0, 80.0],
            write_particles: true,
            poisson: PoissonSettings::default(),
            out_dir: PathBuf::from("out"),
            workers: 1,
        }
    }

    /// External field model of the family.
    pub fn model(&self) -> AnalyticModel {
        match self.family {
            Family::SingleParticleNoE => AnalyticModel::ParabolicNoE { alpha: self.alpha },
            Family::SingleParticleWithE => AnalyticModel::ParabolicLinearE { alpha: self.alpha },
            Family::VlasovPoisson => AnalyticModel::DiskConfinement,
        }
    }

    /// Fine RK4 step bound for the reference at `(ε, Δt)`.
    pub fn reference_dt(&self, epsilon: f64, dt: f64) -> f64 {
        (self.reference_factor * epsilon * epsilon).min(self.reference_factor * dt)
    }
}

/// `n` points from `lo` to `hi`, evenly spaced in `log ε`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Values given on the command line; they replace the file's values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub dt: Option<f64>,
    pub order: Option<u8>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("{location}: {field}: {message}")]
    Invalid {
        field: &'static str,
        location: Location,
        message: String,
    },
}

/// Where an offending value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    CommandLine(&'static str),
    Default,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::CommandLine(flag) => write!(f, "command line {flag}"),
            Location::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: String,
    epsilon_list: Option<Vec<f64>>,
    dt_list: Option<Vec<f64>>,
    orders: Option<Vec<i64>>,
    t_final: Option<f64>,
    alpha: Option<f64>,
    x0: Option<[f64; 2]>,
    v0: Option<[f64; 2]>,
    reference_factor: Option<f64>,
    limit_substeps: Option<i64>,
    write_trajectories: Option<bool>,
    n_particles: Option<i64>,
    seed: Option<i64>,
    nx: Option<i64>,
    snapshot_times: Option<Vec<f64>>,
    write_particles: Option<bool>,
    poisson_tolerance: Option<f64>,
    poisson_max_iterations: Option<i64>,
    out_dir: Option<PathBuf>,
    workers: Option<i64>,
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with(path, &Overrides::default())
}

pub fn parse_config_with(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string().trim_end().to_string()))?;
    Builder { text }.build(raw, overrides)
}

struct Builder<'a> {
    text: &'a str,
}

impl Builder<'_> {
    /// 1-based line of the first `key = …` assignment.
    fn line_of(&self, key: &str) -> Location {
        self.text
            .lines()
            .position(|line| {
                let line = line.trim_start();
                line.strip_prefix(key)
                    .map(|rest| rest.trim_start().starts_with('='))
                    .unwrap_or(false)
            })
            .map(|i| Location::Line(i + 1))
            .unwrap_or(Location::Default)
    }

    fn invalid(&self, field: &'static str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { field, location: self.line_of(key), message: message.into() }
    }

    fn count(&self, field: &'static str, value: Option<i64>, min: i64) -> Result<Option<usize>, ConfigError> {
        match value {
            Some(v) if v < min => Err(self.invalid(field, field, format!("must be at least {min}, got {v}"))),
            Some(v) => Ok(Some(v as usize)),
            None => Ok(None),
        }
    }

    fn build(&self, raw: RawConfig, ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let family = Family::from_name(raw.family.trim()).ok_or_else(|| {
            let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
            self.invalid("family", "family", format!("expected one of {}, got {:?}", names.join(", "), raw.family))
        })?;
        let mut cfg = ExperimentConfig::defaults(family);

        if let Some(v) = raw.epsilon_list {
            cfg.epsilons = v;
        }
        if let Some(v) = raw.dt_list {
            cfg.dts = v;
        }
        if let Some(v) = raw.orders {
            cfg.orders = v
                .into_iter()
                .map(|o| {
                    u8::try_from(o)
                        .ok()
                        .and_then(|o| SchemeOrder::try_from(o).ok())
                        .ok_or_else(|| self.invalid("orders", "orders", format!("scheme order must be 1, 2 or 3, got {o}")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = raw.t_final {
            cfg.t_final = v;
        }
        if let Some(v) = raw.alpha {
            cfg.alpha = v;
        }
        if let Some([a, b]) = raw.x0 {
            cfg.x0 = Vec2::new(a, b);
        }
        if let Some([a, b]) = raw.v0 {
            cfg.v0 = Vec2::new(a, b);
        }
        if let Some(v) = raw.reference_factor {
            cfg.reference_factor = v;
        }
        if let Some(v) = self.count("limit_substeps", raw.limit_substeps, 1)? {
            cfg.limit_substeps = v;
        }
        if let Some(v) = raw.write_trajectories {
            cfg.write_trajectories = v;
        }
        if let Some(v) = self.count("n_particles", raw.n_particles, 1)? {
            cfg.n_particles = v;
        }
        if let Some(v) = raw.seed {
            cfg.seed = u64::try_from(v).map_err(|_| self.invalid("seed", "seed", format!("must be non-negative, got {v}")))?;
        }
        if let Some(v) = self.count("nx", raw.nx, 3)? {
            cfg.nx = v;
        }
        if let Some(v) = raw.snapshot_times {
            cfg.snapshot_times = v;
        }
        if let Some(v) = raw.write_particles {
            cfg.write_particles = v;
        }
        if let Some(v) = raw.poisson_tolerance {
            cfg.poisson.tolerance = v;
        }
        if let Some(v) = self.count("poisson_max_iterations", raw.poisson_max_iterations, 1)? {
            cfg.poisson.max_iterations = v;
        }
        if let Some(v) = raw.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.count("workers", raw.workers, 1)? {
            cfg.workers = v;
        }

        self.apply_overrides(&mut cfg, ov)?;
        self.validate(&cfg, ov)?;
        Ok(cfg)
    }

    fn apply_overrides(&self, cfg: &mut ExperimentConfig, ov: &Overrides) -> Result<(), ConfigError> {
        if let Some(e) = ov.epsilon {
            cfg.epsilons = vec![e];
        }
        if let Some(dt) = ov.dt {
            cfg.dts = vec![dt];
        }
        if let Some(o) = ov.order {
            let order = SchemeOrder::try_from(o).map_err(|e| ConfigError::Invalid {
                field: "orders",
                location: Location::CommandLine("--order"),
                message: e.to_string(),
            })?;
            cfg.orders = vec![order];
        }
        if let Some(out) = &ov.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = ov.seed {
            cfg.seed = seed;
        }
        if let Some(w) = ov.workers {
            if w == 0 {
                return Err(ConfigError::Invalid {
                    field: "workers",
                    location: Location::CommandLine("--workers"),
                    message: "must be at least 1".into(),
                });
            }
            cfg.workers = w;
        }
        Ok(())
    }

    fn validate(&self, cfg: &ExperimentConfig, ov: &Overrides) -> Result<(), ConfigError> {
        let loc = |key: &str, flag: Option<&'static str>| match flag {
            Some(f) => Location::CommandLine(f),
            None => self.line_of(key),
        };
        let positive = |field: &'static str, key: &str, flag: Option<&'static str>, values: &[f64]| {
            if values.is_empty() {
                return Err(ConfigError::Invalid { field, location: loc(key, flag), message: "must not be empty".into() });
            }
            match values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                Some(bad) => Err(ConfigError::Invalid {
                    field,
                    location: loc(key, flag),
                    message: format!("values must be positive and finite, got {bad}"),
                }),
                None => Ok(()),
            }
        };
        positive("epsilon_list", "epsilon_list", ov.epsilon.map(|_| "--epsilon"), &cfg.epsilons)?;
        positive("dt_list", "dt_list", ov.dt.map(|_| "--dt"), &cfg.dts)?;
        if cfg.orders.is_empty() {
            return Err(self.invalid("orders", "orders", "must not be empty"));
        }
        if !(cfg.t_final.is_finite() && cfg.t_final >= 0.0) {
            return Err(self.invalid("t_final", "t_final", format!("must be finite and non-negative, got {}", cfg.t_final)));
        }
        if cfg.family.is_single_particle() && cfg.t_final == 0.0 {
            return Err(self.invalid("t_final", "t_final", "error norms need a positive horizon"));
        }
        if !(cfg.alpha.is_finite() && cfg.alpha > 0.0) {
            return Err(self.invalid("alpha", "alpha", format!("must be positive, got {}", cfg.alpha)));
        }
        if !cfg.x0.is_finite() {
            return Err(self.invalid("x0", "x0", "must be finite"));
        }
        if !cfg.v0.is_finite() {
            return Err(self.invalid("v0", "v0", "must be finite"));
        }
        if !(cfg.reference_factor.is_finite() && cfg.reference_factor > 0.0) {
            return Err(self.invalid("reference_factor", "reference_factor", "must be positive"));
        }
        if let Some(bad) = cfg.snapshot_times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(self.invalid("snapshot_times", "snapshot_times", format!("times must be non-negative, got {bad}")));
        }
        if !(cfg.poisson.tolerance.is_finite() && cfg.poisson.tolerance > 0.0) {
            return Err(self.invalid("poisson_tolerance", "poisson_tolerance", "must be positive"));
        }
        Ok(())
    }
}

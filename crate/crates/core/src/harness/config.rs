use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupSpec;
use crate::kernels::{KernelVariant, BOUNDARY_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EinsteinCheck,
    MaCheck,
    BLimit,
    Fefferman,
    KernelIdentity,
    GroupValidate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::EinsteinCheck,
        ExperimentKind::MaCheck,
        ExperimentKind::BLimit,
        ExperimentKind::Fefferman,
        ExperimentKind::KernelIdentity,
        ExperimentKind::GroupValidate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EinsteinCheck => "einstein-check",
            ExperimentKind::MaCheck => "ma-check",
            ExperimentKind::BLimit => "b-limit",
            ExperimentKind::Fefferman => "fefferman",
            ExperimentKind::KernelIdentity => "kernel-identity",
            ExperimentKind::GroupValidate => "group-validate",
        }
    }

    /// Tolerance used when the config leaves it unset. For identity-class
    /// experiments this bounds a relative residual; for negative controls it
    /// is the level residuals must exceed.
    pub fn default_tolerance(self, expect: Expectation) -> f64 {
        if expect == Expectation::Violation {
            return 1e-2;
        }
        match self {
            ExperimentKind::EinsteinCheck | ExperimentKind::MaCheck | ExperimentKind::KernelIdentity => 1e-8,
            ExperimentKind::BLimit => 1e-2,
            ExperimentKind::Fefferman => 0.2,
            ExperimentKind::GroupValidate => crate::groups::GROUP_TOL,
        }
    }

    /// Lowest jet order the experiment needs.
    pub fn min_jet_order(self) -> usize {
        match self {
            ExperimentKind::EinsteinCheck => 4,
            ExperimentKind::MaCheck | ExperimentKind::KernelIdentity | ExperimentKind::BLimit => 2,
            ExperimentKind::Fefferman | ExperimentKind::GroupValidate => 0,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Whether the experiment is expected to confirm an identity or to exhibit
/// a violation of it (negative control).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Identity,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    /// `1 − t` geometric between `1 − start` and `1 − stop`.
    #[default]
    GeometricToOne,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl RadiiSpec {
    pub fn radii(&self) -> Vec<f64> {
        let m = self.count;
        if m == 1 {
            return vec![self.start];
        }
        (0..m)
            .map(|k| {
                let f = k as f64 / (m - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * f,
                    Spacing::GeometricToOne => {
                        let (a, b) = ((1.0 - self.start).ln(), (1.0 - self.stop).ln());
                        1.0 - (a + (b - a) * f).exp()
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sampling {
    /// Points `t·direction` for a real unit direction.
    Ray { direction: Vec<f64>, radii: RadiiSpec },
    /// Uniform in the ball of radius `max_radius`.
    Random { seed: u64, count: usize, max_radius: f64 },
    /// Tensor grid over the real coordinates `(x₁, y₁, …)`, keeping the nodes
    /// inside the ball of radius `max_radius`.
    Grid {
        lower: f64,
        upper: f64,
        count: usize,
        #[serde(default = "default_grid_radius")]
        max_radius: f64,
    },
}

fn default_grid_radius() -> f64 {
    0.95
}

const MAX_GRID_NODES: usize = 1_000_000;

impl Sampling {
    pub fn default_for(kind: ExperimentKind, dim: usize) -> Sampling {
        let mut direction = vec![0.0; dim];
        direction[0] = 1.0;
        match kind {
            ExperimentKind::EinsteinCheck | ExperimentKind::KernelIdentity | ExperimentKind::GroupValidate => {
                Sampling::Random {
                    seed: 0,
                    count: 50,
                    max_radius: 0.95,
                }
            }
            ExperimentKind::MaCheck => Sampling::Ray {
                direction,
                radii: RadiiSpec {
                    start: 0.1,
                    stop: 0.9,
                    count: 9,
                    spacing: Spacing::Linear,
                },
            },
            ExperimentKind::BLimit | ExperimentKind::Fefferman => Sampling::Ray {
                direction,
                radii: RadiiSpec {
                    start: 0.8,
                    stop: 1.0 - 0.2 * 0.5f64.powi(9),
                    count: 10,
                    spacing: Spacing::GeometricToOne,
                },
            },
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Sampling::Ray { direction, radii } => {
                if direction.len() != dim {
                    return Err(Error::config(
                        "sampling.direction",
                        format!("expected {dim} components, got {}", direction.len()),
                    ));
                }
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::config("sampling.direction", format!("not a unit vector (norm {norm})")));
                }
                if radii.count == 0 {
                    return Err(Error::config("sampling.radii.count", "must be positive"));
                }
                let rs = radii.radii();
                if rs.iter().any(|&t| !(t > 0.0 && t < 1.0 - BOUNDARY_MARGIN)) {
                    return Err(Error::config("sampling.radii", "radii must lie in (0, 1)"));
                }
                if rs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("sampling.radii", "radii must be strictly increasing"));
                }
            }
            Sampling::Random { count, max_radius, .. } => {
                if *count == 0 {
                    return Err(Error::config("sampling.count", "must be positive"));
                }
                if !(*max_radius > 0.0 && *max_radius < 1.0 - BOUNDARY_MARGIN) {
                    return Err(Error::config("sampling.max_radius", "must lie in (0, 1)"));
                }
            }
            Sampling::Grid {
                lower,
                upper,
                count,
                max_radius,
            } => {
                if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
                    return Err(Error::config("sampling.lower", "need lower < upper"));
                }
                if *count < 2 {
                    return Err(Error::config("sampling.count", "need at least 2 nodes per axis"));
                }
                let total = (*count as f64).powi(2 * dim as i32);
                if total > MAX_GRID_NODES as f64 {
                    return Err(Error::config(
                        "sampling.count",
                        format!("grid has {total} nodes, limit {MAX_GRID_NODES}"),
                    ));
                }
                if !(*max_radius > 0.0 && *max_radius < 1.0 - BOUNDARY_MARGIN) {
                    return Err(Error::config("sampling.max_radius", "must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// Sample points in canonical order.
    pub fn points(&self, dim: usize) -> Vec<Vec<Complex64>> {
        match self {
            Sampling::Ray { direction, radii } => radii
                .radii()
                .into_iter()
                .map(|t| direction.iter().map(|&d| Complex64::new(t * d, 0.0)).collect())
                .collect(),
            Sampling::Random {
                seed,
                count,
                max_radius,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        let g: Vec<f64> = (0..2 * dim).map(|_| rng.sample(StandardNormal)).collect();
                        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let u: f64 = rng.random();
                        let radius = max_radius * u.powf(1.0 / (2 * dim) as f64);
                        (0..dim)
                            .map(|k| Complex64::new(g[2 * k], g[2 * k + 1]) * (radius / norm))
                            .collect()
                    })
                    .collect()
            }
            Sampling::Grid {
                lower,
                upper,
                count,
                max_radius,
            } => {
                let axis: Vec<f64> = (0..*count)
                    .map(|k| lower + (upper - lower) * k as f64 / (*count - 1) as f64)
                    .collect();
                let total = count.pow(2 * dim as u32);
                (0..total)
                    .filter_map(|mut idx| {
                        let mut reals = Vec::with_capacity(2 * dim);
                        for _ in 0..2 * dim {
                            reals.push(axis[idx % count]);
                            idx /= count;
                        }
                        let z: Vec<Complex64> = reals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                        let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                        (r <= *max_radius).then_some(z)
                    })
                    .collect()
            }
        }
    }
}

/// Seed defining function for the `fefferman` experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeedSpec {
    /// `1 − |z|²`.
    Ball,
    /// `(1 − |z|²)·e^{a Re z₁}`.
    ExpRe { amplitude: f64 },
    /// `(1 − |z|²)(1 + a|z₁|²)`.
    #[default]
    Radial,
    /// `(πⁿ/n!·k)^{−1/(n+1)}` of the configured kernel density.
    Bergman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeffermanSpec {
    #[serde(default)]
    pub seed: SeedSpec,
    /// Amplitude used by [`SeedSpec::Radial`].
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Highest step `s`; defaults to `n + 1`.
    #[serde(default)]
    pub steps: Option<usize>,
}

fn default_amplitude() -> f64 {
    0.3
}

impl Default for FeffermanSpec {
    fn default() -> Self {
        FeffermanSpec {
            seed: SeedSpec::Radial,
            amplitude: default_amplitude(),
            steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::config("output.format", format!("expected json or csv, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    /// Destination file; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(default)]
    pub group: GroupSpec,
    #[serde(default)]
    pub kernel: KernelVariant,
    pub experiment: ExperimentKind,
    pub sampling: Sampling,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub jet_order: Option<usize>,
    #[serde(default)]
    pub expect: Expectation,
    /// Constant `c` of `det(u_ij̄) = c·e^u`; defaults to `C_n·|Γ|`.
    #[serde(default)]
    pub ma_constant: Option<f64>,
    #[serde(default)]
    pub fefferman: FeffermanSpec,
    /// Append finite-difference oracle columns.
    #[serde(default)]
    pub cross_check: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, dimension: usize) -> Self {
        ExperimentConfig {
            dimension,
            group: GroupSpec::Trivial,
            kernel: KernelVariant::Averaged,
            experiment,
            sampling: Sampling::default_for(experiment, dimension.max(1)),
            tolerance: None,
            jet_order: None,
            expect: Expectation::Identity,
            ma_constant: None,
            fefferman: FeffermanSpec::default(),
            cross_check: false,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::config("<config>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| self.experiment.default_tolerance(self.expect))
    }

    pub fn jet_order(&self) -> usize {
        self.jet_order.unwrap_or_else(|| self.experiment.min_jet_order())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || 2 * self.dimension > crate::jets::MAX_VARS {
            return Err(Error::config(
                "dimension",
                format!("must lie in 1..={}", crate::jets::MAX_VARS / 2),
            ));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("tolerance", "must be positive"));
            }
        }
        let order = self.jet_order();
        if order < self.experiment.min_jet_order() {
            return Err(Error::config(
                "jet_order",
                format!("{} needs order ≥ {}", self.experiment, self.experiment.min_jet_order()),
            ));
        }
        if order > crate::jets::MAX_ORDER {
            return Err(Error::config("jet_order", format!("exceeds {}", crate::jets::MAX_ORDER)));
        }
        if let Some(c) = self.ma_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::config("ma_constant", "must be positive"));
            }
        }
        if let Some(s) = self.fefferman.steps {
            if s == 0 {
                return Err(Error::config("fefferman.steps", "must be positive"));
            }
        }
        self.group
            .build(self.dimension)
            .map_err(|e| Error::config("group", e.to_string()))?;
        self.sampling.validate(self.dimension)
    }
}

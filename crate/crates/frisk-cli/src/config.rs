//! JSON run configuration: one document drives every subcommand, unknown
//! keys are rejected, and all randomness is derived from the seeds stored
//! here, so a config fully determines a run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use frisk::family::{DriftCoeffs, FamilyParams};
use frisk::grid::{Grid, GridDim};
use frisk::mc::McConfig;
use frisk::solver::RiskKind;
use frisk::stable::{SpectralAtom, StableParams, SubordinatorParams};
use frisk::system::{Barrier, DriftSpec, SafeSet, SigmaSpec, SystemSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub safe_set: SafeSetSection,
    #[serde(default)]
    pub kind: Option<RiskKind>,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub time: Option<TimeSection>,
    #[serde(default)]
    pub mc: Option<McSection>,
    #[serde(default)]
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub compare: Option<CompareSection>,
    #[serde(default)]
    pub dataset: Option<DatasetSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub atoms: Vec<SpectralAtom>,
    /// Absent for dataset generation, where drifts are sampled.
    #[serde(default)]
    pub drift: Option<DriftSection>,
}

/// Drift specification: a constant field, a named builtin, or stored
/// family coefficients.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSection {
    Constant { value: Vec<f64> },
    Builtin { name: String },
    Coeffs { coeffs: DriftCoeffs },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafeSetSection {
    pub barrier: Barrier,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dims: Vec<GridDim>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub horizons: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_paths: u64,
    pub ds: f64,
    pub seed: u64,
    #[serde(default)]
    pub starts: Vec<Vec<f64>>,
    #[serde(default = "default_cap_quantile")]
    pub cap_quantile: f64,
    #[serde(default = "default_cap_draws")]
    pub cap_draws: u64,
}

fn default_cap_quantile() -> f64 {
    0.999
}

fn default_cap_draws() -> u64 {
    10_000
}

impl McSection {
    pub fn mc_config(&self) -> McConfig {
        McConfig {
            n_paths: self.n_paths,
            ds: self.ds,
            cap_quantile: self.cap_quantile,
            cap_draws: self.cap_draws,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Evaluate the MC oracle at every stride-th region cell center.
    #[serde(default)]
    pub stride: Option<usize>,
    /// Explicit start points; used instead of `stride` when given.
    #[serde(default)]
    pub starts: Vec<Vec<f64>>,
    #[serde(default = "default_tolerance_abs")]
    pub tolerance_abs: f64,
    #[serde(default = "default_ci_mult")]
    pub ci_mult: f64,
}

fn default_tolerance_abs() -> f64 {
    0.02
}

fn default_ci_mult() -> f64 {
    3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub n_samples: u64,
    pub seed: u64,
    /// Stored horizons are k * t_max / n_t for k = 1..n_t; the solver step
    /// is t_max / n_t, so the lattice aligns exactly.
    pub t_max: f64,
    pub n_t: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub family: Option<FamilyParams>,
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn drift_spec(&self) -> Result<DriftSpec> {
        let Some(drift) = &self.system.drift else {
            bail!("this command needs system.drift in the config");
        };
        Ok(match drift {
            DriftSection::Constant { value } => DriftSpec::Constant(value.clone()),
            DriftSection::Builtin { name } => match name.as_str() {
                "fig1" => DriftSpec::Constant(vec![0.8]),
                "fig2" => DriftSpec::Constant(vec![0.3]),
                "ood" => DriftSpec::Coeffs(frisk::family::ood_drift()),
                other => bail!("unknown builtin drift '{other}' (have fig1, fig2, ood)"),
            },
            DriftSection::Coeffs { coeffs } => DriftSpec::Coeffs(coeffs.clone()),
        })
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let stable = StableParams::new(self.system.alpha, self.system.atoms.clone())?;
        let sub = SubordinatorParams::new(self.system.beta)?;
        Ok(SystemSpec::new(
            self.drift_spec()?,
            SigmaSpec::Constant(self.system.sigma),
            stable,
            sub,
        )?)
    }

    pub fn safe_set(&self) -> Result<SafeSet> {
        Ok(SafeSet::new(self.safe_set.barrier.clone())?)
    }

    pub fn grid(&self) -> Result<Grid> {
        let Some(grid) = &self.grid else {
            bail!("this command needs a grid section in the config");
        };
        Ok(Grid::from_dims(grid.dims.clone())?)
    }

    pub fn horizons(&self) -> Result<&[f64]> {
        let Some(time) = &self.time else {
            bail!("this command needs a time section in the config");
        };
        Ok(&time.horizons)
    }

    pub fn kind(&self) -> Result<RiskKind> {
        self.kind
            .ok_or_else(|| anyhow::anyhow!("this command needs a top-level kind (safety | recovery)"))
    }

    pub fn mc(&self) -> Result<&McSection> {
        self.mc
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this command needs an mc section in the config"))
    }

    pub fn solver(&self) -> Result<&SolverSection> {
        self.solver
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this command needs a solver section in the config"))
    }

    pub fn dataset(&self) -> Result<&DatasetSection> {
        self.dataset
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this command needs a dataset section in the config"))
    }

    /// Output directory, created on demand; defaults to the working directory.
    pub fn out_dir(&self) -> Result<PathBuf> {
        let dir = self
            .output
            .as_ref()
            .map(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(dir)
    }
}

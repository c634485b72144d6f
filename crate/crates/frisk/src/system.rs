//! System specification: drift and noise-scale maps, safe sets given by
//! barrier functions, and the region conventions shared by the Monte Carlo
//! and PDE routes.

use crate::error::{FriskError, Result};
use crate::family::{eval_drift, DriftCoeffs};
use crate::stable::{StableParams, SubordinatorParams};

/// Drift map f: R^n -> R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    /// Constant vector field (any dimension).
    Constant(Vec<f64>),
    /// A 2D drift given by stored coefficients (randomized family or the
    /// fixed out-of-distribution system).
    Coeffs(DriftCoeffs),
}

impl DriftSpec {
    pub fn dim(&self) -> usize {
        match self {
            DriftSpec::Constant(v) => v.len(),
            DriftSpec::Coeffs(_) => 2,
        }
    }

    /// Evaluates the drift into `out` (length = dim).
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            DriftSpec::Constant(v) => out.copy_from_slice(v),
            DriftSpec::Coeffs(c) => {
                let f = eval_drift(c, x);
                out.copy_from_slice(&f);
            }
        }
    }
}

/// Scalar noise-scale map sigma: R^n -> R (multiplies the stable noise).
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Constant(f64),
}

impl SigmaSpec {
    pub fn eval(&self, _x: &[f64]) -> f64 {
        match self {
            SigmaSpec::Constant(s) => *s,
        }
    }
}

/// Barrier function phi defining the safe set C = {phi >= 0}; a state is
/// classified safe iff phi(x) > 0 (the boundary counts as unsafe).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Barrier {
    /// 1D safe set {x > threshold}: phi(x) = x - threshold.
    HalfLineAbove { threshold: f64 },
    /// 1D safe set {x < threshold}: phi(x) = threshold - x.
    HalfLineBelow { threshold: f64 },
    /// Safe set {x_i < hi_i for all i}: phi(x) = min_i (hi_i - x_i).
    /// Unbounded below; matches corner-shaped safe sets like {x1 < 1, x2 < 1}.
    BelowAll { hi: Vec<f64> },
    /// Axis-aligned box: phi(x) = min_i min(x_i - lo_i, hi_i - x_i).
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Barrier {
    pub fn dim(&self) -> usize {
        match self {
            Barrier::HalfLineAbove { .. } | Barrier::HalfLineBelow { .. } => 1,
            Barrier::BelowAll { hi } => hi.len(),
            Barrier::Box { lo, .. } => lo.len(),
        }
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        match self {
            Barrier::HalfLineAbove { threshold } => x[0] - threshold,
            Barrier::HalfLineBelow { threshold } => threshold - x[0],
            Barrier::BelowAll { hi } => x
                .iter()
                .zip(hi)
                .map(|(xi, h)| h - xi)
                .fold(f64::INFINITY, f64::min),
            Barrier::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(xi, (l, h))| (xi - l).min(h - xi))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Barrier::HalfLineAbove { threshold } | Barrier::HalfLineBelow { threshold } => {
                if !threshold.is_finite() {
                    return Err(FriskError::Config("barrier threshold must be finite".into()));
                }
            }
            Barrier::BelowAll { hi } => {
                if hi.is_empty() || hi.iter().any(|v| !v.is_finite()) {
                    return Err(FriskError::Config("barrier bounds must be finite".into()));
                }
            }
            Barrier::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(FriskError::Config("box bounds must match in length".into()));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite() && l < h) {
                        return Err(FriskError::Config(format!(
                            "box requires finite lo < hi, got [{l}, {h}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The safe set C = {phi >= 0} with interior {phi > 0}.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeSet {
    barrier: Barrier,
}

impl SafeSet {
    pub fn new(barrier: Barrier) -> Result<Self> {
        barrier.validate()?;
        Ok(SafeSet { barrier })
    }

    pub fn barrier(&self) -> &Barrier {
        &self.barrier
    }

    pub fn dim(&self) -> usize {
        self.barrier.dim()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.barrier.phi(x)
    }

    /// Safe iff phi(x) > 0; the boundary counts as unsafe.
    pub fn is_safe(&self, x: &[f64]) -> bool {
        self.phi(x) > 0.0
    }
}

/// Which region a solve or simulation lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Interior of the safe set, {phi > 0} (safety problems).
    Interior,
    /// Complement including the boundary, {phi <= 0} (recovery problems).
    Complement,
}

impl RegionKind {
    /// Membership of a barrier value in this region.
    pub fn contains(self, phi: f64) -> bool {
        match self {
            RegionKind::Interior => phi > 0.0,
            RegionKind::Complement => phi <= 0.0,
        }
    }
}

/// Full system: dX_s = f(X_s) ds + sigma(X_s) dL_s run through the inverse
/// subordinator time change Y_t = X_{E_t}.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    dim: usize,
    pub drift: DriftSpec,
    pub sigma: SigmaSpec,
    pub stable: StableParams,
    pub subordinator: SubordinatorParams,
}

impl SystemSpec {
    pub fn new(
        drift: DriftSpec,
        sigma: SigmaSpec,
        stable: StableParams,
        subordinator: SubordinatorParams,
    ) -> Result<Self> {
        let dim = stable.dim();
        if dim != 1 && dim != 2 {
            return Err(FriskError::Config(format!(
                "supported dimensions are 1 and 2, got {dim}"
            )));
        }
        if drift.dim() != dim {
            return Err(FriskError::Config(format!(
                "drift dimension {} does not match noise dimension {dim}",
                drift.dim()
            )));
        }
        match sigma {
            SigmaSpec::Constant(s) if !(s >= 0.0) || !s.is_finite() => {
                return Err(FriskError::Config(format!(
                    "noise scale must be finite and >= 0, got {s}"
                )));
            }
            _ => {}
        }
        Ok(SystemSpec {
            dim,
            drift,
            sigma,
            stable,
            subordinator,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

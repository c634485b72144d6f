//! Monte Carlo risk estimation.
//!
//! Each path simulates the operational-time dynamics once up to an
//! operational cap, then compares its event time against one randomized
//! horizon draw E_T per requested horizon: safety succeeds when the exit
//! time is >= E_T, recovery when the recovery time is <= E_T.
//!
//! The cap is the `cap_quantile` quantile of E_{T_max}, estimated from
//! `cap_draws` draws on the run's "cap" substream; paths still alive at the
//! cap are scored as if the event never happens, which biases each estimate
//! by at most `bias_bound` = 1 - cap_quantile (exactly 0 when beta = 1 and
//! the horizon is deterministic).
//!
//! Stream discipline: path i uses `stream.child(i)`; within it, substream 0
//! drives the path and substream j + 1 draws the horizon-j E_T. Success
//! counts are integers reduced associatively, so results are identical for
//! any worker count.

use rayon::prelude::*;

use crate::error::{FriskError, Result};
use crate::rng::RngStream;
use crate::sim::{first_exit_time_euler, first_recovery_time_euler, EulerConfig};
use crate::solver::RiskKind;
use crate::stable::sample_inverse_subordinator;
use crate::stats::Estimate;
use crate::system::{SafeSet, SystemSpec};

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub n_paths: u64,
    /// Operational-time Euler step.
    pub ds: f64,
    /// Quantile of E_{T_max} used as the operational cap.
    pub cap_quantile: f64,
    /// Draws used to estimate the cap quantile.
    pub cap_draws: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 10_000,
            ds: 1e-3,
            cap_quantile: 0.999,
            cap_draws: 10_000,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(FriskError::Config("n_paths must be positive".into()));
        }
        if !(self.ds > 0.0) || !self.ds.is_finite() {
            return Err(FriskError::Config(format!(
                "ds must be positive, got {}",
                self.ds
            )));
        }
        if !(self.cap_quantile > 0.0 && self.cap_quantile < 1.0) {
            return Err(FriskError::Config(format!(
                "cap quantile must lie in (0, 1), got {}",
                self.cap_quantile
            )));
        }
        if self.cap_draws < 100 {
            return Err(FriskError::Config(
                "cap estimation needs at least 100 draws".into(),
            ));
        }
        Ok(())
    }
}

/// Operational cap and the score bias it induces.
#[derive(Debug, Clone, Copy)]
pub struct CapInfo {
    pub s_max: f64,
    pub bias_bound: f64,
}

/// Estimates the operational cap for the largest horizon. Deterministic
/// horizons (beta = 1) need no cap margin at all.
pub fn estimate_cap(
    sys: &SystemSpec,
    t_max: f64,
    cfg: &McConfig,
    stream: &RngStream,
) -> Result<CapInfo> {
    let beta = sys.subordinator.beta();
    if sys.subordinator.is_memoryless() {
        return Ok(CapInfo {
            s_max: t_max,
            bias_bound: 0.0,
        });
    }
    let mut rng = stream.rng();
    let mut draws = Vec::with_capacity(cfg.cap_draws as usize);
    for _ in 0..cfg.cap_draws {
        draws.push(sample_inverse_subordinator(beta, t_max, &mut rng)?);
    }
    draws.sort_by(f64::total_cmp);
    let idx = ((cfg.cap_quantile * cfg.cap_draws as f64).ceil() as usize)
        .clamp(1, cfg.cap_draws as usize)
        - 1;
    Ok(CapInfo {
        s_max: draws[idx],
        bias_bound: 1.0 - cfg.cap_quantile,
    })
}

fn validate_horizons(horizons: &[f64]) -> Result<f64> {
    if horizons.is_empty() {
        return Err(FriskError::Config("need at least one horizon".into()));
    }
    let mut prev = -1.0;
    for &t in horizons {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(FriskError::Config(format!("horizon {t} must be >= 0")));
        }
        if t <= prev {
            return Err(FriskError::Config(
                "horizons must be strictly ascending".into(),
            ));
        }
        prev = t;
    }
    Ok(prev)
}

/// Success counts per horizon for one start, reduced over paths.
fn run_paths(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    horizons: &[f64],
    cfg: &McConfig,
    stream: &RngStream,
    kind: RiskKind,
    cap: &CapInfo,
) -> Result<Vec<u64>> {
    let beta = sys.subordinator.beta();
    let memoryless = sys.subordinator.is_memoryless();
    let euler = EulerConfig {
        ds: cfg.ds,
        s_max: cap.s_max,
    };
    let nh = horizons.len();
    let counts = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<u64>> {
            let path_stream = stream.child(i);
            let mut rng = path_stream.child(0).rng();
            let rec = match kind {
                RiskKind::Safety => first_exit_time_euler(sys, safe, x0, &euler, &mut rng)?,
                RiskKind::Recovery => {
                    first_recovery_time_euler(sys, safe, x0, &euler, &mut rng)?
                }
            };
            let event_time = rec.op_time; // infinity when no event by the cap
            let mut row = vec![0u64; nh];
            for (j, &t) in horizons.iter().enumerate() {
                let e_t = if memoryless {
                    t
                } else {
                    let mut hrng = path_stream.child(j as u64 + 1).rng();
                    sample_inverse_subordinator(beta, t, &mut hrng)?
                };
                let success = match kind {
                    RiskKind::Safety => event_time >= e_t,
                    RiskKind::Recovery => rec.exited && event_time <= e_t,
                };
                if success {
                    row[j] = 1;
                }
            }
            Ok(row)
        })
        .try_reduce(
            || vec![0u64; nh],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(counts)
}

fn estimates_from_counts(counts: &[u64], n: u64) -> Vec<Estimate> {
    counts
        .iter()
        .map(|&s| Estimate::from_successes(s, n))
        .collect()
}

/// P(exit time >= E_T) for a start inside the safe set, one estimate per
/// horizon.
pub fn mc_safety(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    horizons: &[f64],
    cfg: &McConfig,
    stream: &RngStream,
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    let t_max = validate_horizons(horizons)?;
    if !(safe.phi(x0) > 0.0) {
        return Err(FriskError::Config(
            "safety start lies outside the safe set; use the recovery estimator".into(),
        ));
    }
    let cap = estimate_cap(sys, t_max, cfg, &stream.named("cap"))?;
    let counts = run_paths(sys, safe, x0, horizons, cfg, stream, RiskKind::Safety, &cap)?;
    Ok(estimates_from_counts(&counts, cfg.n_paths))
}

/// P(recovery time <= E_T) for a start outside the safe set, one estimate
/// per horizon.
pub fn mc_recovery(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    horizons: &[f64],
    cfg: &McConfig,
    stream: &RngStream,
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    let t_max = validate_horizons(horizons)?;
    if safe.phi(x0) > 0.0 {
        return Err(FriskError::Config(
            "recovery start lies inside the safe set; use the safety estimator".into(),
        ));
    }
    let cap = estimate_cap(sys, t_max, cfg, &stream.named("cap"))?;
    let counts = run_paths(
        sys,
        safe,
        x0,
        horizons,
        cfg,
        stream,
        RiskKind::Recovery,
        &cap,
    )?;
    Ok(estimates_from_counts(&counts, cfg.n_paths))
}

/// One estimated point of a risk table.
#[derive(Debug, Clone)]
pub struct McPoint {
    pub x: Vec<f64>,
    pub t: f64,
    pub est: Estimate,
}

/// Monte Carlo estimates over a grid of starts and horizons.
#[derive(Debug, Clone)]
pub struct McTable {
    pub kind: RiskKind,
    pub n_paths: u64,
    pub bias_bound: f64,
    /// Starts-major, horizons-minor.
    pub points: Vec<McPoint>,
}

impl McTable {
    /// CSV with one row per (start, horizon) point.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(1, |p| p.x.len());
        let mut out = String::new();
        match dim {
            1 => out.push_str("x,T,p,ci_low,ci_high,n_paths,bias_bound\n"),
            _ => out.push_str("x1,x2,T,p,ci_low,ci_high,n_paths,bias_bound\n"),
        }
        for p in &self.points {
            for c in &p.x {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.t, p.est.p, p.est.ci_low, p.est.ci_high, self.n_paths, self.bias_bound
            ));
        }
        out
    }
}

/// Runs one path ensemble per start; start s uses `stream.child(s)` and the
/// cap comes from the run-level "cap" substream, shared by all starts.
pub fn mc_grid(
    sys: &SystemSpec,
    safe: &SafeSet,
    kind: RiskKind,
    starts: &[Vec<f64>],
    horizons: &[f64],
    cfg: &McConfig,
    stream: &RngStream,
) -> Result<McTable> {
    cfg.validate()?;
    let t_max = validate_horizons(horizons)?;
    if starts.is_empty() {
        return Err(FriskError::Config("need at least one start".into()));
    }
    for x0 in starts {
        let ok = match kind {
            RiskKind::Safety => safe.phi(x0) > 0.0,
            RiskKind::Recovery => safe.phi(x0) <= 0.0,
        };
        if !ok {
            return Err(FriskError::Config(format!(
                "start {x0:?} is on the wrong side of the barrier for {kind:?}"
            )));
        }
    }
    let cap = estimate_cap(sys, t_max, cfg, &stream.named("cap"))?;
    let mut points = Vec::with_capacity(starts.len() * horizons.len());
    for (s, x0) in starts.iter().enumerate() {
        let counts = run_paths(
            sys,
            safe,
            x0,
            horizons,
            cfg,
            &stream.child(s as u64),
            kind,
            &cap,
        )?;
        for (j, &t) in horizons.iter().enumerate() {
            points.push(McPoint {
                x: x0.clone(),
                t,
                est: Estimate::from_successes(counts[j], cfg.n_paths),
            });
        }
    }
    Ok(McTable {
        kind,
        n_paths: cfg.n_paths,
        bias_bound: cap.bias_bound,
        points,
    })
}

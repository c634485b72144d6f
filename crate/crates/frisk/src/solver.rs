//! Time-fractional risk field solver.
//!
//! Solves the Caputo evolution C d^beta/dt^beta u = L u + src on the
//! in-region cells of a generator, using the L1 discretization: with
//! weights b_k = (k+1)^{1-beta} - k^{1-beta} and c0 = 1/(Gamma(2-beta)
//! dt^beta), step n solves
//!
//!   (c0 I - L) u^n = c0 [ sum_{k=1}^{n-1} (b_{k-1} - b_k) u^{n-k}
//!                         + b_{n-1} u^0 ] + src.
//!
//! At beta = 1 the weights collapse to b = [1, 0, ...] and the scheme is
//! exactly backward Euler. The full history is retained (L1 is nonlocal);
//! the step matrix is factored once and reused.
//!
//! Safety fields solve survival on the safe set's interior with initial
//! value 1 and source b_far (paths that leave the grid while still inside
//! the region are counted as surviving). Recovery fields are the dual:
//! 1 - survival on the complement region.

use std::sync::atomic::{AtomicU64, Ordering};

use statrs::function::gamma::gamma;

use crate::error::{FriskError, Result};
use crate::generator::{build_generator, GeneratorMatrix};
use crate::grid::Grid;
use crate::linsolve::StepSolver;
use crate::system::{RegionKind, SafeSet, SystemSpec};

/// L1 weights b_k = (k+1)^{1-beta} - k^{1-beta}, k = 0..n-1.
#[derive(Debug, Clone)]
pub struct CaputoWeights {
    beta: f64,
    b: Vec<f64>,
}

pub fn caputo_weights(beta: f64, n: usize) -> Result<CaputoWeights> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(FriskError::Domain(format!(
            "caputo weights require beta in (0, 1], got {beta}"
        )));
    }
    let e = 1.0 - beta;
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        // k = 0 is exactly 1 for every beta (0^0 in powf would say otherwise).
        let w = if k == 0 {
            1.0
        } else {
            ((k + 1) as f64).powf(e) - (k as f64).powf(e)
        };
        b.push(w);
    }
    Ok(CaputoWeights { beta, b })
}

impl CaputoWeights {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn weights(&self) -> &[f64] {
        &self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskKind {
    Safety,
    Recovery,
}

impl RiskKind {
    /// Field value for states outside the solved region: a start outside the
    /// safe set has already exited (safety 0); a start inside has already
    /// recovered (recovery 1).
    pub fn exterior_value(self) -> f64 {
        match self {
            RiskKind::Safety => 0.0,
            RiskKind::Recovery => 1.0,
        }
    }
}

/// Risk probabilities on the in-region cells of a grid at a set of horizons.
#[derive(Debug, Clone)]
pub struct RiskField {
    pub kind: RiskKind,
    pub beta: f64,
    pub dt: f64,
    grid: Grid,
    region: RegionKind,
    /// Ascending flat grid indices of the solved cells (matrix rows).
    cells: Vec<usize>,
    t_grid: Vec<f64>,
    /// values[ti][row].
    values: Vec<Vec<f64>>,
}

impl RiskField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn region(&self) -> RegionKind {
        self.region
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row_of_cell(&self, flat: usize) -> Option<usize> {
        self.cells.binary_search(&flat).ok()
    }

    /// Value at a grid cell; cells outside the region take the exterior value.
    pub fn at_cell(&self, flat: usize, ti: usize) -> f64 {
        match self.row_of_cell(flat) {
            Some(row) => self.values[ti][row],
            None => self.kind.exterior_value(),
        }
    }

    /// Value at the cell containing x; errors off the grid.
    pub fn at_point(&self, x: &[f64], ti: usize) -> Result<f64> {
        let dim = self.grid.dim();
        if x.len() != dim {
            return Err(FriskError::Domain(format!(
                "point dimension {} vs grid dimension {dim}",
                x.len()
            )));
        }
        let mut idx = [0usize; 2];
        for d in 0..dim {
            let gd = self.grid.dims()[d];
            let rel = (x[d] - gd.lo) / gd.h();
            if rel < 0.0 || rel >= gd.n as f64 {
                return Err(FriskError::Domain(format!(
                    "point coordinate {} outside grid [{}, {}]",
                    x[d], gd.lo, gd.hi
                )));
            }
            idx[d] = rel as usize;
        }
        let flat = self.grid.flat(&idx[..dim]);
        Ok(self.at_cell(flat, ti))
    }

    /// Multilinear interpolation over the surrounding cell centers; errors
    /// off the grid. Queries in the outer half-cell margin clamp to the
    /// nearest center, and off-region corners take the exterior value.
    pub fn at_point_lerp(&self, x: &[f64], ti: usize) -> Result<f64> {
        let dim = self.grid.dim();
        if x.len() != dim {
            return Err(FriskError::Domain(format!(
                "point dimension {} vs grid dimension {dim}",
                x.len()
            )));
        }
        let mut lower = [0usize; 2];
        let mut theta = [0.0f64; 2];
        for d in 0..dim {
            let gd = self.grid.dims()[d];
            if x[d] < gd.lo || x[d] > gd.hi {
                return Err(FriskError::Domain(format!(
                    "point coordinate {} outside grid [{}, {}]",
                    x[d], gd.lo, gd.hi
                )));
            }
            // Center-lattice coordinate, clamped to [0, n-1].
            let u = ((x[d] - gd.lo) / gd.h() - 0.5).clamp(0.0, (gd.n - 1) as f64);
            let i = (u as usize).min(gd.n.saturating_sub(2));
            lower[d] = i;
            theta[d] = if gd.n == 1 { 0.0 } else { u - i as f64 };
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut idx = [0usize; 2];
            let mut w = 1.0;
            for d in 0..dim {
                let hi = (corner >> d) & 1 == 1;
                let gd = self.grid.dims()[d];
                idx[d] = (lower[d] + hi as usize).min(gd.n - 1);
                w *= if hi { theta[d] } else { 1.0 - theta[d] };
            }
            if w != 0.0 {
                acc += w * self.at_cell(self.grid.flat(&idx[..dim]), ti);
            }
        }
        Ok(acc)
    }
}

static VALIDATION_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide count of risk-field validation failures.
pub fn validation_violations() -> u64 {
    VALIDATION_VIOLATIONS.load(Ordering::Relaxed)
}

const BOUNDS_SLACK: f64 = 1e-9;
const MONOTONE_SLACK: f64 = 1e-8;

/// Checks probability bounds and monotonicity in the horizon (safety fields
/// never increase, recovery fields never decrease). Violations bump the
/// process-wide counter and return the first offending entry.
pub fn validate_risk_field(field: &RiskField) -> Result<()> {
    let fail = |msg: String| {
        VALIDATION_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        Err(FriskError::InvariantViolation(msg))
    };
    for (ti, vals) in field.values.iter().enumerate() {
        for (row, &v) in vals.iter().enumerate() {
            if !v.is_finite() || v < -BOUNDS_SLACK || v > 1.0 + BOUNDS_SLACK {
                return fail(format!(
                    "value {v} out of [0, 1] at horizon {} cell row {row}",
                    field.t_grid[ti]
                ));
            }
        }
    }
    for ti in 1..field.t_grid.len() {
        for row in 0..field.cells.len() {
            let (prev, cur) = (field.values[ti - 1][row], field.values[ti][row]);
            let bad = match field.kind {
                RiskKind::Safety => cur > prev + MONOTONE_SLACK,
                RiskKind::Recovery => cur < prev - MONOTONE_SLACK,
            };
            if bad {
                return fail(format!(
                    "{:?} field not monotone at cell row {row}: {prev} -> {cur} \
                     between horizons {} and {}",
                    field.kind,
                    field.t_grid[ti - 1],
                    field.t_grid[ti]
                ));
            }
        }
    }
    Ok(())
}

/// Maps each requested horizon to its step index, requiring lattice alignment.
fn horizon_steps(t_grid: &[f64], dt: f64) -> Result<Vec<usize>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(FriskError::Config(format!("dt must be positive, got {dt}")));
    }
    let mut steps = Vec::with_capacity(t_grid.len());
    let mut prev = -1.0;
    for &t in t_grid {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(FriskError::Config(format!("horizon {t} must be >= 0")));
        }
        if t <= prev {
            return Err(FriskError::Config(
                "horizons must be strictly ascending".into(),
            ));
        }
        prev = t;
        let k = (t / dt).round();
        if (t - k * dt).abs() > 1e-9 * t.max(1.0) {
            return Err(FriskError::Config(format!(
                "horizon {t} is not a multiple of dt = {dt}"
            )));
        }
        steps.push(k as usize);
    }
    Ok(steps)
}

/// Runs the L1 stepper for C d^beta u = L u + src from the constant initial
/// state u0, returning the field at each requested horizon.
pub fn solve_caputo(
    gen: &GeneratorMatrix,
    u0: f64,
    src: &[f64],
    t_grid: &[f64],
    dt: f64,
    beta: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = gen.n();
    if src.len() != n {
        return Err(FriskError::Config(format!(
            "source length {} vs {} cells",
            src.len(),
            n
        )));
    }
    let steps = horizon_steps(t_grid, dt)?;
    let n_steps = steps.last().copied().unwrap_or(0);
    let weights = caputo_weights(beta, n_steps.max(1))?;
    let b = weights.weights();
    // Gamma(2 - beta) is exactly 1 at beta = 1, keeping the scheme bitwise
    // backward Euler there.
    let gamma_2mb = if beta == 1.0 { 1.0 } else { gamma(2.0 - beta) };
    let c0 = 1.0 / (gamma_2mb * dt.powf(beta));
    let solver = StepSolver::new(gen, c0)?;

    let mut history: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    history.push(vec![u0; n]);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(t_grid.len());
    let mut rhs = vec![0.0; n];
    for step in 1..=n_steps {
        // rhs = c0 (sum_{k=1}^{step-1} (b_{k-1} - b_k) u^{step-k} + b_{step-1} u^0).
        for v in rhs.iter_mut() {
            *v = 0.0;
        }
        for k in 1..step {
            let w = b[k - 1] - b[k];
            if w == 0.0 {
                continue;
            }
            let u = &history[step - k];
            for i in 0..n {
                rhs[i] += w * u[i];
            }
        }
        let w0 = b[step - 1];
        if w0 != 0.0 {
            let u = &history[0];
            for i in 0..n {
                rhs[i] += w0 * u[i];
            }
        }
        for i in 0..n {
            rhs[i] = c0 * rhs[i] + src[i];
        }
        let next = solver.solve_warm(&rhs, history.last().map(Vec::as_slice))?;
        history.push(next);
    }
    for &k in &steps {
        out.push(history[k].clone());
    }
    Ok(out)
}

fn solve_region(
    sys: &SystemSpec,
    grid: &Grid,
    safe: &SafeSet,
    t_grid: &[f64],
    dt: f64,
    kind: RiskKind,
) -> Result<RiskField> {
    let region = match kind {
        RiskKind::Safety => RegionKind::Interior,
        RiskKind::Recovery => RegionKind::Complement,
    };
    let gen = build_generator(sys, grid, safe, region)?;
    let beta = sys.subordinator.beta();
    // Survival of the region: initial value 1, far-leakage reinjected as
    // still-surviving mass.
    let survival = solve_caputo(&gen, 1.0, gen.absorb_far(), t_grid, dt, beta)?;
    let values = match kind {
        RiskKind::Safety => survival,
        RiskKind::Recovery => survival
            .into_iter()
            .map(|row| row.into_iter().map(|v| 1.0 - v).collect())
            .collect(),
    };
    let field = RiskField {
        kind,
        beta,
        dt,
        grid: grid.clone(),
        region,
        cells: gen.cells().to_vec(),
        t_grid: t_grid.to_vec(),
        values,
    };
    validate_risk_field(&field)?;
    Ok(field)
}

/// Probability of remaining in the safe set through the randomized horizon,
/// on the interior cells.
pub fn solve_safety(
    sys: &SystemSpec,
    grid: &Grid,
    safe: &SafeSet,
    t_grid: &[f64],
    dt: f64,
) -> Result<RiskField> {
    solve_region(sys, grid, safe, t_grid, dt, RiskKind::Safety)
}

/// Probability of having entered the safe set by the randomized horizon,
/// on the complement cells: one minus complement survival.
pub fn solve_recovery(
    sys: &SystemSpec,
    grid: &Grid,
    safe: &SafeSet,
    t_grid: &[f64],
    dt: f64,
) -> Result<RiskField> {
    solve_region(sys, grid, safe, t_grid, dt, RiskKind::Recovery)
}

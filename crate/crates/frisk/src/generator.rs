//! Sub-Markovian discretization of the generator
//! L phi = f . grad phi + sigma^alpha(x) J_alpha phi
//! on a uniform grid, restricted to one region (interior of the safe set or
//! its complement) with absorption for everything that leaves the region.
//!
//! Construction per axis and jump direction (atoms are axis-aligned):
//! - jumps of size >= h/2 become rates to whole cells using exact integrals
//!   of the power-law density nu(y) = c |y|^{-1-alpha}: the cell at distance
//!   j h receives m_j = (c/alpha) [((j-1/2)h)^{-alpha} - ((j+1/2)h)^{-alpha}];
//! - sub-cell jumps (|y| < h/2) become a symmetric nearest-neighbor diffusion
//!   matching their second moment; the nearest-neighbor rate pair is assembled
//!   jointly from this surrogate, the j = 1 stencil masses, and the drift, so
//!   that its antisymmetric part equals the exact first moment and its
//!   symmetric part the exact second moment whenever positivity allows (pure
//!   upwinding would otherwise inject O(h^{2-alpha}) numerical diffusion
//!   through the compensator drift and fail the symbol certification);
//! - a compensator drift per side keeps the compound consistent with the
//!   characteristic exponent: for alpha < 1 it restores the sub-cell first
//!   moment, for alpha > 1 it cancels the full discrete stencil moment plus
//!   the absorbed tail moment (the psi convention is fully compensated), and
//!   for alpha = 1 it uses the exact cutoff identity at lambda near 1, whose
//!   constant involves 1 - gamma_E;
//! - everything landing outside the region splits into two channels: mass
//!   that crosses into the complement region (true boundary exit) and mass
//!   that leaves the grid while staying in the same region (truncation).
//!   The split uses the exact crossing radius of the barrier along the ray.
//! - alpha = 2 has no jump measure (kappa(2) = 0): the jump operator is the
//!   exact central second difference with coefficient sigma^2 (sum weights).

use num_complex::Complex64;

use crate::error::{FriskError, Result};
use crate::grid::Grid;
use crate::stable::kappa;
use crate::system::{Barrier, RegionKind, SafeSet, SystemSpec};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sparse generator over the in-region cells of a grid.
///
/// Row invariants: off-diagonals >= 0; diagonal = -(row off-diagonal sum +
/// absorb_boundary + absorb_far), so every row sums to the negated total
/// absorption (sub-Markovian).
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    grid: Grid,
    region: RegionKind,
    /// Flat grid index of each matrix row.
    cells: Vec<usize>,
    /// Matrix row for each flat grid cell (u32::MAX = not in region).
    index_of: Vec<u32>,
    /// Off-diagonal entries (column, rate) per row; rates >= 0.
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
    /// Rate into the complement region (boundary exit channel).
    absorb_boundary: Vec<f64>,
    /// Rate off the grid while staying inside the region (truncation channel).
    absorb_far: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn region(&self) -> RegionKind {
        self.region
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn absorb_boundary(&self) -> &[f64] {
        &self.absorb_boundary
    }

    pub fn absorb_far(&self) -> &[f64] {
        &self.absorb_far
    }

    /// Matrix row of a flat grid cell, if the cell is in the region.
    pub fn row_of_cell(&self, flat: usize) -> Option<usize> {
        let r = self.index_of[flat];
        (r != u32::MAX).then_some(r as usize)
    }

    /// Center coordinates of the cell behind a matrix row.
    pub fn center_of_row(&self, row: usize, out: &mut [f64]) {
        self.grid.center(self.cells[row], out);
    }

    /// y = L x (dense apply; test and Gillespie support).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = self.diag[r] * x[r];
            for &(c, rate) in &self.rows[r] {
                acc += rate * x[c as usize];
            }
            *yr = acc;
        }
    }

    /// Assembles a generator from explicit parts; the diagonal is derived.
    /// Intended for small synthetic chains in tests.
    pub fn from_parts(
        grid: Grid,
        region: RegionKind,
        rows: Vec<Vec<(u32, f64)>>,
        absorb_boundary: Vec<f64>,
        absorb_far: Vec<f64>,
    ) -> Result<Self> {
        let n = rows.len();
        if absorb_boundary.len() != n || absorb_far.len() != n || grid.num_cells() != n {
            return Err(FriskError::Config(
                "from_parts requires equal row, absorption, and cell counts".into(),
            ));
        }
        let diag = rows
            .iter()
            .zip(absorb_boundary.iter().zip(&absorb_far))
            .map(|(row, (a, b))| -(row.iter().map(|&(_, r)| r).sum::<f64>() + a + b))
            .collect();
        let gen = GeneratorMatrix {
            grid,
            region,
            cells: (0..n).collect(),
            index_of: (0..n as u32).collect(),
            rows,
            diag,
            absorb_boundary,
            absorb_far,
        };
        gen.validate()?;
        Ok(gen)
    }

    /// Checks the row invariants; returns the violation description.
    pub fn validate(&self) -> Result<()> {
        for r in 0..self.n() {
            let mut sum = 0.0;
            for &(c, rate) in &self.rows[r] {
                if !(rate >= 0.0) || !rate.is_finite() {
                    return Err(FriskError::InvariantViolation(format!(
                        "row {r}: off-diagonal rate {rate} to column {c}"
                    )));
                }
                sum += rate;
            }
            let (a, b) = (self.absorb_boundary[r], self.absorb_far[r]);
            if !(a >= 0.0) || !(b >= 0.0) {
                return Err(FriskError::InvariantViolation(format!(
                    "row {r}: negative absorption (a={a}, b={b})"
                )));
            }
            let expect = -(sum + a + b);
            let scale = sum.abs() + a.abs() + b.abs() + 1.0;
            if (self.diag[r] - expect).abs() > 1e-9 * scale {
                return Err(FriskError::InvariantViolation(format!(
                    "row {r}: diagonal {} vs -(offsum+a+b) = {expect}",
                    self.diag[r]
                )));
            }
        }
        Ok(())
    }
}

/// One-sided jump stencil for a single axis direction, per unit sigma^alpha.
struct SideStencil {
    /// Jump coefficient c = kappa(alpha) * (total weight on this signed axis).
    c: f64,
    /// m_j for j = 1..=jmax (cell at distance j h).
    masses: Vec<f64>,
    /// Second moment of sub-cell jumps, integral over (0, h/2) of y^2 nu(dy).
    m2_subcell: f64,
    /// Signed compensator drift contribution.
    delta: f64,
}

impl SideStencil {
    /// Remaining mass beyond radius r.
    fn tail(&self, alpha: f64, r: f64) -> f64 {
        self.c / alpha * r.powf(-alpha)
    }
}

fn build_side(alpha: f64, c: f64, h: f64, jmax: usize, s: f64) -> SideStencil {
    if c == 0.0 {
        return SideStencil {
            c,
            masses: vec![0.0; jmax],
            m2_subcell: 0.0,
            delta: 0.0,
        };
    }
    let mut masses = Vec::with_capacity(jmax);
    for j in 1..=jmax {
        let lo = (j as f64 - 0.5) * h;
        let hi = (j as f64 + 0.5) * h;
        masses.push(c / alpha * (lo.powf(-alpha) - hi.powf(-alpha)));
    }
    let m2_subcell = c * (0.5 * h).powf(2.0 - alpha) / (2.0 - alpha);
    let delta = if alpha < 1.0 {
        // Sub-cell jumps were symmetrized; restore their first moment.
        s * c * (0.5 * h).powf(1.0 - alpha) / (1.0 - alpha)
    } else if alpha > 1.0 {
        // Fully compensated convention: cancel the discrete stencil moment
        // plus the exact moment of the absorbed tail beyond the grid reach.
        let r = (jmax as f64 + 0.5) * h;
        let stencil_moment: f64 = masses
            .iter()
            .enumerate()
            .map(|(k, m)| m * (k + 1) as f64 * h)
            .sum();
        -s * (stencil_moment + c * r.powf(1.0 - alpha) / (alpha - 1.0))
    } else {
        // alpha = 1: cutoff identity. Compensating jumps up to a cell-boundary
        // cutoff lambda leaves the exact residual drift -c (1 - gamma_E - ln
        // lambda) per side; lambda is chosen near 1 (capped by the grid reach).
        let jstar = ((1.0 / h - 0.5).round().max(0.0) as usize).min(jmax);
        let lambda = (jstar as f64 + 0.5) * h;
        let stencil_moment: f64 = masses[..jstar]
            .iter()
            .enumerate()
            .map(|(k, m)| m * (k + 1) as f64 * h)
            .sum();
        -s * (stencil_moment + c * (1.0 - EULER_GAMMA - lambda.ln()))
    };
    SideStencil {
        c,
        masses,
        m2_subcell,
        delta,
    }
}

/// Total spectral weight per (axis, sign), validating axis alignment.
pub(crate) fn axis_weights(sys: &SystemSpec) -> Result<Vec<[f64; 2]>> {
    let dim = sys.dim();
    let mut w = vec![[0.0; 2]; dim]; // [plus, minus] per axis
    for atom in sys.stable.atoms() {
        let mut axis = None;
        for (d, &comp) in atom.direction.iter().enumerate() {
            if comp.abs() > 1e-12 {
                if axis.is_some() {
                    return Err(FriskError::Config(
                        "generator construction requires axis-aligned spectral atoms".into(),
                    ));
                }
                axis = Some((d, comp > 0.0));
            }
        }
        let (d, positive) = axis.expect("unit direction has a nonzero component");
        w[d][if positive { 0 } else { 1 }] += atom.weight;
    }
    Ok(w)
}

/// Radius along the ray x + s r e_axis at which the ray leaves `region`;
/// None if it never does. The start point is assumed inside the region.
fn region_exit_radius(
    barrier: &Barrier,
    region: RegionKind,
    x: &[f64],
    axis: usize,
    s: f64,
) -> Result<Option<f64>> {
    let r = match (barrier, region) {
        (Barrier::HalfLineAbove { threshold }, RegionKind::Interior) => {
            (s < 0.0).then(|| x[0] - threshold)
        }
        (Barrier::HalfLineAbove { threshold }, RegionKind::Complement) => {
            (s > 0.0).then(|| threshold - x[0])
        }
        (Barrier::HalfLineBelow { threshold }, RegionKind::Interior) => {
            (s > 0.0).then(|| threshold - x[0])
        }
        (Barrier::HalfLineBelow { threshold }, RegionKind::Complement) => {
            (s < 0.0).then(|| x[0] - threshold)
        }
        (Barrier::BelowAll { hi }, RegionKind::Interior) => (s > 0.0).then(|| hi[axis] - x[axis]),
        (Barrier::BelowAll { hi }, RegionKind::Complement) => {
            let other_violated = x
                .iter()
                .zip(hi)
                .enumerate()
                .any(|(d, (xi, hid))| d != axis && xi >= hid);
            if other_violated || s > 0.0 {
                None
            } else {
                Some(x[axis] - hi[axis])
            }
        }
        (Barrier::Box { lo, hi }, RegionKind::Interior) => Some(if s > 0.0 {
            hi[axis] - x[axis]
        } else {
            x[axis] - lo[axis]
        }),
        (Barrier::Box { .. }, RegionKind::Complement) => {
            return Err(FriskError::Config(
                "complement-region solves are not supported for box barriers \
                 (rays can re-enter the region); use BelowAll or half-line barriers"
                    .into(),
            ));
        }
    };
    Ok(r.map(|v| v.max(0.0)))
}

/// Builds the sub-Markovian generator over the in-region cells.
pub fn build_generator(
    sys: &SystemSpec,
    grid: &Grid,
    safe: &SafeSet,
    region: RegionKind,
) -> Result<GeneratorMatrix> {
    let dim = sys.dim();
    if grid.dim() != dim || safe.dim() != dim {
        return Err(FriskError::Config(format!(
            "dimension mismatch: system {dim}, grid {}, safe set {}",
            grid.dim(),
            safe.dim()
        )));
    }
    let alpha = sys.stable.alpha();
    let weights = axis_weights(sys)?;
    let ncells = grid.num_cells();

    // Region membership per cell, by the barrier value at the center.
    let mut member = vec![false; ncells];
    let mut index_of = vec![u32::MAX; ncells];
    let mut cells = Vec::new();
    let mut x = vec![0.0; dim];
    for flat in 0..ncells {
        grid.center(flat, &mut x);
        if region.contains(safe.phi(&x)) {
            member[flat] = true;
            index_of[flat] = cells.len() as u32;
            cells.push(flat);
        }
    }
    if cells.is_empty() {
        return Err(FriskError::Domain(
            "region contains no grid cells; enlarge the grid or check the barrier".into(),
        ));
    }

    // Per-axis one-sided stencils, shared by all cells (unit sigma^alpha).
    // Index [axis][side], side 0 = +1, side 1 = -1.
    let mut stencils: Vec<[Option<SideStencil>; 2]> = Vec::with_capacity(dim);
    for axis in 0..dim {
        if alpha == 2.0 {
            stencils.push([None, None]);
            continue;
        }
        let h = grid.dims()[axis].h();
        let jmax = grid.dims()[axis].n - 1;
        let cp = kappa(alpha) * weights[axis][0];
        let cm = kappa(alpha) * weights[axis][1];
        stencils.push([
            Some(build_side(alpha, cp, h, jmax, 1.0)),
            Some(build_side(alpha, cm, h, jmax, -1.0)),
        ]);
    }

    let n = cells.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    let mut absorb_boundary = vec![0.0; n];
    let mut absorb_far = vec![0.0; n];
    let mut diag = vec![0.0; n];

    let mut multi = vec![0usize; dim];
    let mut f = vec![0.0; dim];
    let mut point = vec![0.0; dim];

    for (r, &flat) in cells.iter().enumerate() {
        grid.center(flat, &mut x);
        grid.multi(flat, &mut multi);
        sys.drift.eval(&x, &mut f);
        let sigma = sys.sigma.eval(&x);
        let sigma_a = if alpha == 2.0 {
            sigma * sigma
        } else {
            sigma.powf(alpha)
        };

        let mut row: Vec<(u32, f64)> = Vec::new();
        let mut a_abs = 0.0;
        let mut b_abs = 0.0;

        // Adds `rate` toward the in-grid cell `tflat`, routing to the proper
        // absorption channel when the cell is outside the region.
        let add_cell =
            |row: &mut Vec<(u32, f64)>, a_abs: &mut f64, tflat: usize, rate: f64| {
                if rate == 0.0 {
                    return;
                }
                if member[tflat] {
                    row.push((index_of[tflat], rate));
                } else {
                    *a_abs += rate;
                }
            };

        // Routes a point mass at distance `dist` off the grid along (axis, s).
        let add_offgrid_point = |a_abs: &mut f64,
                                     b_abs: &mut f64,
                                     axis: usize,
                                     s: f64,
                                     dist: f64,
                                     rate: f64|
         -> Result<()> {
            if rate == 0.0 {
                return Ok(());
            }
            let in_region = match region_exit_radius(safe.barrier(), region, &x, axis, s)? {
                None => true,
                Some(rstar) => dist < rstar,
            };
            if in_region {
                *b_abs += rate;
            } else {
                *a_abs += rate;
            }
            Ok(())
        };

        for axis in 0..dim {
            let gd = grid.dims()[axis];
            let h = gd.h();
            let mi = multi[axis];
            let stride = if dim == 2 && axis == 0 {
                grid.dims()[1].n
            } else {
                1
            };

            // Signed drift along this axis, including jump compensators.
            let mut b_drift = f[axis];
            let mut m2_total = 0.0;

            if alpha == 2.0 {
                // Exact central second difference, sigma^2 * (axis weight).
                let w_axis = weights[axis][0] + weights[axis][1];
                let q = sigma_a * w_axis / (h * h);
                for (s, reach, dir) in [(1.0, gd.n - 1 - mi, 1i64), (-1.0, mi, -1i64)] {
                    if q == 0.0 {
                        continue;
                    }
                    if reach >= 1 {
                        let t = (flat as i64 + dir * stride as i64) as usize;
                        add_cell(&mut row, &mut a_abs, t, q);
                    } else {
                        point.copy_from_slice(&x);
                        point[axis] += s * h;
                        add_offgrid_point(&mut a_abs, &mut b_abs, axis, s, h, q)?;
                    }
                }
                // Drift by pure upwinding (no jump rates to balance against).
                for (s, reach, dir) in [(1.0, gd.n - 1 - mi, 1i64), (-1.0, mi, -1i64)] {
                    if b_drift * s <= 0.0 {
                        continue;
                    }
                    let rate = b_drift.abs() / h;
                    if reach >= 1 {
                        let t = (flat as i64 + dir * stride as i64) as usize;
                        add_cell(&mut row, &mut a_abs, t, rate);
                    } else {
                        add_offgrid_point(&mut a_abs, &mut b_abs, axis, s, h, rate)?;
                    }
                }
            } else {
                // Nearest-neighbor jump masses are folded into the +-h rate
                // pair below; a side only contributes when its j = 1 cell is
                // on the grid (otherwise that mass stays in the tail).
                let mut avail = [0.0; 2];
                for (side, s, reach_cells) in [(0, 1.0, gd.n - 1 - mi), (1, -1.0, mi)] {
                    let st = stencils[axis][side].as_ref().unwrap();
                    b_drift += sigma_a * st.delta;
                    m2_total += sigma_a * st.m2_subcell;
                    if st.c == 0.0 {
                        continue;
                    }
                    if reach_cells >= 1 {
                        avail[side] = sigma_a * st.masses[0];
                    }
                    let dir = if s > 0.0 { 1i64 } else { -1i64 };
                    for j in 2..=reach_cells {
                        let t = (flat as i64 + dir * (j * stride) as i64) as usize;
                        add_cell(&mut row, &mut a_abs, t, sigma_a * st.masses[j - 1]);
                    }
                    // Continuous tail beyond the grid edge, split at the exact
                    // region-crossing radius.
                    let r_edge = (reach_cells as f64 + 0.5) * h;
                    let tail_total = sigma_a * st.tail(alpha, r_edge);
                    match region_exit_radius(safe.barrier(), region, &x, axis, s)? {
                        None => b_abs += tail_total,
                        Some(rstar) => {
                            let r_cross = rstar.max(r_edge);
                            let tail_out = sigma_a * st.tail(alpha, r_cross);
                            b_abs += tail_total - tail_out;
                            a_abs += tail_out;
                        }
                    }
                }

                // +-h rate pair: antisymmetric part = drift + j = 1 first
                // moment (exact), symmetric part = j = 1 mass + sub-cell
                // second moment; clamped to upwind when positivity requires.
                let sym = avail[0] + avail[1] + m2_total / (h * h);
                let anti = avail[0] - avail[1] + b_drift / h;
                let (mut r_plus, mut r_minus) =
                    (0.5 * (sym + anti), 0.5 * (sym - anti));
                if r_minus < 0.0 {
                    r_plus = anti;
                    r_minus = 0.0;
                } else if r_plus < 0.0 {
                    r_plus = 0.0;
                    r_minus = -anti;
                }
                for (s, reach, dir, rate) in [
                    (1.0, gd.n - 1 - mi, 1i64, r_plus),
                    (-1.0, mi, -1i64, r_minus),
                ] {
                    if rate == 0.0 {
                        continue;
                    }
                    if reach >= 1 {
                        let t = (flat as i64 + dir * stride as i64) as usize;
                        add_cell(&mut row, &mut a_abs, t, rate);
                    } else {
                        add_offgrid_point(&mut a_abs, &mut b_abs, axis, s, h, rate)?;
                    }
                }
            }
        }

        // Merge duplicate columns (drift and stencil can hit the same cell).
        row.sort_unstable_by_key(|&(c, _)| c);
        row.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        let off_sum: f64 = row.iter().map(|&(_, v)| v).sum();
        diag[r] = -(off_sum + a_abs + b_abs);
        rows[r] = row;
        absorb_boundary[r] = a_abs;
        absorb_far[r] = b_abs;
    }

    let gen = GeneratorMatrix {
        grid: grid.clone(),
        region,
        cells,
        index_of,
        rows,
        diag,
        absorb_boundary,
        absorb_far,
    };
    gen.validate()?;
    Ok(gen)
}

/// Constant-coefficient periodic generator on a 1D grid, used only to certify
/// the discretization against the characteristic exponent in Fourier space.
pub struct PeriodicGenerator1D {
    h: f64,
    /// (offset k != 0, rate).
    entries: Vec<(i64, f64)>,
    /// Diagonal leak standing in for jumps beyond the half period.
    leak: f64,
}

/// Builds the periodic wrap of the same stencil construction: `half_cells`
/// cells of reach on each side, tail mass beyond becoming a diagonal leak
/// (its oscillatory symbol contribution is O(c R^{-1-alpha}/|xi|), negligible
/// at the extents used by the tests).
pub fn build_periodic_1d(
    sys: &SystemSpec,
    h: f64,
    half_cells: usize,
) -> Result<PeriodicGenerator1D> {
    if sys.dim() != 1 {
        return Err(FriskError::Config("periodic symbol check is 1D only".into()));
    }
    if half_cells == 0 || !(h > 0.0) {
        return Err(FriskError::Config("need h > 0 and at least one cell of reach".into()));
    }
    let alpha = sys.stable.alpha();
    let weights = axis_weights(sys)?;
    let mut f = [0.0];
    sys.drift.eval(&[0.0], &mut f);
    let sigma = sys.sigma.eval(&[0.0]);
    let sigma_a = if alpha == 2.0 {
        sigma * sigma
    } else {
        sigma.powf(alpha)
    };

    let mut entries: Vec<(i64, f64)> = Vec::new();
    let mut leak = 0.0;
    let mut b_drift = f[0];
    let mut m2_total = 0.0;

    if alpha == 2.0 {
        let q = sigma_a * (weights[0][0] + weights[0][1]) / (h * h);
        entries.push((1, q));
        entries.push((-1, q));
        if b_drift != 0.0 {
            entries.push((if b_drift > 0.0 { 1 } else { -1 }, b_drift.abs() / h));
        }
        return Ok(PeriodicGenerator1D { h, entries, leak });
    }

    let mut avail = [0.0; 2];
    for (side, s) in [(0, 1.0), (1, -1.0)] {
        let c = kappa(alpha) * weights[0][side];
        let st = build_side(alpha, c, h, half_cells, s);
        b_drift += sigma_a * st.delta;
        m2_total += sigma_a * st.m2_subcell;
        if c == 0.0 {
            continue;
        }
        avail[side] = sigma_a * st.masses[0];
        let dir = if s > 0.0 { 1i64 } else { -1i64 };
        for (k, m) in st.masses.iter().enumerate().skip(1) {
            entries.push((dir * (k as i64 + 1), sigma_a * m));
        }
        leak += sigma_a * st.tail(alpha, (half_cells as f64 + 0.5) * h);
    }
    // Same +-h rate pair as the grid assembly.
    let sym = avail[0] + avail[1] + m2_total / (h * h);
    let anti = avail[0] - avail[1] + b_drift / h;
    let (mut r_plus, mut r_minus) = (0.5 * (sym + anti), 0.5 * (sym - anti));
    if r_minus < 0.0 {
        r_plus = anti;
        r_minus = 0.0;
    } else if r_plus < 0.0 {
        r_plus = 0.0;
        r_minus = -anti;
    }
    if r_plus > 0.0 {
        entries.push((1, r_plus));
    }
    if r_minus > 0.0 {
        entries.push((-1, r_minus));
    }
    Ok(PeriodicGenerator1D { h, entries, leak })
}

/// Discrete symbol of the periodic generator at frequency xi: the Rayleigh
/// quotient of the generator applied to the plane wave exp(i xi x), i.e.
/// sum_k r_k (exp(i xi h k) - 1) - leak. Compare against
/// i xi f - sigma^alpha psi_alpha(xi).
pub fn symbol_check(gen: &PeriodicGenerator1D, xi: f64) -> Complex64 {
    let mut sym = Complex64::new(-gen.leak, 0.0);
    for &(k, rate) in &gen.entries {
        let phase = xi * gen.h * k as f64;
        sym += rate * (Complex64::new(phase.cos() - 1.0, phase.sin()));
    }
    sym
}

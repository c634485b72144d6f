//! Path simulation in operational time.
//!
//! Euler-Maruyama for dY = f(Y) ds + sigma(Y) dL, where L is the stable
//! compound of the spectral atoms, plus a Gillespie simulator that runs the
//! discretized generator as an exact CTMC (the cross-validation path).
//!
//! Increment conventions match the generator and characteristic exponent:
//! the jump part of the dynamics has symbol -sigma^alpha psi_alpha(xi). For
//! alpha != 1 the standard draw scaled by (weight ds)^{1/alpha} (then by
//! sigma) realizes this exactly. At alpha = 1 the S1 law is not
//! scale-equivariant: scaling a standard draw by b shifts the exponent by
//! i (2/pi) skew b xi ln b, so each draw carries the deterministic
//! correction (2/pi) sigma w ds ln(sigma w ds) per signed weight w. Without
//! it the simulated compound would not match sigma psi_1.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{FriskError, Result};
use crate::generator::{axis_weights, GeneratorMatrix};
use crate::stable::StableSampler;
use crate::system::{SafeSet, SystemSpec};

/// Outcome of one simulated path.
///
/// `op_time` is the operational time of the event (exit or recovery) on the
/// step lattice, or infinity if no event occurred before the cap.
/// `non_finite` marks paths whose state overflowed. Every barrier check up to
/// the overflow passed, so the divergence ran along the region's unbounded
/// directions; such paths carry no event (a state that large never returns to
/// an order-one barrier within any horizon).
#[derive(Debug, Clone, Copy)]
pub struct ExitRecord {
    pub exited: bool,
    pub op_time: f64,
    pub non_finite: bool,
}

static NON_FINITE_PATHS: AtomicU64 = AtomicU64::new(0);

/// Process-wide count of simulated paths that went non-finite.
pub fn non_finite_path_count() -> u64 {
    NON_FINITE_PATHS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy)]
pub struct EulerConfig {
    /// Operational-time step.
    pub ds: f64,
    /// Simulation cap in operational time.
    pub s_max: f64,
}

impl EulerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.ds > 0.0) || !self.ds.is_finite() {
            return Err(FriskError::Config(format!(
                "ds must be positive, got {}",
                self.ds
            )));
        }
        if !(self.s_max >= 0.0) || !self.s_max.is_finite() {
            return Err(FriskError::Config(format!(
                "s_max must be nonnegative, got {}",
                self.s_max
            )));
        }
        Ok(())
    }
}

/// Per-signed-axis jump scales for one Euler step.
struct StepDraw {
    /// (axis, signed direction, scale b = sigma-free (w ds)^{1/alpha}).
    terms: Vec<(usize, f64, f64)>,
    sampler: StableSampler,
    alpha: f64,
    skew: f64,
}

impl StepDraw {
    fn new(sys: &SystemSpec, ds: f64) -> Result<Self> {
        let alpha = sys.stable.alpha();
        let dim = sys.dim();
        let mut terms = Vec::new();
        if dim == 1 {
            // One compound draw per step.
            let (total, skew) = sys.stable.compound_1d()?;
            if total > 0.0 {
                let scale = if alpha == 1.0 {
                    total * ds
                } else {
                    (total * ds).powf(1.0 / alpha)
                };
                terms.push((0, 1.0, scale));
            }
            return Ok(StepDraw {
                terms,
                sampler: StableSampler::new(alpha, skew)?,
                alpha,
                skew,
            });
        }
        // 2D: one draw per signed axis with aggregated weight, all totally
        // skewed in the atom direction.
        let w = axis_weights(sys)?;
        for (axis, pair) in w.iter().enumerate() {
            for (side, s) in [(0usize, 1.0), (1usize, -1.0)] {
                let wt = pair[side];
                if wt > 0.0 {
                    let scale = if alpha == 1.0 {
                        wt * ds
                    } else {
                        (wt * ds).powf(1.0 / alpha)
                    };
                    terms.push((axis, s, scale));
                }
            }
        }
        Ok(StepDraw {
            terms,
            sampler: StableSampler::new(alpha, 1.0)?,
            alpha,
            skew: 1.0,
        })
    }

    /// Adds one step's jump increments (scaled by sigma) onto y.
    fn add_jumps<R: Rng + ?Sized>(&self, sigma: f64, y: &mut [f64], rng: &mut R) {
        if sigma == 0.0 {
            return;
        }
        for &(axis, s, scale) in &self.terms {
            let x = self.sampler.sample(rng);
            let mut inc = sigma * scale * x;
            if self.alpha == 1.0 {
                // b = sigma w ds; the signed weight is skew * b for the 1D
                // compound and +b on each one-sided 2D term.
                let b = sigma * scale;
                inc += std::f64::consts::FRAC_2_PI * self.skew * b * b.ln();
            }
            y[axis] += s * inc;
        }
    }
}

fn check_start(sys: &SystemSpec, safe: &SafeSet, x0: &[f64]) -> Result<()> {
    if x0.len() != sys.dim() || safe.dim() != sys.dim() {
        return Err(FriskError::Config(format!(
            "start point dimension {} vs system dimension {}",
            x0.len(),
            sys.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(FriskError::Config("start point must be finite".into()));
    }
    Ok(())
}

/// Simulates until the path leaves the safe set (phi <= 0 at a step point)
/// or the operational-time cap is reached.
pub fn first_exit_time_euler<R: Rng + ?Sized>(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    cfg: &EulerConfig,
    rng: &mut R,
) -> Result<ExitRecord> {
    euler_event(sys, safe, x0, cfg, rng, false)
}

/// Simulates until the path enters the safe set (phi > 0 at a step point)
/// or the operational-time cap is reached. `exited` in the record means
/// "recovered".
pub fn first_recovery_time_euler<R: Rng + ?Sized>(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    cfg: &EulerConfig,
    rng: &mut R,
) -> Result<ExitRecord> {
    euler_event(sys, safe, x0, cfg, rng, true)
}

fn euler_event<R: Rng + ?Sized>(
    sys: &SystemSpec,
    safe: &SafeSet,
    x0: &[f64],
    cfg: &EulerConfig,
    rng: &mut R,
    recovery: bool,
) -> Result<ExitRecord> {
    check_start(sys, safe, x0)?;
    cfg.validate()?;
    let event_at = |phi: f64| {
        if recovery {
            phi > 0.0
        } else {
            phi <= 0.0
        }
    };
    if event_at(safe.phi(x0)) {
        return Ok(ExitRecord {
            exited: true,
            op_time: 0.0,
            non_finite: false,
        });
    }
    let dim = sys.dim();
    let draw = StepDraw::new(sys, cfg.ds)?;
    let n_steps = (cfg.s_max / cfg.ds).ceil() as u64;
    let mut y = x0.to_vec();
    let mut f = vec![0.0; dim];
    for k in 1..=n_steps {
        sys.drift.eval(&y, &mut f);
        let sigma = sys.sigma.eval(&y);
        for d in 0..dim {
            y[d] += f[d] * cfg.ds;
        }
        draw.add_jumps(sigma, &mut y, rng);
        let finite = y.iter().all(|v| v.is_finite());
        // The event check runs first so that an overflow across the barrier
        // (phi = -inf on an exit, +inf on a recovery) still records its event.
        if event_at(safe.phi(&y)) {
            if !finite {
                NON_FINITE_PATHS.fetch_add(1, Ordering::Relaxed);
            }
            return Ok(ExitRecord {
                exited: true,
                op_time: k as f64 * cfg.ds,
                non_finite: !finite,
            });
        }
        if !finite {
            NON_FINITE_PATHS.fetch_add(1, Ordering::Relaxed);
            return Ok(ExitRecord {
                exited: false,
                op_time: f64::INFINITY,
                non_finite: true,
            });
        }
    }
    Ok(ExitRecord {
        exited: false,
        op_time: f64::INFINITY,
        non_finite: false,
    })
}

/// Destination encoding for Gillespie rows: cell row, boundary, or far.
const DEST_BOUNDARY: u32 = u32::MAX;
const DEST_FAR: u32 = u32::MAX - 1;

/// Exact CTMC simulation of a discretized generator.
pub struct GillespieSim {
    /// Per row: total rate and the cumulative (rate, destination) table.
    total_rate: Vec<f64>,
    cum: Vec<Vec<(f64, u32)>>,
}

impl GillespieSim {
    pub fn new(gen: &GeneratorMatrix) -> Self {
        let n = gen.n();
        let mut total_rate = Vec::with_capacity(n);
        let mut cum = Vec::with_capacity(n);
        for r in 0..n {
            let mut acc = 0.0;
            let mut table = Vec::with_capacity(gen.rows()[r].len() + 2);
            for &(c, rate) in &gen.rows()[r] {
                acc += rate;
                table.push((acc, c));
            }
            if gen.absorb_boundary()[r] > 0.0 {
                acc += gen.absorb_boundary()[r];
                table.push((acc, DEST_BOUNDARY));
            }
            if gen.absorb_far()[r] > 0.0 {
                acc += gen.absorb_far()[r];
                table.push((acc, DEST_FAR));
            }
            total_rate.push(acc);
            cum.push(table);
        }
        GillespieSim { total_rate, cum }
    }

    /// Runs the chain from a matrix row until boundary absorption (an exit)
    /// or the operational-time cap. Far absorption and zero-rate states rest
    /// in place forever (no exit).
    pub fn exit_time<R: Rng + ?Sized>(
        &self,
        start_row: usize,
        s_max: f64,
        rng: &mut R,
    ) -> ExitRecord {
        let mut row = start_row;
        let mut t = 0.0;
        loop {
            let lam = self.total_rate[row];
            if lam == 0.0 {
                break;
            }
            let e: f64 = Exp1.sample(rng);
            t += e / lam;
            if t >= s_max {
                break;
            }
            let u: f64 = rng.gen::<f64>() * lam;
            let table = &self.cum[row];
            let k = table.partition_point(|&(c, _)| c <= u);
            let dest = table[k.min(table.len() - 1)].1;
            match dest {
                DEST_BOUNDARY => {
                    return ExitRecord {
                        exited: true,
                        op_time: t,
                        non_finite: false,
                    }
                }
                DEST_FAR => break,
                r => row = r as usize,
            }
        }
        ExitRecord {
            exited: false,
            op_time: f64::INFINITY,
            non_finite: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rng::RngStream;
    use crate::solver::solve_caputo;
    use crate::stable::{StableParams, SubordinatorParams};
    use crate::stats::ks_two_sample;
    use crate::system::{Barrier, DriftSpec, RegionKind, SigmaSpec};
    use approx::assert_relative_eq;

    fn sys_1d(alpha: f64, wp: f64, wm: f64, f: f64, sigma: f64, beta: f64) -> SystemSpec {
        SystemSpec::new(
            DriftSpec::Constant(vec![f]),
            SigmaSpec::Constant(sigma),
            StableParams::new_1d(alpha, wp, wm).unwrap(),
            SubordinatorParams::new(beta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn frozen_dynamics_never_exit() {
        let sys = sys_1d(1.5, 0.5, 0.5, 0.0, 0.0, 1.0);
        let safe = SafeSet::new(Barrier::HalfLineBelow { threshold: 1.0 }).unwrap();
        let mut rng = RngStream::new(7).rng();
        let cfg = EulerConfig { ds: 0.1, s_max: 50.0 };
        let rec = first_exit_time_euler(&sys, &safe, &[0.0], &cfg, &mut rng).unwrap();
        assert!(!rec.exited);
        assert!(rec.op_time.is_infinite());
    }

    #[test]
    fn ballistic_recovery_lands_on_step_lattice() {
        // x0 = 0.2 drifting at +0.8 crosses 1 at s = 1.0; with ds = 0.3 the
        // first step point past the crossing is step 4 (s = 1.2).
        let sys = sys_1d(1.0, 0.5, 0.5, 0.8, 0.0, 1.0);
        let safe = SafeSet::new(Barrier::HalfLineAbove { threshold: 1.0 }).unwrap();
        let mut rng = RngStream::new(7).rng();
        let cfg = EulerConfig { ds: 0.3, s_max: 10.0 };
        let rec = first_recovery_time_euler(&sys, &safe, &[0.2], &cfg, &mut rng).unwrap();
        assert!(rec.exited);
        assert_relative_eq!(rec.op_time, 1.2, epsilon = 1e-12);
    }

    #[test]
    fn start_beyond_event_returns_time_zero() {
        let sys = sys_1d(1.5, 0.5, 0.5, 0.0, 0.2, 1.0);
        let safe = SafeSet::new(Barrier::HalfLineAbove { threshold: 1.0 }).unwrap();
        let mut rng = RngStream::new(7).rng();
        let cfg = EulerConfig { ds: 0.1, s_max: 1.0 };
        // Exit sim started outside the safe set: exited at 0.
        let rec = first_exit_time_euler(&sys, &safe, &[0.5], &cfg, &mut rng).unwrap();
        assert!(rec.exited && rec.op_time == 0.0);
        // Recovery sim started inside: recovered at 0.
        let rec = first_recovery_time_euler(&sys, &safe, &[2.0], &cfg, &mut rng).unwrap();
        assert!(rec.exited && rec.op_time == 0.0);
    }

    #[test]
    fn non_finite_paths_are_flagged_and_counted() {
        let sys = sys_1d(1.5, 0.5, 0.5, f64::MAX, 0.0, 1.0);
        let safe = SafeSet::new(Barrier::HalfLineBelow { threshold: 1e300 }).unwrap();
        let mut rng = RngStream::new(7).rng();
        let cfg = EulerConfig { ds: 4.0, s_max: 20.0 };
        let before = non_finite_path_count();
        let rec = first_exit_time_euler(&sys, &safe, &[0.0], &cfg, &mut rng).unwrap();
        assert!(rec.non_finite && rec.exited);
        let rec = first_recovery_time_euler(&sys, &safe, &[2e300], &cfg, &mut rng).unwrap();
        assert!(rec.non_finite && !rec.exited);
        assert_eq!(non_finite_path_count(), before + 2);
    }

    #[test]
    fn alpha_one_steps_compose_to_single_draw_law() {
        // Sum-stability: 64 Euler steps of total operational time 1 must have
        // the same law as a single compound draw over s = 1. This holds only
        // with the log-drift correction in place.
        let sigma = 0.7;
        let sys = sys_1d(1.0, 0.8, 0.2, 0.0, sigma, 1.0);
        let (total, skew) = (1.0, 0.6);
        let n = 20_000;
        let mut multi = Vec::with_capacity(n);
        let mut single = Vec::with_capacity(n);
        let stream = RngStream::new(41);
        let safe = SafeSet::new(Barrier::HalfLineBelow { threshold: 1e12 }).unwrap();
        let draw = StepDraw::new(&sys, 1.0 / 64.0).unwrap();
        let _ = &safe;
        for i in 0..n {
            let mut rng = stream.child(i as u64).rng();
            let mut y = [0.0];
            for _ in 0..64 {
                draw.add_jumps(sigma, &mut y, &mut rng);
            }
            multi.push(y[0]);
            let mut rng2 = stream.child((n + i) as u64).rng();
            let sampler = StableSampler::new(1.0, skew).unwrap();
            let b = sigma * total * 1.0;
            let x = b * sampler.sample(&mut rng2)
                + std::f64::consts::FRAC_2_PI * skew * b * b.ln();
            single.push(x);
        }
        let (_, p) = ks_two_sample(&multi, &single);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn alpha_three_halves_steps_compose_to_single_draw_law() {
        let sigma = 0.5;
        let sys = sys_1d(1.5, 0.3, 0.7, 0.0, sigma, 1.0);
        let n = 20_000;
        let mut multi = Vec::with_capacity(n);
        let mut single = Vec::with_capacity(n);
        let stream = RngStream::new(43);
        let draw = StepDraw::new(&sys, 1.0 / 32.0).unwrap();
        let (total, skew) = sys.stable.compound_1d().unwrap();
        for i in 0..n {
            let mut rng = stream.child(i as u64).rng();
            let mut y = [0.0];
            for _ in 0..32 {
                draw.add_jumps(sigma, &mut y, &mut rng);
            }
            multi.push(y[0]);
            let mut rng2 = stream.child((n + i) as u64).rng();
            let sampler = StableSampler::new(1.5, skew).unwrap();
            single.push(sigma * total.powf(1.0 / 1.5) * sampler.sample(&mut rng2));
        }
        let (_, p) = ks_two_sample(&multi, &single);
        assert!(p > 0.01, "KS p-value {p}");
    }

    #[test]
    fn gillespie_single_cell_is_exponential() {
        let gen = GeneratorMatrix::from_parts(
            Grid::new_1d(0.0, 1.0, 1).unwrap(),
            RegionKind::Interior,
            vec![vec![]],
            vec![2.0],
            vec![0.0],
        )
        .unwrap();
        let sim = GillespieSim::new(&gen);
        let stream = RngStream::new(11);
        let n = 40_000;
        let mut sum = 0.0;
        let mut exits = 0u64;
        for i in 0..n {
            let mut rng = stream.child(i).rng();
            let rec = sim.exit_time(0, 50.0, &mut rng);
            if rec.exited {
                exits += 1;
                sum += rec.op_time;
            }
        }
        // P(T > 50) = e^{-100}: effectively all exit; mean 1/2.
        assert_eq!(exits, n);
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn gillespie_far_and_zero_rate_states_rest() {
        let gen = GeneratorMatrix::from_parts(
            Grid::new_1d(0.0, 2.0, 2).unwrap(),
            RegionKind::Interior,
            vec![vec![], vec![]],
            vec![0.0, 0.0],
            vec![3.0, 0.0],
        )
        .unwrap();
        let sim = GillespieSim::new(&gen);
        let mut rng = RngStream::new(13).rng();
        for row in 0..2 {
            let rec = sim.exit_time(row, 100.0, &mut rng);
            assert!(!rec.exited);
            assert!(rec.op_time.is_infinite());
        }
    }

    #[test]
    fn gillespie_two_cell_chain_matches_backward_euler() {
        // Survival probabilities from each cell against the beta = 1 field
        // (far absorption counts as surviving in both).
        let gen = GeneratorMatrix::from_parts(
            Grid::new_1d(0.0, 2.0, 2).unwrap(),
            RegionKind::Interior,
            vec![vec![(1, 1.0)], vec![(0, 0.3)]],
            vec![0.5, 0.0],
            vec![0.0, 0.2],
        )
        .unwrap();
        let t_end = 1.0;
        let sol = solve_caputo(&gen, 1.0, gen.absorb_far(), &[t_end], 1e-4, 1.0).unwrap();
        let sim = GillespieSim::new(&gen);
        let stream = RngStream::new(17);
        let n = 200_000u64;
        for row in 0..2 {
            let mut survive = 0u64;
            for i in 0..n {
                let mut rng = stream.child(row as u64 * n + i).rng();
                let rec = sim.exit_time(row, t_end, &mut rng);
                // Survived the horizon if no exit before t_end.
                if !rec.exited || rec.op_time >= t_end {
                    survive += 1;
                }
            }
            let p_hat = survive as f64 / n as f64;
            let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
            assert!(
                (p_hat - sol[0][row]).abs() < 3.0 * se + 2e-4,
                "row {row}: mc {p_hat} vs pde {}",
                sol[0][row]
            );
        }
    }

    #[test]
    fn symmetric_2d_increments_have_symmetric_means() {
        let stable = StableParams::new(
            1.0,
            vec![
                crate::stable::SpectralAtom::new(vec![1.0, 0.0], 0.3),
                crate::stable::SpectralAtom::new(vec![-1.0, 0.0], 0.3),
                crate::stable::SpectralAtom::new(vec![0.0, 1.0], 0.2),
                crate::stable::SpectralAtom::new(vec![0.0, -1.0], 0.2),
            ],
        )
        .unwrap();
        let sys = SystemSpec::new(
            DriftSpec::Constant(vec![0.0, 0.0]),
            SigmaSpec::Constant(0.5),
            stable,
            SubordinatorParams::new(1.0).unwrap(),
        )
        .unwrap();
        let draw = StepDraw::new(&sys, 0.01).unwrap();
        let stream = RngStream::new(19);
        let n = 50_000;
        // Symmetric alpha = 1 atoms: the log corrections cancel pairwise, so
        // increment medians stay at zero. Collect per-coordinate medians.
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = stream.child(i as u64).rng();
            let mut y = [0.0, 0.0];
            draw.add_jumps(0.5, &mut y, &mut rng);
            xs.push(y[0]);
            ys.push(y[1]);
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        // Median of a symmetric law is 0; Cauchy-like tails rule out means.
        assert!(xs[n / 2].abs() < 5e-4, "x median {}", xs[n / 2]);
        assert!(ys[n / 2].abs() < 5e-4, "y median {}", ys[n / 2]);
    }
}
